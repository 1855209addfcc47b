// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <vector>

#include "thunderlens/core.hpp"
#include "thunderlens/extract.hpp"
#include "thunderlens/ingestion.hpp"
#include "thunderlens/records.hpp"
#include "thunderlens/registry.hpp"

namespace thunderlens {

struct IdentifyOptions {
    //! Match dYdX events on hashes alone, without the SoloMargin emitter check.
    bool paper_faithful{false};
};

//! A Table-5 parameter required for the behavior could not be read.
class ExtractionError : public std::runtime_error {
  public:
    ExtractionError(Param param, const std::string& message)
        : std::runtime_error(to_string(param) + ": " + message), param_{param} {}
    [[nodiscard]] Param param() const { return param_; }

  private:
    Param param_;
};

std::vector<FlashLoanRecord> detect_aave(const TransactionBundle& bundle, const PatternRegistry& registry,
                                         Diagnostics& diags);
std::vector<FlashLoanRecord> detect_bzx(const TransactionBundle& bundle, const PatternRegistry& registry,
                                        Diagnostics& diags);
std::vector<FlashLoanRecord> detect_uniswapv2(const TransactionBundle& bundle, const PatternRegistry& registry,
                                              Diagnostics& diags);
std::vector<FlashLoanRecord> detect_dydx(const TransactionBundle& bundle, const PatternRegistry& registry,
                                         Diagnostics& diags, const IdentifyOptions& options = {});

//! Reads the pattern's parameters at the match site and resolves the loan span by walking the
//! disbursement and repayment movements (or, for event chains, the borrow/repay step positions).
//! Throws ExtractionError naming the first missing parameter.
FlashLoanRecord extract_info(const TransactionBundle& bundle, const CallTree& tree, const Pattern& pattern,
                             const MatchSite& site);

//! Every flash-loan pattern in the registry against one bundle, sorted by span start.
std::vector<FlashLoanRecord> identify_bundle(const TransactionBundle& bundle, const PatternRegistry& registry,
                                             Diagnostics& diags, const IdentifyOptions& options = {});

std::vector<FlashLoanRecord> identify(const Corpus& corpus, const PatternRegistry& registry, Diagnostics& diags,
                                      const IdentifyOptions& options = {}, unsigned workers = 1);

}  // namespace thunderlens
