// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "thunderlens/core.hpp"
#include "thunderlens/records.hpp"
#include "thunderlens/registry.hpp"

namespace thunderlens {

//! Which asset a loan swap's repaid debt must match.
//! kFlashLoan: the repaid debt asset is the flash-borrowed asset.
//! kNewLoan: the newly borrowed asset is the flash-borrowed asset (the new loan pays the flash loan back).
enum class LoanSwapIdentity { kFlashLoan, kNewLoan };

std::optional<LoanSwapIdentity> parse_loan_swap_identity(std::string_view text);
std::string to_string(LoanSwapIdentity identity);

struct AdvancedOptions {
    LoanSwapIdentity loan_swap_identity{LoanSwapIdentity::kFlashLoan};
};

//! Exchanges grouped by runner; each group of two or more is one arbitrage.
std::vector<AdvancedBehavior> detect_arbitrage(const std::vector<PrimitiveBehavior>& primitives);

//! One behavior per configured anti-liquidation event whose emitter is a known DeFi Saver contract.
//! Without an activated pattern the detector is inert and says so in `diags`.
std::vector<AdvancedBehavior> detect_anti_liquidation(const TransactionBundle& bundle, const PatternRegistry& registry,
                                                      Diagnostics& diags);

std::vector<AdvancedBehavior> detect_collateral_swap(const TransactionBundle& bundle,
                                                     const std::vector<PrimitiveBehavior>& primitives);

std::vector<AdvancedBehavior> detect_loan_swap(const TransactionBundle& bundle,
                                               const std::vector<PrimitiveBehavior>& primitives,
                                               const std::vector<FlashLoanRecord>& loans,
                                               const AdvancedOptions& options = {});

std::vector<AdvancedBehavior> detect_platform_swap(const TransactionBundle& bundle,
                                                   const std::vector<PrimitiveBehavior>& primitives);

//! All advanced detectors for one bundle, sorted.
std::vector<AdvancedBehavior> classify_advanced(const TransactionBundle& bundle,
                                                const std::vector<PrimitiveBehavior>& primitives,
                                                const std::vector<FlashLoanRecord>& loans,
                                                const PatternRegistry& registry, Diagnostics& diags,
                                                const AdvancedOptions& options = {});

}  // namespace thunderlens
