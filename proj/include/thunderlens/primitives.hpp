// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "thunderlens/core.hpp"
#include "thunderlens/records.hpp"
#include "thunderlens/registry.hpp"

namespace thunderlens {

struct ClassifyOptions {
    //! Classify bundles that carry no flash loan as well.
    bool include_all{false};
};

//! Phase 2 for one bundle. Without a flash loan (and without include_all) the result is empty.
//! Output is ordered by span start; behaviors inside a loan span carry `insideLoan` and `loanRef`.
std::vector<PrimitiveBehavior> classify(const TransactionBundle& bundle, const std::vector<FlashLoanRecord>& loans,
                                        const PatternRegistry& registry, Diagnostics& diags,
                                        const ClassifyOptions& options = {});

//! Margin trades only: a mint selector call whose subtree also emits the margin Mint event.
std::vector<PrimitiveBehavior> match_margin_trade(const TransactionBundle& bundle, const PatternRegistry& registry,
                                                  Diagnostics& diags);

//! Field presence rules per kind: which parameters must be present and which must be absent.
bool satisfies_presence_rules(const PrimitiveBehavior& p);

}  // namespace thunderlens
