// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "thunderlens/advanced.hpp"
#include "thunderlens/identifier.hpp"
#include "thunderlens/ingestion.hpp"
#include "thunderlens/primitives.hpp"
#include "thunderlens/records.hpp"
#include "thunderlens/registry.hpp"

namespace thunderlens {

struct PipelineOptions {
    IdentifyOptions identify;
    ClassifyOptions classify;
    AdvancedOptions advanced;
};

struct Results {
    std::vector<FlashLoanRecord> loans;
    std::vector<PrimitiveBehavior> primitives;
    std::vector<AdvancedBehavior> advanced;
    Diagnostics diags;
};

//! Phases 2 and 3 over a corpus, given phase-1 output. Output streams are sorted.
Results classify_corpus(const Corpus& corpus, std::vector<FlashLoanRecord> loans, const PatternRegistry& registry,
                        const PipelineOptions& options = {}, unsigned workers = 1);

//! All three phases. Pair discovery runs first, so `registry` gains the corpus's PairCreated pairs.
Results run_pipeline(const Corpus& corpus, PatternRegistry& registry, const PipelineOptions& options = {},
                     unsigned workers = 1);

}  // namespace thunderlens
