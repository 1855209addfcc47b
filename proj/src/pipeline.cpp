// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#include "thunderlens/pipeline.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "thunderlens/parallel.hpp"

namespace thunderlens {

Results classify_corpus(const Corpus& corpus, std::vector<FlashLoanRecord> loans, const PatternRegistry& registry,
                        const PipelineOptions& options, unsigned workers) {
    std::map<TxHash, std::vector<FlashLoanRecord>> by_tx;
    for (const auto& l : loans) by_tx[l.tx_hash].push_back(l);

    struct Partial {
        std::vector<PrimitiveBehavior> primitives;
        std::vector<AdvancedBehavior> advanced;
        Diagnostics diags;
    };
    static const std::vector<FlashLoanRecord> kNone;
    auto partials = parallel_map(corpus.bundles.size(), workers, [&](std::size_t i) {
        const auto& bundle = corpus.bundles[i];
        const auto it = by_tx.find(bundle.tx_hash);
        const auto& tx_loans = it == by_tx.end() ? kNone : it->second;
        Partial p;
        p.primitives = classify(bundle, tx_loans, registry, p.diags, options.classify);
        if (!tx_loans.empty() || options.classify.include_all)
            p.advanced = classify_advanced(bundle, p.primitives, tx_loans, registry, p.diags, options.advanced);
        return p;
    });

    Results out;
    out.loans = std::move(loans);
    std::sort(out.loans.begin(), out.loans.end(), loan_order);
    std::set<std::string> disabled;
    for (auto& p : partials) {
        std::move(p.primitives.begin(), p.primitives.end(), std::back_inserter(out.primitives));
        std::move(p.advanced.begin(), p.advanced.end(), std::back_inserter(out.advanced));
        for (auto& d : p.diags) {
            if (d.code == "detector_disabled") {
                if (!disabled.insert(d.detector).second) continue;
                d.tx.clear();
            }
            out.diags.push_back(std::move(d));
        }
    }
    std::sort(out.primitives.begin(), out.primitives.end(), primitive_order);
    std::sort(out.advanced.begin(), out.advanced.end(), advanced_order);
    return out;
}

Results run_pipeline(const Corpus& corpus, PatternRegistry& registry, const PipelineOptions& options,
                     unsigned workers) {
    discover_pairs(corpus, registry);
    Diagnostics diags;
    auto loans = identify(corpus, registry, diags, options.identify, workers);
    auto out = classify_corpus(corpus, std::move(loans), registry, options, workers);
    diags.insert(diags.end(), out.diags.begin(), out.diags.end());
    out.diags = std::move(diags);
    return out;
}

}  // namespace thunderlens
