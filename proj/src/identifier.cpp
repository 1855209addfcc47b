// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#include "thunderlens/identifier.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "thunderlens/abi.hpp"
#include "thunderlens/parallel.hpp"
#include "thunderlens/signatures.hpp"

namespace thunderlens {

namespace {

const Selector kUniswapV2Call = parse_selector(sig::kUniswapV2CallFn);

class SpanError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

std::string detector_name(const Pattern& p) { return p.platform.name() + "." + to_string(p.kind); }

bool first_topic_is(const EventLog& log, const TopicHash& hash) { return !log.topics.empty() && log.topics[0] == hash; }

// Disbursement: first movement of the loaned asset and amount to the borrower inside the frame.
// Repayment: next movement of the same asset back to whoever disbursed it.
Span span_by_movement(const TransactionBundle& bundle, const CallTree& tree, std::uint32_t frame,
                      const AssetId& asset, const U256& amount, const Address& borrower) {
    const auto end = tree.subtree_end(frame);
    std::optional<std::uint32_t> start;
    Address disburser;
    for (auto i = frame; i <= end && !start; ++i) {
        for (const auto& m : asset_movements(bundle.calls[i])) {
            if (m.to == borrower && m.amount == amount && AssetId::from_address(m.token) == asset) {
                start = i;
                disburser = m.from;
                break;
            }
        }
    }
    if (!start) throw SpanError("no disbursement of the loaned asset to the borrower");
    for (auto i = *start + 1; i <= end; ++i) {
        for (const auto& m : asset_movements(bundle.calls[i])) {
            if (m.to == disburser && AssetId::from_address(m.token) == asset) return Span{*start, i};
        }
    }
    throw SpanError("no repayment to " + disburser.hex());
}

template <class F>
void keep(std::vector<FlashLoanRecord>& out, Diagnostics& diags, const TransactionBundle& bundle, const Pattern& p,
          F&& make) {
    try {
        out.push_back(make());
    } catch (const std::exception& e) {
        diags.push_back({"extraction_failed", detector_name(p), bundle.tx_hash.hex(), e.what()});
    }
}

std::size_t step_with_role(const Pattern& p, StepRole role, std::size_t fallback) {
    for (std::size_t i = 0; i < p.chain.size(); ++i)
        if (p.chain[i].role == role) return i;
    return fallback;
}

std::vector<FlashLoanRecord> event_loans(const TransactionBundle& bundle, const CallTree& tree, const Pattern& p, Diagnostics& diags,
                                         const PatternRegistry& registry) {
    std::vector<FlashLoanRecord> out;
    for (const auto& log : bundle.logs) {
        if (!first_topic_is(log, *p.event_hash) || !registry.satisfies(p.emitter, log.emitter)) continue;
        MatchSite site;
        site.log = log.log_index;
        site.frame = tree.emitting_frame(log).value_or(log.after_call_index);
        site.provider = log.emitter;
        keep(out, diags, bundle, p, [&] { return extract_info(bundle, tree, p, site); });
    }
    return out;
}

std::vector<FlashLoanRecord> call_loans(const TransactionBundle& bundle, const CallTree& tree, const Pattern& p, Diagnostics& diags,
                                        const PatternRegistry& registry) {
    std::vector<FlashLoanRecord> out;
    for (const auto& call : bundle.calls) {
        if (call.selector != p.selector || !registry.satisfies(p.callee, call.callee)) continue;
        if (p.event_hash) {
            const auto end = tree.subtree_end(call.index);
            const bool emitted = std::any_of(bundle.logs.begin(), bundle.logs.end(), [&](const EventLog& l) {
                return l.after_call_index >= call.index && l.after_call_index <= end && first_topic_is(l, *p.event_hash);
            });
            if (!emitted) continue;
        }
        MatchSite site;
        site.call = call.index;
        site.frame = call.index;
        site.provider = call.callee;
        keep(out, diags, bundle, p, [&] { return extract_info(bundle, tree, p, site); });
    }
    return out;
}

std::vector<FlashLoanRecord> chain_loans(const TransactionBundle& bundle, const CallTree& tree, const Pattern& p, Diagnostics& diags,
                                         const PatternRegistry& registry, const IdentifyOptions& options) {
    std::vector<FlashLoanRecord> out;
    const auto& chain = p.chain;
    std::vector<std::optional<std::uint32_t>> steps(chain.size());
    std::size_t pos = 0;
    Address emitter;
    for (const auto& log : bundle.logs) {
        if (log.topics.empty()) continue;
        if (!options.paper_faithful) {
            if (!registry.satisfies(p.emitter, log.emitter)) continue;
            if (pos > 0 && log.emitter != emitter) continue;
        }
        const auto& h = log.topics[0];
        std::optional<std::size_t> taken;
        if (h == chain[pos].hash)
            taken = pos;
        else if (chain[pos].optional && pos + 1 < chain.size() && h == chain[pos + 1].hash)
            taken = pos + 1;
        if (!taken) continue;
        if (*taken == 0) emitter = log.emitter;
        steps[*taken] = log.log_index;
        pos = *taken + 1;
        if (pos < chain.size()) continue;

        MatchSite site;
        site.steps = steps;
        const auto& first = bundle.logs[*steps[0]];
        site.frame = tree.emitting_frame(first).value_or(first.after_call_index);
        site.provider = first.emitter;
        site.log = steps[step_with_role(p, StepRole::kBorrow, 1)];
        keep(out, diags, bundle, p, [&] { return extract_info(bundle, tree, p, site); });
        std::fill(steps.begin(), steps.end(), std::nullopt);
        pos = 0;
    }
    return out;
}

std::vector<FlashLoanRecord> uniswap_flash_swaps(const TransactionBundle& bundle, const CallTree& tree,
                                                 const Pattern& p, Diagnostics& diags, const PatternRegistry& registry) {
    std::vector<FlashLoanRecord> out;
    for (const auto& call : bundle.calls) {
        if (!p.selector || call.selector != p.selector || !registry.satisfies(p.callee, call.callee)) continue;
        // condition 1: non-empty callback data
        auto data = abi::dynamic_bytes_at(call.calldata, 3);
        auto to = abi::address_at(call.calldata, 2);
        if (!data || data->empty() || !to) continue;
        const Address pair = call.callee;
        const auto end = tree.subtree_end(call.index);
        std::optional<std::uint32_t> callback;
        for (auto i = call.index + 1; i <= end; ++i) {
            const auto& c = bundle.calls[i];
            if (c.selector == kUniswapV2Call && c.caller == pair && c.callee == *to) {
                callback = i;
                break;
            }
        }
        if (!callback) continue;
        // conditions 2 and 3: a transfer inside the callback whose receiver is this pair
        std::optional<std::uint32_t> payback;
        for (auto i = *callback; i <= tree.subtree_end(*callback) && !payback; ++i) {
            auto t = token_transfer_view(bundle.calls[i]);
            if (t && t->to == pair) payback = i;
        }
        if (!payback) continue;
        MatchSite site;
        site.call = call.index;
        site.frame = call.index;
        site.provider = pair;
        keep(out, diags, bundle, p, [&] {
            auto record = extract_info(bundle, tree, p, site);
            record.span = Span{call.index, *payback};
            return record;
        });
    }
    return out;
}

std::vector<FlashLoanRecord> run_pattern(const TransactionBundle& bundle, const CallTree& tree, const Pattern& p,
                                         const PatternRegistry& registry, Diagnostics& diags,
                                         const IdentifyOptions& options) {
    if (p.discovery || !p.active()) return {};
    if (registry.constraint_is_empty(p.callee) || registry.constraint_is_empty(p.emitter)) {
        diags.push_back({"detector_disabled", detector_name(p), "",
                         "address book has no contracts for this detector; configure them to enable it"});
        return {};
    }
    switch (p.kind) {
        case MatcherKind::kEventTopic:
            return event_loans(bundle, tree, p, diags, registry);
        case MatcherKind::kFunctionSelector:
            return call_loans(bundle, tree, p, diags, registry);
        case MatcherKind::kOrderedEventChain:
            return chain_loans(bundle, tree, p, diags, registry, options);
        case MatcherKind::kComposite:
            return uniswap_flash_swaps(bundle, tree, p, diags, registry);
    }
    return {};
}

std::vector<FlashLoanRecord> detect_platform(const TransactionBundle& bundle, const PatternRegistry& registry,
                                             const Platform& platform, Diagnostics& diags,
                                             const IdentifyOptions& options) {
    if (bundle.reverted) return {};
    const CallTree tree{bundle};
    std::vector<FlashLoanRecord> out;
    for (const auto* p : registry.find(platform, Category::kFlashLoan)) {
        auto found = run_pattern(bundle, tree, *p, registry, diags, options);
        out.insert(out.end(), found.begin(), found.end());
    }
    std::sort(out.begin(), out.end(), loan_order);
    return out;
}

}  // namespace

FlashLoanRecord extract_info(const TransactionBundle& bundle, const CallTree& tree, const Pattern& pattern,
                             const MatchSite& site) {
    const Extractor x{bundle, tree};
    const auto& map = pattern.params;
    const auto need = [](auto value, Param p) {
        if (!value) throw ExtractionError(p, "required parameter could not be read");
        return *value;
    };
    FlashLoanRecord r;
    r.provider = pattern.platform;
    r.service_provider = need(x.address(map, Param::kServiceProvider, site), Param::kServiceProvider);
    r.runner = need(x.address(map, Param::kRunner, site), Param::kRunner);
    r.asset_out = need(x.asset(map, Param::kAssetOut, site), Param::kAssetOut);
    r.asset_in = need(x.asset(map, Param::kAssetIn, site), Param::kAssetIn);
    r.amount_in = need(x.amount(map, Param::kAmountIn, site), Param::kAmountIn);
    r.block_number = bundle.block_number;
    r.tx_index = bundle.tx_index;
    r.tx_hash = bundle.tx_hash;

    if (pattern.kind == MatcherKind::kOrderedEventChain) {
        const auto borrow = step_with_role(pattern, StepRole::kBorrow, 1);
        const auto repay = step_with_role(pattern, StepRole::kRepay, pattern.chain.size() - 1);
        if (!site.steps.at(borrow) || !site.steps.at(repay)) throw SpanError("borrow/repay steps not matched");
        r.span = Span{bundle.logs[*site.steps[borrow]].after_call_index, bundle.logs[*site.steps[repay]].after_call_index};
    } else if (pattern.kind != MatcherKind::kComposite) {
        r.span = span_by_movement(bundle, tree, site.frame, r.asset_out, r.amount_in, r.runner);
    } else {
        r.span = Span{site.frame, site.frame};
    }
    return r;
}

std::vector<FlashLoanRecord> detect_aave(const TransactionBundle& bundle, const PatternRegistry& registry,
                                         Diagnostics& diags) {
    return detect_platform(bundle, registry, PlatformId::kAave, diags, {});
}

std::vector<FlashLoanRecord> detect_bzx(const TransactionBundle& bundle, const PatternRegistry& registry,
                                        Diagnostics& diags) {
    return detect_platform(bundle, registry, PlatformId::kBzx, diags, {});
}

std::vector<FlashLoanRecord> detect_uniswapv2(const TransactionBundle& bundle, const PatternRegistry& registry,
                                              Diagnostics& diags) {
    return detect_platform(bundle, registry, PlatformId::kUniswapV2, diags, {});
}

std::vector<FlashLoanRecord> detect_dydx(const TransactionBundle& bundle, const PatternRegistry& registry,
                                         Diagnostics& diags, const IdentifyOptions& options) {
    return detect_platform(bundle, registry, PlatformId::kDydx, diags, options);
}

std::vector<FlashLoanRecord> identify_bundle(const TransactionBundle& bundle, const PatternRegistry& registry,
                                             Diagnostics& diags, const IdentifyOptions& options) {
    if (bundle.reverted) return {};
    const CallTree tree{bundle};
    std::vector<FlashLoanRecord> out;
    for (const auto* p : registry.by_category(Category::kFlashLoan)) {
        auto found = run_pattern(bundle, tree, *p, registry, diags, options);
        out.insert(out.end(), found.begin(), found.end());
    }
    std::sort(out.begin(), out.end(), loan_order);
    return out;
}

std::vector<FlashLoanRecord> identify(const Corpus& corpus, const PatternRegistry& registry, Diagnostics& diags,
                                      const IdentifyOptions& options, unsigned workers) {
    struct Result {
        std::vector<FlashLoanRecord> loans;
        Diagnostics diags;
    };
    auto results = parallel_map(corpus.bundles.size(), workers, [&](std::size_t i) {
        Result r;
        r.loans = identify_bundle(corpus.bundles[i], registry, r.diags, options);
        return r;
    });
    std::vector<FlashLoanRecord> out;
    std::set<std::string> disabled;
    for (auto& r : results) {
        out.insert(out.end(), r.loans.begin(), r.loans.end());
        for (auto& d : r.diags) {
            if (d.code == "detector_disabled" && !disabled.insert(d.detector).second) continue;
            diags.push_back(std::move(d));
        }
    }
    std::sort(out.begin(), out.end(), loan_order);
    return out;
}

}  // namespace thunderlens
