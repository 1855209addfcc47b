// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#include "thunderlens/primitives.hpp"

#include <algorithm>

#include "thunderlens/abi.hpp"
#include "thunderlens/extract.hpp"
#include "thunderlens/signatures.hpp"

namespace thunderlens {

namespace {

struct Presence {
    bool receiver;
    bool asset_in;
};

Presence presence(PrimitiveKind k) {
    switch (k) {
        case PrimitiveKind::kMarginTrade:
            return {false, true};
        case PrimitiveKind::kLiquidation:
            return {true, false};
        default:
            return {true, true};
    }
}

bool first_topic_is(const EventLog& log, const TopicHash& hash) { return !log.topics.empty() && log.topics[0] == hash; }

std::optional<LegAction> leg_action_of(std::string_view sub_action) {
    if (sub_action == "Deposit") return LegAction::kDeposit;
    if (sub_action == "Redeem") return LegAction::kRedeem;
    if (sub_action == "Borrow") return LegAction::kBorrow;
    if (sub_action == "Repay") return LegAction::kRepay;
    return std::nullopt;
}

// Vat.frob: dink moves collateral (ilk), dart moves DAI debt. Both are int256 inside the LogNote data.
void frob_legs(const EventLog& log, PrimitiveBehavior& b) {
    static const AssetId kDai = AssetId::from_address(parse_address(sig::kMakerDai));
    const auto dink = abi::word_at_offset(log.data, 196);
    const auto dart = abi::word_at_offset(log.data, 228);
    if (dink) {
        auto [negative, magnitude] = abi::as_int256(u256_from_word(*dink));
        if (magnitude != 0 && b.asset_in)
            b.legs.push_back({negative ? LegAction::kRedeem : LegAction::kDeposit, *b.asset_in, magnitude, b.span});
    }
    if (dart) {
        auto [negative, magnitude] = abi::as_int256(u256_from_word(*dart));
        if (magnitude != 0) b.legs.push_back({negative ? LegAction::kRepay : LegAction::kBorrow, kDai, magnitude, b.span});
    }
    if (!b.legs.empty()) b.amount_in = b.legs.front().amount;
}

std::optional<PrimitiveBehavior> build(const TransactionBundle& bundle, const CallTree& tree, const Pattern& p,
                                       const MatchSite& site, Span span, Diagnostics& diags) {
    const auto kind = *primitive_kind_of(p.category);
    const Extractor x{bundle, tree};
    const auto& map = p.params;
    PrimitiveBehavior b;
    b.kind = kind;
    b.sub_action = p.sub_action;
    b.platform = p.platform;
    b.block_number = bundle.block_number;
    b.tx_index = bundle.tx_index;
    b.tx_hash = bundle.tx_hash;
    b.span = span;
    b.service_provider = x.address(map, Param::kServiceProvider, site).value_or(site.provider);
    b.runner = x.address(map, Param::kRunner, site).value_or(bundle.calls[site.frame].caller);
    const auto rule = presence(kind);
    if (rule.receiver) b.receiver = x.address(map, Param::kReceiver, site);
    if (rule.asset_in) b.asset_in = x.asset(map, Param::kAssetIn, site);
    b.asset_out = x.asset(map, Param::kAssetOut, site);
    b.amount_in = x.amount(map, Param::kAmountIn, site);

    if (kind == PrimitiveKind::kLendingBorrowing) {
        if (p.platform.id == PlatformId::kMakerDao && site.log) {
            frob_legs(bundle.logs[*site.log], b);
        } else if (auto action = leg_action_of(p.sub_action); action && b.asset_in && b.amount_in) {
            b.legs.push_back({*action, *b.asset_in, *b.amount_in, span});
        }
    }

    if (!satisfies_presence_rules(b)) {
        diags.push_back({"missing_parameter", p.platform.name() + "." + p.sub_action, bundle.tx_hash.hex(),
                         "required parameter unresolved at call " + std::to_string(span.start)});
        return std::nullopt;
    }
    return b;
}

void match_event_pattern(const TransactionBundle& bundle, const CallTree& tree, const Pattern& p,
                         const PatternRegistry& registry, Diagnostics& diags, std::vector<PrimitiveBehavior>& out) {
    for (const auto& log : bundle.logs) {
        if (!first_topic_is(log, *p.event_hash) || !registry.satisfies(p.emitter, log.emitter)) continue;
        MatchSite site;
        site.log = log.log_index;
        site.provider = log.emitter;
        Span span;
        if (auto frame = tree.emitting_frame(log)) {
            site.frame = *frame;
            span = Span{*frame, tree.subtree_end(*frame)};
        } else {
            site.frame = log.after_call_index;
            span = Span{log.after_call_index, log.after_call_index};
        }
        if (auto b = build(bundle, tree, p, site, span, diags)) out.push_back(std::move(*b));
    }
}

void match_call_pattern(const TransactionBundle& bundle, const CallTree& tree, const Pattern& p,
                        const PatternRegistry& registry, Diagnostics& diags, std::vector<PrimitiveBehavior>& out) {
    for (const auto& call : bundle.calls) {
        if (call.selector != p.selector || !registry.satisfies(p.callee, call.callee)) continue;
        const auto end = tree.subtree_end(call.index);
        MatchSite site;
        site.call = call.index;
        site.frame = call.index;
        site.provider = call.callee;
        if (p.event_hash) {
            auto it = std::find_if(bundle.logs.begin(), bundle.logs.end(), [&](const EventLog& l) {
                return l.after_call_index >= call.index && l.after_call_index <= end && first_topic_is(l, *p.event_hash);
            });
            if (it == bundle.logs.end()) continue;
            site.log = it->log_index;
        }
        if (auto b = build(bundle, tree, p, site, Span{call.index, end}, diags)) out.push_back(std::move(*b));
    }
}

std::vector<PrimitiveBehavior> match_all(const TransactionBundle& bundle, const PatternRegistry& registry,
                                         Diagnostics& diags, bool margin_only) {
    std::vector<PrimitiveBehavior> out;
    if (bundle.reverted) return out;
    const CallTree tree{bundle};
    for (const auto& p : registry.patterns()) {
        if (p.discovery || !p.active() || !primitive_kind_of(p.category)) continue;
        if (margin_only && p.category != Category::kMarginTrade) continue;
        if (p.kind == MatcherKind::kEventTopic)
            match_event_pattern(bundle, tree, p, registry, diags, out);
        else if (p.kind == MatcherKind::kFunctionSelector)
            match_call_pattern(bundle, tree, p, registry, diags, out);
    }
    std::sort(out.begin(), out.end(), primitive_order);
    return out;
}

// A router event wrapping the venue's own event on the same platform describes one trade.
void drop_nested_exchanges(std::vector<PrimitiveBehavior>& v) {
    std::vector<bool> drop(v.size(), false);
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i].kind != PrimitiveKind::kExchange) continue;
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (i == j || drop[j] || v[j].kind != PrimitiveKind::kExchange || v[j].platform != v[i].platform) continue;
            if (v[j].span.contains(v[i].span) && (v[j].span != v[i].span || j < i)) {
                drop[i] = true;
                break;
            }
        }
    }
    std::size_t k = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (drop[i]) continue;
        if (k != i) v[k] = std::move(v[i]);
        ++k;
    }
    v.resize(k);
}

// Collateral deposit immediately followed by a borrow on the same platform by the same account.
void merge_collateral_borrowing(std::vector<PrimitiveBehavior>& v) {
    std::vector<PrimitiveBehavior> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        auto& a = v[i];
        const bool deposit = a.kind == PrimitiveKind::kLendingBorrowing && a.legs.size() == 1 &&
                             a.legs[0].action == LegAction::kDeposit;
        if (deposit && i + 1 < v.size()) {
            auto& b = v[i + 1];
            if (b.kind == PrimitiveKind::kLendingBorrowing && b.platform == a.platform && b.runner == a.runner &&
                b.legs.size() == 1 && b.legs[0].action == LegAction::kBorrow) {
                PrimitiveBehavior m = a;
                m.sub_action = "CollateralBorrow";
                m.span = Span{a.span.start, std::max(a.span.end, b.span.end)};
                m.receiver = b.receiver;
                m.asset_out = b.asset_out;
                m.legs.push_back(b.legs[0]);
                out.push_back(std::move(m));
                ++i;
                continue;
            }
        }
        out.push_back(std::move(a));
    }
    v = std::move(out);
}

void tag_loans(std::vector<PrimitiveBehavior>& v, const std::vector<FlashLoanRecord>& loans) {
    for (auto& b : v) {
        const FlashLoanRecord* best = nullptr;
        for (const auto& l : loans) {
            if (l.tx_hash != b.tx_hash || !l.span.contains(b.span)) continue;
            if (!best || (l.span.end - l.span.start) < (best->span.end - best->span.start)) best = &l;
        }
        b.inside_loan = best != nullptr;
        if (best) b.loan_ref = LoanRef{best->tx_hash, best->span};
    }
}

}  // namespace

bool satisfies_presence_rules(const PrimitiveBehavior& p) {
    const auto rule = presence(p.kind);
    if (rule.receiver != p.receiver.has_value()) return false;
    if (rule.asset_in != p.asset_in.has_value()) return false;
    return p.asset_out.has_value() && p.amount_in.has_value();
}

std::vector<PrimitiveBehavior> match_margin_trade(const TransactionBundle& bundle, const PatternRegistry& registry,
                                                  Diagnostics& diags) {
    return match_all(bundle, registry, diags, true);
}

std::vector<PrimitiveBehavior> classify(const TransactionBundle& bundle, const std::vector<FlashLoanRecord>& loans,
                                        const PatternRegistry& registry, Diagnostics& diags,
                                        const ClassifyOptions& options) {
    const bool has_loan = std::any_of(loans.begin(), loans.end(), [&](const auto& l) { return l.tx_hash == bundle.tx_hash; });
    if (!has_loan && !options.include_all) return {};
    auto out = match_all(bundle, registry, diags, false);
    drop_nested_exchanges(out);
    merge_collateral_borrowing(out);
    tag_loans(out, loans);
    return out;
}

}  // namespace thunderlens
