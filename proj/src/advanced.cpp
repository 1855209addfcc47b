// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#include "thunderlens/advanced.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace thunderlens {

namespace {

struct LegRef {
    const PrimitiveBehavior* owner;
    const LendingLeg* leg;
};

// Input order never matters: everything downstream works on a canonically sorted copy.
std::vector<PrimitiveBehavior> canonical(const std::vector<PrimitiveBehavior>& primitives) {
    auto out = primitives;
    std::sort(out.begin(), out.end(), primitive_order);
    return out;
}

std::vector<LegRef> legs_of(const std::vector<PrimitiveBehavior>& sorted, LegAction action) {
    std::vector<LegRef> out;
    for (const auto& p : sorted) {
        if (p.kind != PrimitiveKind::kLendingBorrowing) continue;
        for (const auto& l : p.legs)
            if (l.action == action) out.push_back({&p, &l});
    }
    return out;
}

EvidenceRef evidence_of(const PrimitiveBehavior& p) { return {to_string(p.kind), p.span}; }

AdvancedBehavior start(AdvancedKind kind, const TransactionBundle& bundle, const Address& runner) {
    AdvancedBehavior a;
    a.kind = kind;
    a.runner = runner;
    a.tx_hash = bundle.tx_hash;
    a.block_number = bundle.block_number;
    a.tx_index = bundle.tx_index;
    return a;
}

void add_evidence(AdvancedBehavior& a, const PrimitiveBehavior& p) {
    auto e = evidence_of(p);
    if (std::find(a.evidence.begin(), a.evidence.end(), e) == a.evidence.end()) a.evidence.push_back(e);
}

void sort_evidence(AdvancedBehavior& a) {
    std::sort(a.evidence.begin(), a.evidence.end(),
              [](const EvidenceRef& x, const EvidenceRef& y) { return std::tie(x.span, x.kind) < std::tie(y.span, y.kind); });
}

}  // namespace

std::optional<LoanSwapIdentity> parse_loan_swap_identity(std::string_view text) {
    if (text == "flashloan") return LoanSwapIdentity::kFlashLoan;
    if (text == "newloan") return LoanSwapIdentity::kNewLoan;
    return std::nullopt;
}

std::string to_string(LoanSwapIdentity identity) {
    return identity == LoanSwapIdentity::kFlashLoan ? "flashloan" : "newloan";
}

std::vector<AdvancedBehavior> detect_arbitrage(const std::vector<PrimitiveBehavior>& primitives) {
    const auto sorted = canonical(primitives);
    std::map<Address, std::vector<const PrimitiveBehavior*>> by_runner;
    for (const auto& p : sorted)
        if (p.kind == PrimitiveKind::kExchange) by_runner[p.runner].push_back(&p);

    std::vector<AdvancedBehavior> out;
    for (const auto& [runner, group] : by_runner) {
        if (group.size() < 2) continue;
        AdvancedBehavior a;
        a.kind = AdvancedKind::kArbitrage;
        a.runner = runner;
        a.tx_hash = group.front()->tx_hash;
        a.block_number = group.front()->block_number;
        a.tx_index = group.front()->tx_index;
        for (const auto* p : group) a.evidence.push_back(evidence_of(*p));
        std::set<std::string> platforms;
        for (const auto* p : group) platforms.insert(p->platform.name());
        std::string joined;
        for (const auto& name : platforms) joined += (joined.empty() ? "" : ",") + name;
        a.details["platforms"] = joined;
        a.details["trades"] = std::to_string(group.size());
        out.push_back(std::move(a));
    }
    std::sort(out.begin(), out.end(), advanced_order);
    return out;
}

std::vector<AdvancedBehavior> detect_anti_liquidation(const TransactionBundle& bundle, const PatternRegistry& registry,
                                                      Diagnostics& diags) {
    std::vector<AdvancedBehavior> out;
    bool enabled = false;
    for (const auto* p : registry.by_category(Category::kAntiLiquidation)) {
        if (!p->active() || !p->event_hash || registry.constraint_is_empty(p->emitter)) continue;
        enabled = true;
        if (bundle.reverted) continue;
        for (const auto& log : bundle.logs) {
            if (log.topics.empty() || log.topics[0] != *p->event_hash) continue;
            if (!registry.satisfies(p->emitter, log.emitter)) continue;
            auto a = start(AdvancedKind::kAntiLiquidation, bundle, bundle.sender);
            a.evidence.push_back({"Event", Span{log.after_call_index, log.after_call_index}});
            a.details["logIndex"] = std::to_string(log.log_index);
            a.details["emitter"] = log.emitter.hex();
            a.details["platform"] = p->platform.name();
            out.push_back(std::move(a));
        }
    }
    if (!enabled)
        diags.push_back({"detector_disabled", "AntiLiquidation", bundle.tx_hash.hex(),
                         "no activated anti-liquidation pattern with known emitters in the registry"});
    std::sort(out.begin(), out.end(), advanced_order);
    return out;
}

std::vector<AdvancedBehavior> detect_collateral_swap(const TransactionBundle& bundle,
                                                     const std::vector<PrimitiveBehavior>& primitives) {
    const auto sorted = canonical(primitives);
    const auto redeems = legs_of(sorted, LegAction::kRedeem);
    const auto deposits = legs_of(sorted, LegAction::kDeposit);
    for (const auto& r : redeems) {
        for (const auto& d : deposits) {
            if (d.owner->platform != r.owner->platform || d.leg->asset == r.leg->asset) continue;
            auto a = start(AdvancedKind::kCollateralSwap, bundle, r.owner->runner);
            add_evidence(a, *r.owner);
            add_evidence(a, *d.owner);
            sort_evidence(a);
            a.details["oldCollateral"] = r.leg->asset.hex();
            a.details["newCollateral"] = d.leg->asset.hex();
            a.details["platform"] = r.owner->platform.name();
            return {std::move(a)};
        }
    }
    return {};
}

std::vector<AdvancedBehavior> detect_loan_swap(const TransactionBundle& bundle,
                                               const std::vector<PrimitiveBehavior>& primitives,
                                               const std::vector<FlashLoanRecord>& loans,
                                               const AdvancedOptions& options) {
    const auto sorted = canonical(primitives);
    std::set<AssetId> flash_assets;
    for (const auto& l : loans)
        if (l.tx_hash == bundle.tx_hash) flash_assets.insert(l.asset_out);

    const auto repays = legs_of(sorted, LegAction::kRepay);
    const auto borrows = legs_of(sorted, LegAction::kBorrow);
    for (const auto& r : repays) {
        for (const auto& b : borrows) {
            if (b.owner->platform != r.owner->platform || b.leg->asset == r.leg->asset) continue;
            const auto& pinned = options.loan_swap_identity == LoanSwapIdentity::kFlashLoan ? r.leg->asset : b.leg->asset;
            if (!flash_assets.contains(pinned)) continue;
            auto a = start(AdvancedKind::kLoanSwap, bundle, r.owner->runner);
            add_evidence(a, *r.owner);
            add_evidence(a, *b.owner);
            sort_evidence(a);
            a.details["oldDebtAsset"] = r.leg->asset.hex();
            a.details["newDebtAsset"] = b.leg->asset.hex();
            a.details["platform"] = r.owner->platform.name();
            return {std::move(a)};
        }
    }
    return {};
}

std::vector<AdvancedBehavior> detect_platform_swap(const TransactionBundle& bundle,
                                                   const std::vector<PrimitiveBehavior>& primitives) {
    const auto sorted = canonical(primitives);
    const auto repays = legs_of(sorted, LegAction::kRepay);
    const auto redeems = legs_of(sorted, LegAction::kRedeem);
    const auto deposits = legs_of(sorted, LegAction::kDeposit);
    for (const auto& r : repays) {
        auto closing = std::find_if(redeems.begin(), redeems.end(),
                                    [&](const LegRef& x) { return x.owner->platform == r.owner->platform; });
        if (closing == redeems.end()) continue;
        for (const auto& d : deposits) {
            if (d.owner->platform == r.owner->platform) continue;
            auto a = start(AdvancedKind::kPlatformSwap, bundle, r.owner->runner);
            add_evidence(a, *r.owner);
            add_evidence(a, *closing->owner);
            add_evidence(a, *d.owner);
            sort_evidence(a);
            a.details["platformA"] = r.owner->platform.name();
            a.details["platformB"] = d.owner->platform.name();
            return {std::move(a)};
        }
    }
    return {};
}

std::vector<AdvancedBehavior> classify_advanced(const TransactionBundle& bundle,
                                                const std::vector<PrimitiveBehavior>& primitives,
                                                const std::vector<FlashLoanRecord>& loans,
                                                const PatternRegistry& registry, Diagnostics& diags,
                                                const AdvancedOptions& options) {
    std::vector<AdvancedBehavior> out;
    auto append = [&out](std::vector<AdvancedBehavior> v) {
        for (auto& a : v) out.push_back(std::move(a));
    };
    append(detect_arbitrage(primitives));
    append(detect_anti_liquidation(bundle, registry, diags));
    append(detect_collateral_swap(bundle, primitives));
    append(detect_loan_swap(bundle, primitives, loans, options));
    append(detect_platform_swap(bundle, primitives));
    std::sort(out.begin(), out.end(), advanced_order);
    return out;
}

}  // namespace thunderlens
