// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#include "thunderlens/records.hpp"

#include <array>
#include <tuple>

namespace thunderlens {

using nlohmann::ordered_json;

namespace {

constexpr std::array<std::pair<PrimitiveKind, std::string_view>, 4> kPrimitiveNames{{
    {PrimitiveKind::kExchange, "Exchange"},
    {PrimitiveKind::kLendingBorrowing, "LendingBorrowing"},
    {PrimitiveKind::kMarginTrade, "MarginTrade"},
    {PrimitiveKind::kLiquidation, "Liquidation"},
}};

constexpr std::array<std::pair<LegAction, std::string_view>, 4> kLegNames{{
    {LegAction::kDeposit, "Deposit"},
    {LegAction::kRedeem, "Redeem"},
    {LegAction::kBorrow, "Borrow"},
    {LegAction::kRepay, "Repay"},
}};

constexpr std::array<std::pair<AdvancedKind, std::string_view>, 5> kAdvancedNames{{
    {AdvancedKind::kArbitrage, "Arbitrage"},
    {AdvancedKind::kAntiLiquidation, "AntiLiquidation"},
    {AdvancedKind::kCollateralSwap, "CollateralSwap"},
    {AdvancedKind::kLoanSwap, "LoanSwap"},
    {AdvancedKind::kPlatformSwap, "PlatformSwap"},
}};

template <class Table, class Key>
std::string name_of(const Table& table, Key key) {
    for (const auto& [k, n] : table)
        if (k == key) return std::string{n};
    return {};
}

template <class Table>
auto key_of(const Table& table, std::string_view name) -> std::optional<typename Table::value_type::first_type> {
    for (const auto& [k, n] : table)
        if (n == name) return k;
    return std::nullopt;
}

ordered_json span_json(const Span& s) { return ordered_json{{"intStart", s.start}, {"intEnd", s.end}}; }

template <class T>
ordered_json opt(const std::optional<T>& v, auto&& render) {
    return v ? ordered_json(render(*v)) : ordered_json(nullptr);
}

// Field readers; every failure names the field.
const ordered_json& at(const ordered_json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw RecordError(std::string{"missing field '"} + key + "'");
    return *it;
}

std::string str(const ordered_json& j, const char* key) {
    const auto& v = at(j, key);
    if (!v.is_string()) throw RecordError(std::string{"field '"} + key + "' must be a string");
    return v.get<std::string>();
}

template <class F>
F fixed(const ordered_json& j, const char* key) {
    auto v = F::parse(str(j, key));
    if (!v) throw RecordError(std::string{"field '"} + key + "' has the wrong length");
    return *v;
}

AssetId asset(const ordered_json& j, const char* key) {
    auto v = AssetId::parse(str(j, key));
    if (!v) throw RecordError(std::string{"field '"} + key + "' is not an asset id");
    return *v;
}

U256 amount(const ordered_json& j, const char* key) {
    auto v = u256_from_dec(str(j, key));
    if (!v) throw RecordError(std::string{"field '"} + key + "' is not a decimal amount");
    return *v;
}

template <class T>
std::optional<T> maybe(const ordered_json& j, const char* key, T (*read)(const ordered_json&, const char*)) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return read(j, key);
}

Address address(const ordered_json& j, const char* key) { return fixed<Address>(j, key); }

Span span_of(const ordered_json& j, const char* key) {
    const auto& s = at(j, key);
    return Span{at(s, "intStart").get<std::uint32_t>(), at(s, "intEnd").get<std::uint32_t>()};
}

}  // namespace

std::string to_string(PrimitiveKind k) { return name_of(kPrimitiveNames, k); }
std::optional<PrimitiveKind> parse_primitive_kind(std::string_view text) { return key_of(kPrimitiveNames, text); }
std::string to_string(LegAction a) { return name_of(kLegNames, a); }
std::optional<LegAction> parse_leg_action(std::string_view text) { return key_of(kLegNames, text); }
std::string to_string(AdvancedKind k) { return name_of(kAdvancedNames, k); }
std::optional<AdvancedKind> parse_advanced_kind(std::string_view text) { return key_of(kAdvancedNames, text); }

std::optional<PrimitiveKind> primitive_kind_of(Category c) {
    switch (c) {
        case Category::kExchange:
            return PrimitiveKind::kExchange;
        case Category::kLendingBorrowing:
            return PrimitiveKind::kLendingBorrowing;
        case Category::kMarginTrade:
            return PrimitiveKind::kMarginTrade;
        case Category::kLiquidation:
            return PrimitiveKind::kLiquidation;
        default:
            return std::nullopt;
    }
}

ordered_json to_json(const FlashLoanRecord& r) {
    ordered_json j;
    j["provider"] = r.provider.name();
    j["serviceProviderAddr"] = r.service_provider.hex();
    j["runner"] = r.runner.hex();
    j["assetIn"] = opt(r.asset_in, [](const AssetId& a) { return a.hex(); });
    j["assetOut"] = r.asset_out.hex();
    j["amountIn"] = to_dec(r.amount_in);
    j["blockNumber"] = r.block_number;
    j["txIndex"] = r.tx_index;
    j["txHash"] = r.tx_hash.hex();
    j["span"] = span_json(r.span);
    return j;
}

ordered_json to_json(const PrimitiveBehavior& p) {
    ordered_json j;
    j["kind"] = to_string(p.kind);
    j["subAction"] = p.sub_action.empty() ? ordered_json(nullptr) : ordered_json(p.sub_action);
    j["platform"] = p.platform.name();
    j["serviceProviderAddr"] = p.service_provider.hex();
    j["runner"] = p.runner.hex();
    j["receiver"] = opt(p.receiver, [](const Address& a) { return a.hex(); });
    j["assetIn"] = opt(p.asset_in, [](const AssetId& a) { return a.hex(); });
    j["assetOut"] = opt(p.asset_out, [](const AssetId& a) { return a.hex(); });
    j["amountIn"] = opt(p.amount_in, [](const U256& v) { return to_dec(v); });
    j["blockNumber"] = p.block_number;
    j["txIndex"] = p.tx_index;
    j["txHash"] = p.tx_hash.hex();
    j["span"] = span_json(p.span);
    ordered_json legs = ordered_json::array();
    for (const auto& l : p.legs) {
        legs.push_back(ordered_json{{"action", to_string(l.action)},
                                    {"asset", l.asset.hex()},
                                    {"amount", to_dec(l.amount)},
                                    {"span", span_json(l.span)}});
    }
    j["legs"] = std::move(legs);
    j["insideLoan"] = p.inside_loan;
    j["loanRef"] = p.loan_ref ? ordered_json{{"txHash", p.loan_ref->tx_hash.hex()}, {"span", span_json(p.loan_ref->span)}}
                              : ordered_json(nullptr);
    return j;
}

ordered_json to_json(const AdvancedBehavior& a) {
    ordered_json j;
    j["kind"] = to_string(a.kind);
    j["runner"] = a.runner.hex();
    ordered_json ev = ordered_json::array();
    for (const auto& e : a.evidence) ev.push_back(ordered_json{{"kind", e.kind}, {"span", span_json(e.span)}});
    j["evidence"] = std::move(ev);
    j["txHash"] = a.tx_hash.hex();
    j["blockNumber"] = a.block_number;
    j["txIndex"] = a.tx_index;
    ordered_json details = ordered_json::object();
    for (const auto& [k, v] : a.details) details[k] = v;
    j["details"] = std::move(details);
    return j;
}

FlashLoanRecord flash_loan_from_json(const ordered_json& j) {
    FlashLoanRecord r;
    r.provider = Platform::parse(str(j, "provider"));
    r.service_provider = address(j, "serviceProviderAddr");
    r.runner = address(j, "runner");
    r.asset_in = maybe<AssetId>(j, "assetIn", asset);
    r.asset_out = asset(j, "assetOut");
    r.amount_in = amount(j, "amountIn");
    r.block_number = at(j, "blockNumber").get<std::uint64_t>();
    r.tx_index = at(j, "txIndex").get<std::uint32_t>();
    r.tx_hash = fixed<TxHash>(j, "txHash");
    r.span = span_of(j, "span");
    return r;
}

PrimitiveBehavior primitive_from_json(const ordered_json& j) {
    PrimitiveBehavior p;
    auto kind = parse_primitive_kind(str(j, "kind"));
    if (!kind) throw RecordError("field 'kind' is not a primitive kind");
    p.kind = *kind;
    if (auto it = j.find("subAction"); it != j.end() && !it->is_null()) p.sub_action = str(j, "subAction");
    p.platform = Platform::parse(str(j, "platform"));
    p.service_provider = address(j, "serviceProviderAddr");
    p.runner = address(j, "runner");
    p.receiver = maybe<Address>(j, "receiver", address);
    p.asset_in = maybe<AssetId>(j, "assetIn", asset);
    p.asset_out = maybe<AssetId>(j, "assetOut", asset);
    p.amount_in = maybe<U256>(j, "amountIn", amount);
    p.block_number = at(j, "blockNumber").get<std::uint64_t>();
    p.tx_index = at(j, "txIndex").get<std::uint32_t>();
    p.tx_hash = fixed<TxHash>(j, "txHash");
    p.span = span_of(j, "span");
    for (const auto& l : at(j, "legs")) {
        auto action = parse_leg_action(str(l, "action"));
        if (!action) throw RecordError("field 'legs.action' is not a lending action");
        p.legs.push_back(LendingLeg{*action, asset(l, "asset"), amount(l, "amount"), span_of(l, "span")});
    }
    p.inside_loan = at(j, "insideLoan").get<bool>();
    if (auto it = j.find("loanRef"); it != j.end() && !it->is_null())
        p.loan_ref = LoanRef{fixed<TxHash>(*it, "txHash"), span_of(*it, "span")};
    return p;
}

AdvancedBehavior advanced_from_json(const ordered_json& j) {
    AdvancedBehavior a;
    auto kind = parse_advanced_kind(str(j, "kind"));
    if (!kind) throw RecordError("field 'kind' is not an advanced kind");
    a.kind = *kind;
    a.runner = address(j, "runner");
    for (const auto& e : at(j, "evidence")) a.evidence.push_back(EvidenceRef{str(e, "kind"), span_of(e, "span")});
    a.tx_hash = fixed<TxHash>(j, "txHash");
    a.block_number = at(j, "blockNumber").get<std::uint64_t>();
    a.tx_index = at(j, "txIndex").get<std::uint32_t>();
    for (const auto& [k, v] : at(j, "details").items()) a.details[k] = v.get<std::string>();
    return a;
}

bool loan_order(const FlashLoanRecord& a, const FlashLoanRecord& b) {
    return std::tie(a.block_number, a.tx_index, a.tx_hash, a.span, a.provider) <
           std::tie(b.block_number, b.tx_index, b.tx_hash, b.span, b.provider);
}

bool primitive_order(const PrimitiveBehavior& a, const PrimitiveBehavior& b) {
    return std::tie(a.block_number, a.tx_index, a.tx_hash, a.span.start, a.span.end, a.kind, a.platform, a.sub_action) <
           std::tie(b.block_number, b.tx_index, b.tx_hash, b.span.start, b.span.end, b.kind, b.platform, b.sub_action);
}

bool advanced_order(const AdvancedBehavior& a, const AdvancedBehavior& b) {
    const auto first = [](const AdvancedBehavior& x) { return x.evidence.empty() ? Span{} : x.evidence.front().span; };
    return std::tie(a.block_number, a.tx_index, a.tx_hash, a.kind) < std::tie(b.block_number, b.tx_index, b.tx_hash, b.kind) ||
           (std::tie(a.block_number, a.tx_index, a.tx_hash, a.kind) == std::tie(b.block_number, b.tx_index, b.tx_hash, b.kind) &&
            first(a) < first(b));
}

std::string to_json_line(const Diagnostic& d) {
    ordered_json j;
    j["level"] = "warning";
    j["code"] = d.code;
    j["detector"] = d.detector;
    j["tx"] = d.tx;
    j["message"] = d.message;
    return j.dump();
}

}  // namespace thunderlens
