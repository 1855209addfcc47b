// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "thunderlens/core.hpp"
#include "thunderlens/registry.hpp"

namespace thunderlens {

struct Span {
    std::uint32_t start{0};
    std::uint32_t end{0};

    auto operator<=>(const Span&) const = default;
    [[nodiscard]] bool contains(const Span& o) const { return start <= o.start && o.end <= end; }
};

struct FlashLoanRecord {
    Platform provider;
    Address service_provider;
    Address runner;
    std::optional<AssetId> asset_in;
    AssetId asset_out;
    U256 amount_in{0};
    std::uint64_t block_number{0};
    std::uint32_t tx_index{0};
    TxHash tx_hash;
    Span span;

    bool operator==(const FlashLoanRecord&) const = default;
};

enum class PrimitiveKind { kExchange, kLendingBorrowing, kMarginTrade, kLiquidation };

std::string to_string(PrimitiveKind k);
std::optional<PrimitiveKind> parse_primitive_kind(std::string_view text);
std::optional<PrimitiveKind> primitive_kind_of(Category c);

enum class LegAction { kDeposit, kRedeem, kBorrow, kRepay };

std::string to_string(LegAction a);
std::optional<LegAction> parse_leg_action(std::string_view text);

//! One elementary lending action carried by a LendingBorrowing behavior.
struct LendingLeg {
    LegAction action{LegAction::kDeposit};
    AssetId asset;
    U256 amount{0};
    Span span;

    bool operator==(const LendingLeg&) const = default;
};

struct LoanRef {
    TxHash tx_hash;
    Span span;

    bool operator==(const LoanRef&) const = default;
};

struct PrimitiveBehavior {
    PrimitiveKind kind{PrimitiveKind::kExchange};
    std::string sub_action;
    Platform platform;
    Address service_provider;
    Address runner;
    std::optional<Address> receiver;
    std::optional<AssetId> asset_in;
    std::optional<AssetId> asset_out;
    std::optional<U256> amount_in;
    std::uint64_t block_number{0};
    std::uint32_t tx_index{0};
    TxHash tx_hash;
    Span span;
    std::vector<LendingLeg> legs;
    bool inside_loan{false};
    std::optional<LoanRef> loan_ref;

    bool operator==(const PrimitiveBehavior&) const = default;
};

enum class AdvancedKind { kArbitrage, kAntiLiquidation, kCollateralSwap, kLoanSwap, kPlatformSwap };

std::string to_string(AdvancedKind k);
std::optional<AdvancedKind> parse_advanced_kind(std::string_view text);

struct EvidenceRef {
    std::string kind;  // primitive kind, or "Event" for a matched log
    Span span;

    bool operator==(const EvidenceRef&) const = default;
};

struct AdvancedBehavior {
    AdvancedKind kind{AdvancedKind::kArbitrage};
    Address runner;
    std::vector<EvidenceRef> evidence;
    TxHash tx_hash;
    std::uint64_t block_number{0};
    std::uint32_t tx_index{0};
    //! oldCollateral/newCollateral, oldDebtAsset/newDebtAsset, platformA/platformB, logIndex.
    std::map<std::string, std::string> details;

    bool operator==(const AdvancedBehavior&) const = default;
};

class RecordError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

nlohmann::ordered_json to_json(const FlashLoanRecord& r);
nlohmann::ordered_json to_json(const PrimitiveBehavior& p);
nlohmann::ordered_json to_json(const AdvancedBehavior& a);

FlashLoanRecord flash_loan_from_json(const nlohmann::ordered_json& j);
PrimitiveBehavior primitive_from_json(const nlohmann::ordered_json& j);
AdvancedBehavior advanced_from_json(const nlohmann::ordered_json& j);

//! Sort keys used by every output stream.
bool loan_order(const FlashLoanRecord& a, const FlashLoanRecord& b);
bool primitive_order(const PrimitiveBehavior& a, const PrimitiveBehavior& b);
bool advanced_order(const AdvancedBehavior& a, const AdvancedBehavior& b);

//! Structured diagnostic, rendered as one JSON object per line.
struct Diagnostic {
    std::string code;
    std::string detector;
    std::string tx;
    std::string message;

    bool operator==(const Diagnostic&) const = default;
};

using Diagnostics = std::vector<Diagnostic>;

std::string to_json_line(const Diagnostic& d);

}  // namespace thunderlens
