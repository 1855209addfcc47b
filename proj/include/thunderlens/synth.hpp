// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "thunderlens/core.hpp"
#include "thunderlens/ingestion.hpp"
#include "thunderlens/records.hpp"
#include "thunderlens/registry.hpp"

// Labeled synthetic transactions. The generator writes traces from a script and derives the
// expected labels from that same script; it never calls into the detectors.
namespace thunderlens::synth {

enum class Mutation {
    kWrongEmitter,      // provider contract replaced by an unknown look-alike
    kWrongSelector,     // entry call uses a different function
    kBrokenEventOrder,  // dYdX deposit (repay) before withdraw (borrow)
    kEmptyCallbackData, // UniswapV2 swap without callback data
    kPaybackToOther,    // UniswapV2 callback repays somewhere other than the pair
    kNoSelector,        // margin Mint event without the mint call
};

std::string to_string(Mutation m);
std::optional<Mutation> parse_mutation(std::string_view text);

struct AaveFlashLoan {
    Address asset;
    U256 amount{0};
    bool wrong_emitter{false};
};

struct DydxFlashLoan {
    bool with_call{true};
    Address asset;
    U256 amount{0};
    bool wrong_emitter{false};
    bool broken_order{false};
};

struct UniV2FlashSwap {
    bool payback_to_pair{true};
    bool empty_data{false};
    Address pair;
    U256 amount{0};
    bool wrong_selector{false};
    bool unknown_pair{false};
};

//! Flash borrow of `asset` from its iToken.
struct BzxFlashBorrow {
    bool on_itoken{true};
    Address asset;
    U256 amount{0};
    bool wrong_selector{false};
};

struct Swap {
    Platform platform;
    Address runner;
    AssetId asset_in;
    AssetId asset_out;
    U256 amount{0};
};

//! Borrow, Repay, Deposit or Redeem on a lending platform.
struct Lend {
    LegAction action{LegAction::kDeposit};
    Platform platform;
    AssetId asset;
    U256 amount{0};
};

struct MarginMint {
    bool with_selector{true};
    U256 amount{0};
};

struct Liquidate {
    Platform platform;
    U256 amount{0};
};

struct AntiLiquidation {
    bool known_emitter{true};
};

struct Mutate {
    std::size_t target{0};
    Mutation mutation{Mutation::kWrongEmitter};
};

using Step = std::variant<AaveFlashLoan, DydxFlashLoan, UniV2FlashSwap, BzxFlashBorrow, Swap, Lend, MarginMint,
                          Liquidate, AntiLiquidation, Mutate>;

//! Flash-loan steps wrap every later step in their callback (when they have one).
struct Scenario {
    std::uint64_t seed{0};
    std::string name;
    std::vector<Step> script;
};

struct ExpectedLoan {
    Platform provider;
    Span span;
    auto operator<=>(const ExpectedLoan&) const = default;
};

struct ExpectedPrimitive {
    PrimitiveKind kind{PrimitiveKind::kExchange};
    Platform platform;
    Span span;
    auto operator<=>(const ExpectedPrimitive&) const = default;
};

struct ExpectedAdvanced {
    AdvancedKind kind{AdvancedKind::kArbitrage};
    std::map<std::string, std::string> details;
    auto operator<=>(const ExpectedAdvanced&) const = default;
};

struct GroundTruth {
    TxHash tx_hash;
    std::string scenario;
    std::vector<ExpectedLoan> loans;
    std::vector<ExpectedPrimitive> primitives;
    std::vector<ExpectedAdvanced> advanced;

    bool operator==(const GroundTruth&) const = default;
};

class GenerationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

//! Contracts the synthetic traces use.
namespace addr {
Address aave_core();
Address dydx_solo();
Address compound_ctoken(const AssetId& underlying);
Address bzx_itoken(const Address& underlying);
Address bzx_margin_token();
Address maker_vat();
Address defi_saver_logger();
Address exchange(const Platform& platform);
std::vector<Address> uniswap_pairs();
std::pair<Address, Address> pair_tokens(const Address& pair);
Address weth();
Address dai();
Address usdc();
Address wbtc();
Address bat();
Address link();
//! The fixed pool runners and senders are drawn from.
const std::vector<Address>& pool();
}  // namespace addr

//! Event hash the synthetic DeFi Saver logger emits for an anti-liquidation action.
TopicHash defi_saver_event();

//! Default registry plus the address-book entries and the anti-liquidation pattern synthetic traces need.
PatternRegistry registry();

std::pair<TransactionBundle, GroundTruth> generate(const Scenario& scenario);

//! Scenario `index` of a corpus drawn with `seed`.
Scenario draw_scenario(std::uint64_t seed, std::uint64_t index);

//! Positive flash-loan scenario with its first loan step mutated so the loan is no longer valid.
std::optional<Scenario> negative_sibling(const Scenario& scenario);

struct SynthCorpus {
    Corpus corpus;
    std::vector<GroundTruth> truth;  // same order as corpus.bundles
};

SynthCorpus generate_corpus(std::size_t n, std::uint64_t seed, unsigned workers = 1);

nlohmann::ordered_json to_json(const GroundTruth& truth);
GroundTruth ground_truth_from_json(const nlohmann::ordered_json& j);

//! Per-label confusion counts of detector output against ground truth.
struct Score {
    std::size_t true_positive{0};
    std::size_t false_positive{0};
    std::size_t false_negative{0};

    [[nodiscard]] double precision() const;
    [[nodiscard]] double recall() const;
};

//! Keys are "loan:<provider>", "primitive:<kind>", "advanced:<kind>".
using Scorecard = std::map<std::string, Score>;

Scorecard score(const std::vector<GroundTruth>& truth, const std::vector<FlashLoanRecord>& loans,
                const std::vector<PrimitiveBehavior>& primitives, const std::vector<AdvancedBehavior>& advanced);

}  // namespace thunderlens::synth
