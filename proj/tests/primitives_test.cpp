// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <random>

#include "support.hpp"
#include "thunderlens/identifier.hpp"
#include "thunderlens/pipeline.hpp"
#include "thunderlens/primitives.hpp"
#include "thunderlens/signatures.hpp"
#include "thunderlens/synth.hpp"

using namespace thunderlens;
using nlohmann::ordered_json;

namespace {

const char* kGolden = "0xb5c8bd9430b6cc87a0e2fe110ece6bf527fa4f170a4bc8cd032f768fc5219838";

synth::Scenario scenario(std::vector<synth::Step> script, std::uint64_t seed = 3) {
    return synth::Scenario{seed, "hand", std::move(script)};
}

struct Run {
    TransactionBundle bundle;
    synth::GroundTruth truth;
    std::vector<FlashLoanRecord> loans;
    std::vector<PrimitiveBehavior> primitives;
    Diagnostics diags;
};

Run run(const synth::Scenario& s, const PatternRegistry& reg, const ClassifyOptions& options = {}) {
    Run r;
    std::tie(r.bundle, r.truth) = synth::generate(s);
    r.loans = identify_bundle(r.bundle, reg, r.diags);
    r.primitives = classify(r.bundle, r.loans, reg, r.diags, options);
    return r;
}

std::vector<synth::ExpectedPrimitive> as_expected(const std::vector<PrimitiveBehavior>& v) {
    std::vector<synth::ExpectedPrimitive> out;
    for (const auto& p : v) out.push_back({p.kind, p.platform, p.span});
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<synth::ExpectedPrimitive> sorted(std::vector<synth::ExpectedPrimitive> v) {
    std::sort(v.begin(), v.end());
    return v;
}

AssetId asset(const Address& a) { return AssetId::from_address(a); }

AssetId ilk(std::string_view name) {
    AssetId out;
    std::copy(name.begin(), name.end(), out.word.begin());
    return out;
}

}  // namespace

TEST_CASE("golden bundle: primitives and their spans") {
    const auto corpus = load_fixtures(std::string{THUNDERLENS_FIXTURES} + "/bzx_hack/" + kGolden + ".json");
    auto reg = PatternRegistry::load_from_file(std::string{THUNDERLENS_CONFIG} + "/registry.example.json");
    const auto results = run_pipeline(corpus, reg);
    REQUIRE(results.loans.size() == 1);
    std::vector<std::tuple<std::string, std::string, std::uint32_t, std::uint32_t>> got;
    for (const auto& p : results.primitives) {
        got.emplace_back(to_string(p.kind), p.platform.display_name(), p.span.start, p.span.end);
        CHECK(p.inside_loan);
        REQUIRE(p.loan_ref);
        CHECK(p.loan_ref->span == Span{2, 188});
        CHECK(satisfies_presence_rules(p));
    }
    const decltype(got) want{{"LendingBorrowing", "Compound", 21, 46},
                             {"MarginTrade", "bZx", 47, 174},
                             {"Exchange", "Uniswap", 158, 161},
                             {"Exchange", "Uniswap", 176, 180}};
    CHECK(got == want);
    const auto& lending = results.primitives[0];
    CHECK(lending.sub_action == "CollateralBorrow");
    REQUIRE(lending.legs.size() == 2);
    CHECK(lending.legs[0].action == LegAction::kDeposit);
    CHECK(lending.legs[1].action == LegAction::kBorrow);
}

TEST_CASE("every exchange platform is classified with the labeled span") {
    const auto reg = synth::registry();
    const auto weth = asset(synth::addr::weth()), dai = asset(synth::addr::dai()), eth = asset(kEthAddress);
    AssetId seth, susd;
    std::copy_n("sETH", 4, seth.word.begin());
    std::copy_n("sUSD", 4, susd.word.begin());
    const std::vector<synth::Swap> swaps{
        {PlatformId::kUniswapV1, {}, eth, dai, 10},      {PlatformId::kUniswapV1, {}, dai, eth, 10},
        {PlatformId::kBalancer, {}, weth, dai, 10},      {PlatformId::kOneInch, {}, weth, dai, 10},
        {PlatformId::kSynthetix, {}, seth, susd, 10},    {PlatformId::kCurveFi, {}, dai, weth, 10},
        {PlatformId::kKyber, {}, dai, weth, 10},
    };
    for (const auto& s : swaps) {
        INFO(s.platform.name());
        const auto r = run(scenario({synth::AaveFlashLoan{synth::addr::weth(), 99}, s}), reg);
        CHECK(as_expected(r.primitives) == sorted(r.truth.primitives));
        REQUIRE(r.primitives.size() == 1);
        CHECK(r.primitives[0].kind == PrimitiveKind::kExchange);
        CHECK(r.primitives[0].inside_loan);
        CHECK(satisfies_presence_rules(r.primitives[0]));
    }
}

TEST_CASE("lending actions carry typed legs") {
    const auto reg = synth::registry();
    const auto dai = asset(synth::addr::dai()), usdc = asset(synth::addr::usdc());
    for (auto platform : {PlatformId::kCompound, PlatformId::kAave, PlatformId::kBzx}) {
        for (auto action : {LegAction::kDeposit, LegAction::kRedeem, LegAction::kBorrow, LegAction::kRepay}) {
            INFO(Platform{platform}.name() << " " << to_string(action));
            const auto r = run(scenario({synth::DydxFlashLoan{true, synth::addr::weth(), 5},
                                         synth::Lend{action, platform, action == LegAction::kRepay ? dai : usdc, 777}}),
                               reg);
            CHECK(as_expected(r.primitives) == sorted(r.truth.primitives));
            REQUIRE(r.primitives.size() == 1);
            const auto& p = r.primitives[0];
            CHECK(p.kind == PrimitiveKind::kLendingBorrowing);
            REQUIRE(p.legs.size() == 1);
            CHECK(p.legs[0].action == action);
            CHECK(p.legs[0].amount == 777);
        }
    }
}

TEST_CASE("MakerDAO frob splits into collateral and DAI legs") {
    const auto reg = synth::registry();
    const auto dai = asset(synth::addr::dai());
    const auto eth_a = ilk("ETH-A");
    const auto r = run(scenario({synth::DydxFlashLoan{true, synth::addr::weth(), 5},
                                 synth::Lend{LegAction::kDeposit, PlatformId::kMakerDao, eth_a, 40},
                                 synth::Lend{LegAction::kBorrow, PlatformId::kMakerDao, dai, 1000}}),
                       reg);
    CHECK(as_expected(r.primitives) == sorted(r.truth.primitives));
    std::vector<LendingLeg> legs;
    for (const auto& p : r.primitives)
        if (p.platform == Platform{PlatformId::kMakerDao}) legs.insert(legs.end(), p.legs.begin(), p.legs.end());
    REQUIRE(legs.size() == 2);
    CHECK(legs[0].action == LegAction::kDeposit);
    CHECK(legs[0].asset == eth_a);
    CHECK(legs[0].amount == 40);
    CHECK(legs[1].action == LegAction::kBorrow);
    CHECK(legs[1].asset == dai);
    CHECK(legs[1].amount == 1000);
}

TEST_CASE("margin trades need both the mint call and the Mint event") {
    const auto reg = synth::registry();
    const auto with = run(scenario({synth::DydxFlashLoan{true, synth::addr::weth(), 5}, synth::MarginMint{true, 50}}), reg);
    Diagnostics diags;
    const auto margin = match_margin_trade(with.bundle, reg, diags);
    REQUIRE(margin.size() == 1);
    CHECK(margin[0].kind == PrimitiveKind::kMarginTrade);
    CHECK_FALSE(margin[0].receiver.has_value());
    CHECK(margin[0].asset_in.has_value());

    const auto without = run(scenario({synth::DydxFlashLoan{true, synth::addr::weth(), 5}, synth::MarginMint{true, 50},
                                       synth::Mutate{1, synth::Mutation::kNoSelector}}),
                             reg);
    CHECK(match_margin_trade(without.bundle, reg, diags).empty());
    CHECK(without.truth.primitives.empty());
}

TEST_CASE("liquidations on each platform") {
    const auto reg = synth::registry();
    for (auto platform : {PlatformId::kAave, PlatformId::kCompound, PlatformId::kDydx, PlatformId::kOpyn}) {
        INFO(Platform{platform}.name());
        const auto r = run(scenario({synth::AaveFlashLoan{synth::addr::dai(), 5}, synth::Liquidate{platform, 31}}), reg);
        CHECK(as_expected(r.primitives) == sorted(r.truth.primitives));
        REQUIRE(r.primitives.size() == 1);
        CHECK(r.primitives[0].kind == PrimitiveKind::kLiquidation);
        CHECK(r.primitives[0].receiver.has_value());
        CHECK_FALSE(r.primitives[0].asset_in.has_value());
    }
}

TEST_CASE("bundles without a loan are skipped unless asked") {
    const auto reg = synth::registry();
    const auto s = scenario({synth::Swap{PlatformId::kKyber, {}, asset(synth::addr::dai()), asset(synth::addr::weth()), 3}});
    CHECK(run(s, reg).primitives.empty());
    ClassifyOptions all;
    all.include_all = true;
    const auto r = run(s, reg, all);
    REQUIRE(r.primitives.size() == 1);
    CHECK_FALSE(r.primitives[0].inside_loan);
    CHECK_FALSE(r.primitives[0].loan_ref.has_value());
}

TEST_CASE("presence rules hold for everything emitted on a synthetic corpus") {
    const auto data = synth::generate_corpus(600, 31);
    auto reg = synth::registry();
    PipelineOptions options;
    options.classify.include_all = true;
    const auto results = run_pipeline(data.corpus, reg, options);
    REQUIRE_FALSE(results.primitives.empty());
    std::map<TxHash, std::size_t> calls;
    for (const auto& b : data.corpus.bundles) calls[b.tx_hash] = b.calls.size();
    for (const auto& p : results.primitives) {
        CHECK(satisfies_presence_rules(p));
        CHECK(p.span.start <= p.span.end);
        CHECK(p.span.end < calls.at(p.tx_hash));
        CHECK(p.inside_loan == p.loan_ref.has_value());
    }
}

TEST_CASE("presence rules reject missing or forbidden fields") {
    PrimitiveBehavior p;
    p.kind = PrimitiveKind::kExchange;
    p.receiver = tl_test::addr_n(1);
    p.asset_in = AssetId{};
    p.asset_out = AssetId{};
    p.amount_in = 1;
    CHECK(satisfies_presence_rules(p));
    p.kind = PrimitiveKind::kMarginTrade;
    CHECK_FALSE(satisfies_presence_rules(p));  // margin trades carry no receiver
    p.receiver.reset();
    CHECK(satisfies_presence_rules(p));
    p.kind = PrimitiveKind::kLiquidation;
    CHECK_FALSE(satisfies_presence_rules(p));
    p.receiver = tl_test::addr_n(1);
    p.asset_in.reset();
    CHECK(satisfies_presence_rules(p));
    p.amount_in.reset();
    CHECK_FALSE(satisfies_presence_rules(p));
}

TEST_CASE("classification does not depend on pattern order in the registry") {
    const auto data = synth::generate_corpus(150, 77);
    auto base = synth::registry();
    discover_pairs(data.corpus, base);
    std::vector<FlashLoanRecord> loans;
    {
        Diagnostics d;
        loans = identify(data.corpus, base, d);
    }
    auto classify_all = [&](const PatternRegistry& reg) {
        std::vector<PrimitiveBehavior> out;
        Diagnostics d;
        ClassifyOptions all;
        all.include_all = true;
        for (const auto& b : data.corpus.bundles) {
            auto v = classify(b, loans, reg, d, all);
            out.insert(out.end(), v.begin(), v.end());
        }
        std::sort(out.begin(), out.end(), primitive_order);
        return out;
    };
    const auto reference = classify_all(base);
    REQUIRE_FALSE(reference.empty());
    std::mt19937_64 rng{5};
    for (int round = 0; round < 40; ++round) {
        auto doc = base.to_json();
        auto& patterns = doc["patterns"];
        std::vector<ordered_json> list(patterns.begin(), patterns.end());
        std::shuffle(list.begin(), list.end(), rng);
        patterns = ordered_json::array();
        for (auto& p : list) patterns.push_back(std::move(p));
        const auto shuffled = PatternRegistry::load_from_json(doc);
        CHECK(classify_all(shuffled) == reference);
    }
}
