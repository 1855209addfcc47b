// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include "support.hpp"
#include "thunderlens/ingestion.hpp"
#include "thunderlens/signatures.hpp"
#include "thunderlens/synth.hpp"

using namespace thunderlens;
using nlohmann::ordered_json;
using tl_test::TempDir;

namespace {

const char* kGolden = "0xb5c8bd9430b6cc87a0e2fe110ece6bf527fa4f170a4bc8cd032f768fc5219838";

std::string golden_path() { return std::string{THUNDERLENS_FIXTURES} + "/bzx_hack/" + kGolden + ".json"; }

TransactionBundle small_bundle(std::uint64_t id) {
    tl_test::Gen g{id};
    auto b = tl_test::random_bundle(g, id);
    b.block_number = 100 + id % 3;
    b.tx_index = static_cast<std::uint32_t>(id);
    return b;
}

FixtureError fixture_error(const std::function<void()>& f) {
    try {
        f();
    } catch (const FixtureError& e) {
        return e;
    }
    FAIL("no FixtureError thrown");
    throw std::logic_error("unreachable");
}

EventLog pair_created(std::uint32_t index, const Address& emitter, const Address& pair) {
    EventLog l;
    l.log_index = index;
    l.emitter = emitter;
    l.topics = {parse_hash(sig::kUniV2PairCreatedEvent), TopicHash{}, TopicHash{}};
    l.data = tl_test::Abi{}.addr(pair).uint(1).done();
    return l;
}

}  // namespace

TEST_CASE("golden fixture round-trips bit-exactly") {
    const auto text = tl_test::read_file(golden_path());
    REQUIRE_FALSE(text.empty());
    const auto bundle = parse_bundle(text, golden_path());
    CHECK(bundle.tx_hash.hex() == kGolden);
    CHECK(serialize_bundle(bundle) == text);
    CHECK_FALSE(validate(bundle).has_value());
}

TEST_CASE("random bundles round-trip through the fixture format") {
    tl_test::Gen g{99};
    for (std::uint64_t i = 0; i < 300; ++i) {
        const auto b = tl_test::random_bundle(g, i);
        const auto text = serialize_bundle(b);
        const auto back = parse_bundle(text);
        CHECK(back == b);
        CHECK(serialize_bundle(back) == text);
    }
}

TEST_CASE("synthetic corpora survive write then load unchanged") {
    const auto data = synth::generate_corpus(250, 3);
    TempDir dir{"ingest"};
    write_fixtures(data.corpus, dir.path());
    const auto back = load_fixtures(dir.path(), 4);
    REQUIRE(back.bundles.size() == data.corpus.bundles.size());
    CHECK(back.bundles == data.corpus.bundles);
    for (const auto& b : back.bundles)
        CHECK(tl_test::read_file(dir / fixture_file_name(b.tx_hash)) == serialize_bundle(b));
}

TEST_CASE("load_fixtures handles empty dirs, single files and sidecars") {
    TempDir dir{"ingest"};
    CHECK(load_fixtures(dir.path()).bundles.empty());
    const auto b = small_bundle(1);
    write_fixture(b, dir.path());
    tl_test::write_file(dir / "registry.json", PatternRegistry::load_default().serialize());
    tl_test::write_file(dir / "manifest.json", "{}");
    tl_test::write_file(dir / "notes.txt", "ignored");
    const auto corpus = load_fixtures(dir.path());
    REQUIRE(corpus.bundles.size() == 1);
    CHECK(corpus.bundles[0] == b);
    CHECK(load_fixtures(dir / fixture_file_name(b.tx_hash)).bundles.size() == 1);
    CHECK(fixture_error([&] { load_fixtures(dir / "missing"); }).kind() == FixtureError::Kind::kIo);
}

TEST_CASE("corpus order is (block, index) whatever the worker count") {
    TempDir dir{"ingest"};
    std::vector<TransactionBundle> all;
    for (std::uint64_t i = 0; i < 40; ++i) {
        all.push_back(small_bundle(i));
        write_fixture(all.back(), dir.path());
    }
    const auto one = load_fixtures(dir.path(), 1);
    const auto many = load_fixtures(dir.path(), 8);
    CHECK(one.bundles == many.bundles);
    for (std::size_t i = 1; i < one.bundles.size(); ++i) {
        const auto& a = one.bundles[i - 1];
        const auto& b = one.bundles[i];
        CHECK(std::tie(a.block_number, a.tx_index) <= std::tie(b.block_number, b.tx_index));
    }
}

TEST_CASE("schema violations name the offending field") {
    const auto base = bundle_to_json(small_bundle(7));
    SECTION("afterCallIndex out of range") {
        auto doc = base;
        doc["calls"] = ordered_json::array({doc["calls"][0]});
        ordered_json logs = ordered_json::array();
        for (std::uint32_t i = 0; i < 4; ++i) {
            logs.push_back({{"logIndex", i},
                            {"emitter", tl_test::addr_n(1).hex()},
                            {"topics", ordered_json::array()},
                            {"data", "0x"},
                            {"afterCallIndex", i == 3 ? 9 : 0}});
        }
        doc["logs"] = logs;
        const auto e = fixture_error([&] { bundle_from_json(doc, "f.json"); });
        CHECK(e.kind() == FixtureError::Kind::kSchema);
        CHECK(e.field() == "logs[3].afterCallIndex");
        CHECK(e.where() == "f.json");
    }
    SECTION("bad address") {
        auto doc = base;
        doc["calls"][0]["callee"] = "0x1234";
        CHECK(fixture_error([&] { bundle_from_json(doc); }).field() == "calls[0].callee");
    }
    SECTION("missing field") {
        auto doc = base;
        doc.erase("reverted");
        CHECK(fixture_error([&] { bundle_from_json(doc); }).field() == "reverted");
    }
    SECTION("value must be decimal") {
        auto doc = base;
        doc["calls"][0]["value"] = "0x10";
        CHECK(fixture_error([&] { bundle_from_json(doc); }).field() == "calls[0].value");
    }
    SECTION("topic length") {
        auto doc = base;
        doc["logs"] = ordered_json::array(
            {{{"logIndex", 0}, {"emitter", tl_test::addr_n(1).hex()}, {"topics", {"0x01"}}, {"data", "0x"}, {"afterCallIndex", 0}}});
        CHECK(fixture_error([&] { bundle_from_json(doc); }).field() == "logs[0].topics[0]");
    }
    SECTION("malformed JSON") {
        CHECK(fixture_error([&] { parse_bundle("{ nope", "x.json"); }).kind() == FixtureError::Kind::kSchema);
    }
}

TEST_CASE("duplicate transaction hashes are rejected") {
    TempDir a{"dup"};
    const auto b = small_bundle(3);
    write_fixture(b, a.path());
    auto copy = serialize_bundle(b);
    tl_test::write_file(a / "copy.json", copy);
    CHECK(fixture_error([&] { load_fixtures(a.path()); }).kind() == FixtureError::Kind::kDuplicate);
}

TEST_CASE("discover_pairs collects factory-announced pairs only") {
    auto reg = PatternRegistry::load_default();
    const auto factory = reg.address_book().uniswap_v2_factory;
    const auto P = tl_test::addr_n(0x501), Q = tl_test::addr_n(0x502);

    CHECK(discover_pairs(Corpus{}, reg).empty());

    auto b = small_bundle(1);
    b.reverted = false;
    b.logs.clear();
    b.logs.push_back(pair_created(0, factory, P));
    auto c = small_bundle(2);
    c.reverted = false;
    c.logs.clear();
    c.logs.push_back(pair_created(0, tl_test::addr_n(0x999), Q));

    CHECK(discover_pairs(make_corpus({c}), reg).empty());
    const auto found = discover_pairs(make_corpus({b, c}), reg);
    CHECK(found == std::set<Address>{P});
    CHECK(reg.address_book().known_pairs.snapshot()->contains(P));
    CHECK_FALSE(reg.address_book().known_pairs.snapshot()->contains(Q));
}

TEST_CASE("discover_pairs is monotone in the corpus") {
    tl_test::Gen g{17};
    for (int round = 0; round < 200; ++round) {
        auto reg_small = PatternRegistry::load_default();
        auto reg_big = PatternRegistry::load_default();
        const auto factory = reg_small.address_book().uniswap_v2_factory;
        std::vector<TransactionBundle> bundles;
        for (std::uint64_t i = 0, n = 1 + g.below(6); i < n; ++i) {
            auto b = small_bundle(static_cast<std::uint64_t>(round) * 100 + i);
            b.reverted = false;
            b.logs.clear();
            for (std::uint32_t k = 0, m = static_cast<std::uint32_t>(g.below(3)); k < m; ++k)
                b.logs.push_back(pair_created(k, g.coin() ? factory : g.address(), tl_test::addr_n(0x700 + static_cast<std::uint32_t>(g.below(40)))));
            bundles.push_back(std::move(b));
        }
        const auto cut = g.below(bundles.size() + 1);
        const std::vector<TransactionBundle> subset(bundles.begin(), bundles.begin() + static_cast<std::ptrdiff_t>(cut));
        const auto small = discover_pairs(make_corpus(subset), reg_small);
        const auto big = discover_pairs(make_corpus(bundles), reg_big);
        CHECK(std::includes(big.begin(), big.end(), small.begin(), small.end()));
    }
}

TEST_CASE("synthetic PairCreated logs decode to the announced pair") {
    // The synthetic factory log carries the pair in its data section; decode it by hand.
    const auto data = synth::generate_corpus(60, 21);
    auto reg = synth::registry();
    const auto found = discover_pairs(data.corpus, reg);
    std::set<Address> by_hand;
    const auto hash = parse_hash(sig::kUniV2PairCreatedEvent);
    for (const auto& b : data.corpus.bundles)
        for (const auto& l : b.logs)
            if (!b.reverted && !l.topics.empty() && l.topics[0] == hash &&
                l.emitter == reg.address_book().uniswap_v2_factory && l.data.size() >= 32)
                by_hand.insert(Address::from_view(ByteView{l.data}.subspan(12, 20)));
    CHECK(found == by_hand);
}
