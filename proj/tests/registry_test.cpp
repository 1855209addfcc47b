// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <map>
#include <set>
#include <thread>

#include "support.hpp"
#include "signature_table.hpp"
#include "thunderlens/registry.hpp"

using namespace thunderlens;
using nlohmann::ordered_json;

using tl_test::table;
using tl_test::values_of;
using tl_test::carries;

TEST_CASE("default registry pins every signature table value byte for byte") {
    const auto reg = PatternRegistry::load_default();
    for (const auto& row : table()) {
        INFO(Platform{row.platform}.name() << " " << row.name << " " << row.value);
        const std::string value{row.value};
        std::size_t hits = 0;
        for (const auto* p : reg.find(row.platform, row.category)) hits += carries(*p, value) ? 1 : 0;
        // The margin Mint event is shared by the four mint selectors.
        const bool shared = value == "0x458f5fa412d0f69b08dd84872b0215675cc67bc1d5b6fd93300a1c3878b86196";
        CHECK(hits == (shared ? 4u : 1u));
        // Byte equality, not just text: parse both sides.
        const auto raw = from_hex(value);
        REQUIRE(raw);
        bool byte_equal = false;
        for (const auto* p : reg.find(row.platform, row.category)) {
            if (raw->size() == 4 && p->selector && std::equal(raw->begin(), raw->end(), p->selector->bytes.begin()))
                byte_equal = true;
            if (raw->size() == 32 && p->event_hash &&
                std::equal(raw->begin(), raw->end(), p->event_hash->bytes.begin()))
                byte_equal = true;
            for (const auto& s : p->chain)
                if (raw->size() == 32 && std::equal(raw->begin(), raw->end(), s.hash.bytes.begin())) byte_equal = true;
        }
        CHECK(byte_equal);
    }
}

TEST_CASE("default registry carries nothing outside the signature table") {
    std::set<std::string> allowed;
    for (const auto& row : table()) allowed.insert(row.value);
    const auto reg = PatternRegistry::load_default();
    std::set<std::string> seen;
    for (const auto& p : reg.patterns())
        for (const auto& v : values_of(p)) {
            INFO(p.platform.name() << " " << to_string(p.category) << " " << v);
            CHECK(allowed.contains(v));
            seen.insert(v);
        }
    CHECK(seen == allowed);
}

TEST_CASE("dYdX flash loans are one ordered chain with an optional LogCall") {
    const auto reg = PatternRegistry::load_default();
    const auto found = reg.find(PlatformId::kDydx, Category::kFlashLoan);
    REQUIRE(found.size() == 1);
    const auto& p = *found[0];
    CHECK(p.kind == MatcherKind::kOrderedEventChain);
    std::size_t optional = 0;
    for (const auto& s : p.chain) {
        if (s.optional) {
            ++optional;
            CHECK(s.hash.hex() == "0xab38cdc4a831ebe6542bf277d36b65dbc5c66a4d03ec6cf56ac38de05dc30098");
        }
    }
    CHECK(optional == 1);
    CHECK(reg.find(PlatformId::kAave, Category::kMarginTrade).empty());
}

TEST_CASE("DeFi Saver ships as an inert slot") {
    const auto reg = PatternRegistry::load_default();
    const auto slot = reg.find(PlatformId::kDefiSaver, Category::kAntiLiquidation);
    REQUIRE(slot.size() == 1);
    CHECK_FALSE(slot[0]->active());
    CHECK(reg.address_book().defi_saver_emitters.empty());
    CHECK(reg.address_book().bzx_itokens.empty());
    CHECK(reg.address_book().aave_lending_pool.hex() == "0x398ec7346dcd622edc5ae82352f02be94c62d119");
    CHECK(reg.address_book().uniswap_v2_factory.hex() == "0x5c69bee701ef814a2b6a3edd4b1652cb9cc5aa6f");
}

TEST_CASE("load_default is deterministic") {
    const auto a = PatternRegistry::load_default();
    const auto b = PatternRegistry::load_default();
    CHECK(a == b);
    CHECK(a.serialize() == b.serialize());
    CHECK(a.checksum() == b.checksum());
}

TEST_CASE("serialized default registry loads back equal and byte-identical") {
    const auto reg = PatternRegistry::load_default();
    const auto text = reg.serialize();
    const auto back = PatternRegistry::load_from_string(text);
    CHECK(back == reg);
    CHECK(back.serialize() == text);

    tl_test::TempDir dir{"reg"};
    tl_test::write_file(dir / "r.json", text);
    CHECK(PatternRegistry::load_from_file(dir / "r.json") == reg);
}

TEST_CASE("example configuration activates the anti-liquidation slot") {
    const auto reg = PatternRegistry::load_from_file(std::string{THUNDERLENS_CONFIG} + "/registry.example.json");
    const auto slot = reg.find(PlatformId::kDefiSaver, Category::kAntiLiquidation);
    REQUIRE(slot.size() == 1);
    CHECK(slot[0]->active());
    CHECK(reg.address_book().bzx_itokens.size() == 2);
    CHECK(PatternRegistry::load_from_string(reg.serialize()) == reg);
}

TEST_CASE("registry files report malformed input with a field path") {
    auto message = [](const std::string& text) {
        try {
            PatternRegistry::load_from_string(text);
        } catch (const RegistryError& e) {
            return std::string{e.what()};
        }
        return std::string{"<no error>"};
    };
    CHECK_THAT(message("{\"mode\": \"merge\"}"), Catch::Matchers::ContainsSubstring("mode"));
    CHECK_THAT(message("{\n\"patterns\": [\n"), Catch::Matchers::ContainsSubstring("line"));
    CHECK_THAT(message(R"({"patterns": [{"platform": "X", "category": "Exchange", "matcher_kind": "EventTopic",
                                         "event_hash": "0x12"}]})"),
               Catch::Matchers::ContainsSubstring("patterns[0].event_hash"));
    CHECK_THAT(message(R"({"patterns": [{"platform": "X", "category": "Nope", "matcher_kind": "EventTopic"}]})"),
               Catch::Matchers::ContainsSubstring("patterns[0].category"));
    CHECK_THAT(message(R"({"patterns": [{"platform": "X", "category": "Exchange", "matcher_kind": "FunctionSelector"}]})"),
               Catch::Matchers::ContainsSubstring("selector"));
    CHECK_THAT(message(R"({"patterns": [{"platform": "X", "category": "Exchange", "matcher_kind": "EventTopic",
                                         "emitter": ["@nowhere"]}]})"),
               Catch::Matchers::ContainsSubstring("patterns[0].emitter"));
    CHECK_THAT(message(R"({"patterns": [{"platform": "X", "category": "Exchange", "matcher_kind": "EventTopic",
                                         "parameter_map": {"runner": "topic:"}}]})"),
               Catch::Matchers::ContainsSubstring("parameter_map.runner"));
    CHECK_THAT(message(R"({"patterns": [{"platform": "Aave", "category": "FlashLoan", "matcher_kind": "EventTopic",
        "event_hash": "0x5b8f46461c1dd69fb968f1a003acee221ea3e19540e350233b612ddb43433b55"}]})"),
               Catch::Matchers::ContainsSubstring("duplicate"));
    CHECK_THROWS_AS(PatternRegistry::load_from_file("/nonexistent/registry.json"), RegistryError);
}

TEST_CASE("replace mode starts from an empty pattern list") {
    const auto reg = PatternRegistry::load_from_string(R"({"mode": "replace", "patterns": [
        {"platform": "Custom", "category": "Exchange", "matcher_kind": "EventTopic",
         "event_hash": "0x1111111111111111111111111111111111111111111111111111111111111111"}]})");
    REQUIRE(reg.patterns().size() == 1);
    CHECK(reg.patterns()[0].platform.name() == "Custom");
}

TEST_CASE("parameter sources parse the documented grammar") {
    for (const char* text : {"topic:1", "data:0", "data@68", "arg:2", "emitter", "callee", "caller", "value", "sender",
                             "token_in", "token_out", "recipient_out", "token_in_amount", "token_out_amount",
                             "step[2].topic:3", "topic:2|token_out", "const:0x6b175474e89094c44da98b954eedeac495271d0f"}) {
        INFO(text);
        const auto s = ParamSource::parse(text);
        CHECK(s.text == text);
        CHECK_FALSE(s.terms.empty());
    }
    for (const char* text : {"", "topic", "topic:x", "nonsense", "const:0x12", "step[].topic:1", "topic:1|"}) {
        INFO(text);
        CHECK_THROWS_AS(ParamSource::parse(text), std::invalid_argument);
    }
}

TEST_CASE("address constraints resolve against the address book") {
    auto reg = PatternRegistry::load_default();
    const auto pair = tl_test::addr_n(77);
    const AddressConstraint pairs{BookRef::kKnownPairs};
    CHECK(reg.constraint_is_empty(pairs));
    CHECK_FALSE(reg.satisfies(pairs, pair));
    reg.address_book().known_pairs.add({pair});
    CHECK_FALSE(reg.constraint_is_empty(pairs));
    CHECK(reg.satisfies(pairs, pair));
    CHECK(reg.satisfies(std::nullopt, pair));
    CHECK_FALSE(reg.constraint_is_empty(std::nullopt));
    const AddressConstraint literal{tl_test::addr_n(5)};
    CHECK(reg.satisfies(literal, tl_test::addr_n(5)));
    CHECK_FALSE(reg.satisfies(literal, tl_test::addr_n(6)));
}

TEST_CASE("known pairs grow monotonically under concurrent appends") {
    KnownPairs pairs;
    {
        std::vector<std::jthread> threads;
        for (std::uint32_t t = 0; t < 8; ++t)
            threads.emplace_back([&pairs, t] {
                for (std::uint32_t i = 0; i < 200; ++i) {
                    const auto before = pairs.snapshot()->size();
                    pairs.add({tl_test::addr_n(t * 1000 + i)});
                    CHECK(pairs.snapshot()->size() > before);
                }
            });
    }
    CHECK(pairs.snapshot()->size() == 1600);
}

TEST_CASE("random registries round-trip through their serialization") {
    tl_test::Gen g{4242};
    static const std::vector<std::string> categories{"Exchange", "LendingBorrowing", "Liquidation", "MarginTrade"};
    for (int round = 0; round < 250; ++round) {
        ordered_json doc;
        doc["mode"] = g.coin() ? "extend" : "replace";
        ordered_json book;
        ordered_json itokens = ordered_json::array();
        for (std::uint64_t i = 0, n = g.below(4); i < n; ++i) itokens.push_back(tl_test::addr_n(100 + static_cast<std::uint32_t>(g.below(50))).hex());
        book["bzx_itokens"] = itokens;
        if (g.coin()) book["aave_lending_pool"] = g.address().hex();
        ordered_json pairs = ordered_json::array();
        for (std::uint64_t i = 0, n = g.below(5); i < n; ++i) pairs.push_back(tl_test::addr_n(500 + static_cast<std::uint32_t>(g.below(90))).hex());
        book["known_pairs"] = pairs;
        doc["address_book"] = book;
        ordered_json patterns = ordered_json::array();
        for (std::uint64_t i = 0, n = g.below(5); i < n; ++i) {
            ordered_json p;
            p["platform"] = "Custom" + std::to_string(i);
            p["category"] = categories[g.below(categories.size())];
            if (g.coin()) {
                p["matcher_kind"] = "EventTopic";
                p["event_hash"] = g.hash32().hex();
                p["emitter"] = ordered_json::array({g.address().hex(), "@known_pairs"});
            } else {
                p["matcher_kind"] = "FunctionSelector";
                Selector sel;
                for (auto& b : sel.bytes) b = static_cast<std::uint8_t>(g.below(256));
                p["selector"] = sel.hex();
                p["callee"] = ordered_json::array({g.address().hex()});
            }
            p["parameter_map"] = {{"service_provider", "emitter"}, {"runner", g.coin() ? "caller" : "topic:1|sender"}};
            if (g.coin()) p["fee"] = "0.3%";
            patterns.push_back(p);
        }
        doc["patterns"] = patterns;
        const auto reg = PatternRegistry::load_from_json(doc);
        const auto text = reg.serialize();
        const auto back = PatternRegistry::load_from_string(text);
        CHECK(back == reg);
        CHECK(back.serialize() == text);
        CHECK(back.checksum() == reg.checksum());
    }
}
