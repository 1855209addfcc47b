// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include "support.hpp"
#include "thunderlens/abi.hpp"
#include "thunderlens/synth.hpp"

using namespace thunderlens;
using tl_test::Abi;
using tl_test::Gen;

namespace {

InternalCall make_call(std::uint32_t index, std::uint32_t depth, Address caller, Address callee) {
    InternalCall c;
    c.index = index;
    c.depth = depth;
    c.caller = caller;
    c.callee = callee;
    return c;
}

// Naive parent: the closest earlier call one level up.
std::optional<std::uint32_t> naive_parent(const TransactionBundle& b, std::uint32_t i) {
    const auto d = b.calls[i].depth;
    if (d == 0) return std::nullopt;
    for (std::uint32_t j = i; j-- > 0;)
        if (b.calls[j].depth == d - 1) return j;
    return std::nullopt;
}

std::uint32_t naive_subtree_end(const TransactionBundle& b, std::uint32_t i) {
    std::uint32_t k = i;
    while (k + 1 < b.calls.size() && b.calls[k + 1].depth > b.calls[i].depth) ++k;
    return k;
}

}  // namespace

TEST_CASE("hex codec") {
    CHECK(to_hex(*from_hex("0xDeadBEEF")) == "0xdeadbeef");
    CHECK(from_hex("abc") == std::nullopt);
    CHECK(from_hex("0xzz") == std::nullopt);
    CHECK(from_hex("0x")->empty());
    CHECK(Selector::parse("0xa9059cbb").has_value());
    CHECK_FALSE(Selector::parse("0xa9059c").has_value());
    CHECK(parse_address("0x398EC7346DCD622EDC5AE82352F02BE94C62D119").hex() ==
          "0x398ec7346dcd622edc5ae82352f02be94c62d119");
    CHECK_THROWS_AS(parse_hash("0x12"), std::invalid_argument);
}

TEST_CASE("u256 decimal and word conversions") {
    const std::string max = "115792089237316195423570985008687907853269984665640564039457584007913129639935";
    auto v = u256_from_dec(max);
    REQUIRE(v);
    CHECK(to_dec(*v) == max);
    CHECK(u256_from_dec("115792089237316195423570985008687907853269984665640564039457584007913129639936") ==
          std::nullopt);
    CHECK(u256_from_dec("") == std::nullopt);
    CHECK(u256_from_dec("12a") == std::nullopt);
    const auto w = Abi{}.big("123456789012345678901234567890").done();
    CHECK(to_dec(u256_from_word(w)) == "123456789012345678901234567890");
    const auto back = word_from_u256(*u256_from_dec("123456789012345678901234567890"));
    CHECK(std::equal(back.begin(), back.end(), w.begin()));
}

TEST_CASE("asset ids keep addresses and bytes32 keys apart") {
    const auto a = AssetId::parse("0x6b175474e89094c44da98b954eedeac495271d0f");
    REQUIRE(a);
    CHECK(a->is_address());
    CHECK(a->hex() == "0x6b175474e89094c44da98b954eedeac495271d0f");
    const auto ilk = AssetId::parse("0x4554482d41000000000000000000000000000000000000000000000000000000");
    REQUIRE(ilk);
    CHECK_FALSE(ilk->is_address());
    CHECK_FALSE(ilk->as_address().has_value());
    CHECK(ilk->hex() == "0x4554482d41000000000000000000000000000000000000000000000000000000");
}

TEST_CASE("token_transfer_view decodes ERC20 transfers") {
    const auto T = tl_test::addr_n(1), A = tl_test::addr_n(2), B = tl_test::addr_n(3);
    SECTION("transfer") {
        auto c = make_call(0, 0, A, T);
        c.selector = Selector{kTransferSelector};
        c.calldata = Abi{}.addr(B).uint(100).done();
        const auto t = token_transfer_view(c);
        REQUIRE(t);
        CHECK(*t == TokenTransfer{T, A, B, 100});
    }
    SECTION("transferFrom") {
        auto c = make_call(0, 0, tl_test::addr_n(9), T);
        c.selector = Selector{kTransferFromSelector};
        c.calldata = Abi{}.addr(A).addr(B).uint(7).done();
        const auto t = token_transfer_view(c);
        REQUIRE(t);
        CHECK(*t == TokenTransfer{T, A, B, 7});
    }
    SECTION("plain value transfer") {
        auto c = make_call(0, 0, A, B);
        c.value = 5;
        CHECK_FALSE(token_transfer_view(c).has_value());
        const auto moves = asset_movements(c);
        REQUIRE(moves.size() == 1);
        CHECK(moves[0] == TokenTransfer{kEthAddress, A, B, 5});
    }
    SECTION("short calldata under a matching selector") {
        auto c = make_call(0, 0, A, T);
        c.selector = Selector{kTransferSelector};
        c.calldata = Abi{}.addr(B).done();
        CHECK_FALSE(token_transfer_view(c).has_value());
    }
}

TEST_CASE("token_transfer_view is total over arbitrary calldata") {
    Gen g{11};
    for (int i = 0; i < 2000; ++i) {
        InternalCall c;
        if (g.coin()) {
            c.selector = Selector{g.coin() ? kTransferSelector : kTransferFromSelector};
        } else if (g.coin()) {
            Selector s;
            for (auto& x : s.bytes) x = static_cast<std::uint8_t>(g.below(256));
            c.selector = s;
        }
        c.calldata = g.bytes(140);
        const auto t = token_transfer_view(c);
        if (t) {
            const bool plain = c.selector->bytes == kTransferSelector;
            CHECK(c.calldata.size() >= (plain ? 64u : 96u));
        }
    }
}

TEST_CASE("abi readers reject out-of-range dynamic bytes") {
    const Bytes payload{1, 2, 3};
    const auto ok = Abi{}.uint(0).uint(0).uint(0).uint(128).bytes_tail(payload).done();
    const auto v = abi::dynamic_bytes_at(ok, 3);
    REQUIRE(v);
    CHECK(Bytes(v->begin(), v->end()) == payload);
    const auto bad_offset = Abi{}.uint(0).uint(0).uint(0).uint(4096).done();
    CHECK_FALSE(abi::dynamic_bytes_at(bad_offset, 3).has_value());
    const auto bad_len = Abi{}.uint(32).uint(1000).done();
    CHECK_FALSE(abi::dynamic_bytes_at(bad_len, 0).has_value());
    const auto neg = abi::as_int256(*u256_from_dec(
        "115792089237316195423570985008687907853269984665640564039457584007913129639931"));
    CHECK(neg.first);
    CHECK(neg.second == 5);
}

TEST_CASE("validate reports the first violation with its path") {
    TransactionBundle b;
    CHECK(validate(b)->path == "calls");
    b.calls.push_back(make_call(0, 0, {}, {}));
    b.calls.push_back(make_call(1, 1, {}, {}));
    CHECK_FALSE(validate(b).has_value());
    b.calls.push_back(make_call(2, 3, {}, {}));
    CHECK(validate(b)->path == "calls[2].depth");
    b.calls[2].depth = 2;
    b.calls[2].index = 5;
    CHECK(validate(b)->path == "calls[2].index");
    b.calls[2].index = 2;
    for (std::uint32_t i = 0; i < 4; ++i) {
        EventLog l;
        l.log_index = i;
        l.after_call_index = i < 3 ? i : 7;
        b.logs.push_back(l);
    }
    CHECK(validate(b)->path == "logs[3].afterCallIndex");
    b.logs[3].after_call_index = 1;
    CHECK(validate(b)->path == "logs[3].afterCallIndex");
    b.logs[3].after_call_index = 2;
    CHECK_FALSE(validate(b).has_value());
    b.logs[1].topics.resize(5);
    CHECK(validate(b)->path == "logs[1].topics");
}

TEST_CASE("call tree agrees with a naive scan on random bundles") {
    Gen g{2024};
    for (int round = 0; round < 300; ++round) {
        const auto b = tl_test::random_bundle(g, static_cast<std::uint64_t>(round));
        REQUIRE_FALSE(validate(b).has_value());
        const CallTree tree{b};
        REQUIRE(tree.size() == b.calls.size());
        for (std::uint32_t i = 0; i < b.calls.size(); ++i) {
            CHECK(tree.parent(i) == naive_parent(b, i));
            CHECK(tree.subtree_end(i) == naive_subtree_end(b, i));
            for (auto c : tree.children(i)) CHECK(naive_parent(b, c) == i);
        }
        for (const auto& log : b.logs) {
            std::optional<std::uint32_t> want;
            for (std::optional<std::uint32_t> cur = log.after_call_index; cur; cur = naive_parent(b, *cur))
                if (b.calls[*cur].callee == log.emitter) {
                    want = cur;
                    break;
                }
            CHECK(tree.emitting_frame(log) == want);
        }
    }
}

TEST_CASE("every log of a synthetic bundle refers to an existing call") {
    for (std::uint64_t i = 0; i < 300; ++i) {
        const auto scenario = synth::draw_scenario(5, i);
        const auto [bundle, truth] = synth::generate(scenario);
        INFO(scenario.name);
        CHECK_FALSE(validate(bundle).has_value());
        for (const auto& log : bundle.logs) CHECK(log.after_call_index < bundle.calls.size());
    }
}
