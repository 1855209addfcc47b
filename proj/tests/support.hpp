// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

// Shared helpers for the test suites: a scratch directory, a small ABI encoder written
// independently of the library, and random bundle generators.

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "thunderlens/core.hpp"

namespace tl_test {

using namespace thunderlens;
namespace fs = std::filesystem;

class TempDir {
  public:
    explicit TempDir(const std::string& tag = "tl") {
        static std::uint64_t counter = 0;
        std::random_device rd;
        path_ = fs::temp_directory_path() /
                (tag + "-" + std::to_string(rd()) + "-" + std::to_string(++counter));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const fs::path& path() const { return path_; }
    [[nodiscard]] fs::path operator/(const std::string& name) const { return path_ / name; }

  private:
    fs::path path_;
};

inline std::string read_file(const fs::path& p) {
    std::ifstream in{p, std::ios::binary};
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out{p, std::ios::binary | std::ios::trunc};
    out << text;
}

//! Big-endian word builder; deliberately shares nothing with the library's encoders.
class Abi {
  public:
    Abi& uint(std::uint64_t v) {
        for (int i = 0; i < 24; ++i) out_.push_back(0);
        for (int i = 7; i >= 0; --i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        return *this;
    }
    Abi& big(const std::string& dec) {
        // decimal string -> 32-byte big endian via repeated multiply-add
        std::vector<std::uint8_t> w(32, 0);
        for (char c : dec) {
            unsigned carry = static_cast<unsigned>(c - '0');
            for (int i = 31; i >= 0; --i) {
                const unsigned x = w[static_cast<std::size_t>(i)] * 10u + carry;
                w[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(x & 0xff);
                carry = x >> 8;
            }
        }
        out_.insert(out_.end(), w.begin(), w.end());
        return *this;
    }
    Abi& addr(const Address& a) {
        for (int i = 0; i < 12; ++i) out_.push_back(0);
        out_.insert(out_.end(), a.bytes.begin(), a.bytes.end());
        return *this;
    }
    Abi& raw(const Bytes& b) {
        out_.insert(out_.end(), b.begin(), b.end());
        return *this;
    }
    //! Tail for a dynamic `bytes` value: length word followed by right-padded content.
    Abi& bytes_tail(const Bytes& b) {
        uint(b.size());
        out_.insert(out_.end(), b.begin(), b.end());
        while (out_.size() % 32) out_.push_back(0);
        return *this;
    }
    [[nodiscard]] Bytes done() const { return out_; }

  private:
    Bytes out_;
};

inline Address addr_n(std::uint32_t n) {
    Address a;
    a.bytes[0] = 0xaa;
    a.bytes[16] = static_cast<std::uint8_t>(n >> 24);
    a.bytes[17] = static_cast<std::uint8_t>(n >> 16);
    a.bytes[18] = static_cast<std::uint8_t>(n >> 8);
    a.bytes[19] = static_cast<std::uint8_t>(n);
    return a;
}

inline TxHash hash_n(std::uint64_t n) {
    TxHash h;
    for (int i = 0; i < 8; ++i) h.bytes[31 - static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(n >> (8 * i));
    h.bytes[0] = 0x7e;
    return h;
}

struct Gen {
    std::mt19937_64 rng;
    explicit Gen(std::uint64_t seed) : rng{seed} {}

    std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>{0, n - 1}(rng); }
    bool coin() { return below(2) == 0; }
    Bytes bytes(std::size_t max_len) {
        Bytes b(below(max_len + 1));
        for (auto& x : b) x = static_cast<std::uint8_t>(below(256));
        return b;
    }
    Address address() { return addr_n(static_cast<std::uint32_t>(below(16))); }
    U256 amount() {
        U256 v = rng();
        if (coin()) v = (v << 64) | rng();
        return v;
    }
    Hash32 hash32() {
        Hash32 h;
        for (auto& x : h.bytes) x = static_cast<std::uint8_t>(below(256));
        return h;
    }
};

//! Structurally valid bundle with random content (depth-first call list, ordered logs).
inline TransactionBundle random_bundle(Gen& g, std::uint64_t id) {
    TransactionBundle b;
    b.tx_hash = hash_n(id);
    b.block_number = 9'000'000 + g.below(1000);
    b.tx_index = static_cast<std::uint32_t>(g.below(300));
    b.sender = g.address();
    b.reverted = g.below(10) == 0;
    const auto n = 1 + g.below(24);
    for (std::uint32_t i = 0; i < n; ++i) {
        InternalCall c;
        c.index = i;
        c.depth = i == 0 ? 0 : 1 + static_cast<std::uint32_t>(g.below(b.calls.back().depth + 1));
        c.caller = g.address();
        c.callee = g.address();
        if (g.below(4) != 0) {
            Selector s;
            for (auto& x : s.bytes) x = static_cast<std::uint8_t>(g.below(256));
            c.selector = s;
            c.calldata = g.bytes(100);
        }
        if (g.coin()) c.value = g.amount();
        b.calls.push_back(std::move(c));
    }
    const auto logs = g.below(12);
    std::uint32_t after = 0;
    for (std::uint32_t i = 0; i < logs; ++i) {
        EventLog l;
        l.log_index = i;
        l.emitter = g.address();
        const auto topics = g.below(5);
        for (std::uint64_t t = 0; t < topics; ++t) l.topics.push_back(g.hash32());
        l.data = g.bytes(96);
        after = static_cast<std::uint32_t>(after + g.below(n - after));
        l.after_call_index = after;
        b.logs.push_back(std::move(l));
    }
    return b;
}

}  // namespace tl_test
