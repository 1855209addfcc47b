// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace thunderlens {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;
using U256 = boost::multiprecision::uint256_t;

//! Decodes `0x`-prefixed (or bare) hex. Case-insensitive. Odd length is rejected.
std::optional<Bytes> from_hex(std::string_view text);
std::string to_hex(ByteView bytes);  // always `0x`-prefixed, lowercase

std::optional<U256> u256_from_dec(std::string_view text);
std::string to_dec(const U256& value);
U256 u256_from_word(ByteView word32);
std::array<std::uint8_t, 32> word_from_u256(const U256& value);

template <std::size_t N, class Tag>
struct FixedBytes {
    static constexpr std::size_t kSize = N;
    std::array<std::uint8_t, N> bytes{};

    //! Exact-length parse; text comparison is case-insensitive because parsing normalizes.
    static std::optional<FixedBytes> parse(std::string_view text) {
        auto raw = from_hex(text);
        if (!raw || raw->size() != N) return std::nullopt;
        FixedBytes out;
        std::copy(raw->begin(), raw->end(), out.bytes.begin());
        return out;
    }
    static FixedBytes from_view(ByteView view) {
        FixedBytes out;
        std::copy_n(view.begin(), N, out.bytes.begin());
        return out;
    }

    [[nodiscard]] std::string hex() const { return to_hex(bytes); }
    [[nodiscard]] ByteView view() const { return bytes; }
    [[nodiscard]] bool is_zero() const {
        for (auto b : bytes)
            if (b != 0) return false;
        return true;
    }

    auto operator<=>(const FixedBytes&) const = default;
};

struct AddressTag {};
struct SelectorTag {};
struct Hash32Tag {};

using Address = FixedBytes<20, AddressTag>;
using Selector = FixedBytes<4, SelectorTag>;
using Hash32 = FixedBytes<32, Hash32Tag>;
using TopicHash = Hash32;
using TxHash = Hash32;

//! Parse helpers that throw std::invalid_argument with a readable message.
Address parse_address(std::string_view text);
Selector parse_selector(std::string_view text);
Hash32 parse_hash(std::string_view text);

//! Last 20 bytes of an ABI word.
Address address_from_word(ByteView word32);

//! Placeholder used for native ether in asset fields (Aave/Kyber convention).
extern const Address kEthAddress;

//! Asset identifier. Token addresses are stored left-padded; bytes32 keys
//! (MakerDAO ilks, Synthetix currency keys) are stored verbatim.
struct AssetId {
    std::array<std::uint8_t, 32> word{};

    static AssetId from_address(const Address& a);
    static AssetId from_word(ByteView word32);
    static std::optional<AssetId> parse(std::string_view text);

    [[nodiscard]] bool is_address() const;
    [[nodiscard]] std::optional<Address> as_address() const;
    [[nodiscard]] std::string hex() const;

    auto operator<=>(const AssetId&) const = default;
};

struct InternalCall {
    std::uint32_t index{0};
    std::uint32_t depth{0};
    Address caller;
    Address callee;
    std::optional<Selector> selector;
    Bytes calldata;  // arguments after the selector
    U256 value{0};

    bool operator==(const InternalCall&) const = default;
};

struct EventLog {
    std::uint32_t log_index{0};
    Address emitter;
    std::vector<TopicHash> topics;
    Bytes data;
    std::uint32_t after_call_index{0};

    bool operator==(const EventLog&) const = default;
};

struct TransactionBundle {
    TxHash tx_hash;
    std::uint64_t block_number{0};
    std::uint32_t tx_index{0};
    Address sender;
    bool reverted{false};
    std::vector<InternalCall> calls;
    std::vector<EventLog> logs;

    bool operator==(const TransactionBundle&) const = default;
};

struct ValidationError {
    std::string path;
    std::string message;
};

//! Checks every core invariant; returns the first violation with its field path.
std::optional<ValidationError> validate(const TransactionBundle& bundle);

//! Parent/subtree index over a depth-first flattened call list.
class CallTree {
  public:
    explicit CallTree(const TransactionBundle& bundle);

    [[nodiscard]] std::size_t size() const { return parent_.size(); }
    [[nodiscard]] std::optional<std::uint32_t> parent(std::uint32_t index) const;
    //! Last index inside the subtree rooted at `index` (inclusive).
    [[nodiscard]] std::uint32_t subtree_end(std::uint32_t index) const { return subtree_end_[index]; }
    [[nodiscard]] bool in_subtree(std::uint32_t root, std::uint32_t index) const {
        return index >= root && index <= subtree_end_[root];
    }
    [[nodiscard]] std::vector<std::uint32_t> children(std::uint32_t index) const;

    //! Nearest ancestor-or-self of the log's position whose callee is the emitter.
    [[nodiscard]] std::optional<std::uint32_t> emitting_frame(const EventLog& log) const;

  private:
    const TransactionBundle* bundle_;
    std::vector<std::int64_t> parent_;
    std::vector<std::uint32_t> subtree_end_;
};

struct TokenTransfer {
    Address token;
    Address from;
    Address to;
    U256 amount{0};

    bool operator==(const TokenTransfer&) const = default;
};

inline constexpr std::array<std::uint8_t, 4> kTransferSelector{0xa9, 0x05, 0x9c, 0xbb};
inline constexpr std::array<std::uint8_t, 4> kTransferFromSelector{0x23, 0xb8, 0x72, 0xdd};

//! ERC20 transfer/transferFrom decoded from a call. Total: never throws.
std::optional<TokenTransfer> token_transfer_view(const InternalCall& call);

//! Every asset movement a call performs: its ERC20 transfer (if any) and its
//! ether value (token = kEthAddress, caller -> callee).
std::vector<TokenTransfer> asset_movements(const InternalCall& call);

}  // namespace thunderlens

template <std::size_t N, class Tag>
struct std::hash<thunderlens::FixedBytes<N, Tag>> {
    std::size_t operator()(const thunderlens::FixedBytes<N, Tag>& v) const noexcept {
        std::uint64_t h = 1469598103934665603ULL;
        for (auto b : v.bytes) h = (h ^ b) * 1099511628211ULL;
        return static_cast<std::size_t>(h);
    }
};
