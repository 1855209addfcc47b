// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#include "thunderlens/core.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace thunderlens {

namespace {

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

std::optional<Bytes> from_hex(std::string_view text) {
    if (text.starts_with("0x") || text.starts_with("0X")) text.remove_prefix(2);
    if (text.size() % 2 != 0) return std::nullopt;
    Bytes out(text.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int hi = hex_digit(text[2 * i]);
        const int lo = hex_digit(text[2 * i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

std::string to_hex(ByteView bytes) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 + bytes.size() * 2);
    out += "0x";
    for (auto b : bytes) {
        out += kDigits[b >> 4];
        out += kDigits[b & 0x0f];
    }
    return out;
}

std::optional<U256> u256_from_dec(std::string_view text) {
    if (text.empty() || text.size() > 78) return std::nullopt;
    U256 out{0};
    const U256 max = std::numeric_limits<U256>::max();
    for (char c : text) {
        if (c < '0' || c > '9') return std::nullopt;
        const unsigned digit = static_cast<unsigned>(c - '0');
        if (out > (max - digit) / 10) return std::nullopt;
        out = out * 10 + digit;
    }
    return out;
}

std::string to_dec(const U256& value) { return value.str(); }

U256 u256_from_word(ByteView word32) {
    U256 out{0};
    for (auto b : word32.first(32)) out = (out << 8) | b;
    return out;
}

std::array<std::uint8_t, 32> word_from_u256(const U256& value) {
    std::array<std::uint8_t, 32> out{};
    U256 v = value;
    for (int i = 31; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v & 0xff);
        v >>= 8;
    }
    return out;
}

Address parse_address(std::string_view text) {
    auto a = Address::parse(text);
    if (!a) throw std::invalid_argument("address must be 20 bytes of hex: '" + std::string{text} + "'");
    return *a;
}

Selector parse_selector(std::string_view text) {
    auto s = Selector::parse(text);
    if (!s) throw std::invalid_argument("selector must be 4 bytes: '" + std::string{text} + "'");
    return *s;
}

Hash32 parse_hash(std::string_view text) {
    auto h = Hash32::parse(text);
    if (!h) throw std::invalid_argument("hash must be 32 bytes: '" + std::string{text} + "'");
    return *h;
}

Address address_from_word(ByteView word32) { return Address::from_view(word32.subspan(12, 20)); }

const Address kEthAddress = *Address::parse("0xeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeee");

AssetId AssetId::from_address(const Address& a) {
    AssetId out;
    std::copy(a.bytes.begin(), a.bytes.end(), out.word.begin() + 12);
    return out;
}

AssetId AssetId::from_word(ByteView word32) {
    AssetId out;
    std::copy_n(word32.begin(), 32, out.word.begin());
    return out;
}

std::optional<AssetId> AssetId::parse(std::string_view text) {
    if (auto a = Address::parse(text)) return from_address(*a);
    if (auto w = Hash32::parse(text)) return from_word(w->bytes);
    return std::nullopt;
}

bool AssetId::is_address() const {
    return std::all_of(word.begin(), word.begin() + 12, [](auto b) { return b == 0; });
}

std::optional<Address> AssetId::as_address() const {
    if (!is_address()) return std::nullopt;
    return address_from_word(word);
}

std::string AssetId::hex() const {
    if (is_address()) return to_hex(ByteView{word}.subspan(12));
    return to_hex(word);
}

std::optional<ValidationError> validate(const TransactionBundle& bundle) {
    if (bundle.calls.empty()) return ValidationError{"calls", "must contain the external call"};
    for (std::size_t i = 0; i < bundle.calls.size(); ++i) {
        const auto& c = bundle.calls[i];
        const std::string path = "calls[" + std::to_string(i) + "]";
        if (c.index != i) return ValidationError{path + ".index", "indexes must be 0..n-1 in execution order"};
        if (i == 0) {
            if (c.depth != 0) return ValidationError{path + ".depth", "external call must have depth 0"};
        } else if (c.depth == 0 || c.depth > bundle.calls[i - 1].depth + 1) {
            return ValidationError{path + ".depth", "child depth must be parent depth + 1"};
        }
    }
    for (std::size_t i = 0; i < bundle.logs.size(); ++i) {
        const auto& l = bundle.logs[i];
        const std::string path = "logs[" + std::to_string(i) + "]";
        if (l.log_index != i) return ValidationError{path + ".logIndex", "log indexes must be 0..n-1"};
        if (l.topics.size() > 4) return ValidationError{path + ".topics", "at most 4 topics"};
        if (l.after_call_index >= bundle.calls.size())
            return ValidationError{path + ".afterCallIndex", "refers to a call outside the bundle"};
        if (i > 0 && l.after_call_index < bundle.logs[i - 1].after_call_index)
            return ValidationError{path + ".afterCallIndex", "logs must follow execution order"};
    }
    return std::nullopt;
}

CallTree::CallTree(const TransactionBundle& bundle)
    : bundle_{&bundle}, parent_(bundle.calls.size(), -1), subtree_end_(bundle.calls.size(), 0) {
    std::vector<std::uint32_t> stack;
    for (std::uint32_t i = 0; i < bundle.calls.size(); ++i) {
        const auto depth = bundle.calls[i].depth;
        while (!stack.empty() && bundle.calls[stack.back()].depth >= depth) stack.pop_back();
        if (!stack.empty()) parent_[i] = stack.back();
        stack.push_back(i);
        subtree_end_[i] = i;
    }
    for (std::uint32_t i = static_cast<std::uint32_t>(bundle.calls.size()); i-- > 0;) {
        if (parent_[i] >= 0) {
            auto& end = subtree_end_[static_cast<std::size_t>(parent_[i])];
            end = std::max(end, subtree_end_[i]);
        }
    }
}

std::optional<std::uint32_t> CallTree::parent(std::uint32_t index) const {
    if (parent_[index] < 0) return std::nullopt;
    return static_cast<std::uint32_t>(parent_[index]);
}

std::vector<std::uint32_t> CallTree::children(std::uint32_t index) const {
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = index + 1; i <= subtree_end_[index]; i = subtree_end_[i] + 1) out.push_back(i);
    return out;
}

std::optional<std::uint32_t> CallTree::emitting_frame(const EventLog& log) const {
    if (log.after_call_index >= size()) return std::nullopt;
    std::optional<std::uint32_t> cur = log.after_call_index;
    while (cur) {
        if (bundle_->calls[*cur].callee == log.emitter) return cur;
        cur = parent(*cur);
    }
    return std::nullopt;
}

std::optional<TokenTransfer> token_transfer_view(const InternalCall& call) {
    if (!call.selector) return std::nullopt;
    const auto& sel = call.selector->bytes;
    const ByteView args{call.calldata};
    if (sel == kTransferSelector) {
        if (args.size() < 64) return std::nullopt;
        return TokenTransfer{call.callee, call.caller, address_from_word(args.subspan(0, 32)),
                             u256_from_word(args.subspan(32, 32))};
    }
    if (sel == kTransferFromSelector) {
        if (args.size() < 96) return std::nullopt;
        return TokenTransfer{call.callee, address_from_word(args.subspan(0, 32)),
                             address_from_word(args.subspan(32, 32)), u256_from_word(args.subspan(64, 32))};
    }
    return std::nullopt;
}

std::vector<TokenTransfer> asset_movements(const InternalCall& call) {
    std::vector<TokenTransfer> out;
    if (call.value != 0) out.push_back(TokenTransfer{kEthAddress, call.caller, call.callee, call.value});
    if (auto t = token_transfer_view(call)) out.push_back(*t);
    return out;
}

}  // namespace thunderlens
