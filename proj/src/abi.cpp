// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#include "thunderlens/abi.hpp"

namespace thunderlens::abi {

std::optional<ByteView> word_at_offset(ByteView data, std::size_t byte_offset) {
    if (byte_offset > data.size() || data.size() - byte_offset < 32) return std::nullopt;
    return data.subspan(byte_offset, 32);
}

std::optional<U256> uint_at(ByteView data, std::size_t index) {
    auto w = word(data, index);
    if (!w) return std::nullopt;
    return u256_from_word(*w);
}

std::optional<Address> address_at(ByteView data, std::size_t index) {
    auto w = word(data, index);
    if (!w) return std::nullopt;
    return address_from_word(*w);
}

std::optional<ByteView> dynamic_bytes_at(ByteView data, std::size_t index) {
    auto head = uint_at(data, index);
    if (!head || *head > data.size()) return std::nullopt;
    const auto offset = static_cast<std::size_t>(*head);
    auto len_word = word_at_offset(data, offset);
    if (!len_word) return std::nullopt;
    const U256 len = u256_from_word(*len_word);
    if (len > data.size() - offset - 32) return std::nullopt;
    return data.subspan(offset + 32, static_cast<std::size_t>(len));
}

std::pair<bool, U256> as_int256(const U256& raw) {
    if (!boost::multiprecision::bit_test(raw, 255)) return {false, raw};
    return {true, U256{~raw + 1}};
}

}  // namespace thunderlens::abi
