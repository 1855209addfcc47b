// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>

#include "thunderlens/core.hpp"

// Read-only helpers over ABI-encoded argument and event-data sections.
namespace thunderlens::abi {

//! 32 bytes starting at `byte_offset`, if fully inside `data`.
std::optional<ByteView> word_at_offset(ByteView data, std::size_t byte_offset);

inline std::optional<ByteView> word(ByteView data, std::size_t index) { return word_at_offset(data, index * 32); }

std::optional<U256> uint_at(ByteView data, std::size_t index);
std::optional<Address> address_at(ByteView data, std::size_t index);

//! Dynamic `bytes` argument whose head slot is `index`. Rejects out-of-range offsets/lengths.
std::optional<ByteView> dynamic_bytes_at(ByteView data, std::size_t index);

//! Two's-complement view of a word: returns (negative, magnitude).
std::pair<bool, U256> as_int256(const U256& raw);

}  // namespace thunderlens::abi
