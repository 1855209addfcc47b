// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "thunderlens/core.hpp"
#include "thunderlens/registry.hpp"

namespace thunderlens {

using Word = std::array<std::uint8_t, 32>;

//! Where a pattern fired inside a bundle.
struct MatchSite {
    std::optional<std::uint32_t> log;                // triggering log (event patterns)
    std::optional<std::uint32_t> call;               // triggering call (function patterns)
    std::vector<std::optional<std::uint32_t>> steps;  // matched log per chain step
    std::uint32_t frame{0};                          // root of the call subtree the behavior covers
    Address provider;                                // emitter or callee
};

//! Resolves parameter-map expressions against a matched site.
class Extractor {
  public:
    Extractor(const TransactionBundle& bundle, const CallTree& tree) : bundle_{bundle}, tree_{tree} {}

    [[nodiscard]] std::optional<Word> word(const ParamSource& source, const MatchSite& site) const;

    [[nodiscard]] std::optional<Address> address(const ParameterMap& map, Param p, const MatchSite& site) const;
    [[nodiscard]] std::optional<AssetId> asset(const ParameterMap& map, Param p, const MatchSite& site) const;
    [[nodiscard]] std::optional<U256> amount(const ParameterMap& map, Param p, const MatchSite& site) const;

    //! First asset movement inside the site's subtree leaving (`outgoing`) or reaching the provider.
    [[nodiscard]] std::optional<TokenTransfer> provider_movement(const MatchSite& site, bool outgoing) const;

  private:
    [[nodiscard]] std::optional<Word> term(const SourceTerm& t, const MatchSite& site) const;

    const TransactionBundle& bundle_;
    const CallTree& tree_;
};

Word word_of(const Address& a);
Word word_of(const U256& v);

}  // namespace thunderlens
