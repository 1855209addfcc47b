// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#include "thunderlens/extract.hpp"

#include <algorithm>

#include "thunderlens/abi.hpp"

namespace thunderlens {

Word word_of(const Address& a) { return AssetId::from_address(a).word; }
Word word_of(const U256& v) { return word_from_u256(v); }

namespace {

std::optional<Word> to_word(std::optional<ByteView> view) {
    if (!view) return std::nullopt;
    Word w{};
    std::copy_n(view->begin(), 32, w.begin());
    return w;
}

}  // namespace

std::optional<TokenTransfer> Extractor::provider_movement(const MatchSite& site, bool outgoing) const {
    if (site.frame >= bundle_.calls.size()) return std::nullopt;
    const auto end = tree_.subtree_end(site.frame);
    for (auto i = site.frame; i <= end; ++i) {
        for (const auto& m : asset_movements(bundle_.calls[i])) {
            if ((outgoing ? m.from : m.to) == site.provider) return m;
        }
    }
    return std::nullopt;
}

std::optional<Word> Extractor::term(const SourceTerm& t, const MatchSite& site) const {
    using K = SourceTerm::Kind;
    const EventLog* log = nullptr;
    if (t.step) {
        if (*t.step < site.steps.size() && site.steps[*t.step]) log = &bundle_.logs[*site.steps[*t.step]];
    } else if (site.log) {
        log = &bundle_.logs[*site.log];
    }
    const InternalCall* call = nullptr;
    if (site.call)
        call = &bundle_.calls[*site.call];
    else if (site.frame < bundle_.calls.size())
        call = &bundle_.calls[site.frame];

    switch (t.kind) {
        case K::kTopic:
            if (!log || t.n >= log->topics.size()) return std::nullopt;
            return log->topics[t.n].bytes;
        case K::kDataWord:
            if (!log) return std::nullopt;
            return to_word(abi::word(log->data, t.n));
        case K::kDataOffset:
            if (!log) return std::nullopt;
            return to_word(abi::word_at_offset(log->data, t.n));
        case K::kArg:
            if (!call) return std::nullopt;
            return to_word(abi::word(call->calldata, t.n));
        case K::kEmitter:
            if (log) return word_of(log->emitter);
            return word_of(site.provider);
        case K::kCallee:
            if (!call) return std::nullopt;
            return word_of(call->callee);
        case K::kCaller:
            if (!call) return std::nullopt;
            return word_of(call->caller);
        case K::kValue:
            if (!call) return std::nullopt;
            return word_of(call->value);
        case K::kSender:
            return word_of(bundle_.sender);
        case K::kTokenIn:
        case K::kTokenInAmount: {
            auto m = provider_movement(site, false);
            if (!m) return std::nullopt;
            return t.kind == K::kTokenIn ? word_of(m->token) : word_of(m->amount);
        }
        case K::kTokenOut:
        case K::kTokenOutAmount:
        case K::kRecipientOut: {
            auto m = provider_movement(site, true);
            if (!m) return std::nullopt;
            if (t.kind == K::kTokenOut) return word_of(m->token);
            if (t.kind == K::kRecipientOut) return word_of(m->to);
            return word_of(m->amount);
        }
        case K::kConst:
            return t.constant.word;
    }
    return std::nullopt;
}

std::optional<Word> Extractor::word(const ParamSource& source, const MatchSite& site) const {
    for (const auto& t : source.terms) {
        if (auto w = term(t, site)) return w;
    }
    return std::nullopt;
}

std::optional<Address> Extractor::address(const ParameterMap& map, Param p, const MatchSite& site) const {
    auto it = map.find(p);
    if (it == map.end()) return std::nullopt;
    auto w = word(it->second, site);
    if (!w) return std::nullopt;
    return address_from_word(*w);
}

std::optional<AssetId> Extractor::asset(const ParameterMap& map, Param p, const MatchSite& site) const {
    auto it = map.find(p);
    if (it == map.end()) return std::nullopt;
    auto w = word(it->second, site);
    if (!w) return std::nullopt;
    return AssetId::from_word(*w);
}

std::optional<U256> Extractor::amount(const ParameterMap& map, Param p, const MatchSite& site) const {
    auto it = map.find(p);
    if (it == map.end()) return std::nullopt;
    auto w = word(it->second, site);
    if (!w) return std::nullopt;
    return u256_from_word(*w);
}

}  // namespace thunderlens
