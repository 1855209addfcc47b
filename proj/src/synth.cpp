// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#include "thunderlens/synth.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <set>

#include "thunderlens/parallel.hpp"
#include "thunderlens/signatures.hpp"

namespace thunderlens::synth {

using nlohmann::ordered_json;

namespace {

// ---- encoding (kept separate from the decoding side on purpose: the generator is the oracle) ----

using W = std::array<std::uint8_t, 32>;

W w(const U256& v) {
    W out{};
    U256 x = v;
    for (int i = 31; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(x & 0xff);
        x >>= 8;
    }
    return out;
}
W w(std::uint64_t v) { return w(U256{v}); }
W w(const Address& a) {
    W out{};
    std::copy(a.bytes.begin(), a.bytes.end(), out.begin() + 12);
    return out;
}
W w(const AssetId& a) { return a.word; }
W w_signed(bool negative, const U256& magnitude) { return w(negative ? U256{~magnitude + 1} : magnitude); }

W text_word(std::string_view text) {
    W out{};
    std::copy_n(text.begin(), std::min<std::size_t>(text.size(), 32), out.begin());
    return out;
}

Bytes cat(std::initializer_list<W> words) {
    Bytes out;
    out.reserve(words.size() * 32);
    for (const auto& x : words) out.insert(out.end(), x.begin(), x.end());
    return out;
}

TopicHash topic(const W& x) {
    TopicHash t;
    t.bytes = x;
    return t;
}

TopicHash h(std::string_view text) { return parse_hash(text); }
Selector sel(std::string_view text) { return parse_selector(text); }

const TopicHash kTransferEvent = h("0xddf252ad1be2c89b69c2b068fc378daa952ba7f163c4a11628f55a4df523b3ef");
const TopicHash kSyncEvent = h("0x1c411e9a96e071241c2f21f7726b17ae89e3cab4c78be50e062b03a9fffbbad1");
const Selector kTransfer = sel("0xa9059cbb");
const Selector kTransferFrom = sel("0x23b872dd");

Address synthetic(std::uint16_t tag) {
    Address a;
    a.bytes[0] = 0x5e;
    a.bytes[1] = 0x7d;
    a.bytes[18] = static_cast<std::uint8_t>(tag >> 8);
    a.bytes[19] = static_cast<std::uint8_t>(tag & 0xff);
    return a;
}

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// mt19937_64's output sequence is fixed by the standard; reduction is done here so the
// stream does not depend on a library's distribution implementation.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_{seed} {}
    std::uint64_t next() { return eng_(); }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }
    bool chance(unsigned per_mille) { return below(1000) < per_mille; }
    template <class T>
    const T& pick(const std::vector<T>& v) {
        return v[below(v.size())];
    }
    U256 amount() { return U256{1 + below(5000)} * U256{1000000000000000ULL}; }

  private:
    std::mt19937_64 eng_;
};

// ---- trace builder ----

class Builder {
  public:
    Builder(const TxHash& hash, std::uint64_t block, std::uint32_t tx_index, const Address& sender) {
        bundle_.tx_hash = hash;
        bundle_.block_number = block;
        bundle_.tx_index = tx_index;
        bundle_.sender = sender;
    }

    std::uint32_t enter(const Address& callee, std::optional<Selector> selector, Bytes args, U256 value = 0) {
        InternalCall c;
        c.index = static_cast<std::uint32_t>(bundle_.calls.size());
        c.depth = static_cast<std::uint32_t>(stack_.size());
        c.caller = stack_.empty() ? bundle_.sender : bundle_.calls[stack_.back()].callee;
        c.callee = callee;
        c.selector = selector;
        c.calldata = std::move(args);
        c.value = value;
        bundle_.calls.push_back(std::move(c));
        stack_.push_back(bundle_.calls.back().index);
        return bundle_.calls.back().index;
    }
    void leave() { stack_.pop_back(); }

    std::uint32_t call(const Address& callee, std::optional<Selector> selector, Bytes args, U256 value = 0) {
        const auto i = enter(callee, selector, std::move(args), value);
        leave();
        return i;
    }

    std::uint32_t log(const Address& emitter, std::vector<TopicHash> topics, Bytes data) {
        EventLog l;
        l.log_index = static_cast<std::uint32_t>(bundle_.logs.size());
        l.emitter = emitter;
        l.topics = std::move(topics);
        l.data = std::move(data);
        l.after_call_index = last();
        bundle_.logs.push_back(std::move(l));
        return bundle_.logs.back().log_index;
    }

    [[nodiscard]] Address self() const { return bundle_.calls[stack_.back()].callee; }
    [[nodiscard]] std::uint32_t last() const { return static_cast<std::uint32_t>(bundle_.calls.size() - 1); }

    std::uint32_t transfer(const Address& token, const Address& to, const U256& amount) {
        const Address from = self();
        const auto i = enter(token, kTransfer, cat({w(to), w(amount)}));
        log(token, {kTransferEvent, topic(w(from)), topic(w(to))}, cat({w(amount)}));
        leave();
        return i;
    }

    std::uint32_t transfer_from(const Address& token, const Address& from, const Address& to, const U256& amount) {
        const auto i = enter(token, kTransferFrom, cat({w(from), w(to), w(amount)}));
        log(token, {kTransferEvent, topic(w(from)), topic(w(to))}, cat({w(amount)}));
        leave();
        return i;
    }

    std::uint32_t send_eth(const Address& to, const U256& amount) { return call(to, std::nullopt, {}, amount); }

    TransactionBundle finish() { return std::move(bundle_); }

  private:
    TransactionBundle bundle_;
    std::vector<std::uint32_t> stack_;
};

// ---- labels ----

struct Leg {
    LegAction action;
    AssetId asset;
};

struct Labeled {
    PrimitiveKind kind;
    Platform platform;
    Span span;
    Address runner;
    std::vector<Leg> legs;
};

bool is_loan(const Step& s) {
    return std::holds_alternative<AaveFlashLoan>(s) || std::holds_alternative<DydxFlashLoan>(s) ||
           std::holds_alternative<UniV2FlashSwap>(s) || std::holds_alternative<BzxFlashBorrow>(s);
}

AssetId asset(const Address& a) { return AssetId::from_address(a); }

const std::vector<Address>& token_list() {
    static const std::vector<Address> tokens{addr::weth(), addr::dai(), addr::usdc(),
                                             addr::wbtc(), addr::bat(), addr::link()};
    return tokens;
}

const std::vector<AssetId>& synth_keys() {
    static const std::vector<AssetId> keys{AssetId::from_word(text_word("sUSD")), AssetId::from_word(text_word("sETH")),
                                           AssetId::from_word(text_word("sBTC"))};
    return keys;
}

const std::vector<AssetId>& ilks() {
    static const std::vector<AssetId> out{AssetId::from_word(text_word("ETH-A")), AssetId::from_word(text_word("BAT-A")),
                                          AssetId::from_word(text_word("WBTC-A")), AssetId::from_word(text_word("USDC-A"))};
    return out;
}

class Generator {
  public:
    Generator(const Scenario& s, std::vector<Step> steps) : steps_{std::move(steps)}, rng_{splitmix(s.seed ^ 0x7472616365ULL)} {
        TxHash hash;
        for (std::size_t i = 0; i < 4; ++i) {
            const auto x = rng_.next();
            for (std::size_t b = 0; b < 8; ++b) hash.bytes[i * 8 + b] = static_cast<std::uint8_t>(x >> (56 - 8 * b));
        }
        const auto block = 9'000'000 + rng_.below(2'000'000);
        const auto tx_index = static_cast<std::uint32_t>(rng_.below(300));
        const auto& pool = addr::pool();
        const auto s_i = rng_.below(pool.size());
        const auto r_i = (s_i + 1 + rng_.below(pool.size() - 1)) % pool.size();
        runner_ = pool[r_i];
        b_.emplace(hash, block, tx_index, pool[s_i]);
        truth_.tx_hash = hash;
        truth_.scenario = s.name;
    }

    std::pair<TransactionBundle, GroundTruth> run() {
        b_->enter(runner_, sel("0x61461954"), {});
        steps_from(0);
        b_->leave();
        label();
        return {b_->finish(), std::move(truth_)};
    }

  private:
    Builder& b() { return *b_; }

    void steps_from(std::size_t i) {
        for (; i < steps_.size(); ++i) {
            const auto& s = steps_[i];
            if (is_loan(s)) {
                auto body = [this, i] { steps_from(i + 1); };
                std::visit([&](const auto& step) { loan(step, body); }, s);
                return;
            }
            std::visit([&](const auto& step) { action(step); }, s);
        }
    }

    // -- flash loans --

    template <class T>
    void loan(const T&, const std::function<void()>&) {}

    void loan(const AaveFlashLoan& s, const std::function<void()>& body) {
        const Address pool = s.wrong_emitter ? synthetic(0x0a01) : parse_address(sig::kAaveLendingPool);
        const Address core = s.wrong_emitter ? synthetic(0x0a02) : addr::aave_core();
        const U256 fee = s.amount * 9 / 10000;
        b().enter(pool, sel(sig::kAaveFlashLoanFn), cat({w(runner_), w(s.asset), w(s.amount), w(128), w(0)}));
        b().enter(core, sel("0xfa93b2a5"), cat({w(s.asset), w(runner_), w(s.amount)}));
        const auto out = b().transfer(s.asset, runner_, s.amount);
        b().leave();
        b().enter(runner_, sel("0xee872558"), cat({w(s.asset), w(s.amount), w(fee), w(128), w(0)}));
        body();
        const auto back = b().transfer(s.asset, core, s.amount + fee);
        b().leave();
        b().log(pool, {h(sig::kAaveFlashLoanEvent), topic(w(runner_)), topic(w(s.asset))},
                cat({w(s.amount), w(fee), w(fee * 3 / 10), w(1581000000)}));
        b().leave();
        if (!s.wrong_emitter) add_loan(PlatformId::kAave, {out, back}, s.asset);
    }

    void loan(const DydxFlashLoan& s, const std::function<void()>& body) {
        const Address solo = s.wrong_emitter ? synthetic(0x0d01) : parse_address(sig::kDydxSoloMargin);
        const U256 repay = s.amount + 2;
        const std::uint64_t market = s.asset == addr::weth() ? 0 : s.asset == addr::dai() ? 3 : 2;
        std::uint32_t out = 0;
        std::uint32_t back = 0;
        b().enter(solo, sel("0xa67a6a45"), cat({w(64), w(160), w(1), w(runner_), w(1)}));
        b().log(solo, {h(sig::kDydxLogOperate)}, cat({w(runner_)}));
        auto withdraw = [&] {
            out = b().transfer(s.asset, runner_, s.amount);
            b().log(solo, {h(sig::kDydxLogWithdraw), topic(w(runner_))},
                    cat({w(1), w(market), w(0), w(s.amount), w(0), w(s.amount), w(runner_)}));
        };
        auto deposit = [&] {
            back = b().transfer_from(s.asset, runner_, solo, repay);
            b().log(solo, {h(sig::kDydxLogDeposit), topic(w(runner_))},
                    cat({w(1), w(market), w(1), w(repay), w(1), w(2), w(runner_)}));
        };
        if (s.broken_order) deposit();
        withdraw();
        if (s.with_call) {
            b().enter(runner_, sel("0x8b418713"), cat({w(runner_), w(runner_), w(1), w(96), w(0)}));
            body();
            b().leave();
            b().log(solo, {h(sig::kDydxLogCall), topic(w(runner_))}, cat({w(1), w(runner_)}));
        }
        if (!s.broken_order) deposit();
        b().leave();
        if (!s.with_call) body();
        if (!s.wrong_emitter && !s.broken_order) add_loan(PlatformId::kDydx, {out, back}, s.asset);
    }

    void loan(const UniV2FlashSwap& s, const std::function<void()>& body) {
        const Address pair = s.unknown_pair ? synthetic(0x0b99) : s.pair;
        const Address token = addr::pair_tokens(s.pair).first;
        const Selector selector = s.wrong_selector ? sel("0x6d9a640a") : sel(sig::kUniV2SwapFn);
        Bytes args = cat({w(s.amount), w(0), w(runner_), w(128)});
        const W payload = w(U256{0x1ee7});
        if (s.empty_data) {
            auto tail = cat({w(0)});
            args.insert(args.end(), tail.begin(), tail.end());
        } else {
            auto tail = cat({w(32), payload});
            args.insert(args.end(), tail.begin(), tail.end());
        }
        const auto swap = b().enter(pair, selector, std::move(args));
        b().transfer(token, runner_, s.amount);
        const U256 repay = s.amount * 1003 / 1000 + 1;
        std::uint32_t back = 0;
        if (!s.empty_data) {
            b().enter(runner_, sel(sig::kUniswapV2CallFn), cat({w(runner_), w(s.amount), w(0), w(128), w(32), payload}));
            body();
            back = b().transfer(token, s.payback_to_pair ? pair : synthetic(0x0b98), repay);
            b().leave();
        }
        b().log(pair, {kSyncEvent}, cat({w(s.amount * 40), w(s.amount * 90)}));
        b().log(pair, {h(sig::kUniV2SwapEvent), topic(w(runner_)), topic(w(runner_))},
                cat({w(repay), w(0), w(s.amount), w(0)}));
        b().leave();
        if (s.empty_data) body();
        if (s.payback_to_pair && !s.empty_data && !s.wrong_selector && !s.unknown_pair)
            add_loan(PlatformId::kUniswapV2, {swap, back}, token);
    }

    void loan(const BzxFlashBorrow& s, const std::function<void()>& body) {
        const Address itoken = s.on_itoken ? addr::bzx_itoken(s.asset) : synthetic(0x0c99);
        const Selector selector = s.wrong_selector ? sel("0xd627ced8") : sel(sig::kBzxFlashBorrowTokenFn);
        b().enter(itoken, selector, cat({w(s.amount), w(runner_), w(runner_), w(160), w(192), w(0), w(0)}));
        const auto out = b().transfer(s.asset, runner_, s.amount);
        b().enter(runner_, sel("0x62cfdc45"), {});
        body();
        const auto back = b().transfer(s.asset, itoken, s.amount);
        b().leave();
        b().leave();
        if (s.on_itoken && !s.wrong_selector) add_loan(PlatformId::kBzx, {out, back}, s.asset);
    }

    // -- actions --

    void action(const Mutate&) {}
    template <class T>
    void action(const T& s) {
        loan(s, [] {});
    }

    void action(const Swap& s) {
        const Address runner = s.runner.is_zero() ? runner_ : s.runner;
        const bool proxied = runner != runner_;
        const Address ex = addr::exchange(s.platform);
        const U256 out = s.amount * 97 / 100;
        if (proxied) b().enter(runner, sel("0x1cff79cd"), cat({w(ex), w(64), w(0)}));
        std::uint32_t f = 0;
        const auto in_token = s.asset_in.as_address().value_or(Address{});
        const auto out_token = s.asset_out.as_address().value_or(Address{});
        switch (s.platform.id) {
            case PlatformId::kUniswapV1:
                if (s.asset_in == asset(kEthAddress)) {
                    f = b().enter(ex, sel("0xf39b5b9b"), cat({w(1), w(1600000000)}), s.amount);
                    b().transfer(out_token, runner, out);
                    b().log(ex, {h(sig::kUniV1TokenPurchase), topic(w(runner)), topic(w(s.amount)), topic(w(out))}, {});
                } else {
                    f = b().enter(ex, sel("0x95e3c50b"), cat({w(s.amount), w(1), w(1600000000)}));
                    b().transfer_from(in_token, runner, ex, s.amount);
                    b().send_eth(runner, out);
                    b().log(ex, {h(sig::kUniV1EthPurchase), topic(w(runner)), topic(w(s.amount)), topic(w(out))}, {});
                }
                break;
            case PlatformId::kBalancer:
                f = b().enter(ex, sel("0x8201aa3f"), cat({w(in_token), w(s.amount), w(out_token), w(1), w(0)}));
                b().transfer_from(in_token, runner, ex, s.amount);
                b().transfer(out_token, runner, out);
                b().log(ex, {h(sig::kBalancerLogSwap), topic(w(runner)), topic(w(in_token)), topic(w(out_token))},
                        cat({w(s.amount), w(out)}));
                break;
            case PlatformId::kOneInch:
                f = b().enter(ex, sel(sig::kOneInchSwapFn), cat({w(in_token), w(out_token), w(s.amount), w(1)}));
                b().transfer_from(in_token, runner, ex, s.amount);
                b().transfer(out_token, runner, out);
                b().log(ex, {h(sig::kOneInchSwapped)}, cat({w(in_token), w(out_token), w(s.amount), w(out)}));
                break;
            case PlatformId::kSynthetix:
                f = b().enter(ex, sel("0xee52a2f3"), cat({w(s.asset_in), w(s.amount), w(s.asset_out)}));
                b().log(ex, {h(sig::kSynthetixExchange), topic(w(runner))},
                        cat({w(s.asset_in), w(s.amount), w(s.asset_out), w(out), w(runner)}));
                break;
            case PlatformId::kCurveFi:
                f = b().enter(ex, sel("0x3df02124"), cat({w(0), w(1), w(s.amount), w(1)}));
                b().transfer_from(in_token, runner, ex, s.amount);
                b().transfer(out_token, runner, out);
                b().log(ex, {h(sig::kCurveTokenExchange), topic(w(runner))}, cat({w(0), w(s.amount), w(1), w(out)}));
                break;
            case PlatformId::kKyber: {
                f = b().enter(ex, sel("0xcb3c28c7"),
                              cat({w(in_token), w(s.amount), w(out_token), w(runner), w(s.amount), w(1), w(0)}));
                b().transfer_from(in_token, runner, ex, s.amount);
                b().enter(synthetic(0x0e07), sel("0x088322ef"), cat({w(runner), w(in_token), w(s.amount), w(out_token)}));
                b().transfer(out_token, runner, out);
                b().log(synthetic(0x0e07), {h(sig::kKyberTrade), topic(w(runner))},
                        cat({w(in_token), w(out_token), w(s.amount), w(out), w(runner), w(0), w(0), w(0)}));
                b().leave();
                b().log(ex, {h(sig::kKyberExecuteTrade), topic(w(runner))},
                        cat({w(in_token), w(out_token), w(s.amount), w(out)}));
                break;
            }
            default:
                throw GenerationError("no exchange model for " + s.platform.name());
        }
        b().leave();
        if (proxied) b().leave();
        prims_.push_back({PrimitiveKind::kExchange, s.platform, Span{f, end_of(f)}, runner, {}});
    }

    void action(const Lend& s) {
        std::uint32_t f = 0;
        const auto token = s.asset.as_address().value_or(Address{});
        const U256& a = s.amount;
        AssetId leg_asset = s.asset;
        switch (s.platform.id) {
            case PlatformId::kCompound: {
                const Address ct = addr::compound_ctoken(s.asset);
                switch (s.action) {
                    case LegAction::kDeposit:
                        f = b().enter(ct, sel("0xa0712d68"), cat({w(a)}));
                        b().transfer_from(token, runner_, ct, a);
                        b().log(ct, {h(sig::kCompoundMint)}, cat({w(runner_), w(a), w(a * 50)}));
                        break;
                    case LegAction::kBorrow:
                        f = b().enter(ct, sel("0xc5ebeaec"), cat({w(a)}));
                        b().transfer(token, runner_, a);
                        b().log(ct, {h(sig::kCompoundBorrow)}, cat({w(runner_), w(a), w(a), w(a * 1000)}));
                        break;
                    case LegAction::kRepay:
                        f = b().enter(ct, sel("0x0e752702"), cat({w(a)}));
                        b().transfer_from(token, runner_, ct, a);
                        b().log(ct, {h(sig::kCompoundRepayBorrow)}, cat({w(runner_), w(runner_), w(a), w(0), w(a * 1000)}));
                        break;
                    case LegAction::kRedeem:
                        f = b().enter(ct, sel("0x852a12e3"), cat({w(a)}));
                        b().transfer(token, runner_, a);
                        b().log(ct, {h(sig::kCompoundRedeem)}, cat({w(runner_), w(a), w(a * 50)}));
                        break;
                }
                break;
            }
            case PlatformId::kAave: {
                const Address pool = parse_address(sig::kAaveLendingPool);
                switch (s.action) {
                    case LegAction::kDeposit:
                        f = b().enter(pool, sel("0xd2d0e066"), cat({w(token), w(a), w(0)}));
                        b().log(pool, {h(sig::kAaveDeposit), topic(w(token)), topic(w(runner_)), topic(w(0))},
                                cat({w(a), w(1581000000)}));
                        break;
                    case LegAction::kBorrow:
                        f = b().enter(pool, sel("0xc858f5f9"), cat({w(token), w(a), w(2), w(0)}));
                        b().log(pool, {h(sig::kAaveBorrow), topic(w(token)), topic(w(runner_)), topic(w(0))},
                                cat({w(a), w(2), w(0), w(0), w(0), w(1581000000)}));
                        break;
                    case LegAction::kRepay:
                        f = b().enter(pool, sel("0x5ceae9c4"), cat({w(token), w(a), w(runner_)}));
                        b().log(pool, {h(sig::kAaveRepay), topic(w(token)), topic(w(runner_)), topic(w(runner_))},
                                cat({w(a), w(0), w(0), w(1581000000)}));
                        break;
                    case LegAction::kRedeem:
                        f = b().enter(pool, sel("0x9895e3d8"), cat({w(token), w(runner_), w(a), w(0)}));
                        b().log(pool, {h(sig::kAaveRedeemUnderlying), topic(w(token)), topic(w(runner_))},
                                cat({w(a), w(1581000000)}));
                        break;
                }
                break;
            }
            case PlatformId::kBzx: {
                const Address it = addr::bzx_itoken(token);
                switch (s.action) {
                    case LegAction::kDeposit:
                        f = b().enter(it, sel("0x40c10f19"), cat({w(runner_), w(a)}));
                        b().transfer_from(token, runner_, it, a);
                        b().log(it, {h(sig::kBzxMint), topic(w(runner_))}, cat({w(a), w(a), w(1)}));
                        break;
                    case LegAction::kRedeem:
                        f = b().enter(it, sel("0x9dc29fac"), cat({w(runner_), w(a)}));
                        b().transfer(token, runner_, a);
                        b().log(it, {h(sig::kBzxBurn), topic(w(runner_))}, cat({w(a), w(a), w(1)}));
                        break;
                    case LegAction::kBorrow:
                        f = b().enter(it, sel("0xcfb65bb9"), cat({w(a), w(0), w(0), w(0), w(runner_)}));
                        b().transfer(token, runner_, a);
                        b().log(it, {h(sig::kBzxBorrow), topic(w(runner_))}, cat({w(token), w(addr::weth()), w(a), w(0)}));
                        break;
                    case LegAction::kRepay:
                        f = b().enter(it, sel("0x317565ba"), cat({w(a)}));
                        b().transfer_from(token, runner_, it, a);
                        b().log(it, {h(sig::kBzxRepay), topic(w(runner_))}, cat({w(0), w(token), w(0), w(a)}));
                        break;
                }
                break;
            }
            case PlatformId::kMakerDao: {
                const bool collateral = s.action == LegAction::kDeposit || s.action == LegAction::kRedeem;
                const bool negative = s.action == LegAction::kRedeem || s.action == LegAction::kRepay;
                const AssetId ilk = collateral ? s.asset : ilks().front();
                const W dink = collateral ? w_signed(negative, a) : w(0);
                const W dart = collateral ? w(0) : w_signed(negative, a);
                const Address vat = addr::maker_vat();
                const Bytes args = cat({w(ilk), w(runner_), w(runner_), w(runner_), dink, dart});
                f = b().enter(vat, sel(sig::kMakerFrobFn), args);
                Bytes note = cat({w(32), w(4 + args.size())});
                const auto selector = sel(sig::kMakerFrobFn);
                note.insert(note.end(), selector.bytes.begin(), selector.bytes.end());
                note.insert(note.end(), args.begin(), args.end());
                note.resize(64 + 224, 0);
                b().log(vat, {h(sig::kMakerFrobEvent), topic(w(ilk)), topic(w(runner_)), topic(w(runner_))}, note);
                break;
            }
            default:
                throw GenerationError("no lending model for " + s.platform.name());
        }
        b().leave();
        prims_.push_back({PrimitiveKind::kLendingBorrowing, s.platform, Span{f, end_of(f)}, runner_, {{s.action, leg_asset}}});
    }

    void action(const MarginMint& s) {
        const Address m = addr::bzx_margin_token();
        const auto f = s.with_selector ? b().enter(m, sel(sig::kBzxMintWithEtherA), cat({w(runner_), w(2), w(0), w(0)}), s.amount)
                                       : b().enter(m, sel("0x40c10f19"), cat({w(runner_), w(s.amount)}));
        b().call(synthetic(0x0c10), sel("0x14dfe792"), cat({w(0), w(s.amount), w(0), w(0), w(m), w(runner_)}));
        b().log(m, {h(sig::kBzxMarginMint), topic(w(runner_))}, cat({w(s.amount), w(s.amount), w(1)}));
        b().leave();
        if (s.with_selector) prims_.push_back({PrimitiveKind::kMarginTrade, PlatformId::kBzx, Span{f, end_of(f)}, runner_, {}});
    }

    void action(const Liquidate& s) {
        const Address victim = synthetic(0x0f0f);
        std::uint32_t f = 0;
        const U256& a = s.amount;
        switch (s.platform.id) {
            case PlatformId::kAave: {
                const Address pool = parse_address(sig::kAaveLendingPool);
                f = b().enter(pool, sel("0x00a718a9"), cat({w(addr::weth()), w(addr::dai()), w(victim), w(a), w(0)}));
                b().log(pool,
                        {h(sig::kAaveLiquidationCall), topic(w(addr::weth())), topic(w(addr::dai())), topic(w(victim))},
                        cat({w(a), w(a / 200), w(0), w(runner_), w(0), w(1581000000)}));
                break;
            }
            case PlatformId::kCompound: {
                const Address ct = addr::compound_ctoken(asset(addr::dai()));
                const Address collateral = addr::compound_ctoken(asset(addr::weth()));
                f = b().enter(ct, sel("0xf5e3c462"), cat({w(victim), w(a), w(collateral)}));
                b().transfer_from(addr::dai(), runner_, ct, a);
                b().log(ct, {h(sig::kCompoundLiquidateBorrow)}, cat({w(runner_), w(victim), w(a), w(collateral), w(a * 40)}));
                break;
            }
            case PlatformId::kDydx: {
                const Address solo = parse_address(sig::kDydxSoloMargin);
                f = b().enter(solo, sel("0xa67a6a45"), cat({w(64), w(160), w(2), w(runner_), w(victim)}));
                b().log(solo, {h(sig::kDydxLogLiquidate), topic(w(runner_)), topic(w(victim))},
                        cat({w(0), w(0), w(0), w(3), w(1), w(a), w(0), w(a)}));
                break;
            }
            case PlatformId::kOpyn: {
                const Address otoken = synthetic(0x0f01);
                f = b().enter(otoken, sel("0xbcbaf487"), cat({w(victim), w(a)}));
                b().send_eth(runner_, a / 2);
                b().log(otoken, {h(sig::kOpynLiquidate)}, cat({w(a / 2), w(victim), w(runner_)}));
                break;
            }
            default:
                throw GenerationError("no liquidation model for " + s.platform.name());
        }
        b().leave();
        prims_.push_back({PrimitiveKind::kLiquidation, s.platform, Span{f, end_of(f)}, runner_, {}});
    }

    void action(const AntiLiquidation& s) {
        const Address logger = s.known_emitter ? addr::defi_saver_logger() : synthetic(0x0d5f);
        b().enter(logger, sel("0xd061ce50"), cat({w(runner_), w(b().last())}));
        const auto li = b().log(logger,
                                {defi_saver_event(), topic(w(runner_)), topic(w(runner_)), topic(text_word("Repay"))},
                                cat({w(32), w(0)}));
        b().leave();
        if (s.known_emitter)
            anti_.push_back({AdvancedKind::kAntiLiquidation,
                             {{"emitter", logger.hex()}, {"logIndex", std::to_string(li)}, {"platform", "DeFiSaver"}}});
    }

    // -- bookkeeping --

    std::uint32_t end_of(std::uint32_t) const { return b_->last(); }

    void add_loan(Platform p, Span span, const Address& a) {
        truth_.loans.push_back({std::move(p), span});
        loan_assets_.insert(asset(a));
    }

    // Mirrors of the classification rules, computed over the script's own labels.
    void label() {
        if (truth_.loans.empty()) return;

        std::vector<Labeled> merged;
        for (std::size_t i = 0; i < prims_.size(); ++i) {
            const auto& a = prims_[i];
            if (a.kind == PrimitiveKind::kLendingBorrowing && a.legs.size() == 1 &&
                a.legs[0].action == LegAction::kDeposit && i + 1 < prims_.size()) {
                const auto& n = prims_[i + 1];
                if (n.kind == PrimitiveKind::kLendingBorrowing && n.platform == a.platform && n.runner == a.runner &&
                    n.legs.size() == 1 && n.legs[0].action == LegAction::kBorrow) {
                    Labeled m = a;
                    m.span.end = std::max(a.span.end, n.span.end);
                    m.legs.push_back(n.legs[0]);
                    merged.push_back(std::move(m));
                    ++i;
                    continue;
                }
            }
            merged.push_back(a);
        }
        for (const auto& p : merged) truth_.primitives.push_back({p.kind, p.platform, p.span});

        // arbitrage: same runner, two or more exchanges
        std::map<Address, std::vector<const Labeled*>> by_runner;
        for (const auto& p : merged)
            if (p.kind == PrimitiveKind::kExchange) by_runner[p.runner].push_back(&p);
        for (const auto& [runner, group] : by_runner) {
            if (group.size() < 2) continue;
            std::set<std::string> names;
            for (const auto* p : group) names.insert(p->platform.name());
            std::string joined;
            for (const auto& n : names) joined += (joined.empty() ? "" : ",") + n;
            truth_.advanced.push_back(
                {AdvancedKind::kArbitrage, {{"platforms", joined}, {"trades", std::to_string(group.size())}}});
        }

        for (auto& a : anti_) truth_.advanced.push_back(a);

        struct LegOf {
            const Labeled* owner;
            Leg leg;
        };
        auto legs = [&](LegAction action) {
            std::vector<LegOf> out;
            for (const auto& p : merged)
                for (const auto& l : p.legs)
                    if (l.action == action) out.push_back({&p, l});
            return out;
        };
        const auto redeems = legs(LegAction::kRedeem);
        const auto deposits = legs(LegAction::kDeposit);
        const auto repays = legs(LegAction::kRepay);
        const auto borrows = legs(LegAction::kBorrow);

        [&] {
            for (const auto& r : redeems)
                for (const auto& d : deposits)
                    if (d.owner->platform == r.owner->platform && !(d.leg.asset == r.leg.asset)) {
                        truth_.advanced.push_back({AdvancedKind::kCollateralSwap,
                                                   {{"newCollateral", d.leg.asset.hex()},
                                                    {"oldCollateral", r.leg.asset.hex()},
                                                    {"platform", r.owner->platform.name()}}});
                        return;
                    }
        }();
        [&] {
            for (const auto& r : repays)
                for (const auto& bo : borrows)
                    if (bo.owner->platform == r.owner->platform && !(bo.leg.asset == r.leg.asset) &&
                        loan_assets_.contains(r.leg.asset)) {
                        truth_.advanced.push_back({AdvancedKind::kLoanSwap,
                                                   {{"newDebtAsset", bo.leg.asset.hex()},
                                                    {"oldDebtAsset", r.leg.asset.hex()},
                                                    {"platform", r.owner->platform.name()}}});
                        return;
                    }
        }();
        [&] {
            for (const auto& r : repays) {
                const bool closed = std::any_of(redeems.begin(), redeems.end(),
                                                [&](const LegOf& x) { return x.owner->platform == r.owner->platform; });
                if (!closed) continue;
                for (const auto& d : deposits)
                    if (d.owner->platform != r.owner->platform) {
                        truth_.advanced.push_back({AdvancedKind::kPlatformSwap,
                                                   {{"platformA", r.owner->platform.name()},
                                                    {"platformB", d.owner->platform.name()}}});
                        return;
                    }
            }
        }();
    }

    std::vector<Step> steps_;
    Rng rng_;
    std::optional<Builder> b_;
    Address runner_;
    GroundTruth truth_;
    std::vector<Labeled> prims_;
    std::vector<ExpectedAdvanced> anti_;
    std::set<AssetId> loan_assets_;
};

// ---- script checks ----

void check_exchange_assets(const Swap& s) {
    const auto eth = asset(kEthAddress);
    const bool in_eth = s.asset_in == eth;
    const bool out_eth = s.asset_out == eth;
    switch (s.platform.id) {
        case PlatformId::kUniswapV1:
            if (in_eth == out_eth) throw GenerationError("UniswapV1 swaps need ether on exactly one side");
            if (!(in_eth ? s.asset_out : s.asset_in).is_address())
                throw GenerationError("UniswapV1 swap token must be an address");
            return;
        case PlatformId::kSynthetix:
            if (s.asset_in.is_address() || s.asset_out.is_address())
                throw GenerationError("Synthetix swaps use currency keys");
            return;
        case PlatformId::kBalancer:
        case PlatformId::kOneInch:
        case PlatformId::kCurveFi:
        case PlatformId::kKyber:
            if (!s.asset_in.is_address() || !s.asset_out.is_address() || in_eth || out_eth)
                throw GenerationError(s.platform.name() + " swaps take two ERC20 tokens");
            return;
        default:
            throw GenerationError("no exchange model for " + s.platform.name());
    }
}

void check_lend(const Lend& s) {
    if (s.platform == Platform{PlatformId::kMakerDao}) {
        const bool debt = s.action == LegAction::kBorrow || s.action == LegAction::kRepay;
        if (debt && !(s.asset == asset(addr::dai()))) throw GenerationError("MakerDAO debt is DAI");
        if (!debt && s.asset.is_address()) throw GenerationError("MakerDAO collateral is an ilk, not an address");
        return;
    }
    if (!s.asset.is_address() || s.asset == asset(kEthAddress))
        throw GenerationError(s.platform.name() + " lending takes an ERC20 token");
}

void apply(Step& target, Mutation m) {
    auto fail = [&] { throw GenerationError("mutation " + to_string(m) + " does not apply to its target"); };
    std::visit(
        [&](auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, AaveFlashLoan>) {
                if (m != Mutation::kWrongEmitter) fail();
                s.wrong_emitter = true;
            } else if constexpr (std::is_same_v<T, DydxFlashLoan>) {
                if (m == Mutation::kWrongEmitter)
                    s.wrong_emitter = true;
                else if (m == Mutation::kBrokenEventOrder)
                    s.broken_order = true;
                else
                    fail();
            } else if constexpr (std::is_same_v<T, UniV2FlashSwap>) {
                if (m == Mutation::kWrongEmitter)
                    s.unknown_pair = true;
                else if (m == Mutation::kWrongSelector)
                    s.wrong_selector = true;
                else if (m == Mutation::kEmptyCallbackData)
                    s.empty_data = true;
                else if (m == Mutation::kPaybackToOther)
                    s.payback_to_pair = false;
                else
                    fail();
            } else if constexpr (std::is_same_v<T, BzxFlashBorrow>) {
                if (m == Mutation::kWrongEmitter)
                    s.on_itoken = false;
                else if (m == Mutation::kWrongSelector)
                    s.wrong_selector = true;
                else
                    fail();
            } else if constexpr (std::is_same_v<T, MarginMint>) {
                if (m != Mutation::kNoSelector) fail();
                s.with_selector = false;
            } else if constexpr (std::is_same_v<T, AntiLiquidation>) {
                if (m != Mutation::kWrongEmitter) fail();
                s.known_emitter = false;
            } else {
                fail();
            }
        },
        target);
}

std::vector<Step> resolve(const Scenario& scenario) {
    auto steps = scenario.script;
    bool loan_seen = false;
    for (std::size_t i = 0; i < scenario.script.size(); ++i) {
        const auto& s = scenario.script[i];
        if (is_loan(s)) loan_seen = true;
        if (const auto* m = std::get_if<Mutate>(&s)) {
            if (m->target >= steps.size() || std::holds_alternative<Mutate>(steps[m->target]))
                throw GenerationError("step " + std::to_string(i) + ": mutation target " + std::to_string(m->target) +
                                      " is not a mutable step");
            apply(steps[m->target], m->mutation);
        } else if (const auto* l = std::get_if<Lend>(&s)) {
            if (l->action == LegAction::kRepay && !loan_seen)
                throw GenerationError("step " + std::to_string(i) + ": Repay has no flash-loan context before it");
            check_lend(*l);
        } else if (const auto* x = std::get_if<Swap>(&s)) {
            check_exchange_assets(*x);
        } else if (const auto* u = std::get_if<UniV2FlashSwap>(&s)) {
            const auto pairs = addr::uniswap_pairs();
            if (std::find(pairs.begin(), pairs.end(), u->pair) == pairs.end())
                throw GenerationError("step " + std::to_string(i) + ": unknown synthetic pair " + u->pair.hex());
        } else if (const auto* z = std::get_if<BzxFlashBorrow>(&s)) {
            const auto& t = token_list();
            if (std::find(t.begin(), t.end(), z->asset) == t.end())
                throw GenerationError("step " + std::to_string(i) + ": no iToken for " + z->asset.hex());
        }
    }
    return steps;
}

// ---- corpus distribution ----

struct Template {
    const char* name;
    unsigned weight;  // per mille
    std::function<std::vector<Step>(Rng&)> make;
};

Address pair_for(const Address& token) {
    for (const auto& p : addr::uniswap_pairs())
        if (addr::pair_tokens(p).first == token) return p;
    return Address{};
}

Step random_loan(Rng& rng, const Address& token) {
    std::vector<int> options{0, 3};
    if (token == addr::weth() || token == addr::dai() || token == addr::usdc()) options.push_back(1);
    if (!pair_for(token).is_zero()) options.push_back(2);
    switch (rng.pick(options)) {
        case 0:
            return AaveFlashLoan{token, rng.amount()};
        case 1:
            return DydxFlashLoan{true, token, rng.amount()};
        case 2:
            return UniV2FlashSwap{true, false, pair_for(token), rng.amount()};
        default:
            return BzxFlashBorrow{true, token, rng.amount()};
    }
}

Address other_token(Rng& rng, const Address& not_this) {
    for (;;) {
        const auto& t = rng.pick(token_list());
        if (t != not_this) return t;
    }
}

Swap random_swap(Rng& rng, const Address& runner) {
    static const std::vector<PlatformId> platforms{PlatformId::kUniswapV1, PlatformId::kBalancer, PlatformId::kOneInch,
                                                   PlatformId::kSynthetix, PlatformId::kCurveFi, PlatformId::kKyber};
    Swap s;
    s.platform = rng.pick(platforms);
    s.runner = runner;
    s.amount = rng.amount();
    if (s.platform.id == PlatformId::kUniswapV1) {
        const auto token = asset(rng.pick(token_list()));
        const bool buy = rng.chance(500);
        s.asset_in = buy ? asset(kEthAddress) : token;
        s.asset_out = buy ? token : asset(kEthAddress);
    } else if (s.platform.id == PlatformId::kSynthetix) {
        const auto& keys = synth_keys();
        const auto i = rng.below(keys.size());
        s.asset_in = keys[i];
        s.asset_out = keys[(i + 1 + rng.below(keys.size() - 1)) % keys.size()];
    } else {
        const auto a = rng.pick(token_list());
        s.asset_in = asset(a);
        s.asset_out = asset(other_token(rng, a));
    }
    return s;
}

Address random_runner(Rng& rng) { return rng.chance(500) ? Address{} : rng.pick(addr::pool()); }

Liquidate random_liquidation(Rng& rng) {
    static const std::vector<PlatformId> platforms{PlatformId::kAave, PlatformId::kCompound, PlatformId::kDydx,
                                                   PlatformId::kOpyn};
    return Liquidate{rng.pick(platforms), rng.amount()};
}

bool provider_is_bzx(const Step& s) { return std::holds_alternative<BzxFlashBorrow>(s); }

// Lending platform for a template; bZx iTokens are skipped under a bZx flash borrow because a deposit
// into the lending iToken would look like the loan's repayment.
PlatformId lending_platform(Rng& rng, const Step& loan, bool allow_maker) {
    std::vector<PlatformId> out{PlatformId::kCompound, PlatformId::kAave};
    if (!provider_is_bzx(loan)) out.push_back(PlatformId::kBzx);
    if (allow_maker) out.push_back(PlatformId::kMakerDao);
    return rng.pick(out);
}

AssetId collateral_asset(Rng& rng, PlatformId platform) {
    if (platform == PlatformId::kMakerDao) return rng.pick(ilks());
    return asset(rng.pick(token_list()));
}

AssetId other_collateral(Rng& rng, PlatformId platform, const AssetId& not_this) {
    for (;;) {
        auto a = collateral_asset(rng, platform);
        if (!(a == not_this)) return a;
    }
}

std::vector<Step> with_swaps(std::vector<Step> steps, Rng& rng, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) steps.push_back(random_swap(rng, random_runner(rng)));
    return steps;
}

const std::vector<Template>& templates() {
    static const std::vector<Template> list{
        {"aave_arbitrage", 70,
         [](Rng& r) {
             const auto t = r.pick(token_list());
             auto a = random_swap(r, Address{});
             auto b = random_swap(r, Address{});
             return std::vector<Step>{AaveFlashLoan{t, r.amount()}, a, b};
         }},
        {"dydx_swaps", 70,
         [](Rng& r) {
             const std::vector<Address> markets{addr::weth(), addr::dai(), addr::usdc()};
             return with_swaps({DydxFlashLoan{true, r.pick(markets), r.amount()}}, r, 1 + r.below(3));
         }},
        {"dydx_without_call", 30,
         [](Rng& r) { return with_swaps({DydxFlashLoan{false, addr::weth(), r.amount()}}, r, 1); }},
        {"uniswapv2_flash_swap", 70,
         [](Rng& r) {
             const auto pair = r.pick(addr::uniswap_pairs());
             return std::vector<Step>{UniV2FlashSwap{true, false, pair, r.amount()}, random_swap(r, random_runner(r)),
                                      random_liquidation(r)};
         }},
        {"bzx_flash_borrow", 60,
         [](Rng& r) {
             const auto t = r.pick(token_list());
             const auto c = asset(other_token(r, t));
             const auto d = asset(other_token(r, t));
             return std::vector<Step>{BzxFlashBorrow{true, t, r.amount()},
                                      Lend{LegAction::kDeposit, PlatformId::kCompound, c, r.amount()},
                                      Lend{LegAction::kBorrow, PlatformId::kCompound, d, r.amount()},
                                      random_swap(r, random_runner(r))};
         }},
        {"margin_trade", 60,
         [](Rng& r) {
             return std::vector<Step>{
                 DydxFlashLoan{true, addr::weth(), r.amount()},
                 Lend{LegAction::kDeposit, PlatformId::kCompound, asset(addr::weth()), r.amount()},
                 Lend{LegAction::kBorrow, PlatformId::kCompound, asset(addr::wbtc()), r.amount()},
                 MarginMint{true, r.amount()},
                 Swap{PlatformId::kUniswapV1, Address{}, asset(addr::wbtc()), asset(kEthAddress), r.amount()}};
         }},
        {"liquidation", 60,
         [](Rng& r) {
             return std::vector<Step>{AaveFlashLoan{r.pick(token_list()), r.amount()}, random_liquidation(r),
                                      random_swap(r, random_runner(r))};
         }},
        {"collateral_swap", 60,
         [](Rng& r) {
             const auto loan = random_loan(r, r.pick(token_list()));
             const auto p = lending_platform(r, loan, true);
             const auto old_c = collateral_asset(r, p);
             const auto new_c = other_collateral(r, p, old_c);
             return std::vector<Step>{loan, Lend{LegAction::kRedeem, p, old_c, r.amount()},
                                      Lend{LegAction::kDeposit, p, new_c, r.amount()}};
         }},
        {"loan_swap", 60,
         [](Rng& r) {
             const auto loan = random_loan(r, addr::dai());
             const auto p = lending_platform(r, loan, false);
             const auto debt = asset(other_token(r, addr::dai()));
             return std::vector<Step>{loan, Lend{LegAction::kRepay, p, asset(addr::dai()), r.amount()},
                                      Lend{LegAction::kBorrow, p, debt, r.amount()}};
         }},
        {"platform_swap", 60,
         [](Rng& r) {
             const auto t = r.pick(token_list());
             const auto loan = random_loan(r, t);
             const auto a = lending_platform(r, loan, false);
             auto b = a;
             while (b == a) b = lending_platform(r, loan, true);
             const auto c = collateral_asset(r, a);
             const auto nc = b == PlatformId::kMakerDao ? collateral_asset(r, b) : c;
             return std::vector<Step>{loan, Lend{LegAction::kRepay, a, asset(t), r.amount()},
                                      Lend{LegAction::kRedeem, a, c, r.amount()},
                                      Lend{LegAction::kDeposit, b, nc, r.amount()}};
         }},
        {"anti_liquidation", 60,
         [](Rng& r) {
             const auto t = r.pick(token_list());
             return std::vector<Step>{random_loan(r, t), AntiLiquidation{true}};
         }},
        {"nested_loans", 50,
         [](Rng& r) {
             return with_swaps({AaveFlashLoan{addr::dai(), r.amount()}, DydxFlashLoan{true, addr::weth(), r.amount()}},
                               r, 2);
         }},
        {"no_loan", 30,
         [](Rng& r) {
             auto steps = with_swaps({}, r, 2);
             steps.push_back(Lend{LegAction::kDeposit, PlatformId::kCompound, asset(addr::dai()), r.amount()});
             return steps;
         }},
        {"mut_aave_emitter", 25,
         [](Rng& r) {
             return with_swaps({AaveFlashLoan{r.pick(token_list()), r.amount()}, Mutate{0, Mutation::kWrongEmitter}}, r,
                               2);
         }},
        {"mut_dydx_emitter", 25,
         [](Rng& r) {
             return with_swaps({DydxFlashLoan{true, addr::dai(), r.amount()}, Mutate{0, Mutation::kWrongEmitter}}, r, 1);
         }},
        {"mut_dydx_event_order", 25,
         [](Rng& r) {
             return with_swaps({DydxFlashLoan{true, addr::weth(), r.amount()}, Mutate{0, Mutation::kBrokenEventOrder}},
                               r, 1);
         }},
        {"mut_uniswapv2_empty_data", 25,
         [](Rng& r) {
             return with_swaps({UniV2FlashSwap{true, false, r.pick(addr::uniswap_pairs()), r.amount()},
                                Mutate{0, Mutation::kEmptyCallbackData}},
                               r, 1);
         }},
        {"mut_uniswapv2_payback", 25,
         [](Rng& r) {
             return with_swaps({UniV2FlashSwap{true, false, r.pick(addr::uniswap_pairs()), r.amount()},
                                Mutate{0, Mutation::kPaybackToOther}},
                               r, 1);
         }},
        {"mut_uniswapv2_selector", 20,
         [](Rng& r) {
             return with_swaps({UniV2FlashSwap{true, false, r.pick(addr::uniswap_pairs()), r.amount()},
                                Mutate{0, Mutation::kWrongSelector}},
                               r, 1);
         }},
        {"mut_uniswapv2_pair", 20,
         [](Rng& r) {
             return with_swaps({UniV2FlashSwap{true, false, r.pick(addr::uniswap_pairs()), r.amount()},
                                Mutate{0, Mutation::kWrongEmitter}},
                               r, 1);
         }},
        {"mut_bzx_not_itoken", 25,
         [](Rng& r) {
             return with_swaps({BzxFlashBorrow{true, r.pick(token_list()), r.amount()}, Mutate{0, Mutation::kWrongEmitter}},
                               r, 1);
         }},
        {"mut_bzx_selector", 20,
         [](Rng& r) {
             return with_swaps({BzxFlashBorrow{true, r.pick(token_list()), r.amount()}, Mutate{0, Mutation::kWrongSelector}},
                               r, 1);
         }},
        {"mut_margin_selector", 25,
         [](Rng& r) {
             return std::vector<Step>{DydxFlashLoan{true, addr::weth(), r.amount()}, MarginMint{true, r.amount()},
                                      Mutate{1, Mutation::kNoSelector}};
         }},
        {"mut_anti_liquidation_emitter", 25,
         [](Rng& r) {
             return std::vector<Step>{AaveFlashLoan{r.pick(token_list()), r.amount()}, AntiLiquidation{true},
                                      Mutate{1, Mutation::kWrongEmitter}};
         }},
    };
    return list;
}

std::string details_key(const std::map<std::string, std::string>& details) {
    std::string out;
    for (const auto& [k, v] : details) out += k + "=" + v + ";";
    return out;
}

ordered_json span_json(const Span& s) { return {{"intStart", s.start}, {"intEnd", s.end}}; }

Span span_from(const ordered_json& j) {
    return Span{j.at("intStart").get<std::uint32_t>(), j.at("intEnd").get<std::uint32_t>()};
}

}  // namespace

// ---- public ----

std::string to_string(Mutation m) {
    switch (m) {
        case Mutation::kWrongEmitter:
            return "wrong_emitter";
        case Mutation::kWrongSelector:
            return "wrong_selector";
        case Mutation::kBrokenEventOrder:
            return "broken_event_order";
        case Mutation::kEmptyCallbackData:
            return "empty_callback_data";
        case Mutation::kPaybackToOther:
            return "payback_to_other";
        case Mutation::kNoSelector:
            return "no_selector";
    }
    return "?";
}

std::optional<Mutation> parse_mutation(std::string_view text) {
    for (auto m : {Mutation::kWrongEmitter, Mutation::kWrongSelector, Mutation::kBrokenEventOrder,
                   Mutation::kEmptyCallbackData, Mutation::kPaybackToOther, Mutation::kNoSelector})
        if (to_string(m) == text) return m;
    return std::nullopt;
}

namespace addr {
Address aave_core() { return synthetic(0x0a00); }
Address dydx_solo() { return parse_address(sig::kDydxSoloMargin); }
Address weth() { return synthetic(0x7001); }
Address dai() { return parse_address(sig::kMakerDai); }
Address usdc() { return synthetic(0x7003); }
Address wbtc() { return synthetic(0x7004); }
Address bat() { return synthetic(0x7005); }
Address link() { return synthetic(0x7006); }

Address compound_ctoken(const AssetId& underlying) {
    const auto& t = token_list();
    for (std::size_t i = 0; i < t.size(); ++i)
        if (AssetId::from_address(t[i]) == underlying) return synthetic(static_cast<std::uint16_t>(0x0c00 + i));
    throw GenerationError("no cToken for " + underlying.hex());
}

Address bzx_itoken(const Address& underlying) {
    const auto& t = token_list();
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] == underlying) return synthetic(static_cast<std::uint16_t>(0x0b10 + i));
    throw GenerationError("no iToken for " + underlying.hex());
}

Address bzx_margin_token() { return synthetic(0x0b20); }
Address maker_vat() { return synthetic(0x0d00); }
Address defi_saver_logger() { return synthetic(0x0d50); }

Address exchange(const Platform& platform) {
    switch (platform.id) {
        case PlatformId::kUniswapV1:
            return synthetic(0x0e01);
        case PlatformId::kBalancer:
            return synthetic(0x0e02);
        case PlatformId::kOneInch:
            return synthetic(0x0e03);
        case PlatformId::kSynthetix:
            return synthetic(0x0e04);
        case PlatformId::kCurveFi:
            return synthetic(0x0e05);
        case PlatformId::kKyber:
            return synthetic(0x0e06);
        default:
            throw GenerationError("no exchange contract for " + platform.name());
    }
}

std::vector<Address> uniswap_pairs() { return {synthetic(0x0b01), synthetic(0x0b02), synthetic(0x0b03)}; }

std::pair<Address, Address> pair_tokens(const Address& pair) {
    if (pair == synthetic(0x0b01)) return {dai(), weth()};
    if (pair == synthetic(0x0b02)) return {usdc(), weth()};
    if (pair == synthetic(0x0b03)) return {wbtc(), weth()};
    throw GenerationError("unknown synthetic pair " + pair.hex());
}

const std::vector<Address>& pool() {
    static const std::vector<Address> addresses = [] {
        std::vector<Address> out;
        std::mt19937_64 eng{0x706f6f6cULL};
        while (out.size() < 64) {
            Address a;
            for (std::size_t i = 0; i < 20; i += 4) {
                const auto x = eng();
                for (std::size_t b = 0; b < 4; ++b) a.bytes[i + b] = static_cast<std::uint8_t>(x >> (8 * b));
            }
            out.push_back(a);
        }
        return out;
    }();
    return addresses;
}
}  // namespace addr

TopicHash defi_saver_event() {
    // keccak256("LogEvent(address,address,string,bytes)")
    return parse_hash("0xa21bd02d37a839b5f9b81157b445649b4115e939611690d8a93b46bdb035a664");
}

PatternRegistry registry() {
    auto reg = PatternRegistry::load_default();
    auto& book = reg.address_book();
    for (const auto& t : token_list()) book.bzx_itokens.insert(addr::bzx_itoken(t));
    book.defi_saver_emitters.insert(addr::defi_saver_logger());
    const auto pairs = addr::uniswap_pairs();
    book.known_pairs.add(KnownPairs::Set(pairs.begin(), pairs.end()));

    Pattern p;
    p.platform = PlatformId::kDefiSaver;
    p.category = Category::kAntiLiquidation;
    p.sub_action = "AntiLiquidation";
    p.event_name = "LogEvent";
    p.kind = MatcherKind::kEventTopic;
    p.event_hash = defi_saver_event();
    p.emitter = AddressConstraint{BookRef::kDefiSaverEmitters};
    p.params = {{Param::kServiceProvider, ParamSource::parse("emitter")}, {Param::kRunner, ParamSource::parse("topic:1")}};
    reg.add(std::move(p));
    return reg;
}

std::pair<TransactionBundle, GroundTruth> generate(const Scenario& scenario) {
    Generator g{scenario, resolve(scenario)};
    return g.run();
}

Scenario draw_scenario(std::uint64_t seed, std::uint64_t index) {
    const auto mixed = splitmix(seed ^ splitmix(index + 1));
    Rng rng{mixed};
    const auto& list = templates();
    auto roll = rng.below(1000);
    const Template* chosen = &list.back();
    for (const auto& t : list) {
        if (roll < t.weight) {
            chosen = &t;
            break;
        }
        roll -= t.weight;
    }
    Scenario s;
    s.seed = mixed;
    s.name = chosen->name;
    s.script = chosen->make(rng);
    return s;
}

std::optional<Scenario> negative_sibling(const Scenario& scenario) {
    for (std::size_t i = 0; i < scenario.script.size(); ++i) {
        const auto& s = scenario.script[i];
        if (!is_loan(s)) continue;
        std::optional<Mutation> m;
        if (std::holds_alternative<AaveFlashLoan>(s)) m = Mutation::kWrongEmitter;
        if (std::holds_alternative<DydxFlashLoan>(s)) m = Mutation::kBrokenEventOrder;
        if (std::holds_alternative<UniV2FlashSwap>(s)) m = Mutation::kPaybackToOther;
        if (std::holds_alternative<BzxFlashBorrow>(s)) m = Mutation::kWrongEmitter;
        Scenario out = scenario;
        out.name += "+" + to_string(*m);
        out.script.push_back(Mutate{i, *m});
        // Every loan in the script must go negative, so mutate them all.
        for (std::size_t j = i + 1; j < scenario.script.size(); ++j) {
            const auto& t = scenario.script[j];
            if (std::holds_alternative<AaveFlashLoan>(t)) out.script.push_back(Mutate{j, Mutation::kWrongEmitter});
            if (std::holds_alternative<DydxFlashLoan>(t)) out.script.push_back(Mutate{j, Mutation::kBrokenEventOrder});
            if (std::holds_alternative<UniV2FlashSwap>(t)) out.script.push_back(Mutate{j, Mutation::kPaybackToOther});
            if (std::holds_alternative<BzxFlashBorrow>(t)) out.script.push_back(Mutate{j, Mutation::kWrongEmitter});
        }
        return out;
    }
    return std::nullopt;
}

SynthCorpus generate_corpus(std::size_t n, std::uint64_t seed, unsigned workers) {
    auto pairs = parallel_map(n, workers, [seed](std::size_t i) { return generate(draw_scenario(seed, i)); });
    std::vector<TransactionBundle> bundles;
    std::map<TxHash, GroundTruth> truth;
    for (auto& [b, t] : pairs) {
        truth.emplace(b.tx_hash, std::move(t));
        bundles.push_back(std::move(b));
    }
    SynthCorpus out;
    out.corpus = make_corpus(std::move(bundles));
    for (const auto& b : out.corpus.bundles) out.truth.push_back(truth.at(b.tx_hash));
    return out;
}

ordered_json to_json(const GroundTruth& t) {
    ordered_json j;
    j["txHash"] = t.tx_hash.hex();
    j["scenario"] = t.scenario;
    j["loans"] = ordered_json::array();
    for (const auto& l : t.loans) j["loans"].push_back({{"provider", l.provider.name()}, {"span", span_json(l.span)}});
    j["primitives"] = ordered_json::array();
    for (const auto& p : t.primitives)
        j["primitives"].push_back(
            {{"kind", to_string(p.kind)}, {"platform", p.platform.name()}, {"span", span_json(p.span)}});
    j["advanced"] = ordered_json::array();
    for (const auto& a : t.advanced) {
        ordered_json d = ordered_json::object();
        for (const auto& [k, v] : a.details) d[k] = v;
        j["advanced"].push_back({{"kind", to_string(a.kind)}, {"details", d}});
    }
    return j;
}

GroundTruth ground_truth_from_json(const ordered_json& j) {
    try {
        GroundTruth t;
        t.tx_hash = parse_hash(j.at("txHash").get<std::string>());
        t.scenario = j.at("scenario").get<std::string>();
        for (const auto& l : j.at("loans"))
            t.loans.push_back({Platform::parse(l.at("provider").get<std::string>()), span_from(l.at("span"))});
        for (const auto& p : j.at("primitives")) {
            auto kind = parse_primitive_kind(p.at("kind").get<std::string>());
            if (!kind) throw RecordError("unknown primitive kind");
            t.primitives.push_back({*kind, Platform::parse(p.at("platform").get<std::string>()), span_from(p.at("span"))});
        }
        for (const auto& a : j.at("advanced")) {
            auto kind = parse_advanced_kind(a.at("kind").get<std::string>());
            if (!kind) throw RecordError("unknown advanced kind");
            ExpectedAdvanced e{*kind, {}};
            for (const auto& [k, v] : a.at("details").items()) e.details[k] = v.get<std::string>();
            t.advanced.push_back(std::move(e));
        }
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw RecordError(std::string("ground truth: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw RecordError(std::string("ground truth: ") + e.what());
    }
}

double Score::precision() const {
    const auto predicted = true_positive + false_positive;
    return predicted == 0 ? 1.0 : static_cast<double>(true_positive) / static_cast<double>(predicted);
}

double Score::recall() const {
    const auto actual = true_positive + false_negative;
    return actual == 0 ? 1.0 : static_cast<double>(true_positive) / static_cast<double>(actual);
}

Scorecard score(const std::vector<GroundTruth>& truth, const std::vector<FlashLoanRecord>& loans,
                const std::vector<PrimitiveBehavior>& primitives, const std::vector<AdvancedBehavior>& advanced) {
    // label -> key -> (expected, found)
    std::map<std::string, std::map<std::string, std::pair<std::size_t, std::size_t>>> tally;
    auto span_key = [](const Span& s) { return std::to_string(s.start) + "-" + std::to_string(s.end); };
    for (const auto& t : truth) {
        const auto tx = t.tx_hash.hex();
        for (const auto& l : t.loans) ++tally["loan:" + l.provider.name()][tx + "|" + span_key(l.span)].first;
        for (const auto& p : t.primitives)
            ++tally["primitive:" + to_string(p.kind)][tx + "|" + p.platform.name() + "|" + span_key(p.span)].first;
        for (const auto& a : t.advanced) ++tally["advanced:" + to_string(a.kind)][tx + "|" + details_key(a.details)].first;
    }
    for (const auto& l : loans) ++tally["loan:" + l.provider.name()][l.tx_hash.hex() + "|" + span_key(l.span)].second;
    for (const auto& p : primitives)
        ++tally["primitive:" + to_string(p.kind)][p.tx_hash.hex() + "|" + p.platform.name() + "|" + span_key(p.span)].second;
    for (const auto& a : advanced)
        ++tally["advanced:" + to_string(a.kind)][a.tx_hash.hex() + "|" + details_key(a.details)].second;

    Scorecard out;
    for (auto p : {PlatformId::kAave, PlatformId::kBzx, PlatformId::kUniswapV2, PlatformId::kDydx})
        out["loan:" + Platform{p}.name()];
    for (auto k : {PrimitiveKind::kExchange, PrimitiveKind::kLendingBorrowing, PrimitiveKind::kMarginTrade,
                   PrimitiveKind::kLiquidation})
        out["primitive:" + to_string(k)];
    for (auto k : {AdvancedKind::kArbitrage, AdvancedKind::kAntiLiquidation, AdvancedKind::kCollateralSwap,
                   AdvancedKind::kLoanSwap, AdvancedKind::kPlatformSwap})
        out["advanced:" + to_string(k)];
    for (const auto& [label, keys] : tally) {
        auto& s = out[label];
        for (const auto& [key, counts] : keys) {
            const auto tp = std::min(counts.first, counts.second);
            s.true_positive += tp;
            s.false_negative += counts.first - tp;
            s.false_positive += counts.second - tp;
        }
    }
    return out;
}

}  // namespace thunderlens::synth
