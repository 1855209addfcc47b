// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#include "thunderlens/registry.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

#include "thunderlens/signatures.hpp"

namespace thunderlens {

using nlohmann::ordered_json;

namespace {

constexpr std::array<std::pair<PlatformId, std::string_view>, 14> kPlatformNames{{
    {PlatformId::kAave, "Aave"},
    {PlatformId::kBzx, "bZx"},
    {PlatformId::kUniswapV2, "UniswapV2"},
    {PlatformId::kDydx, "dYdX"},
    {PlatformId::kUniswapV1, "UniswapV1"},
    {PlatformId::kBalancer, "Balancer"},
    {PlatformId::kOneInch, "OneInch"},
    {PlatformId::kSynthetix, "Synthetix"},
    {PlatformId::kCurveFi, "CurveFi"},
    {PlatformId::kKyber, "Kyber"},
    {PlatformId::kCompound, "Compound"},
    {PlatformId::kMakerDao, "MakerDAO"},
    {PlatformId::kOpyn, "Opyn"},
    {PlatformId::kDefiSaver, "DeFiSaver"},
}};

constexpr std::array<std::pair<Category, std::string_view>, 6> kCategoryNames{{
    {Category::kFlashLoan, "FlashLoan"},
    {Category::kExchange, "Exchange"},
    {Category::kLendingBorrowing, "LendingBorrowing"},
    {Category::kMarginTrade, "MarginTrade"},
    {Category::kLiquidation, "Liquidation"},
    {Category::kAntiLiquidation, "AntiLiquidation"},
}};

constexpr std::array<std::pair<MatcherKind, std::string_view>, 4> kMatcherNames{{
    {MatcherKind::kFunctionSelector, "FunctionSelector"},
    {MatcherKind::kEventTopic, "EventTopic"},
    {MatcherKind::kOrderedEventChain, "OrderedEventChain"},
    {MatcherKind::kComposite, "Composite"},
}};

constexpr std::array<std::pair<Param, std::string_view>, 6> kParamNames{{
    {Param::kServiceProvider, "service_provider"},
    {Param::kRunner, "runner"},
    {Param::kReceiver, "receiver"},
    {Param::kAssetIn, "asset_in"},
    {Param::kAssetOut, "asset_out"},
    {Param::kAmountIn, "amount_in"},
}};

constexpr std::array<std::pair<BookRef, std::string_view>, 6> kBookRefNames{{
    {BookRef::kAaveLendingPool, "aave_lending_pool"},
    {BookRef::kUniswapV2Factory, "uniswap_v2_factory"},
    {BookRef::kBzxITokens, "bzx_itokens"},
    {BookRef::kDydxSoloMargin, "dydx_solo_margin"},
    {BookRef::kDefiSaverEmitters, "defi_saver_emitters"},
    {BookRef::kKnownPairs, "known_pairs"},
}};

constexpr std::array<std::pair<SourceTerm::Kind, std::string_view>, 10> kBareTerms{{
    {SourceTerm::Kind::kEmitter, "emitter"},
    {SourceTerm::Kind::kCallee, "callee"},
    {SourceTerm::Kind::kCaller, "caller"},
    {SourceTerm::Kind::kValue, "value"},
    {SourceTerm::Kind::kSender, "sender"},
    {SourceTerm::Kind::kTokenIn, "token_in"},
    {SourceTerm::Kind::kTokenOut, "token_out"},
    {SourceTerm::Kind::kRecipientOut, "recipient_out"},
    {SourceTerm::Kind::kTokenInAmount, "token_in_amount"},
    {SourceTerm::Kind::kTokenOutAmount, "token_out_amount"},
}};

template <class Table, class Key>
std::string_view lookup_name(const Table& table, Key key) {
    for (const auto& [k, name] : table)
        if (k == key) return name;
    return {};
}

template <class Table>
auto lookup_key(const Table& table, std::string_view name) -> std::optional<typename Table::value_type::first_type> {
    for (const auto& [k, n] : table)
        if (n == name) return k;
    return std::nullopt;
}

std::optional<std::size_t> parse_size(std::string_view text) {
    std::size_t out{0};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return s;
}

SourceTerm parse_term(std::string_view text) {
    SourceTerm term;
    if (text.starts_with("step[")) {
        const auto close = text.find("].");
        if (close == std::string_view::npos) throw std::invalid_argument("unterminated step prefix in '" + std::string{text} + "'");
        auto k = parse_size(text.substr(5, close - 5));
        if (!k) throw std::invalid_argument("bad step number in '" + std::string{text} + "'");
        term.step = *k;
        text.remove_prefix(close + 2);
    }
    if (auto bare = lookup_key(kBareTerms, text)) {
        term.kind = *bare;
        return term;
    }
    const auto indexed = [&](std::string_view prefix, SourceTerm::Kind kind) {
        if (!text.starts_with(prefix)) return false;
        auto n = parse_size(text.substr(prefix.size()));
        if (!n) throw std::invalid_argument("bad position in '" + std::string{text} + "'");
        term.kind = kind;
        term.n = *n;
        return true;
    };
    if (indexed("topic:", SourceTerm::Kind::kTopic)) {
        if (term.n > 3) throw std::invalid_argument("topic position must be 0..3: '" + std::string{text} + "'");
        return term;
    }
    if (indexed("data:", SourceTerm::Kind::kDataWord)) return term;
    if (indexed("data@", SourceTerm::Kind::kDataOffset)) return term;
    if (indexed("arg:", SourceTerm::Kind::kArg)) return term;
    if (text.starts_with("const:")) {
        auto id = AssetId::parse(text.substr(6));
        if (!id) throw std::invalid_argument("const must be a 20- or 32-byte hex value: '" + std::string{text} + "'");
        term.kind = SourceTerm::Kind::kConst;
        term.constant = *id;
        return term;
    }
    throw std::invalid_argument("unknown parameter source '" + std::string{text} + "'");
}

std::string fnv1a64_hex(std::string_view text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) h = (h ^ c) * 1099511628211ULL;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---- default catalog ----

AddressConstraint refs(std::initializer_list<AddressRef> list) { return AddressConstraint(list); }

ParameterMap params(std::initializer_list<std::pair<Param, std::string_view>> list) {
    ParameterMap out;
    for (const auto& [p, text] : list) out.emplace(p, ParamSource::parse(text));
    return out;
}

Pattern event(Platform platform, Category category, std::string sub_action, std::string event_name,
              std::string_view hash, ParameterMap map) {
    Pattern p;
    p.platform = std::move(platform);
    p.category = category;
    p.sub_action = std::move(sub_action);
    p.event_name = std::move(event_name);
    p.kind = MatcherKind::kEventTopic;
    p.event_hash = parse_hash(hash);
    p.params = std::move(map);
    return p;
}

Pattern margin_mint(std::string function_name, std::string_view selector, bool with_ether) {
    Pattern p;
    p.platform = PlatformId::kBzx;
    p.category = Category::kMarginTrade;
    p.sub_action = "Mint";
    p.function_name = std::move(function_name);
    p.event_name = "Mint";
    p.kind = MatcherKind::kFunctionSelector;
    p.selector = parse_selector(selector);
    p.event_hash = parse_hash(sig::kBzxMarginMint);
    if (with_ether) {
        p.params = params({{Param::kServiceProvider, "callee"},
                           {Param::kRunner, "caller"},
                           {Param::kAssetIn, "const:0xeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeee"},
                           {Param::kAssetOut, "callee"},
                           {Param::kAmountIn, "value"}});
    } else {
        p.params = params({{Param::kServiceProvider, "callee"},
                           {Param::kRunner, "caller"},
                           {Param::kAssetIn, "arg:1|token_in"},
                           {Param::kAssetOut, "callee"},
                           {Param::kAmountIn, "arg:2"}});
    }
    return p;
}

std::vector<Pattern> default_patterns() {
    std::vector<Pattern> out;

    // Flash loan providers
    {
        Pattern p = event(PlatformId::kAave, Category::kFlashLoan, "FlashLoan", "FlashLoan", sig::kAaveFlashLoanEvent,
                          params({{Param::kServiceProvider, "emitter"},
                                  {Param::kRunner, "topic:1"},
                                  {Param::kAssetIn, "topic:2"},
                                  {Param::kAssetOut, "topic:2"},
                                  {Param::kAmountIn, "data:0"}}));
        p.function_name = "flashLoan";
        p.selector = parse_selector(sig::kAaveFlashLoanFn);
        p.emitter = refs({BookRef::kAaveLendingPool});
        p.fee = "0.25%";
        out.push_back(std::move(p));
    }
    {
        Pattern p;
        p.platform = PlatformId::kBzx;
        p.category = Category::kFlashLoan;
        p.sub_action = "FlashLoan";
        p.function_name = "flashBorrowToken";
        p.kind = MatcherKind::kFunctionSelector;
        p.selector = parse_selector(sig::kBzxFlashBorrowTokenFn);
        p.callee = refs({BookRef::kBzxITokens});
        p.params = params({{Param::kServiceProvider, "callee"},
                           {Param::kRunner, "arg:1"},
                           {Param::kAssetIn, "token_out"},
                           {Param::kAssetOut, "token_out"},
                           {Param::kAmountIn, "arg:0"}});
        p.fee = "0";
        out.push_back(std::move(p));
    }
    {
        Pattern p = event(PlatformId::kUniswapV2, Category::kFlashLoan, "PairCreated", "PairCreated",
                          sig::kUniV2PairCreatedEvent, {});
        p.emitter = refs({BookRef::kUniswapV2Factory});
        p.discovery = true;
        out.push_back(std::move(p));
    }
    {
        Pattern p;
        p.platform = PlatformId::kUniswapV2;
        p.category = Category::kFlashLoan;
        p.sub_action = "FlashSwap";
        p.function_name = "swap";
        p.event_name = "Swap";
        p.kind = MatcherKind::kComposite;
        p.composite = std::string{kUniswapV2FlashSwapDetector};
        p.selector = parse_selector(sig::kUniV2SwapFn);
        p.event_hash = parse_hash(sig::kUniV2SwapEvent);
        p.callee = refs({BookRef::kKnownPairs});
        p.params = params({{Param::kServiceProvider, "callee"},
                           {Param::kRunner, "arg:2"},
                           {Param::kAssetIn, "token_in"},
                           {Param::kAssetOut, "token_out"},
                           {Param::kAmountIn, "token_out_amount"}});
        p.fee = "0.3%";
        out.push_back(std::move(p));
    }
    {
        Pattern p;
        p.platform = PlatformId::kDydx;
        p.category = Category::kFlashLoan;
        p.sub_action = "FlashLoan";
        p.kind = MatcherKind::kOrderedEventChain;
        p.chain = {
            ChainStep{"LogOperate", parse_hash(sig::kDydxLogOperate), false, StepRole::kNone},
            ChainStep{"LogCall", parse_hash(sig::kDydxLogCall), true, StepRole::kNone},
            ChainStep{"LogWithdraw", parse_hash(sig::kDydxLogWithdraw), false, StepRole::kBorrow},
            ChainStep{"LogDeposit", parse_hash(sig::kDydxLogDeposit), false, StepRole::kRepay},
        };
        p.emitter = refs({BookRef::kDydxSoloMargin});
        p.params = params({{Param::kServiceProvider, "emitter"},
                           {Param::kRunner, "step[2].topic:1"},
                           {Param::kAssetIn, "token_in|step[3].data:1"},
                           {Param::kAssetOut, "token_out|step[2].data:1"},
                           {Param::kAmountIn, "step[2].data:3"}});
        p.fee = "0";
        out.push_back(std::move(p));
    }

    // Exchange
    {
        Pattern p = event(PlatformId::kUniswapV1, Category::kExchange, "NewExchange", "NewExchange",
                          sig::kUniV1NewExchange, {});
        p.discovery = true;
        out.push_back(std::move(p));
    }
    out.push_back(event(PlatformId::kUniswapV1, Category::kExchange, "TokenPurchase", "TokenPurchase",
                        sig::kUniV1TokenPurchase,
                        params({{Param::kServiceProvider, "emitter"},
                                {Param::kRunner, "topic:1"},
                                {Param::kReceiver, "recipient_out|topic:1"},
                                {Param::kAssetIn, "const:0xeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeee"},
                                {Param::kAssetOut, "token_out"},
                                {Param::kAmountIn, "topic:2"}})));
    out.push_back(event(PlatformId::kUniswapV1, Category::kExchange, "EthPurchase", "ETHPurchase",
                        sig::kUniV1EthPurchase,
                        params({{Param::kServiceProvider, "emitter"},
                                {Param::kRunner, "topic:1"},
                                {Param::kReceiver, "recipient_out|topic:1"},
                                {Param::kAssetIn, "token_in"},
                                {Param::kAssetOut, "const:0xeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeeee"},
                                {Param::kAmountIn, "topic:2"}})));
    out.push_back(event(PlatformId::kBalancer, Category::kExchange, "Swap", "LOG_SWAP", sig::kBalancerLogSwap,
                        params({{Param::kServiceProvider, "emitter"},
                                {Param::kRunner, "topic:1"},
                                {Param::kReceiver, "topic:1"},
                                {Param::kAssetIn, "topic:2"},
                                {Param::kAssetOut, "topic:3"},
                                {Param::kAmountIn, "data:0"}})));
    {
        Pattern p = event(PlatformId::kOneInch, Category::kExchange, "Swap", "Swapped", sig::kOneInchSwapped,
                          params({{Param::kServiceProvider, "emitter"},
                                  {Param::kRunner, "caller"},
                                  {Param::kReceiver, "recipient_out|caller"},
                                  {Param::kAssetIn, "token_in"},
                                  {Param::kAssetOut, "token_out"},
                                  {Param::kAmountIn, "token_in_amount"}}));
        p.function_name = "swap";
        p.selector = parse_selector(sig::kOneInchSwapFn);
        out.push_back(std::move(p));
    }
    out.push_back(event(PlatformId::kSynthetix, Category::kExchange, "Exchange", "Exchange", sig::kSynthetixExchange,
                        params({{Param::kServiceProvider, "emitter"},
                                {Param::kRunner, "topic:1"},
                                {Param::kReceiver, "data:4|topic:1"},
                                {Param::kAssetIn, "data:0"},
                                {Param::kAssetOut, "data:2"},
                                {Param::kAmountIn, "data:1"}})));
    out.push_back(event(PlatformId::kCurveFi, Category::kExchange, "Swap", "TokenExchange", sig::kCurveTokenExchange,
                        params({{Param::kServiceProvider, "emitter"},
                                {Param::kRunner, "topic:1"},
                                {Param::kReceiver, "recipient_out|topic:1"},
                                {Param::kAssetIn, "token_in"},
                                {Param::kAssetOut, "token_out"},
                                {Param::kAmountIn, "data:1"}})));
    out.push_back(event(PlatformId::kKyber, Category::kExchange, "Swap", "ExecuteTrade", sig::kKyberExecuteTrade,
                        params({{Param::kServiceProvider, "emitter"},
                                {Param::kRunner, "topic:1"},
                                {Param::kReceiver, "recipient_out|topic:1"},
                                {Param::kAssetIn, "data:0"},
                                {Param::kAssetOut, "data:1"},
                                {Param::kAmountIn, "data:2"}})));
    out.push_back(event(PlatformId::kKyber, Category::kExchange, "Swap", "KyberTrade", sig::kKyberTrade,
                        params({{Param::kServiceProvider, "emitter"},
                                {Param::kRunner, "topic:1"},
                                {Param::kReceiver, "data:4"},
                                {Param::kAssetIn, "data:0"},
                                {Param::kAssetOut, "data:1"},
                                {Param::kAmountIn, "data:2"}})));

    // Lending & borrowing
    out.push_back(event(PlatformId::kAave, Category::kLendingBorrowing, "Borrow", "Borrow", sig::kAaveBorrow,
                        params({{Param::kServiceProvider, "emitter"},
                                {Param::kRunner, "topic:2"},
                                {Param::kReceiver, "topic:2"},
                                {Param::kAssetIn, "topic:1"},
                                {Param::kAssetOut, "topic:1"},
                                {Param::kAmountIn, "data:0"}})));
    out.push_back(event(PlatformId::kAave, Category::kLendingBorrowing, "Repay", "Repay", sig::kAaveRepay,
                        params({{Param::kServiceProvider, "emitter"},
                                {Param::kRunner, "topic:3"},
                                {Param::kReceiver, "topic:2"},
                                {Param::kAssetIn, "topic:1"},
                                {Param::kAssetOut, "topic:1"},
                                {Param::kAmountIn, "data:0"}})));
    out.push_back(event(PlatformId::kAave, Category::kLendingBorrowing, "Deposit", "Deposit", sig::kAaveDeposit,
                        params({{Param::kServiceProvider, "emitter"},
                                {Param::kRunner, "topic:2"},
                                {Param::kReceiver, "topic:2"},
                                {Param::kAssetIn, "topic:1"},
                                {Param::kAssetOut, "topic:1"},
                                {Param::kAmountIn, "data:0"}})));
    out.push_back(event(PlatformId::kAave, Category::kLendingBorrowing, "Redeem", "RedeemUnderlying",
                        sig::kAaveRedeemUnderlying,
                        params({{Param::kServiceProvider, "emitter"},
                                {Param::kRunner, "topic:2"},
                                {Param::kReceiver, "topic:2"},
                                {Param::kAssetIn, "topic:1"},
                                {Param::kAssetOut, "topic:1"},
                                {Param::kAmountIn, "data:0"}})));
    out.push_back(event(PlatformId::kBzx, Category::kLendingBorrowing, "Borrow", "Borrow", sig::kBzxBorrow,
                        params({{Param::kServiceProvider, "emitter"},
                                {Param::kRunner, "topic:1"},
                                {Param::kReceiver, "topic:1"},
                                {Param::kAssetIn, "data:0"},
                                {Param::kAssetOut, "data:0"},
                                {Param::kAmountIn, "data:2"}})));
    out.push_back(event(PlatformId::kBzx, Category::kLendingBorrowing, "Repay", "Repay", sig::kBzxRepay,
                        params({{Param::kServiceProvider, "emitter"},
                                {Param::kRunner, "topic:1"},
                                {Param::kReceiver, "topic:1"},
                                {Param::kAssetIn, "data:1"},
                                {Param::kAssetOut, "data:1"},
                                {Param::kAmountIn, "data:3"}})));
    out.push_back(event(PlatformId::kBzx, Category::kLendingBorrowing, "Deposit", "Mint", sig::kBzxMint,
                        params({{Param::kServiceProvider, "emitter"},
                                {Param::kRunner, "topic:1"},
                                {Param::kReceiver, "topic:1"},
                                {Param::kAssetIn, "token_in|emitter"},
                                {Param::kAssetOut, "token_in|emitter"},
                                {Param::kAmountIn, "data:1"}})));
    out.push_back(event(PlatformId::kBzx, Category::kLendingBorrowing, "Redeem", "Burn", sig::kBzxBurn,
                        params({{Param::kServiceProvider, "emitter"},
                                {Param::kRunner, "topic:1"},
                                {Param::kReceiver, "topic:1"},
                                {Param::kAssetIn, "token_out|emitter"},
                                {Param::kAssetOut, "token_out|emitter"},
                                {Param::kAmountIn, "data:1"}})));
    out.push_back(event(PlatformId::kCompound, Category::kLendingBorrowing, "Borrow", "Borrow", sig::kCompoundBorrow,
                        params({{Param::kServiceProvider, "emitter"},
                                {Param::kRunner, "data:0"},
                                {Param::kReceiver, "data:0"},
                                {Param::kAssetIn, "token_out|emitter"},
                                {Param::kAssetOut, "token_out|emitter"},
                                {Param::kAmountIn, "data:1"}})));
    out.push_back(event(PlatformId::kCompound, Category::kLendingBorrowing, "Repay", "RepayBorrow",
                        sig::kCompoundRepayBorrow,
                        params({{Param::kServiceProvider, "emitter"},
                                {Param::kRunner, "data:0"},
                                {Param::kReceiver, "data:1"},
                                {Param::kAssetIn, "token_in|emitter"},
                                {Param::kAssetOut, "token_in|emitter"},
                                {Param::kAmountIn, "data:2"}})));
    out.push_back(event(PlatformId::kCompound, Category::kLendingBorrowing, "Deposit", "Mint", sig::kCompoundMint,
                        params({{Param::kServiceProvider, "emitter"},
                                {Param::kRunner, "data:0"},
                                {Param::kReceiver, "data:0"},
                                {Param::kAssetIn, "token_in|emitter"},
                                {Param::kAssetOut, "token_in|emitter"},
                                {Param::kAmountIn, "data:1"}})));
    out.push_back(event(PlatformId::kCompound, Category::kLendingBorrowing, "Redeem", "Redeem", sig::kCompoundRedeem,
                        params({{Param::kServiceProvider, "emitter"},
                                {Param::kRunner, "data:0"},
                                {Param::kReceiver, "data:0"},
                                {Param::kAssetIn, "token_out|emitter"},
                                {Param::kAssetOut, "token_out|emitter"},
                                {Param::kAmountIn, "data:1"}})));
    {
        // Vat LogNote: topics [sig, ilk, urn, v]; data is the raw frob calldata as `bytes`.
        Pattern p = event(PlatformId::kMakerDao, Category::kLendingBorrowing, "frob", "LogNote", sig::kMakerFrobEvent,
                          params({{Param::kServiceProvider, "emitter"},
                                  {Param::kRunner, "topic:2"},
                                  {Param::kReceiver, "data@164"},
                                  {Param::kAssetIn, "topic:1"},
                                  {Param::kAssetOut, "topic:1"},
                                  {Param::kAmountIn, "data@196"}}));
        p.function_name = "frob";
        p.selector = parse_selector(sig::kMakerFrobFn);
        out.push_back(std::move(p));
    }

    // Margin trade
    out.push_back(margin_mint("mintWithEther", sig::kBzxMintWithEtherA, true));
    out.push_back(margin_mint("mintWithEther", sig::kBzxMintWithEtherB, true));
    out.push_back(margin_mint("mintWithToken", sig::kBzxMintWithTokenA, false));
    out.push_back(margin_mint("mintWithToken", sig::kBzxMintWithTokenB, false));

    // Liquidation
    out.push_back(event(PlatformId::kAave, Category::kLiquidation, "LiquidationCall", "LiquidationCall",
                        sig::kAaveLiquidationCall,
                        params({{Param::kServiceProvider, "emitter"},
                                {Param::kRunner, "data:3"},
                                {Param::kReceiver, "data:3"},
                                {Param::kAssetOut, "topic:1"},
                                {Param::kAmountIn, "data:0"}})));
    out.push_back(event(PlatformId::kCompound, Category::kLiquidation, "LiquidateBorrow", "LiquidateBorrow",
                        sig::kCompoundLiquidateBorrow,
                        params({{Param::kServiceProvider, "emitter"},
                                {Param::kRunner, "data:0"},
                                {Param::kReceiver, "data:0"},
                                {Param::kAssetOut, "data:3"},
                                {Param::kAmountIn, "data:2"}})));
    out.push_back(event(PlatformId::kDydx, Category::kLiquidation, "LogLiquidate", "LogLiquidate",
                        sig::kDydxLogLiquidate,
                        params({{Param::kServiceProvider, "emitter"},
                                {Param::kRunner, "topic:1"},
                                {Param::kReceiver, "topic:1"},
                                {Param::kAssetOut, "data:2"},
                                {Param::kAmountIn, "data:5"}})));
    out.push_back(event(PlatformId::kOpyn, Category::kLiquidation, "Liquidate", "Liquidate", sig::kOpynLiquidate,
                        params({{Param::kServiceProvider, "emitter"},
                                {Param::kRunner, "data:2"},
                                {Param::kReceiver, "data:2"},
                                {Param::kAssetOut, "token_out|emitter"},
                                {Param::kAmountIn, "data:0"}})));

    // Anti-liquidation: slot only, the event hash must come from configuration.
    {
        Pattern p;
        p.platform = PlatformId::kDefiSaver;
        p.category = Category::kAntiLiquidation;
        p.sub_action = "AntiLiquidation";
        p.kind = MatcherKind::kEventTopic;
        p.emitter = refs({BookRef::kDefiSaverEmitters});
        p.params = params({{Param::kServiceProvider, "emitter"}, {Param::kRunner, "caller"}});
        out.push_back(std::move(p));
    }
    return out;
}

// ---- JSON codec ----

ordered_json constraint_to_json(const AddressConstraint& c) {
    ordered_json arr = ordered_json::array();
    for (const auto& ref : c) {
        if (const auto* a = std::get_if<Address>(&ref))
            arr.push_back(a->hex());
        else
            arr.push_back("@" + to_string(std::get<BookRef>(ref)));
    }
    return arr;
}

ordered_json pattern_to_json(const Pattern& p) {
    ordered_json j;
    j["platform"] = p.platform.name();
    j["category"] = to_string(p.category);
    j["sub_action"] = p.sub_action;
    j["function_name"] = p.function_name;
    j["event_name"] = p.event_name;
    j["matcher_kind"] = to_string(p.kind);
    j["selector"] = p.selector ? ordered_json(p.selector->hex()) : ordered_json(nullptr);
    j["event_hash"] = p.event_hash ? ordered_json(p.event_hash->hex()) : ordered_json(nullptr);
    if (!p.chain.empty()) {
        ordered_json chain = ordered_json::array();
        for (const auto& s : p.chain) {
            ordered_json step;
            step["name"] = s.name;
            step["hash"] = s.hash.hex();
            step["optional"] = s.optional;
            step["role"] = s.role == StepRole::kBorrow ? "borrow" : s.role == StepRole::kRepay ? "repay" : "";
            chain.push_back(std::move(step));
        }
        j["chain"] = std::move(chain);
    }
    if (!p.composite.empty()) j["composite"] = p.composite;
    if (p.callee) j["callee"] = constraint_to_json(*p.callee);
    if (p.emitter) j["emitter"] = constraint_to_json(*p.emitter);
    ordered_json pm = ordered_json::object();
    for (const auto& [param, src] : p.params) pm[to_string(param)] = src.text;
    j["parameter_map"] = std::move(pm);
    j["discovery"] = p.discovery;
    if (!p.fee.empty()) j["fee"] = p.fee;
    return j;
}

ordered_json address_set_to_json(const std::set<Address>& set) {
    ordered_json arr = ordered_json::array();
    for (const auto& a : set) arr.push_back(a.hex());
    return arr;
}

class FieldReader {
  public:
    FieldReader(const ordered_json& obj, std::string path) : obj_{obj}, path_{std::move(path)} {}

    [[noreturn]] void fail(std::string_view field, std::string_view message) const {
        throw RegistryError(path_ + "." + std::string{field} + ": " + std::string{message});
    }

    const ordered_json* get(std::string_view field) const {
        auto it = obj_.find(field);
        if (it == obj_.end() || it->is_null()) return nullptr;
        return &*it;
    }

    std::string string(std::string_view field, bool required) const {
        const auto* v = get(field);
        if (!v) {
            if (required) fail(field, "missing");
            return {};
        }
        if (!v->is_string()) fail(field, "must be a string");
        return v->get<std::string>();
    }

    template <class F>
    auto parse(std::string_view field, F&& f) const {
        const auto text = string(field, true);
        try {
            return f(text);
        } catch (const std::invalid_argument& e) {
            fail(field, e.what());
        }
    }

    const std::string& path() const { return path_; }

  private:
    const ordered_json& obj_;
    std::string path_;
};

AddressConstraint constraint_from_json(const ordered_json& arr, const FieldReader& r, std::string_view field) {
    if (!arr.is_array()) r.fail(field, "must be a list of addresses");
    AddressConstraint out;
    for (const auto& item : arr) {
        if (!item.is_string()) r.fail(field, "entries must be strings");
        const auto text = item.get<std::string>();
        if (text.starts_with("@")) {
            auto ref = parse_book_ref(std::string_view{text}.substr(1));
            if (!ref) r.fail(field, "unknown address book entry '" + text + "'");
            out.emplace_back(*ref);
        } else {
            auto a = Address::parse(text);
            if (!a) r.fail(field, "address must be 20 bytes of hex: '" + text + "'");
            out.emplace_back(*a);
        }
    }
    return out;
}

Pattern pattern_from_json(const ordered_json& j, const std::string& path) {
    if (!j.is_object()) throw RegistryError(path + ": must be an object");
    FieldReader r{j, path};
    Pattern p;
    p.platform = Platform::parse(r.string("platform", true));
    {
        auto c = parse_category(r.string("category", true));
        if (!c) r.fail("category", "unknown category");
        p.category = *c;
    }
    {
        auto k = parse_matcher_kind(r.string("matcher_kind", true));
        if (!k) r.fail("matcher_kind", "unknown matcher kind");
        p.kind = *k;
    }
    p.sub_action = r.string("sub_action", false);
    p.function_name = r.string("function_name", false);
    p.event_name = r.string("event_name", false);
    p.fee = r.string("fee", false);
    if (r.get("selector")) p.selector = r.parse("selector", [](const std::string& t) { return parse_selector(t); });
    if (r.get("event_hash")) p.event_hash = r.parse("event_hash", [](const std::string& t) { return parse_hash(t); });
    if (const auto* chain = r.get("chain")) {
        if (!chain->is_array()) r.fail("chain", "must be a list");
        for (std::size_t i = 0; i < chain->size(); ++i) {
            const auto& s = (*chain)[i];
            if (!s.is_object()) r.fail("chain[" + std::to_string(i) + "]", "must be an object");
            FieldReader sr{s, path + ".chain[" + std::to_string(i) + "]"};
            ChainStep step;
            step.name = sr.string("name", false);
            step.hash = sr.parse("hash", [](const std::string& t) { return parse_hash(t); });
            if (const auto* opt = sr.get("optional")) {
                if (!opt->is_boolean()) sr.fail("optional", "must be true or false");
                step.optional = opt->get<bool>();
            }
            const auto role = sr.string("role", false);
            if (role == "borrow")
                step.role = StepRole::kBorrow;
            else if (role == "repay")
                step.role = StepRole::kRepay;
            else if (!role.empty())
                sr.fail("role", "must be borrow, repay or empty");
            p.chain.push_back(std::move(step));
        }
    }
    p.composite = r.string("composite", false);
    if (const auto* c = r.get("callee")) p.callee = constraint_from_json(*c, r, "callee");
    if (const auto* e = r.get("emitter")) p.emitter = constraint_from_json(*e, r, "emitter");
    if (const auto* pm = r.get("parameter_map")) {
        if (!pm->is_object()) r.fail("parameter_map", "must be an object");
        for (const auto& [key, value] : pm->items()) {
            const std::string field = "parameter_map." + key;
            auto param = parse_param(key);
            if (!param) r.fail(field, "unknown parameter");
            if (!value.is_string()) r.fail(field, "must be a string");
            try {
                p.params.emplace(*param, ParamSource::parse(value.get<std::string>()));
            } catch (const std::invalid_argument& e) {
                r.fail(field, e.what());
            }
        }
    }
    if (const auto* d = r.get("discovery")) {
        if (!d->is_boolean()) r.fail("discovery", "must be true or false");
        p.discovery = d->get<bool>();
    }

    switch (p.kind) {
        case MatcherKind::kFunctionSelector:
            if (!p.selector) r.fail("selector", "required for FunctionSelector patterns");
            break;
        case MatcherKind::kEventTopic:
            break;  // a missing hash leaves the slot inactive
        case MatcherKind::kOrderedEventChain: {
            if (p.chain.size() < 2) r.fail("chain", "needs at least 2 steps");
            const auto optional_steps = std::count_if(p.chain.begin(), p.chain.end(), [](const auto& s) { return s.optional; });
            if (optional_steps > 1) r.fail("chain", "at most one step may be optional");
            break;
        }
        case MatcherKind::kComposite:
            if (p.composite != kUniswapV2FlashSwapDetector)
                r.fail("composite", "unknown procedural detector '" + p.composite + "'");
            break;
    }
    return p;
}

void merge_book(AddressBook& book, const ordered_json& j) {
    if (!j.is_object()) throw RegistryError("address_book: must be an object");
    FieldReader r{j, "address_book"};
    const auto single = [&](std::string_view field, Address& slot) {
        if (r.get(field)) slot = r.parse(field, [](const std::string& t) { return parse_address(t); });
    };
    const auto set = [&](std::string_view field, auto&& sink) {
        const auto* v = r.get(field);
        if (!v) return;
        if (!v->is_array()) r.fail(field, "must be a list of addresses");
        for (std::size_t i = 0; i < v->size(); ++i) {
            const auto& item = (*v)[i];
            const std::string f = std::string{field} + "[" + std::to_string(i) + "]";
            if (!item.is_string()) r.fail(f, "must be a string");
            auto a = Address::parse(item.get<std::string>());
            if (!a) r.fail(f, "address must be 20 bytes of hex: '" + item.get<std::string>() + "'");
            sink(*a);
        }
    };
    single("aave_lending_pool", book.aave_lending_pool);
    single("uniswap_v2_factory", book.uniswap_v2_factory);
    single("dydx_solo_margin", book.dydx_solo_margin);
    set("bzx_itokens", [&](const Address& a) { book.bzx_itokens.insert(a); });
    set("defi_saver_emitters", [&](const Address& a) { book.defi_saver_emitters.insert(a); });
    KnownPairs::Set pairs;
    set("known_pairs", [&](const Address& a) { pairs.insert(a); });
    book.known_pairs.add(pairs);
}

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

}  // namespace

// ---- names ----

Platform Platform::custom(std::string name) {
    Platform p;
    p.id = PlatformId::kCustom;
    p.custom_name = std::move(name);
    return p;
}

Platform Platform::parse(std::string_view text) {
    if (auto id = lookup_key(kPlatformNames, text)) return Platform{*id};
    if (text.starts_with("Custom:")) text.remove_prefix(7);
    return custom(std::string{text});
}

std::string Platform::name() const {
    if (id == PlatformId::kCustom) return custom_name;
    return std::string{lookup_name(kPlatformNames, id)};
}

std::string Platform::display_name() const {
    switch (id) {
        case PlatformId::kUniswapV1:
            return "Uniswap";
        case PlatformId::kOneInch:
            return "1inch";
        case PlatformId::kCurveFi:
            return "Curve";
        default:
            return name();
    }
}

std::string to_string(Category c) { return std::string{lookup_name(kCategoryNames, c)}; }
std::optional<Category> parse_category(std::string_view text) { return lookup_key(kCategoryNames, text); }
std::string to_string(MatcherKind k) { return std::string{lookup_name(kMatcherNames, k)}; }
std::optional<MatcherKind> parse_matcher_kind(std::string_view text) { return lookup_key(kMatcherNames, text); }
std::string to_string(Param p) { return std::string{lookup_name(kParamNames, p)}; }
std::optional<Param> parse_param(std::string_view text) { return lookup_key(kParamNames, text); }
std::string to_string(BookRef ref) { return std::string{lookup_name(kBookRefNames, ref)}; }
std::optional<BookRef> parse_book_ref(std::string_view text) { return lookup_key(kBookRefNames, text); }

ParamSource ParamSource::parse(std::string_view text) {
    ParamSource out;
    out.text = std::string{text};
    std::size_t start = 0;
    while (true) {
        const auto bar = text.find('|', start);
        const auto piece = trim(text.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start));
        if (piece.empty()) throw std::invalid_argument("empty alternative in '" + out.text + "'");
        out.terms.push_back(parse_term(piece));
        if (bar == std::string_view::npos) break;
        start = bar + 1;
    }
    return out;
}

// ---- pattern ----

bool Pattern::active() const {
    switch (kind) {
        case MatcherKind::kFunctionSelector:
            return selector.has_value();
        case MatcherKind::kEventTopic:
            return event_hash.has_value();
        case MatcherKind::kOrderedEventChain:
            return chain.size() >= 2;
        case MatcherKind::kComposite:
            return !composite.empty();
    }
    return false;
}

std::string Pattern::matcher_key() const {
    std::string key = to_string(kind) + ":";
    switch (kind) {
        case MatcherKind::kFunctionSelector:
            key += selector ? selector->hex() : "";
            key += event_hash ? "+" + event_hash->hex() : "";
            break;
        case MatcherKind::kEventTopic:
            key += event_hash ? event_hash->hex() : "";
            break;
        case MatcherKind::kOrderedEventChain:
            for (const auto& s : chain) key += s.hash.hex() + (s.optional ? "?" : "") + ",";
            break;
        case MatcherKind::kComposite:
            key += composite;
            break;
    }
    return key;
}

// ---- known pairs ----

KnownPairs& KnownPairs::operator=(const KnownPairs& other) {
    if (this != &other) {
        auto snap = other.snapshot();
        std::lock_guard lock{mu_};
        set_ = std::move(snap);
    }
    return *this;
}

std::shared_ptr<const KnownPairs::Set> KnownPairs::snapshot() const {
    std::lock_guard lock{mu_};
    return set_;
}

void KnownPairs::add(const Set& addresses) {
    if (addresses.empty()) return;
    std::lock_guard lock{mu_};
    auto next = std::make_shared<Set>(*set_);
    next->insert(addresses.begin(), addresses.end());
    set_ = std::move(next);
}

// ---- registry ----

PatternRegistry PatternRegistry::load_default() {
    PatternRegistry reg;
    reg.patterns_ = default_patterns();
    reg.book_.aave_lending_pool = parse_address(sig::kAaveLendingPool);
    reg.book_.uniswap_v2_factory = parse_address(sig::kUniswapV2Factory);
    reg.book_.dydx_solo_margin = parse_address(sig::kDydxSoloMargin);
    return reg;
}

PatternRegistry PatternRegistry::load_from_json(const ordered_json& doc) {
    if (!doc.is_object()) throw RegistryError("registry: top level must be an object");
    std::string mode = "extend";
    if (auto it = doc.find("mode"); it != doc.end()) {
        if (!it->is_string()) throw RegistryError("mode: must be \"extend\" or \"replace\"");
        mode = it->get<std::string>();
    }
    if (mode != "extend" && mode != "replace") throw RegistryError("mode: must be \"extend\" or \"replace\"");

    PatternRegistry reg = load_default();
    if (mode == "replace") reg.patterns_.clear();
    if (auto it = doc.find("address_book"); it != doc.end() && !it->is_null()) merge_book(reg.book_, *it);
    if (auto it = doc.find("patterns"); it != doc.end() && !it->is_null()) {
        if (!it->is_array()) throw RegistryError("patterns: must be a list");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string path = "patterns[" + std::to_string(i) + "]";
            Pattern p = pattern_from_json((*it)[i], path);
            try {
                reg.add(std::move(p));
            } catch (const RegistryError& e) {
                throw RegistryError(path + ": " + e.what());
            }
        }
    }
    return reg;
}

PatternRegistry PatternRegistry::load_from_string(std::string_view text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw RegistryError("line " + std::to_string(line_of_offset(text, e.byte)) + ": malformed JSON (" + e.what() + ")");
    }
    return load_from_json(doc);
}

PatternRegistry PatternRegistry::load_from_file(const std::filesystem::path& path) {
    std::ifstream in{path, std::ios::binary};
    if (!in) throw RegistryError(path.string() + ": cannot open registry file");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return load_from_string(buf.str());
    } catch (const RegistryError& e) {
        throw RegistryError(path.string() + ": " + e.what());
    }
}

void PatternRegistry::add(Pattern pattern) {
    for (auto& existing : patterns_) {
        if (existing.platform != pattern.platform || existing.category != pattern.category) continue;
        if (!existing.active() && existing.kind == pattern.kind) {
            existing = std::move(pattern);
            return;
        }
        if (pattern.active() && existing.matcher_key() == pattern.matcher_key())
            throw RegistryError("duplicate pattern (" + pattern.platform.name() + ", " + to_string(pattern.category) +
                                ", " + pattern.matcher_key() + ")");
    }
    patterns_.push_back(std::move(pattern));
}

std::vector<const Pattern*> PatternRegistry::find(const Platform& platform, Category category) const {
    std::vector<const Pattern*> out;
    for (const auto& p : patterns_)
        if (p.platform == platform && p.category == category) out.push_back(&p);
    return out;
}

std::vector<const Pattern*> PatternRegistry::by_category(Category category) const {
    std::vector<const Pattern*> out;
    for (const auto& p : patterns_)
        if (p.category == category) out.push_back(&p);
    return out;
}

bool PatternRegistry::satisfies(const std::optional<AddressConstraint>& constraint, const Address& address) const {
    if (!constraint) return true;
    for (const auto& ref : *constraint) {
        if (const auto* a = std::get_if<Address>(&ref)) {
            if (*a == address) return true;
            continue;
        }
        switch (std::get<BookRef>(ref)) {
            case BookRef::kAaveLendingPool:
                if (book_.aave_lending_pool == address) return true;
                break;
            case BookRef::kUniswapV2Factory:
                if (book_.uniswap_v2_factory == address) return true;
                break;
            case BookRef::kDydxSoloMargin:
                if (book_.dydx_solo_margin == address) return true;
                break;
            case BookRef::kBzxITokens:
                if (book_.bzx_itokens.contains(address)) return true;
                break;
            case BookRef::kDefiSaverEmitters:
                if (book_.defi_saver_emitters.contains(address)) return true;
                break;
            case BookRef::kKnownPairs:
                if (book_.known_pairs.snapshot()->contains(address)) return true;
                break;
        }
    }
    return false;
}

bool PatternRegistry::constraint_is_empty(const std::optional<AddressConstraint>& constraint) const {
    if (!constraint) return false;
    for (const auto& ref : *constraint) {
        if (std::holds_alternative<Address>(ref)) return false;
        switch (std::get<BookRef>(ref)) {
            case BookRef::kBzxITokens:
                if (!book_.bzx_itokens.empty()) return false;
                break;
            case BookRef::kDefiSaverEmitters:
                if (!book_.defi_saver_emitters.empty()) return false;
                break;
            case BookRef::kKnownPairs:
                if (!book_.known_pairs.snapshot()->empty()) return false;
                break;
            default:
                return false;
        }
    }
    return true;
}

ordered_json PatternRegistry::to_json() const {
    ordered_json doc;
    doc["mode"] = "replace";
    ordered_json book;
    book["aave_lending_pool"] = book_.aave_lending_pool.hex();
    book["uniswap_v2_factory"] = book_.uniswap_v2_factory.hex();
    book["bzx_itokens"] = address_set_to_json(book_.bzx_itokens);
    book["dydx_solo_margin"] = book_.dydx_solo_margin.hex();
    book["defi_saver_emitters"] = address_set_to_json(book_.defi_saver_emitters);
    book["known_pairs"] = address_set_to_json(*book_.known_pairs.snapshot());
    doc["address_book"] = std::move(book);
    ordered_json pats = ordered_json::array();
    for (const auto& p : patterns_) pats.push_back(pattern_to_json(p));
    doc["patterns"] = std::move(pats);
    return doc;
}

std::string PatternRegistry::serialize() const { return to_json().dump(2) + "\n"; }

std::string PatternRegistry::checksum() const { return fnv1a64_hex(to_json().dump()); }

bool PatternRegistry::operator==(const PatternRegistry& other) const {
    return patterns_ == other.patterns_ && book_.aave_lending_pool == other.book_.aave_lending_pool &&
           book_.uniswap_v2_factory == other.book_.uniswap_v2_factory &&
           book_.bzx_itokens == other.book_.bzx_itokens && book_.dydx_solo_margin == other.book_.dydx_solo_margin &&
           book_.defi_saver_emitters == other.book_.defi_saver_emitters &&
           *book_.known_pairs.snapshot() == *other.book_.known_pairs.snapshot();
}

}  // namespace thunderlens
