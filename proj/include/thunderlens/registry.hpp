// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "thunderlens/core.hpp"

namespace thunderlens {

enum class PlatformId {
    kAave,
    kBzx,
    kUniswapV2,
    kDydx,
    kUniswapV1,
    kBalancer,
    kOneInch,
    kSynthetix,
    kCurveFi,
    kKyber,
    kCompound,
    kMakerDao,
    kOpyn,
    kDefiSaver,
    kCustom,
};

struct Platform {
    PlatformId id{PlatformId::kCustom};
    std::string custom_name;  // only for kCustom

    Platform() = default;
    Platform(PlatformId i) : id{i} {}  // NOLINT(google-explicit-constructor)

    static Platform custom(std::string name);
    //! Accepts canonical names ("Aave", "bZx", "UniswapV2", ...); anything else becomes Custom(name).
    static Platform parse(std::string_view text);
    [[nodiscard]] std::string name() const;
    //! Human label used in span tables ("Uniswap" for the V1 exchanges).
    [[nodiscard]] std::string display_name() const;

    auto operator<=>(const Platform&) const = default;
};

enum class Category { kFlashLoan, kExchange, kLendingBorrowing, kMarginTrade, kLiquidation, kAntiLiquidation };

std::string to_string(Category c);
std::optional<Category> parse_category(std::string_view text);

enum class MatcherKind { kFunctionSelector, kEventTopic, kOrderedEventChain, kComposite };

std::string to_string(MatcherKind k);
std::optional<MatcherKind> parse_matcher_kind(std::string_view text);

//! Symbolic references into the address book, written `@name` in registry files.
enum class BookRef { kAaveLendingPool, kUniswapV2Factory, kBzxITokens, kDydxSoloMargin, kDefiSaverEmitters, kKnownPairs };

using AddressRef = std::variant<Address, BookRef>;
using AddressConstraint = std::vector<AddressRef>;

enum class StepRole { kNone, kBorrow, kRepay };

struct ChainStep {
    std::string name;
    TopicHash hash;
    bool optional{false};
    StepRole role{StepRole::kNone};

    bool operator==(const ChainStep&) const = default;
};

//! Table-5 parameters a pattern can populate. Block number and transaction index always come from the bundle.
enum class Param { kServiceProvider, kRunner, kReceiver, kAssetIn, kAssetOut, kAmountIn };

std::string to_string(Param p);
std::optional<Param> parse_param(std::string_view text);

//! Where a parameter is read from. Text grammar (alternatives separated by `|`, tried left to right):
//!   [step[K].]topic:N | data:N | data@BYTE | arg:N | emitter | callee | caller | value | sender
//!   | token_in | token_out | recipient_out | token_in_amount | token_out_amount | const:0x<address or bytes32>
//! token_in/token_out are the first asset moved to/from the service provider inside the matched frame.
struct SourceTerm {
    enum class Kind {
        kTopic,
        kDataWord,
        kDataOffset,
        kArg,
        kEmitter,
        kCallee,
        kCaller,
        kValue,
        kSender,
        kTokenIn,
        kTokenOut,
        kRecipientOut,
        kTokenInAmount,
        kTokenOutAmount,
        kConst,
    };
    Kind kind{Kind::kEmitter};
    std::optional<std::size_t> step;
    std::size_t n{0};
    AssetId constant;
};

struct ParamSource {
    std::string text;
    std::vector<SourceTerm> terms;

    //! Throws std::invalid_argument on a malformed expression.
    static ParamSource parse(std::string_view text);
    bool operator==(const ParamSource& o) const { return text == o.text; }
};

using ParameterMap = std::map<Param, ParamSource>;

struct Pattern {
    Platform platform;
    Category category{Category::kExchange};
    std::string sub_action;
    std::string function_name;
    std::string event_name;
    MatcherKind kind{MatcherKind::kEventTopic};
    std::optional<Selector> selector;
    std::optional<TopicHash> event_hash;
    std::vector<ChainStep> chain;
    std::string composite;
    std::optional<AddressConstraint> callee;
    std::optional<AddressConstraint> emitter;
    ParameterMap params;
    bool discovery{false};  // registers contracts (PairCreated, NewExchange); never yields a behavior
    std::string fee;        // informational only

    //! A pattern slot with no hash/selector to match (e.g. the DeFi Saver placeholder) is inert.
    [[nodiscard]] bool active() const;
    [[nodiscard]] std::string matcher_key() const;

    bool operator==(const Pattern&) const = default;
};

inline constexpr std::string_view kUniswapV2FlashSwapDetector = "uniswap_v2_flash_swap";

//! Append-only address set safe for concurrent use: appends are atomic, readers get immutable snapshots.
class KnownPairs {
  public:
    using Set = std::set<Address>;

    KnownPairs() : set_{std::make_shared<const Set>()} {}
    KnownPairs(const KnownPairs& other) : set_{other.snapshot()} {}
    KnownPairs& operator=(const KnownPairs& other);

    [[nodiscard]] std::shared_ptr<const Set> snapshot() const;
    void add(const Set& addresses);

  private:
    mutable std::mutex mu_;
    std::shared_ptr<const Set> set_;
};

struct AddressBook {
    Address aave_lending_pool;
    Address uniswap_v2_factory;
    std::set<Address> bzx_itokens;
    Address dydx_solo_margin;
    std::set<Address> defi_saver_emitters;
    KnownPairs known_pairs;
};

class RegistryError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class PatternRegistry {
  public:
    //! Built-in catalog: every row of the platform signature table plus default contract addresses.
    static PatternRegistry load_default();
    //! Parses a registry file. `extend` files merge into the defaults, `replace` files start empty.
    static PatternRegistry load_from_file(const std::filesystem::path& path);
    static PatternRegistry load_from_json(const nlohmann::ordered_json& doc);
    static PatternRegistry load_from_string(std::string_view text);

    [[nodiscard]] std::vector<const Pattern*> find(const Platform& platform, Category category) const;
    [[nodiscard]] std::vector<const Pattern*> by_category(Category category) const;
    [[nodiscard]] const std::vector<Pattern>& patterns() const { return patterns_; }

    [[nodiscard]] AddressBook& address_book() { return book_; }
    [[nodiscard]] const AddressBook& address_book() const { return book_; }

    //! Adds a pattern; fills an inactive slot with the same (platform, category, kind) if present.
    //! Throws RegistryError on a duplicate (platform, category, matcher).
    void add(Pattern pattern);

    //! True when `address` satisfies the constraint (absent constraint = anything).
    [[nodiscard]] bool satisfies(const std::optional<AddressConstraint>& constraint, const Address& address) const;
    [[nodiscard]] bool constraint_is_empty(const std::optional<AddressConstraint>& constraint) const;

    [[nodiscard]] nlohmann::ordered_json to_json() const;
    [[nodiscard]] std::string serialize() const;
    //! FNV-1a 64 of the serialized registry, hex.
    [[nodiscard]] std::string checksum() const;

    bool operator==(const PatternRegistry& other) const;

  private:
    std::vector<Pattern> patterns_;
    AddressBook book_;
};

std::string to_string(BookRef ref);
std::optional<BookRef> parse_book_ref(std::string_view text);

}  // namespace thunderlens
