// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "thunderlens/core.hpp"
#include "thunderlens/ingestion.hpp"
#include "thunderlens/pipeline.hpp"
#include "thunderlens/records.hpp"
#include "thunderlens/registry.hpp"

namespace thunderlens {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct ProviderStats {
    std::size_t tx_count{0};
    std::size_t unique_borrowers{0};

    bool operator==(const ProviderStats&) const = default;
};

//! Flash-loan usage per provider. Totals count each transaction and borrower once, so per-provider
//! sums can exceed them.
struct DistributionReport {
    std::map<std::string, ProviderStats> per_provider;
    ProviderStats totals;
    //! Distinct transactions per runner, most active first (ties by address).
    std::vector<std::pair<Address, std::size_t>> top_borrowers;

    bool operator==(const DistributionReport&) const = default;
};

DistributionReport distribution(const std::vector<FlashLoanRecord>& records, std::size_t top_n = 10);

struct SwappingBreakdown {
    std::size_t collateral{0};
    std::size_t loan{0};
    std::size_t platform{0};

    [[nodiscard]] std::size_t total() const { return collateral + loan + platform; }
    bool operator==(const SwappingBreakdown&) const = default;
};

//! Counts are transactions per kind; `*_instances` count behaviors.
//! `primitive_transactions` is the number of distinct transactions with at least one primitive.
//! advanced_counts["Swapping"] is the sum of the three swapping variants.
struct BehaviorReport {
    std::map<std::string, std::size_t> primitive_counts;
    std::map<std::string, std::size_t> advanced_counts;
    SwappingBreakdown swapping;
    std::size_t primitive_transactions{0};
    std::map<std::string, std::size_t> primitive_instances;
    std::map<std::string, std::size_t> advanced_instances;

    bool operator==(const BehaviorReport&) const = default;
};

BehaviorReport behavior_summary(const std::vector<PrimitiveBehavior>& primitives,
                                const std::vector<AdvancedBehavior>& advanced);

struct SpanRow {
    std::string behavior;
    std::uint32_t start{0};
    std::uint32_t end{0};

    bool operator==(const SpanRow&) const = default;
};

struct SpanTable {
    TxHash tx_hash;
    std::vector<SpanRow> rows;  // by start index

    bool operator==(const SpanTable&) const = default;
};

//! Rows for every loan and primitive of `tx`, labeled "<behavior> in <platform>". Labels that repeat
//! get ordinals ("First Swapping in Uniswap", "Second Swapping in Uniswap").
SpanTable span_table(const TxHash& tx, const std::vector<FlashLoanRecord>& loans,
                     const std::vector<PrimitiveBehavior>& primitives);

nlohmann::ordered_json to_json(const DistributionReport& r);
nlohmann::ordered_json to_json(const BehaviorReport& r);
nlohmann::ordered_json to_json(const SpanTable& t);
std::string to_csv(const DistributionReport& r);
std::string to_csv(const BehaviorReport& r);
std::string to_csv(const SpanTable& t);

//! Stored results were produced under a different registry.
class StaleResultsError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

//! Missing or unreadable result files.
class ResultsError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

//! Short identity of a corpus: its size and a hash over its transaction hashes.
std::string corpus_identity(const Corpus& corpus);

inline constexpr std::string_view kLoansFile = "flashloans.jsonl";
inline constexpr std::string_view kPrimitivesFile = "primitives.jsonl";
inline constexpr std::string_view kAdvancedFile = "advanced.jsonl";
inline constexpr std::string_view kManifestFile = "manifest.json";

struct PersistSelection {
    bool loans{true};
    bool primitives{true};
    bool advanced{true};
};

//! Appends records not already stored (keyed by transaction, kind and span) to the JSONL files in
//! `dir` and updates manifest.json. Throws StaleResultsError if `dir` holds results for another registry.
void persist(const Results& results, const std::filesystem::path& dir, const PatternRegistry& registry,
             const std::string& corpus_id, const PersistSelection& which = {});

//! Reads whichever result files exist in `dir`, deduplicated and sorted. Throws ResultsError without a
//! manifest and StaleResultsError when the manifest's registry checksum differs from `registry`'s.
Results load_results(const std::filesystem::path& dir, const PatternRegistry& registry);

}  // namespace thunderlens
