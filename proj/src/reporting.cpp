// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#include "thunderlens/reporting.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

namespace thunderlens {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string ordinal(std::size_t n) {
    static const char* const kWords[] = {"First", "Second", "Third",   "Fourth", "Fifth",
                                         "Sixth", "Seventh", "Eighth", "Ninth",  "Tenth"};
    if (n >= 1 && n <= 10) return kWords[n - 1];
    return std::to_string(n) + "th";
}

std::string behavior_label(const PrimitiveBehavior& p) {
    switch (p.kind) {
        case PrimitiveKind::kExchange:
            return "Swapping";
        case PrimitiveKind::kMarginTrade:
            return "Margin Trading";
        case PrimitiveKind::kLiquidation:
            return "Liquidation";
        case PrimitiveKind::kLendingBorrowing:
            break;
    }
    if (p.sub_action == "CollateralBorrow") return "Collateral Borrowing";
    if (p.sub_action == "Borrow") return "Borrowing";
    if (p.sub_action == "Repay") return "Repaying";
    if (p.sub_action == "Deposit") return "Depositing";
    if (p.sub_action == "Redeem") return "Redeeming";
    return "Lending and Borrowing";
}

std::string span_key(const Span& s) { return std::to_string(s.start) + "-" + std::to_string(s.end); }

std::string key_of(const FlashLoanRecord& l) { return l.tx_hash.hex() + "|" + l.provider.name() + "|" + span_key(l.span); }

std::string key_of(const PrimitiveBehavior& p) {
    return p.tx_hash.hex() + "|" + to_string(p.kind) + "|" + p.platform.name() + "|" + p.sub_action + "|" +
           span_key(p.span);
}

std::string key_of(const AdvancedBehavior& a) {
    std::string k = a.tx_hash.hex() + "|" + to_string(a.kind);
    for (const auto& e : a.evidence) k += "|" + e.kind + "@" + span_key(e.span);
    for (const auto& [name, value] : a.details) k += "|" + name + "=" + value;
    return k;
}

std::string read_all(const fs::path& path) {
    std::ifstream in{path, std::ios::binary};
    if (!in) throw ResultsError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <class T, class Parse>
std::vector<T> read_jsonl(const fs::path& path, Parse parse) {
    std::vector<T> out;
    if (!fs::exists(path)) return out;
    std::istringstream lines{read_all(path)};
    std::string line;
    std::size_t n = 0;
    while (std::getline(lines, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            out.push_back(parse(ordered_json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ResultsError(path.string() + ":" + std::to_string(n) + ": " + e.what());
        } catch (const RecordError& e) {
            throw ResultsError(path.string() + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

template <class T>
void dedup_sort(std::vector<T>& v, bool (*order)(const T&, const T&)) {
    std::set<std::string> seen;
    std::vector<T> out;
    for (auto& x : v)
        if (seen.insert(key_of(x)).second) out.push_back(std::move(x));
    std::stable_sort(out.begin(), out.end(), order);
    v = std::move(out);
}

template <class T>
void append_new(const fs::path& path, const std::vector<T>& existing, const std::vector<T>& fresh) {
    std::set<std::string> seen;
    for (const auto& x : existing) seen.insert(key_of(x));
    std::ofstream out{path, std::ios::binary | std::ios::app};
    if (!out) throw ResultsError("cannot write " + path.string());
    for (const auto& x : fresh)
        if (seen.insert(key_of(x)).second) out << to_json(x).dump() << '\n';
    if (!out) throw ResultsError("write failed: " + path.string());
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::optional<ordered_json> read_manifest(const fs::path& dir) {
    const auto path = dir / kManifestFile;
    if (!fs::exists(path)) return std::nullopt;
    try {
        return ordered_json::parse(read_all(path));
    } catch (const nlohmann::json::exception& e) {
        throw ResultsError(path.string() + ": " + e.what());
    }
}

void check_checksum(const ordered_json& manifest, const PatternRegistry& registry, const fs::path& dir) {
    const auto stored = manifest.value("registryChecksum", std::string{});
    const auto current = registry.checksum();
    if (stored != current)
        throw StaleResultsError("results in " + dir.string() + " were produced with registry " + stored +
                                ", current registry is " + current);
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out{path, std::ios::binary | std::ios::trunc};
    if (!out) throw ResultsError("cannot write " + path.string());
    out << text;
    if (!out) throw ResultsError("write failed: " + path.string());
}

}  // namespace

DistributionReport distribution(const std::vector<FlashLoanRecord>& records, std::size_t top_n) {
    std::map<std::string, std::set<TxHash>> txs;
    std::map<std::string, std::set<Address>> borrowers;
    std::set<TxHash> all_txs;
    std::set<Address> all_borrowers;
    std::map<Address, std::set<TxHash>> per_runner;
    for (const auto& r : records) {
        const auto name = r.provider.name();
        txs[name].insert(r.tx_hash);
        borrowers[name].insert(r.runner);
        all_txs.insert(r.tx_hash);
        all_borrowers.insert(r.runner);
        per_runner[r.runner].insert(r.tx_hash);
    }
    DistributionReport out;
    for (const auto& [name, set] : txs) out.per_provider[name] = {set.size(), borrowers[name].size()};
    out.totals = {all_txs.size(), all_borrowers.size()};
    for (const auto& [runner, set] : per_runner) out.top_borrowers.emplace_back(runner, set.size());
    std::sort(out.top_borrowers.begin(), out.top_borrowers.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    if (out.top_borrowers.size() > top_n) out.top_borrowers.resize(top_n);
    return out;
}

BehaviorReport behavior_summary(const std::vector<PrimitiveBehavior>& primitives,
                                const std::vector<AdvancedBehavior>& advanced) {
    BehaviorReport out;
    std::map<std::string, std::set<TxHash>> prim_txs;
    std::map<std::string, std::set<TxHash>> adv_txs;
    std::set<TxHash> any;
    for (auto k : {PrimitiveKind::kExchange, PrimitiveKind::kLendingBorrowing, PrimitiveKind::kMarginTrade,
                   PrimitiveKind::kLiquidation}) {
        prim_txs[to_string(k)];
        out.primitive_instances[to_string(k)] = 0;
    }
    for (auto k : {AdvancedKind::kArbitrage, AdvancedKind::kAntiLiquidation, AdvancedKind::kCollateralSwap,
                   AdvancedKind::kLoanSwap, AdvancedKind::kPlatformSwap}) {
        adv_txs[to_string(k)];
        out.advanced_instances[to_string(k)] = 0;
    }
    for (const auto& p : primitives) {
        prim_txs[to_string(p.kind)].insert(p.tx_hash);
        ++out.primitive_instances[to_string(p.kind)];
        any.insert(p.tx_hash);
    }
    for (const auto& a : advanced) {
        adv_txs[to_string(a.kind)].insert(a.tx_hash);
        ++out.advanced_instances[to_string(a.kind)];
    }
    for (const auto& [k, set] : prim_txs) out.primitive_counts[k] = set.size();
    for (const auto& [k, set] : adv_txs) out.advanced_counts[k] = set.size();
    out.swapping.collateral = out.advanced_counts[to_string(AdvancedKind::kCollateralSwap)];
    out.swapping.loan = out.advanced_counts[to_string(AdvancedKind::kLoanSwap)];
    out.swapping.platform = out.advanced_counts[to_string(AdvancedKind::kPlatformSwap)];
    out.advanced_counts["Swapping"] = out.swapping.total();
    out.primitive_transactions = any.size();
    return out;
}

SpanTable span_table(const TxHash& tx, const std::vector<FlashLoanRecord>& loans,
                     const std::vector<PrimitiveBehavior>& primitives) {
    SpanTable t;
    t.tx_hash = tx;
    for (const auto& l : loans)
        if (l.tx_hash == tx) t.rows.push_back({"Flash Loan in " + l.provider.display_name(), l.span.start, l.span.end});
    for (const auto& p : primitives)
        if (p.tx_hash == tx)
            t.rows.push_back({behavior_label(p) + " in " + p.platform.display_name(), p.span.start, p.span.end});
    std::stable_sort(t.rows.begin(), t.rows.end(), [](const SpanRow& a, const SpanRow& b) {
        return std::tie(a.start, a.end, a.behavior) < std::tie(b.start, b.end, b.behavior);
    });
    std::map<std::string, std::size_t> total;
    for (const auto& r : t.rows) ++total[r.behavior];
    std::map<std::string, std::size_t> seen;
    for (auto& r : t.rows)
        if (total[r.behavior] > 1) r.behavior = ordinal(++seen[r.behavior]) + " " + r.behavior;
    return t;
}

ordered_json to_json(const DistributionReport& r) {
    ordered_json j;
    j["perProvider"] = ordered_json::object();
    for (const auto& [name, s] : r.per_provider)
        j["perProvider"][name] = {{"txCount", s.tx_count}, {"uniqueBorrowers", s.unique_borrowers}};
    j["totals"] = {{"txCount", r.totals.tx_count}, {"uniqueBorrowers", r.totals.unique_borrowers}};
    j["topBorrowers"] = ordered_json::array();
    for (const auto& [a, n] : r.top_borrowers) j["topBorrowers"].push_back({{"address", a.hex()}, {"txCount", n}});
    return j;
}

ordered_json to_json(const BehaviorReport& r) {
    ordered_json j;
    j["primitiveCounts"] = r.primitive_counts;
    j["primitiveTransactions"] = r.primitive_transactions;
    j["advancedCounts"] = r.advanced_counts;
    j["swappingBreakdown"] = {
        {"collateral", r.swapping.collateral}, {"loan", r.swapping.loan}, {"platform", r.swapping.platform}};
    j["instances"] = {{"primitives", r.primitive_instances}, {"advanced", r.advanced_instances}};
    return j;
}

ordered_json to_json(const SpanTable& t) {
    ordered_json j;
    j["txHash"] = t.tx_hash.hex();
    j["rows"] = ordered_json::array();
    for (const auto& r : t.rows) j["rows"].push_back({{"behavior", r.behavior}, {"intStart", r.start}, {"intEnd", r.end}});
    return j;
}

std::string to_csv(const DistributionReport& r) {
    std::ostringstream out;
    out << "provider,tx_count,unique_borrowers\n";
    for (const auto& [name, s] : r.per_provider) out << name << ',' << s.tx_count << ',' << s.unique_borrowers << '\n';
    out << "Total," << r.totals.tx_count << ',' << r.totals.unique_borrowers << '\n';
    return out.str();
}

std::string to_csv(const BehaviorReport& r) {
    std::ostringstream out;
    out << "group,kind,transactions,instances\n";
    for (const auto& [k, n] : r.primitive_counts) out << "primitive," << k << ',' << n << ',' << r.primitive_instances.at(k) << '\n';
    out << "primitive,Total," << r.primitive_transactions << ',';
    std::size_t instances = 0;
    for (const auto& [k, n] : r.primitive_instances) instances += n;
    out << instances << '\n';
    for (const auto& [k, n] : r.advanced_counts) {
        const auto it = r.advanced_instances.find(k);
        out << "advanced," << k << ',' << n << ',';
        if (it != r.advanced_instances.end()) {
            out << it->second;
        } else {
            out << r.advanced_instances.at(to_string(AdvancedKind::kCollateralSwap)) +
                       r.advanced_instances.at(to_string(AdvancedKind::kLoanSwap)) +
                       r.advanced_instances.at(to_string(AdvancedKind::kPlatformSwap));
        }
        out << '\n';
    }
    return out.str();
}

std::string to_csv(const SpanTable& t) {
    std::ostringstream out;
    out << "behavior,int_start,int_end\n";
    for (const auto& r : t.rows) out << r.behavior << ',' << r.start << ',' << r.end << '\n';
    return out.str();
}

std::string corpus_identity(const Corpus& corpus) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& b : corpus.bundles)
        for (auto byte : b.tx_hash.bytes) h = (h ^ byte) * 1099511628211ULL;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::to_string(corpus.bundles.size()) + ":" + buf;
}

void persist(const Results& results, const fs::path& dir, const PatternRegistry& registry, const std::string& corpus_id,
             const PersistSelection& which) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ResultsError("cannot create " + dir.string() + ": " + ec.message());

    auto manifest = read_manifest(dir);
    if (manifest) {
        check_checksum(*manifest, registry, dir);
    } else {
        manifest = ordered_json{{"tool", "thunderlens"},
                                {"version", kToolVersion},
                                {"registryChecksum", registry.checksum()},
                                {"corpora", ordered_json::array()},
                                {"createdAt", utc_now()}};
    }
    auto& corpora = (*manifest)["corpora"];
    if (std::find(corpora.begin(), corpora.end(), corpus_id) == corpora.end()) corpora.push_back(corpus_id);

    if (which.loans)
        append_new(dir / kLoansFile, read_jsonl<FlashLoanRecord>(dir / kLoansFile, flash_loan_from_json), results.loans);
    if (which.primitives)
        append_new(dir / kPrimitivesFile, read_jsonl<PrimitiveBehavior>(dir / kPrimitivesFile, primitive_from_json),
                   results.primitives);
    if (which.advanced)
        append_new(dir / kAdvancedFile, read_jsonl<AdvancedBehavior>(dir / kAdvancedFile, advanced_from_json),
                   results.advanced);
    write_file(dir / kManifestFile, manifest->dump(2) + "\n");
}

Results load_results(const fs::path& dir, const PatternRegistry& registry) {
    const auto manifest = read_manifest(dir);
    if (!manifest) throw ResultsError("no " + std::string{kManifestFile} + " in " + dir.string());
    check_checksum(*manifest, registry, dir);
    Results out;
    out.loans = read_jsonl<FlashLoanRecord>(dir / kLoansFile, flash_loan_from_json);
    out.primitives = read_jsonl<PrimitiveBehavior>(dir / kPrimitivesFile, primitive_from_json);
    out.advanced = read_jsonl<AdvancedBehavior>(dir / kAdvancedFile, advanced_from_json);
    dedup_sort(out.loans, &loan_order);
    dedup_sort(out.primitives, &primitive_order);
    dedup_sort(out.advanced, &advanced_order);
    return out;
}

}  // namespace thunderlens
