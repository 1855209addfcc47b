// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

// Release gate: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <functional>
#include <iostream>
#include <map>
#include <set>

#include "signature_table.hpp"
#include "support.hpp"
#include "thunderlens/pipeline.hpp"
#include "thunderlens/reporting.hpp"
#include "thunderlens/synth.hpp"

using namespace thunderlens;
namespace fs = std::filesystem;

namespace {

const char* kGolden = "0xb5c8bd9430b6cc87a0e2fe110ece6bf527fa4f170a4bc8cd032f768fc5219838";

struct Check {
    std::string why;
    bool ok{true};
    void expect(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            why = what;
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void golden_span_table(Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto corpus = load_fixtures(std::string{THUNDERLENS_FIXTURES} + "/bzx_hack");
    auto reg = PatternRegistry::load_from_file(std::string{THUNDERLENS_CONFIG} + "/registry.example.json");
    const auto r = run_pipeline(corpus, reg);
    const auto table = span_table(parse_hash(kGolden), r.loans, r.primitives);
    const double took = seconds_since(t0);
    const std::vector<SpanRow> want{{"Flash Loan in dYdX", 2, 188},
                                    {"Collateral Borrowing in Compound", 21, 46},
                                    {"Margin Trading in bZx", 47, 174},
                                    {"First Swapping in Uniswap", 158, 161},
                                    {"Second Swapping in Uniswap", 176, 180}};
    c.expect(table.rows == want, "span table differs:\n" + to_csv(table));
    c.expect(took < 1.0, "took " + std::to_string(took) + " s");
}

void oracle_equivalence(Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto data = synth::generate_corpus(1000, 7, 1);
    auto reg = synth::registry();
    const auto r = run_pipeline(data.corpus, reg, {}, 1);
    const auto card = synth::score(data.truth, r.loans, r.primitives, r.advanced);
    const double took = seconds_since(t0);
    for (const auto& [label, s] : card) {
        c.expect(s.true_positive > 0, label + " has no positives");
        c.expect(s.precision() == 1.0 && s.recall() == 1.0,
                 label + " P=" + std::to_string(s.precision()) + " R=" + std::to_string(s.recall()));
    }
    c.expect(card.size() == 13, "expected 13 labels");
    c.expect(took < 30.0, "took " + std::to_string(took) + " s");
}

void mutation_suite(Check& c) {
    const auto data = synth::generate_corpus(3000, 19, 4);
    auto reg = synth::registry();
    const auto r = run_pipeline(data.corpus, reg, {}, 4);
    std::map<TxHash, std::size_t> loans, margin, anti;
    for (const auto& l : r.loans) ++loans[l.tx_hash];
    for (const auto& p : r.primitives)
        if (p.kind == PrimitiveKind::kMarginTrade) ++margin[p.tx_hash];
    for (const auto& a : r.advanced)
        if (a.kind == AdvancedKind::kAntiLiquidation) ++anti[a.tx_hash];
    std::map<std::string, std::size_t> seen;
    for (const auto& t : data.truth) {
        if (t.scenario.rfind("mut_", 0) != 0) continue;
        ++seen[t.scenario];
        if (t.scenario == "mut_margin_selector")
            c.expect(margin[t.tx_hash] == 0, t.scenario + " still yields a margin trade");
        else if (t.scenario == "mut_anti_liquidation_emitter")
            c.expect(anti[t.tx_hash] == 0, t.scenario + " still yields an anti-liquidation");
        else
            c.expect(loans[t.tx_hash] == 0, t.scenario + " still yields a flash loan");
    }
    c.expect(seen.size() == 11, "only " + std::to_string(seen.size()) + " of 11 mutation templates drawn");

    std::size_t siblings = 0;
    for (std::uint64_t i = 0; i < 600 && siblings < 250; ++i) {
        const auto sib = synth::negative_sibling(synth::draw_scenario(23, i));
        if (!sib) continue;
        ++siblings;
        const auto [bundle, truth] = synth::generate(*sib);
        Diagnostics d;
        c.expect(identify_bundle(bundle, reg, d).empty() && truth.loans.empty(), sib->name + " is not negative");
    }
    c.expect(siblings >= 200, "too few negative siblings");
}

void table_pinning(Check& c) {
    const auto reg = PatternRegistry::load_default();
    std::set<std::string> allowed;
    for (const auto& row : tl_test::table()) {
        allowed.insert(row.value);
        std::size_t hits = 0;
        for (const auto* p : reg.find(row.platform, row.category)) hits += tl_test::carries(*p, row.value) ? 1 : 0;
        const bool shared = std::string{row.value} == "0x458f5fa412d0f69b08dd84872b0215675cc67bc1d5b6fd93300a1c3878b86196";
        c.expect(hits == (shared ? 4u : 1u), std::string{row.name} + " " + row.value + " not pinned");
    }
    for (const auto& p : reg.patterns())
        for (const auto& v : tl_test::values_of(p)) c.expect(allowed.contains(v), "unexpected value " + v);
}

void determinism_and_round_trips(Check& c) {
    const auto data = synth::generate_corpus(250, 29, 1);
    c.expect(synth::generate_corpus(250, 29, 4).corpus.bundles == data.corpus.bundles, "generation depends on workers");
    for (std::size_t i = 0; i < data.corpus.bundles.size(); ++i) {
        const auto& b = data.corpus.bundles[i];
        const auto text = serialize_bundle(b);
        c.expect(parse_bundle(text) == b && serialize_bundle(parse_bundle(text)) == text, "bundle round trip");
        c.expect(synth::ground_truth_from_json(synth::to_json(data.truth[i])) == data.truth[i], "ground truth round trip");
    }
    tl_test::Gen g{29};
    for (std::uint64_t i = 0; i < 250; ++i) {
        const auto b = tl_test::random_bundle(g, i);
        c.expect(parse_bundle(serialize_bundle(b)) == b, "random bundle round trip");
    }
    auto reg1 = synth::registry(), reg4 = synth::registry();
    const auto one = run_pipeline(data.corpus, reg1, {}, 1);
    const auto four = run_pipeline(data.corpus, reg4, {}, 4);
    c.expect(one.loans == four.loans && one.primitives == four.primitives && one.advanced == four.advanced,
             "results depend on workers");
    const auto text = reg1.serialize();
    const auto back = PatternRegistry::load_from_string(text);
    c.expect(back.serialize() == text && back.checksum() == reg1.checksum(), "registry round trip");

    tl_test::TempDir dir{"acceptance"};
    persist(one, dir.path(), reg1, corpus_identity(data.corpus));
    const auto loaded = load_results(dir.path(), reg1);
    c.expect(loaded.loans == one.loans && loaded.primitives == one.primitives && loaded.advanced == one.advanced,
             "results round trip");
}

void dedup_semantics(Check& c) {
    const auto data = synth::generate_corpus(120, 31);
    auto reg = synth::registry();
    const auto r = run_pipeline(data.corpus, reg);
    tl_test::TempDir dir{"acceptance"};
    const auto id = corpus_identity(data.corpus);
    persist(r, dir.path(), reg, id);
    std::map<std::string, std::string> before;
    for (auto name : {kLoansFile, kPrimitivesFile, kAdvancedFile})
        before[std::string{name}] = tl_test::read_file(dir / std::string{name});
    persist(r, dir.path(), reg, id);
    for (const auto& [name, text] : before)
        c.expect(tl_test::read_file(dir / name) == text, name + " grew on a repeated persist");
    const auto p = dir / std::string{kLoansFile};
    tl_test::write_file(p, before.at(std::string{kLoansFile}) + before.at(std::string{kLoansFile}));
    c.expect(load_results(dir.path(), reg).loans == r.loans, "duplicate lines survive a load");
    bool stale = false;
    try {
        load_results(dir.path(), PatternRegistry::load_default());
    } catch (const StaleResultsError&) {
        stale = true;
    }
    c.expect(stale, "foreign registry accepted");

    // One borrower, one transaction, two providers.
    FlashLoanRecord a;
    a.provider = Platform{PlatformId::kDydx};
    a.runner = tl_test::addr_n(1);
    a.tx_hash = tl_test::hash_n(1);
    auto b = a;
    b.provider = Platform{PlatformId::kAave};
    b.span = {3, 4};
    const auto d = distribution({a, b});
    c.expect(d.totals == ProviderStats{1, 1}, "totals double count");
    c.expect(d.per_provider.size() == 2, "per-provider rows");
    const auto s = behavior_summary({}, {});
    c.expect(s.advanced_counts.at("Swapping") == 0, "swapping total");
}

void throughput(Check& c) {
    const auto data = synth::generate_corpus(10000, 37, 4);
    tl_test::TempDir dir{"acceptance"};
    write_fixtures(data.corpus, dir.path());
    const auto t0 = std::chrono::steady_clock::now();
    const auto corpus = load_fixtures(dir.path(), 4);
    auto reg = synth::registry();
    const auto r = run_pipeline(corpus, reg, {}, 4);
    const double took = seconds_since(t0);
    c.expect(corpus.bundles.size() == 10000, "loaded " + std::to_string(corpus.bundles.size()));
    c.expect(!r.loans.empty(), "no loans found");
    c.expect(took < 60.0, "took " + std::to_string(took) + " s");
    std::cout << "  (10000 bundles loaded and classified in " << took << " s)\n";
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
        {"golden span table under one second", golden_span_table},
        {"detectors match synthetic labels (n=1000, seed 7) under 30 s", oracle_equivalence},
        {"mutated loans and behaviors go undetected", mutation_suite},
        {"signature table pinned", table_pinning},
        {"determinism and round trips", determinism_and_round_trips},
        {"deduplicated persistence and counting", dedup_semantics},
        {"10k bundles under 60 s on 4 workers", throughput},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Check c;
        try {
            run(c);
        } catch (const std::exception& e) {
            c.ok = false;
            c.why = std::string{"exception: "} + e.what();
        }
        std::cout << (c.ok ? "PASS" : "FAIL") << "  " << name;
        if (!c.ok) std::cout << ": " << c.why;
        std::cout << '\n';
        failed += c.ok ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
