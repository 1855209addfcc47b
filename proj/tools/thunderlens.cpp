// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

// thunderlens: flash-loan identification and DeFi behavior classification over transaction traces.
//
//   thunderlens synth -n 1000 --seed 7 -o corpus/
//   thunderlens classify --pipeline --fixtures corpus/ --registry corpus/registry.json -o out/
//   thunderlens report --registry corpus/registry.json -o out/ --tx 0x...
//
// Exit status: 0 success, 1 input error, 2 configuration error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thunderlens/ingestion.hpp"
#include "thunderlens/pipeline.hpp"
#include "thunderlens/registry.hpp"
#include "thunderlens/reporting.hpp"
#include "thunderlens/rpc.hpp"
#include "thunderlens/synth.hpp"

namespace fs = std::filesystem;
using namespace thunderlens;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kConfigError = 2;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string registry_path;
    std::string fixtures;
    std::string rpc_url;
    std::string out = "out";
    unsigned workers = 1;
    bool paper_faithful = false;
    bool pipeline = false;
    bool include_all = false;
    std::string loan_swap_identity = "flashloan";
    std::string tx;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> hashes;
};

PatternRegistry load_registry(const RunConfig& cfg) {
    if (cfg.registry_path.empty()) return PatternRegistry::load_default();
    try {
        return PatternRegistry::load_from_file(cfg.registry_path);
    } catch (const std::exception& e) {
        throw ConfigError("registry " + cfg.registry_path + ": " + e.what());
    }
}

PipelineOptions pipeline_options(const RunConfig& cfg) {
    PipelineOptions o;
    o.identify.paper_faithful = cfg.paper_faithful;
    o.classify.include_all = cfg.include_all;
    auto identity = parse_loan_swap_identity(cfg.loan_swap_identity);
    if (!identity) throw ConfigError("--loan-swap-identity must be flashloan or newloan");
    o.advanced.loan_swap_identity = *identity;
    return o;
}

Corpus load_input(const RunConfig& cfg) {
    if (cfg.fixtures.empty()) throw ConfigError("--fixtures is required");
    return load_fixtures(cfg.fixtures, cfg.workers);
}

void emit(const Diagnostics& diags) {
    for (const auto& d : diags) std::cerr << to_json_line(d) << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out{path, std::ios::binary | std::ios::trunc};
    if (!out) throw ResultsError("cannot write " + path.string());
    out << text;
    if (!out) throw ResultsError("write failed: " + path.string());
}

int cmd_identify(const RunConfig& cfg) {
    const auto registry = load_registry(cfg);
    const auto options = pipeline_options(cfg);
    const auto corpus = load_input(cfg);
    auto working = registry;
    discover_pairs(corpus, working);
    Results r;
    r.loans = identify(corpus, working, r.diags, options.identify, cfg.workers);
    emit(r.diags);
    persist(r, cfg.out, registry, corpus_identity(corpus), {true, false, false});
    return kOk;
}

int cmd_classify(const RunConfig& cfg) {
    const auto registry = load_registry(cfg);
    const auto options = pipeline_options(cfg);
    const auto corpus = load_input(cfg);
    auto working = registry;
    Results r;
    if (cfg.pipeline) {
        r = run_pipeline(corpus, working, options, cfg.workers);
    } else {
        if (!fs::exists(fs::path{cfg.out} / kLoansFile))
            throw ResultsError("no " + std::string{kLoansFile} + " in " + cfg.out + "; run identify first or pass --pipeline");
        auto loans = load_results(cfg.out, registry).loans;
        discover_pairs(corpus, working);
        r = classify_corpus(corpus, std::move(loans), working, options, cfg.workers);
    }
    emit(r.diags);
    persist(r, cfg.out, registry, corpus_identity(corpus), {cfg.pipeline, true, true});
    return kOk;
}

int cmd_report(const RunConfig& cfg) {
    const auto registry = load_registry(cfg);
    const auto r = load_results(cfg.out, registry);
    const fs::path out{cfg.out};
    const auto dist = distribution(r.loans);
    const auto behaviors = behavior_summary(r.primitives, r.advanced);
    write_text(out / "report_distribution.json", to_json(dist).dump(2) + "\n");
    write_text(out / "report_distribution.csv", to_csv(dist));
    write_text(out / "report_behaviors.json", to_json(behaviors).dump(2) + "\n");
    write_text(out / "report_behaviors.csv", to_csv(behaviors));
    if (!cfg.tx.empty()) {
        TxHash tx;
        try {
            tx = parse_hash(cfg.tx);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("--tx: ") + e.what());
        }
        const bool known = std::any_of(r.loans.begin(), r.loans.end(), [&](const auto& l) { return l.tx_hash == tx; }) ||
                           std::any_of(r.primitives.begin(), r.primitives.end(),
                                       [&](const auto& p) { return p.tx_hash == tx; });
        if (!known) throw ResultsError("no results for transaction " + tx.hex());
        const auto table = span_table(tx, r.loans, r.primitives);
        write_text(out / ("span_" + tx.hex() + ".json"), to_json(table).dump(2) + "\n");
        write_text(out / ("span_" + tx.hex() + ".csv"), to_csv(table));
        std::cout << to_csv(table);
    }
    return kOk;
}

int cmd_fetch(const RunConfig& cfg) {
    if (cfg.rpc_url.empty()) throw ConfigError("--rpc-url (or THUNDERLENS_RPC_URL) is required");
    std::vector<TxHash> hashes;
    for (const auto& h : cfg.hashes) {
        try {
            hashes.push_back(parse_hash(h));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(h + ": " + e.what());
        }
    }
    RpcClient client{cfg.rpc_url, fs::path{cfg.out} / ".rpc-cache", std::max(1u, cfg.workers)};
    const auto bundles = client.fetch_many(hashes);
    for (const auto& b : bundles) write_fixture(b, cfg.out);
    return kOk;
}

int cmd_synth(const RunConfig& cfg) {
    const auto data = synth::generate_corpus(cfg.n, cfg.seed, cfg.workers);
    const fs::path out{cfg.out};
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw ResultsError("cannot create " + out.string() + ": " + ec.message());
    write_fixtures(data.corpus, out);
    std::string lines;
    for (const auto& t : data.truth) lines += synth::to_json(t).dump() + "\n";
    write_text(out / "ground_truth.jsonl", lines);
    write_text(out / "registry.json", synth::registry().serialize());
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Flash-loan identification and DeFi behavior classification"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string{kToolVersion});

    RunConfig cfg;
    if (const char* env = std::getenv("THUNDERLENS_RPC_URL")) cfg.rpc_url = env;
    app.add_option("--registry", cfg.registry_path, "Pattern registry file (defaults to the built-in catalog)");
    app.add_option("--fixtures", cfg.fixtures, "Fixture file or directory of *.json bundles");
    app.add_option("--rpc-url", cfg.rpc_url, "Archive node endpoint (env THUNDERLENS_RPC_URL)");
    app.add_option("-o,--out", cfg.out, "Output directory")->capture_default_str();
    app.add_option("--workers", cfg.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_flag("--paper-faithful", cfg.paper_faithful, "Match dYdX events on hashes alone");
    app.add_flag("--pipeline", cfg.pipeline, "Run identification before classification");
    app.add_flag("--all", cfg.include_all, "Classify transactions without a flash loan too");
    app.add_option("--loan-swap-identity", cfg.loan_swap_identity, "flashloan or newloan")
        ->check(CLI::IsMember({"flashloan", "newloan"}))
        ->capture_default_str();

    auto* identify_cmd = app.add_subcommand("identify", "Find flash loans; writes flashloans.jsonl");
    auto* classify_cmd = app.add_subcommand("classify", "Classify behaviors; writes primitives.jsonl and advanced.jsonl");
    auto* report_cmd = app.add_subcommand("report", "Distribution and behavior reports, span table with --tx");
    report_cmd->add_option("--tx", cfg.tx, "Transaction hash for a span table");
    auto* fetch_cmd = app.add_subcommand("fetch", "Fetch bundles from an archive node into fixture files");
    fetch_cmd->add_option("hashes", cfg.hashes, "Transaction hashes")->required();
    auto* synth_cmd = app.add_subcommand("synth", "Generate labeled synthetic fixtures");
    synth_cmd->add_option("-n", cfg.n, "Number of transactions")->required();
    synth_cmd->add_option("--seed", cfg.seed, "Generator seed")->capture_default_str();
    for (auto* sub : {identify_cmd, classify_cmd, report_cmd, fetch_cmd, synth_cmd}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (*identify_cmd) return cmd_identify(cfg);
        if (*classify_cmd) return cmd_classify(cfg);
        if (*report_cmd) return cmd_report(cfg);
        if (*fetch_cmd) return cmd_fetch(cfg);
        if (*synth_cmd) return cmd_synth(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "thunderlens: " << e.what() << '\n';
        return kConfigError;
    } catch (const StaleResultsError& e) {
        std::cerr << "thunderlens: stale results: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "thunderlens: " << e.what() << '\n';
        return kInputError;
    }
    return kConfigError;
}
