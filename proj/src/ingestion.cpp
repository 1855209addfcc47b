// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#include "thunderlens/ingestion.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "thunderlens/abi.hpp"

namespace thunderlens {

using nlohmann::ordered_json;

namespace {

class Reader {
  public:
    Reader(const std::string& where) : where_{where} {}

    [[noreturn]] void fail(const std::string& field, const std::string& message) const {
        throw FixtureError(FixtureError::Kind::kSchema, where_, field, message);
    }

    const ordered_json& member(const ordered_json& obj, const std::string& path, const char* key) const {
        auto it = obj.find(key);
        if (it == obj.end()) fail(join(path, key), "missing");
        return *it;
    }

    std::string text(const ordered_json& obj, const std::string& path, const char* key) const {
        const auto& v = member(obj, path, key);
        if (!v.is_string()) fail(join(path, key), "must be a string");
        return v.get<std::string>();
    }

    template <class T>
    T uint(const ordered_json& obj, const std::string& path, const char* key) const {
        const auto& v = member(obj, path, key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
            fail(join(path, key), "must be a non-negative integer");
        const auto raw = v.get<std::uint64_t>();
        if (raw > std::numeric_limits<T>::max()) fail(join(path, key), "out of range");
        return static_cast<T>(raw);
    }

    template <class F>
    auto fixed(const ordered_json& obj, const std::string& path, const char* key, std::string_view what) const {
        const auto s = text(obj, path, key);
        auto v = F::parse(s);
        if (!v) fail(join(path, key), std::string{what} + " must be " + std::to_string(F::kSize) + " bytes of hex");
        return *v;
    }

    Bytes hex(const ordered_json& obj, const std::string& path, const char* key) const {
        auto v = from_hex(text(obj, path, key));
        if (!v) fail(join(path, key), "must be 0x-prefixed hex");
        return *v;
    }

    static std::string join(const std::string& path, const char* key) {
        return path.empty() ? std::string{key} : path + "." + key;
    }

  private:
    const std::string& where_;
};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in{path, std::ios::binary};
    if (!in) throw FixtureError(FixtureError::Kind::kIo, path.string(), "", "cannot open");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

ordered_json bundle_to_json(const TransactionBundle& b) {
    ordered_json j;
    j["txHash"] = b.tx_hash.hex();
    j["blockNumber"] = b.block_number;
    j["txIndex"] = b.tx_index;
    j["sender"] = b.sender.hex();
    j["reverted"] = b.reverted;
    ordered_json calls = ordered_json::array();
    for (const auto& c : b.calls) {
        ordered_json cj;
        cj["index"] = c.index;
        cj["depth"] = c.depth;
        cj["caller"] = c.caller.hex();
        cj["callee"] = c.callee.hex();
        cj["selector"] = c.selector ? ordered_json(c.selector->hex()) : ordered_json(nullptr);
        cj["calldata"] = to_hex(c.calldata);
        cj["value"] = to_dec(c.value);
        calls.push_back(std::move(cj));
    }
    j["calls"] = std::move(calls);
    ordered_json logs = ordered_json::array();
    for (const auto& l : b.logs) {
        ordered_json lj;
        lj["logIndex"] = l.log_index;
        lj["emitter"] = l.emitter.hex();
        ordered_json topics = ordered_json::array();
        for (const auto& t : l.topics) topics.push_back(t.hex());
        lj["topics"] = std::move(topics);
        lj["data"] = to_hex(l.data);
        lj["afterCallIndex"] = l.after_call_index;
        logs.push_back(std::move(lj));
    }
    j["logs"] = std::move(logs);
    return j;
}

TransactionBundle bundle_from_json(const ordered_json& doc, const std::string& where) {
    Reader r{where};
    if (!doc.is_object()) r.fail("", "fixture must be a JSON object");
    TransactionBundle b;
    b.tx_hash = r.fixed<TxHash>(doc, "", "txHash", "txHash");
    b.block_number = r.uint<std::uint64_t>(doc, "", "blockNumber");
    b.tx_index = r.uint<std::uint32_t>(doc, "", "txIndex");
    b.sender = r.fixed<Address>(doc, "", "sender", "address");
    {
        const auto& v = r.member(doc, "", "reverted");
        if (!v.is_boolean()) r.fail("reverted", "must be true or false");
        b.reverted = v.get<bool>();
    }
    const auto& calls = r.member(doc, "", "calls");
    if (!calls.is_array()) r.fail("calls", "must be a list");
    for (std::size_t i = 0; i < calls.size(); ++i) {
        const std::string path = "calls[" + std::to_string(i) + "]";
        const auto& cj = calls[i];
        if (!cj.is_object()) r.fail(path, "must be an object");
        InternalCall c;
        c.index = r.uint<std::uint32_t>(cj, path, "index");
        c.depth = r.uint<std::uint32_t>(cj, path, "depth");
        c.caller = r.fixed<Address>(cj, path, "caller", "address");
        c.callee = r.fixed<Address>(cj, path, "callee", "address");
        const auto& sel = r.member(cj, path, "selector");
        if (!sel.is_null()) c.selector = r.fixed<Selector>(cj, path, "selector", "selector");
        c.calldata = r.hex(cj, path, "calldata");
        auto value = u256_from_dec(r.text(cj, path, "value"));
        if (!value) r.fail(path + ".value", "must be a decimal string below 2^256");
        c.value = *value;
        b.calls.push_back(std::move(c));
    }
    const auto& logs = r.member(doc, "", "logs");
    if (!logs.is_array()) r.fail("logs", "must be a list");
    for (std::size_t i = 0; i < logs.size(); ++i) {
        const std::string path = "logs[" + std::to_string(i) + "]";
        const auto& lj = logs[i];
        if (!lj.is_object()) r.fail(path, "must be an object");
        EventLog l;
        l.log_index = r.uint<std::uint32_t>(lj, path, "logIndex");
        l.emitter = r.fixed<Address>(lj, path, "emitter", "address");
        const auto& topics = r.member(lj, path, "topics");
        if (!topics.is_array()) r.fail(path + ".topics", "must be a list");
        for (std::size_t t = 0; t < topics.size(); ++t) {
            const std::string tpath = path + ".topics[" + std::to_string(t) + "]";
            if (!topics[t].is_string()) r.fail(tpath, "must be a string");
            auto h = TopicHash::parse(topics[t].get<std::string>());
            if (!h) r.fail(tpath, "topic must be 32 bytes of hex");
            l.topics.push_back(*h);
        }
        l.data = r.hex(lj, path, "data");
        l.after_call_index = r.uint<std::uint32_t>(lj, path, "afterCallIndex");
        b.logs.push_back(std::move(l));
    }
    if (auto err = validate(b)) r.fail(err->path, err->message);
    return b;
}

std::string serialize_bundle(const TransactionBundle& bundle) { return bundle_to_json(bundle).dump(2) + "\n"; }

TransactionBundle parse_bundle(std::string_view text, const std::string& where) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FixtureError(FixtureError::Kind::kSchema, where, "", std::string{"malformed JSON: "} + e.what());
    }
    return bundle_from_json(doc, where);
}

Corpus make_corpus(std::vector<TransactionBundle> bundles) {
    std::sort(bundles.begin(), bundles.end(), [](const auto& a, const auto& b) {
        return std::tie(a.block_number, a.tx_index, a.tx_hash) < std::tie(b.block_number, b.tx_index, b.tx_hash);
    });
    std::set<TxHash> seen;
    for (const auto& b : bundles) {
        if (!seen.insert(b.tx_hash).second)
            throw FixtureError(FixtureError::Kind::kDuplicate, b.tx_hash.hex(), "txHash", "duplicate transaction");
    }
    return Corpus{std::move(bundles)};
}

Corpus load_fixtures(const std::filesystem::path& path, unsigned workers) {
    namespace fs = std::filesystem;
    std::error_code ec;
    std::vector<fs::path> files;
    if (fs::is_directory(path, ec)) {
        for (const auto& entry : fs::directory_iterator(path)) {
            if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
            // Sidecars the synth and report commands write next to fixtures.
            const auto name = entry.path().filename();
            if (name == "registry.json" || name == "manifest.json") continue;
            files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
    } else if (fs::is_regular_file(path, ec)) {
        files.push_back(path);
    } else {
        throw FixtureError(FixtureError::Kind::kIo, path.string(), "", "no such file or directory");
    }

    std::vector<TransactionBundle> bundles(files.size());
    std::vector<std::exception_ptr> errors(files.size());
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t i = next++; i < files.size(); i = next++) {
            try {
                bundles[i] = parse_bundle(read_file(files[i]), files[i].string());
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(files.size())));
    if (n <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < n; ++i) pool.emplace_back(work);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return make_corpus(std::move(bundles));
}

std::string fixture_file_name(const TxHash& hash) { return hash.hex() + ".json"; }

void write_fixture(const TransactionBundle& bundle, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto file = dir / fixture_file_name(bundle.tx_hash);
    std::ofstream out{file, std::ios::binary | std::ios::trunc};
    if (!out) throw FixtureError(FixtureError::Kind::kIo, file.string(), "", "cannot write");
    out << serialize_bundle(bundle);
}

void write_fixtures(const Corpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& b : corpus.bundles) write_fixture(b, dir);
}

std::set<Address> discover_pairs(const Corpus& corpus, PatternRegistry& registry) {
    std::set<Address> out;
    for (const auto* pattern : registry.find(PlatformId::kUniswapV2, Category::kFlashLoan)) {
        if (!pattern->discovery || !pattern->event_hash) continue;
        for (const auto& bundle : corpus.bundles) {
            if (bundle.reverted) continue;
            for (const auto& log : bundle.logs) {
                if (log.topics.empty() || log.topics[0] != *pattern->event_hash) continue;
                if (!registry.satisfies(pattern->emitter, log.emitter)) continue;
                if (auto pair = abi::address_at(log.data, 0)) out.insert(*pair);
            }
        }
    }
    registry.address_book().known_pairs.add(out);
    return out;
}

}  // namespace thunderlens
