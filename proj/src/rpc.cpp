// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "thunderlens/rpc.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "thunderlens/ingestion.hpp"

namespace thunderlens {

using nlohmann::json;

namespace {

[[noreturn]] void protocol(const std::string& message) { throw RpcError(RpcError::Kind::kProtocol, message); }

std::string str_field(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) protocol(std::string{"missing string field '"} + key + "'");
    return it->get<std::string>();
}

std::uint64_t quantity(const json& j, const char* key) {
    const auto text = str_field(j, key);
    try {
        return std::stoull(text, nullptr, 16);
    } catch (const std::exception&) {
        protocol(std::string{"bad quantity in '"} + key + "'");
    }
}

Address address_field(const json& j, const char* key) {
    auto a = Address::parse(str_field(j, key));
    if (!a) protocol(std::string{"bad address in '"} + key + "'");
    return *a;
}

U256 value_of(const json& frame) {
    auto it = frame.find("value");
    if (it == frame.end() || it->is_null()) return 0;
    std::string text = it->get<std::string>();
    if (text.starts_with("0x")) text.erase(0, 2);
    if (text.empty()) return 0;
    return U256{"0x" + text};
}

struct Flattener {
    TransactionBundle& bundle;

    void frame(const json& f, std::uint32_t depth, bool failed_above) {
        const auto index = static_cast<std::uint32_t>(bundle.calls.size());
        InternalCall call;
        call.index = index;
        call.depth = depth;
        call.caller = address_field(f, "from");
        if (auto it = f.find("to"); it != f.end() && it->is_string()) call.callee = address_field(f, "to");
        auto input = from_hex(f.contains("input") ? str_field(f, "input") : "0x");
        if (!input) protocol("bad call input");
        const std::string type = f.contains("type") ? str_field(f, "type") : "CALL";
        if (input->size() >= 4 && type != "CREATE" && type != "CREATE2") {
            call.selector = Selector::from_view(ByteView{*input}.first(4));
            call.calldata.assign(input->begin() + 4, input->end());
        } else {
            call.calldata = *input;
        }
        call.value = value_of(f);
        bundle.calls.push_back(std::move(call));

        const bool failed = failed_above || f.contains("error");
        const json empty = json::array();
        const json& children = f.contains("calls") ? f["calls"] : empty;
        const json& logs = f.contains("logs") ? f["logs"] : empty;

        std::size_t next_log = 0;
        const auto emit_logs_up_to = [&](std::size_t position) {
            for (; next_log < logs.size(); ++next_log) {
                const auto& l = logs[next_log];
                const std::size_t pos = l.contains("position") ? quantity_or_number(l["position"]) : children.size();
                if (pos > position) break;
                if (failed) continue;
                EventLog log;
                log.log_index = static_cast<std::uint32_t>(bundle.logs.size());
                log.emitter = address_field(l, "address");
                for (const auto& t : l.value("topics", json::array())) {
                    auto h = TopicHash::parse(t.get<std::string>());
                    if (!h) protocol("bad topic");
                    log.topics.push_back(*h);
                }
                auto data = from_hex(l.value("data", std::string{"0x"}));
                if (!data) protocol("bad log data");
                log.data = std::move(*data);
                log.after_call_index = static_cast<std::uint32_t>(bundle.calls.size() - 1);
                bundle.logs.push_back(std::move(log));
            }
        };
        for (std::size_t c = 0; c < children.size(); ++c) {
            emit_logs_up_to(c);
            frame(children[c], depth + 1, failed);
        }
        emit_logs_up_to(children.size());
    }

    static std::size_t quantity_or_number(const json& v) {
        if (v.is_number_unsigned() || v.is_number_integer()) return v.get<std::size_t>();
        if (v.is_string()) return std::stoull(v.get<std::string>(), nullptr, 0);
        protocol("bad log position");
    }
};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in{path, std::ios::binary};
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TransactionBundle bundle_from_trace(const TxHash& hash, const json& receipt, const json& trace) {
    TransactionBundle bundle;
    bundle.tx_hash = hash;
    bundle.block_number = quantity(receipt, "blockNumber");
    bundle.tx_index = static_cast<std::uint32_t>(quantity(receipt, "transactionIndex"));
    bundle.sender = address_field(receipt, "from");
    if (receipt.contains("status") && receipt["status"].is_string()) bundle.reverted = quantity(receipt, "status") == 0;
    if (!trace.is_object()) protocol("trace result is not an object");

    const auto receipt_logs = receipt.value("logs", json::array()).size();
    bool trace_has_logs = false;
    const std::function<void(const json&)> scan = [&](const json& f) {
        if (f.contains("logs") && !f["logs"].empty()) trace_has_logs = true;
        if (f.contains("calls"))
            for (const auto& c : f["calls"]) scan(c);
    };
    scan(trace);
    if (receipt_logs > 0 && !trace_has_logs)
        throw RpcError(RpcError::Kind::kCapability,
                       "debug_traceTransaction: callTracer returned no logs (node lacks tracerConfig.withLog)");

    Flattener{bundle}.frame(trace, 0, false);
    if (auto err = validate(bundle)) protocol("trace produced an invalid bundle at " + err->path + ": " + err->message);
    return bundle;
}

RpcClient::RpcClient(std::string url, std::optional<std::filesystem::path> cache_dir, unsigned max_in_flight)
    : cache_dir_{std::move(cache_dir)}, max_in_flight_{std::max(1u, max_in_flight)} {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw RpcError(RpcError::Kind::kTransport, "rpc url needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    scheme_host_port_ = url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
}

json RpcClient::call(const std::string& method, const json& params) {
    httplib::Client client{scheme_host_port_};
    client.set_connection_timeout(10);
    client.set_read_timeout(120);
    const json request{{"jsonrpc", "2.0"}, {"id", 1}, {"method", method}, {"params", params}};
    auto res = client.Post(path_, request.dump(), "application/json");
    if (!res) throw RpcError(RpcError::Kind::kTransport, method + ": " + httplib::to_string(res.error()));
    if (res->status == 404 || res->status == 405)
        throw RpcError(RpcError::Kind::kCapability, method + ": endpoint rejected the request (HTTP " +
                                                        std::to_string(res->status) + ")");
    if (res->status != 200)
        throw RpcError(RpcError::Kind::kTransport, method + ": HTTP " + std::to_string(res->status));
    json body;
    try {
        body = json::parse(res->body);
    } catch (const json::parse_error&) {
        protocol(method + ": response is not JSON");
    }
    if (auto err = body.find("error"); err != body.end() && !err->is_null()) {
        const auto code = err->value("code", 0);
        const auto message = err->value("message", std::string{});
        if (code == -32601 || message.find("not supported") != std::string::npos ||
            message.find("does not exist") != std::string::npos)
            throw RpcError(RpcError::Kind::kCapability, method + " is not available on this node: " + message);
        protocol(method + ": " + message);
    }
    return body.value("result", json{});
}

TransactionBundle RpcClient::fetch_bundle(const TxHash& hash) {
    if (cache_dir_) {
        const auto cached = *cache_dir_ / fixture_file_name(hash);
        if (std::filesystem::exists(cached)) return parse_bundle(read_file(cached), cached.string());
    }
    const json receipt = call("eth_getTransactionReceipt", json::array({hash.hex()}));
    if (receipt.is_null()) throw RpcError(RpcError::Kind::kNotFound, "transaction not found: " + hash.hex());
    const json trace = call("debug_traceTransaction",
                            json::array({hash.hex(), {{"tracer", "callTracer"}, {"tracerConfig", {{"withLog", true}}}}}));
    auto bundle = bundle_from_trace(hash, receipt, trace);
    if (cache_dir_) write_fixture(bundle, *cache_dir_);
    return bundle;
}

std::vector<TransactionBundle> RpcClient::fetch_many(const std::vector<TxHash>& hashes) {
    std::vector<TransactionBundle> out(hashes.size());
    std::vector<std::exception_ptr> errors(hashes.size());
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        const auto n = std::min<std::size_t>(max_in_flight_, std::max<std::size_t>(1, hashes.size()));
        for (std::size_t t = 0; t < n; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < hashes.size(); i = next++) {
                    try {
                        out[i] = fetch_bundle(hashes[i]);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace thunderlens
