// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "thunderlens/core.hpp"

namespace thunderlens {

class RpcError : public std::runtime_error {
  public:
    enum class Kind { kTransport, kCapability, kNotFound, kProtocol };

    RpcError(Kind kind, const std::string& message) : std::runtime_error(message), kind_{kind} {}
    [[nodiscard]] Kind kind() const { return kind_; }

  private:
    Kind kind_;
};

//! Builds a bundle from an `eth_getTransactionReceipt` result and a `debug_traceTransaction` callTracer
//! result (with logs). Frames are numbered depth-first; each log's afterCallIndex is the last frame
//! entered before it was emitted. Logs inside failed frames are dropped.
TransactionBundle bundle_from_trace(const TxHash& hash, const nlohmann::json& receipt, const nlohmann::json& trace);

class RpcClient {
  public:
    //! `url` like `http://host:8545` or `https://host/path`.
    explicit RpcClient(std::string url, std::optional<std::filesystem::path> cache_dir = std::nullopt,
                       unsigned max_in_flight = 4);

    //! Served from the cache directory when present; otherwise fetched and written through.
    TransactionBundle fetch_bundle(const TxHash& hash);
    //! Fetches with at most `max_in_flight` concurrent requests; result order follows `hashes`.
    std::vector<TransactionBundle> fetch_many(const std::vector<TxHash>& hashes);

  private:
    nlohmann::json call(const std::string& method, const nlohmann::json& params);

    std::string scheme_host_port_;
    std::string path_;
    std::optional<std::filesystem::path> cache_dir_;
    unsigned max_in_flight_;
};

}  // namespace thunderlens
