// Copyright 2026 The ThunderLens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "thunderlens/core.hpp"
#include "thunderlens/registry.hpp"

namespace thunderlens {

class FixtureError : public std::runtime_error {
  public:
    enum class Kind { kSchema, kDuplicate, kIo };

    FixtureError(Kind kind, std::string where, std::string field, const std::string& message)
        : std::runtime_error(where + (field.empty() ? "" : ": " + field) + ": " + message),
          kind_{kind},
          where_{std::move(where)},
          field_{std::move(field)} {}

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] const std::string& where() const { return where_; }
    //! Field path inside the document, e.g. `logs[3].afterCallIndex`.
    [[nodiscard]] const std::string& field() const { return field_; }

  private:
    Kind kind_;
    std::string where_;
    std::string field_;
};

//! Ordered by (blockNumber, txIndex); no duplicate txHash.
struct Corpus {
    std::vector<TransactionBundle> bundles;
};

nlohmann::ordered_json bundle_to_json(const TransactionBundle& bundle);
//! Parses and validates one fixture document. `where` names the source in errors.
TransactionBundle bundle_from_json(const nlohmann::ordered_json& doc, const std::string& where = "<bundle>");

std::string serialize_bundle(const TransactionBundle& bundle);
TransactionBundle parse_bundle(std::string_view text, const std::string& where = "<bundle>");

//! Sorts and checks for duplicate hashes.
Corpus make_corpus(std::vector<TransactionBundle> bundles);

//! Loads one fixture file or every `*.json` file in a directory (non-recursive), skipping
//! `registry.json` and `manifest.json`.
Corpus load_fixtures(const std::filesystem::path& path, unsigned workers = 1);

std::string fixture_file_name(const TxHash& hash);
void write_fixture(const TransactionBundle& bundle, const std::filesystem::path& dir);
void write_fixtures(const Corpus& corpus, const std::filesystem::path& dir);

//! Pair contracts announced by the factory's PairCreated logs; merged into the registry's known pairs.
std::set<Address> discover_pairs(const Corpus& corpus, PatternRegistry& registry);

}  // namespace thunderlens
