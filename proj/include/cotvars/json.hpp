// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0
//
// JSON / JSONL helpers over nlohmann::ordered_json (keys keep insertion order
// so emitted files follow the documented field order).

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cotvars/decimal.hpp"

namespace cotvars {

using Json = nlohmann::ordered_json;

/// Integers that fit in uint64 are JSON numbers; larger ones are strings.
Json decimal_to_json(const Decimal& value);
Decimal decimal_from_json(const Json& j);

/// Reads one JSON document per nonblank line. Throws IoError / ValidationError
/// with the line number on failure.
std::vector<Json> read_jsonl(const std::filesystem::path& path);
void for_each_jsonl(const std::filesystem::path& path, const std::function<void(const Json&, std::size_t line)>& fn);
Json read_json(const std::filesystem::path& path);

std::string to_jsonl(const std::vector<Json>& docs);

/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace cotvars
