// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0

#include "cotvars/json.hpp"

#include <fstream>
#include <sstream>

#include "cotvars/error.hpp"

namespace cotvars {

Json decimal_to_json(const Decimal& value) {
  if (auto u = value.to_u64()) return Json(*u);
  return Json(value.str());
}

Decimal decimal_from_json(const Json& j) {
  if (j.is_number_unsigned()) return Decimal(j.get<std::uint64_t>());
  if (j.is_number_integer()) {
    const auto v = j.get<std::int64_t>();
    if (v < 0) throw ValidationError("expected a nonnegative integer, got " + j.dump());
    return Decimal(static_cast<std::uint64_t>(v));
  }
  if (j.is_string()) return Decimal::parse(j.get<std::string>());
  throw ValidationError("expected an integer, got " + j.dump());
}

void for_each_jsonl(const std::filesystem::path& path, const std::function<void(const Json&, std::size_t)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json doc;
    try {
      doc = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
    try {
      fn(doc, line_no);
    } catch (const Json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": schema error: " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
  std::vector<Json> docs;
  for_each_jsonl(path, [&](const Json& j, std::size_t) { docs.push_back(j); });
  return docs;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError(path.string() + ": invalid JSON: " + e.what());
  }
}

std::string to_jsonl(const std::vector<Json>& docs) {
  std::string out;
  for (const auto& d : docs) {
    out += d.dump();
    out.push_back('\n');
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

}  // namespace cotvars
