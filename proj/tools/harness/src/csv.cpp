// Copyright 2026 The ipmcmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ipmcmc/harness/csv.hpp"

#include <charconv>
#include <cstdlib>

#include <fmt/format.h>

#include "ipmcmc/errors.hpp"

namespace ipmcmc::harness {

std::string format_double(double value) { return fmt::format("{}", value); }

double parse_double(std::string_view text) {
  const std::string copy(text);
  char* end = nullptr;
  const double value = std::strtod(copy.c_str(), &end);
  if (copy.empty() || end != copy.c_str() + copy.size()) {
    throw Error("malformed number '" + copy + "'");
  }
  return value;
}

std::uint64_t parse_unsigned(std::string_view text) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error("malformed integer '" + std::string(text) + "'");
  }
  return value;
}

std::int64_t parse_signed(std::string_view text) {
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error("malformed integer '" + std::string(text) + "'");
  }
  return value;
}

std::string content_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& manifest_hash,
                     const std::vector<std::string>& header, const std::vector<std::string>& comments)
    : out_(path) {
  if (!out_) {
    throw Error("cannot write " + path.string());
  }
  out_ << "# manifest=" << manifest_hash << '\n';
  for (const auto& comment : comments) {
    out_ << "# " << comment << '\n';
  }
  for (const auto& name : header) {
    add(name);
  }
  end_row();
}

void CsvWriter::add(std::string_view field) {
  if (!first_) {
    out_ << ',';
  }
  out_ << field;
  first_ = false;
}

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
}

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  return fields;
}

CsvReader::CsvReader(const std::filesystem::path& path) : in_(path), path_(path) {
  if (!in_) {
    throw Error("cannot read " + path.string());
  }
  std::string line;
  while (std::getline(in_, line)) {
    if (!line.empty() && line.front() == '#') {
      comments_.push_back(line.substr(1));
      continue;
    }
    header_ = split_csv(line);
    return;
  }
  throw Error(path.string() + " has no header line");
}

std::string CsvReader::comment_value(std::string_view key) const {
  for (const auto& comment : comments_) {
    std::string_view text(comment);
    while (!text.empty() && text.front() == ' ') {
      text.remove_prefix(1);
    }
    if (text.size() > key.size() && text.substr(0, key.size()) == key && text[key.size()] == '=') {
      return std::string(text.substr(key.size() + 1));
    }
  }
  return {};
}

std::size_t CsvReader::column(std::string_view name) const {
  for (std::size_t k = 0; k < header_.size(); ++k) {
    if (header_[k] == name) {
      return k;
    }
  }
  throw Error(path_.string() + " has no column " + std::string(name));
}

bool CsvReader::next(std::vector<std::string>& fields) {
  std::string line;
  while (std::getline(in_, line)) {
    if (line.empty()) {
      continue;
    }
    fields = split_csv(line);
    return true;
  }
  return false;
}

}  // namespace ipmcmc::harness
