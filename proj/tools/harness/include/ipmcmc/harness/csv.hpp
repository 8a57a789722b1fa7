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

#ifndef IPMCMC_HARNESS_CSV_HPP
#define IPMCMC_HARNESS_CSV_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace ipmcmc::harness {

/// Shortest text that parses back to the same double.
[[nodiscard]] std::string format_double(double value);
[[nodiscard]] double parse_double(std::string_view text);
[[nodiscard]] std::uint64_t parse_unsigned(std::string_view text);
[[nodiscard]] std::int64_t parse_signed(std::string_view text);

/// 64-bit FNV-1a of `text` as 16 hex digits.
[[nodiscard]] std::string content_hash(std::string_view text);

/// Comma-separated output whose first line is `# manifest=<hash>`.
class CsvWriter {
 public:
  /// `comments` are written as extra `# ...` lines between the manifest line and the header.
  CsvWriter(const std::filesystem::path& path, const std::string& manifest_hash,
            const std::vector<std::string>& header, const std::vector<std::string>& comments = {});

  void add(std::string_view field);
  void add(double value) { add(format_double(value)); }
  void add(std::uint64_t value) { add(std::to_string(value)); }
  void add(std::int64_t value) { add(std::to_string(value)); }
  void add(int value) { add(static_cast<std::int64_t>(value)); }
  void end_row();
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
  bool first_ = true;
};

/// Reads files written by CsvWriter and dataset files. Lines starting with `#` before
/// the header are collected as comments.
class CsvReader {
 public:
  explicit CsvReader(const std::filesystem::path& path);

  [[nodiscard]] const std::vector<std::string>& comments() const noexcept { return comments_; }
  [[nodiscard]] const std::vector<std::string>& header() const noexcept { return header_; }
  /// Value of a `# key=value` comment, or empty.
  [[nodiscard]] std::string comment_value(std::string_view key) const;
  /// Column index of `name`; throws if absent.
  [[nodiscard]] std::size_t column(std::string_view name) const;

  /// Next data row, or false at end of file.
  bool next(std::vector<std::string>& fields);

 private:
  std::ifstream in_;
  std::filesystem::path path_;
  std::vector<std::string> comments_;
  std::vector<std::string> header_;
};

[[nodiscard]] std::vector<std::string> split_csv(std::string_view line);

}  // namespace ipmcmc::harness

#endif  // IPMCMC_HARNESS_CSV_HPP
