#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "castguard/dataset.hpp"
#include "castguard/error.hpp"

namespace castguard {
namespace {

using Record = std::vector<std::string>;

// RFC-4180 records: comma separated, optional double quotes with "" escapes,
// LF or CRLF line endings. Returns the records and the 1-based line each starts on.
std::vector<std::pair<Record, std::size_t>> parse_records(std::string_view text,
                                                          const std::string& name) {
  std::vector<std::pair<Record, std::size_t>> records;
  Record current;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  std::size_t record_line = 1;

  auto end_field = [&] {
    current.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = current.size() == 1 && current.front().empty();
    if (!blank) records.emplace_back(std::move(current), record_line);
    current.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty()) {
          throw DataError(name + ": stray quote on line " + std::to_string(line));
        }
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw DataError(name + ": unterminated quoted field");
  if (field_started || !field.empty() || !current.empty()) end_record();
  return records;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

FeatureDataset read_csv(const std::filesystem::path& path, const std::string& label_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const std::string name = "'" + path.string() + "'";

  auto records = parse_records(text, name);
  if (records.empty()) throw DataError(name + ": missing header row");

  const Record& header = records.front().first;
  std::size_t label_idx = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (trim(header[c]) == label_column) {
      label_idx = c;
      break;
    }
  }
  if (label_idx == header.size()) {
    throw DataError(name + ": label column \"" + label_column + "\" not found in header");
  }
  if (header.size() < 2) throw DataError(name + ": no feature columns besides the label");

  const std::size_t n_rows = records.size() - 1;
  const std::size_t n_cols = header.size() - 1;
  FeatureMatrix features(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_cols));
  Labels labels(n_rows);

  for (std::size_t r = 0; r < n_rows; ++r) {
    const auto& [record, line] = records[r + 1];
    const std::string where = name + " row " + std::to_string(r + 1) + " (line " + std::to_string(line) + ")";
    if (record.size() != header.size()) {
      throw DataError(where + ": expected " + std::to_string(header.size()) + " fields, found " +
                      std::to_string(record.size()));
    }
    std::size_t out_col = 0;
    for (std::size_t c = 0; c < record.size(); ++c) {
      const std::string_view cell = trim(record[c]);
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw DataError(where + ", column \"" + std::string(trim(header[c])) +
                        "\": cannot parse \"" + std::string(cell) + "\" as a number");
      }
      if (c == label_idx) {
        if (value != 0.0 && value != 1.0) {
          throw DataError(where + ": label \"" + std::string(cell) + "\" is not 0 or 1");
        }
        labels[r] = static_cast<std::uint8_t>(value);
      } else {
        features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(out_col++)) =
            static_cast<float>(value);
      }
    }
  }
  return FeatureDataset(std::move(features), std::move(labels), path.filename().string());
}

}  // namespace castguard
