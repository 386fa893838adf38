#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>

#include "binary_io.hpp"
#include "castguard/dataset.hpp"
#include "castguard/error.hpp"

// FMX layout (little-endian):
//   0..3   magic "FMX1"
//   4      version (1)
//   5..8   u32 n_rows
//   9..12  u32 n_cols
//   13     u8 has_labels
//   payload: n_rows * n_cols binary32, row-major
//   labels:  n_rows u8 (only if has_labels)
//   u16 tag_length, then tag_length UTF-8 bytes

namespace castguard {
namespace {

constexpr char kMagic[4] = {'F', 'M', 'X', '1'};
constexpr std::uint8_t kVersion = 1;
constexpr std::uint64_t kHeaderBytes = 14;

void write_impl(const FeatureMatrix& features, const Labels* labels, const std::string& tag,
                const std::filesystem::path& path) {
  require_finite(features);
  if (features.rows() > std::numeric_limits<std::uint32_t>::max() ||
      features.cols() > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("matrix too large for FMX: " + std::to_string(features.rows()) + "x" +
                          std::to_string(features.cols()));
  }
  if (tag.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw ValidationError("source tag longer than 65535 bytes");
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");

  detail::BinaryWriter w(out);
  w.put_bytes(kMagic, sizeof(kMagic));
  w.put(kVersion);
  w.put(static_cast<std::uint32_t>(features.rows()));
  w.put(static_cast<std::uint32_t>(features.cols()));
  w.put(static_cast<std::uint8_t>(labels != nullptr ? 1 : 0));
  for (Eigen::Index i = 0; i < features.size(); ++i) w.put(features.data()[i]);
  if (labels != nullptr) w.put_bytes(labels->data(), labels->size());
  w.put(static_cast<std::uint16_t>(tag.size()));
  w.put_bytes(tag.data(), tag.size());

  out.flush();
  if (!out) throw DataError("I/O error while writing '" + path.string() + "'");
}

struct Parsed {
  FmxHeader header;
  FeatureMatrix features;
  std::optional<Labels> labels;
};

FmxHeader parse_header(detail::BinaryReader& r, const std::filesystem::path& path) {
  char magic[4];
  try {
    r.read_exact(magic, 4);
  } catch (const DataError&) {
    throw DataError("'" + path.string() + "' is not an FMX file (too short)");
  }
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError("'" + path.string() + "' is not an FMX file (bad magic)");
  }
  FmxHeader h;
  try {
    h.version = r.get<std::uint8_t>();
    h.rows = r.get<std::uint32_t>();
    h.cols = r.get<std::uint32_t>();
    const auto flag = r.get<std::uint8_t>();
    if (flag > 1) throw DataError("truncated/corrupt FMX header: has_labels byte is " + std::to_string(flag));
    h.has_labels = flag == 1;
  } catch (const DataError& e) {
    throw DataError("'" + path.string() + "': " + e.what());
  }
  if (h.version != kVersion) {
    throw DataError("'" + path.string() + "': unsupported FMX version " + std::to_string(h.version));
  }
  return h;
}

Parsed parse(const std::filesystem::path& path, bool want_payload) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  std::error_code ec;
  const std::uint64_t actual_size = std::filesystem::file_size(path, ec);
  if (ec) throw DataError("cannot stat '" + path.string() + "': " + ec.message());

  detail::BinaryReader r(in);
  Parsed p;
  p.header = parse_header(r, path);
  const auto& h = p.header;

  const std::uint64_t min_size = fmx_file_size(h.rows, h.cols, h.has_labels, 0);
  if (actual_size < min_size) {
    throw DataError("'" + path.string() + "' is truncated/corrupt: header declares " +
                    std::to_string(h.rows) + "x" + std::to_string(h.cols) + " (at least " +
                    std::to_string(min_size) + " bytes) but file has " +
                    std::to_string(actual_size) + " bytes");
  }
  if (h.cols == 0 && h.rows > 0) {
    throw DataError("'" + path.string() + "' is truncated/corrupt: zero feature columns");
  }

  const std::uint64_t payload_bytes = std::uint64_t{h.rows} * h.cols * 4;
  const std::uint64_t label_bytes = h.has_labels ? h.rows : 0;
  if (!want_payload) {
    in.seekg(static_cast<std::streamoff>(kHeaderBytes + payload_bytes + label_bytes));
  } else {
    p.features.resize(h.rows, h.cols);
    if constexpr (std::endian::native == std::endian::little) {
      if (payload_bytes > 0) {
        r.read_exact(reinterpret_cast<char*>(p.features.data()), static_cast<std::size_t>(payload_bytes));
      }
    } else {
      std::vector<char> buf(static_cast<std::size_t>(payload_bytes));
      if (!buf.empty()) r.read_exact(buf.data(), buf.size());
      for (std::size_t i = 0; i < static_cast<std::size_t>(p.features.size()); ++i) {
        p.features.data()[i] = detail::from_le<float>(buf.data() + 4 * i);
      }
    }
    if (h.has_labels) {
      Labels labels(h.rows);
      if (h.rows > 0) r.read_exact(reinterpret_cast<char*>(labels.data()), labels.size());
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] > 1) {
          throw ValidationError("'" + path.string() + "': label byte at row " + std::to_string(i) +
                                " is " + std::to_string(labels[i]) + ", expected 0 or 1");
        }
      }
      p.labels = std::move(labels);
    }
  }

  const auto tag_len = r.get<std::uint16_t>();
  const std::uint64_t expected = fmx_file_size(h.rows, h.cols, h.has_labels, tag_len);
  if (actual_size != expected) {
    throw DataError("'" + path.string() + "' is truncated/corrupt: expected " +
                    std::to_string(expected) + " bytes, file has " + std::to_string(actual_size));
  }
  p.header.source_tag = r.get_string(tag_len);
  return p;
}

}  // namespace

std::uint64_t fmx_file_size(std::uint64_t rows, std::uint64_t cols, bool has_labels,
                            std::size_t tag_bytes) {
  return kHeaderBytes + rows * cols * 4 + (has_labels ? rows : 0) + 2 + tag_bytes;
}

void write_fmx(const FeatureDataset& dataset, const std::filesystem::path& path) {
  write_impl(dataset.features(), &dataset.labels(), dataset.source_tag(), path);
}

void write_fmx_unlabeled(const FeatureMatrix& features, const std::string& source_tag,
                         const std::filesystem::path& path) {
  if (features.cols() < 1) throw ValidationError("feature matrix must have at least one column");
  write_impl(features, nullptr, source_tag, path);
}

FeatureDataset read_fmx(const std::filesystem::path& path) {
  Parsed p = parse(path, true);
  if (!p.labels) {
    throw DataError("'" + path.string() + "' has no labels; use read_fmx_features for unlabeled files");
  }
  return FeatureDataset(std::move(p.features), std::move(*p.labels), std::move(p.header.source_tag));
}

FeatureMatrix read_fmx_features(const std::filesystem::path& path, std::string* source_tag) {
  Parsed p = parse(path, true);
  require_finite(p.features);
  if (source_tag != nullptr) *source_tag = std::move(p.header.source_tag);
  return std::move(p.features);
}

FmxHeader read_fmx_header(const std::filesystem::path& path) {
  return parse(path, false).header;
}

}  // namespace castguard
