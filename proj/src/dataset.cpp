// Copyright 2026 The fastfish Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fastfish/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

namespace fastfish {

namespace {

template <typename T>
void put(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    T value;
    std::memcpy(&value, raw, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    const auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n)
      throw FormatError(std::string("truncated ") + what + ": need " + std::to_string(n) + " bytes, have " +
                            std::to_string(bytes_.size() - pos_),
                        pos_);
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

DalbHeader read_header(Reader& r) {
  const auto magic = r.take(4, "magic");
  if (magic != "DALB") throw FormatError("bad magic", 0);
  DalbHeader h;
  h.version = r.get<std::uint32_t>("version");
  if (h.version != kDalbVersion) throw FormatError("unsupported version " + std::to_string(h.version), 4);
  h.rows = r.get<std::uint64_t>("row count");
  h.dim = r.get<std::uint32_t>("dimension");
  h.classes = r.get<std::uint32_t>("class count");
  h.dtype = r.get<std::uint8_t>("dtype");
  if (h.dtype != 0) throw FormatError("unsupported dtype " + std::to_string(h.dtype), 24);
  const auto reserved = r.take(11, "reserved bytes");
  for (std::size_t i = 0; i < reserved.size(); ++i)
    if (reserved[i] != 0) throw FormatError("reserved byte is not zero", 25 + i);
  if (h.rows == 0) throw FormatError("dataset has no rows (N must be >= 1)", 8);
  if (h.dim == 0) throw FormatError("feature dimension is zero", 16);
  if (h.classes == 0) throw FormatError("class count is zero", 20);
  return h;
}

}  // namespace

void validate(const EmbeddingDataset& d) {
  if (d.size() < 1) throw ValidationError("dataset has no rows (N must be >= 1)");
  if (d.dim() < 1) throw ValidationError("feature dimension is zero");
  if (d.num_classes < 1) throw ValidationError("class count must be >= 1");
  if (static_cast<Index>(d.labels.size()) != d.size())
    throw ValidationError("label count " + std::to_string(d.labels.size()) + " does not match N=" +
                          std::to_string(d.size()));
  for (Index i = 0; i < d.size(); ++i)
    if (!d.features.row(i).allFinite()) throw ValidationError("record " + std::to_string(i) + " has non-finite features");
  for (std::size_t i = 0; i < d.labels.size(); ++i)
    if (d.labels[i] < 0 || d.labels[i] >= d.num_classes)
      throw ValidationError("record " + std::to_string(i) + " has label " + std::to_string(d.labels[i]) +
                            " outside [0, " + std::to_string(d.num_classes) + ")");
}

std::string encode_embeddings(const EmbeddingDataset& d) {
  validate(d);
  std::string out;
  out.reserve(kDalbHeaderBytes + 4 * static_cast<std::size_t>(d.size() * (d.dim() + 1)) + 4 + d.metadata.size());
  out += "DALB";
  put<std::uint32_t>(out, kDalbVersion);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(d.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(d.dim()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(d.num_classes));
  put<std::uint8_t>(out, 0);
  out.append(11, '\0');
  for (Index i = 0; i < d.size(); ++i)
    for (Index j = 0; j < d.dim(); ++j) put<float>(out, d.features(i, j));
  for (int label : d.labels) put<std::uint32_t>(out, static_cast<std::uint32_t>(label));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(d.metadata.size()));
  out += d.metadata;
  return out;
}

DalbHeader decode_header(std::string_view bytes) {
  Reader r(bytes);
  return read_header(r);
}

EmbeddingDataset decode_embeddings(std::string_view bytes) {
  Reader r(bytes);
  const DalbHeader h = read_header(r);
  const std::uint64_t cells = h.rows * h.dim;
  if (h.rows > bytes.size() || cells / h.dim != h.rows || cells > bytes.size() / 4)
    throw FormatError("truncated features: header declares " + std::to_string(h.rows) + " x " + std::to_string(h.dim),
                      r.pos());

  EmbeddingDataset d;
  d.num_classes = static_cast<int>(h.classes);
  d.features.resize(static_cast<Index>(h.rows), static_cast<Index>(h.dim));
  r.need(4 * cells, "features");
  for (Index i = 0; i < d.size(); ++i) {
    for (Index j = 0; j < d.dim(); ++j) {
      const std::size_t at = r.pos();
      const float v = r.get<float>("features");
      if (!std::isfinite(v))
        throw ValidationError("record " + std::to_string(i) + " has a non-finite feature at byte " + std::to_string(at));
      d.features(i, j) = v;
    }
  }
  r.need(4 * h.rows, "labels");
  d.labels.resize(h.rows);
  for (std::uint64_t i = 0; i < h.rows; ++i) {
    const std::uint32_t label = r.get<std::uint32_t>("labels");
    if (label >= h.classes)
      throw ValidationError("record " + std::to_string(i) + " has label " + std::to_string(label) + " >= K=" +
                            std::to_string(h.classes));
    d.labels[i] = static_cast<int>(label);
  }
  const std::uint32_t meta_len = r.get<std::uint32_t>("metadata length");
  d.metadata = std::string(r.take(meta_len, "metadata"));
  if (r.remaining() != 0) throw FormatError("trailing bytes after metadata", r.pos());
  return d;
}

void write_embeddings(const EmbeddingDataset& dataset, const std::filesystem::path& path) {
  write_file_atomic(path, encode_embeddings(dataset));
}

EmbeddingDataset read_embeddings(const std::filesystem::path& path) { return decode_embeddings(read_file(path)); }

EmbeddingDataset take_rows(const EmbeddingDataset& dataset, std::span<const Index> rows) {
  EmbeddingDataset out;
  out.num_classes = dataset.num_classes;
  out.metadata = dataset.metadata;
  out.features.resize(static_cast<Index>(rows.size()), dataset.dim());
  out.labels.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= dataset.size()) throw IndexError("row " + std::to_string(rows[i]) + " out of range");
    out.features.row(static_cast<Index>(i)) = dataset.features.row(rows[i]);
    out.labels[i] = dataset.labels[static_cast<std::size_t>(rows[i])];
  }
  return out;
}

}  // namespace fastfish
