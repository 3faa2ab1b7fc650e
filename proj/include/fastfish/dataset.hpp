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

// DALB embedding container, little-endian:
//
//   offset  size  field
//   0       4     magic "DALB"
//   4       4     u32 version (1)
//   8       8     u64 N
//   16      4     u32 D
//   20      4     u32 K
//   24      1     u8 dtype (0 = float32)
//   25      11    reserved, zero
//   36      4ND   float32 features, row-major
//   ...     4N    u32 labels, 0-based
//   ...     4     u32 metadata length L
//   ...     L     UTF-8 JSON metadata

#ifndef FASTFISH_DATASET_HPP_
#define FASTFISH_DATASET_HPP_

#include "fastfish/common.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fastfish {

inline constexpr std::uint32_t kDalbVersion = 1;
inline constexpr std::size_t kDalbHeaderBytes = 36;

struct EmbeddingDataset {
  RowMatrix<float> features;  // N x D
  std::vector<int> labels;    // 0-based
  int num_classes = 0;
  /// Raw JSON text, kept verbatim so files round-trip byte for byte.
  std::string metadata = "{}";

  Index size() const { return features.rows(); }
  Index dim() const { return features.cols(); }
  /// 64-bit copy for Fisher arithmetic.
  MatrixXd features_f64() const { return features.cast<double>(); }

};

/// Throws ValidationError on N = 0, non-finite features or out-of-range labels.
void validate(const EmbeddingDataset& dataset);

std::string encode_embeddings(const EmbeddingDataset& dataset);
EmbeddingDataset decode_embeddings(std::string_view bytes);

void write_embeddings(const EmbeddingDataset& dataset, const std::filesystem::path& path);
EmbeddingDataset read_embeddings(const std::filesystem::path& path);

struct DalbHeader {
  std::uint32_t version = 0;
  std::uint64_t rows = 0;
  std::uint32_t dim = 0;
  std::uint32_t classes = 0;
  std::uint8_t dtype = 0;
};

/// Parses and checks only the fixed-size header.
DalbHeader decode_header(std::string_view bytes);

EmbeddingDataset take_rows(const EmbeddingDataset& dataset, std::span<const Index> rows);

}  // namespace fastfish

#endif  // FASTFISH_DATASET_HPP_
