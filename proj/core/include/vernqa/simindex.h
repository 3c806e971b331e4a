// Copyright 2026 The VernQA Authors
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

#ifndef VERNQA_SIMINDEX_H_
#define VERNQA_SIMINDEX_H_

// Exact dot-product search over stored answer embeddings, with an int8
// post-training quantized variant. Both are immutable once built.

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace vernqa {

struct IndexEntry {
  std::string answer_id;
  std::vector<float> vector;
  std::string payload;  // answer text
};

struct SearchHit {
  std::string answer_id;
  double score = 0.0;
  std::size_t rank = 0;  // 1-based

  friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

class Index {
 public:
  Index() = default;

  // Throws InvalidArgument on dimension mismatch or duplicate id. An empty
  // entry list yields an index of size 0 with dimension `dimension`.
  static Index build(std::vector<IndexEntry> entries, std::size_t dimension = 0);

  std::size_t size() const { return ids_.size(); }
  std::size_t dimension() const { return dim_; }

  const std::string& id(std::size_t i) const { return ids_[i]; }
  const std::string& payload(std::size_t i) const { return payloads_[i]; }
  std::span<const float> vector(std::size_t i) const {
    return {vectors_.data() + i * dim_, dim_};
  }
  // Position of `answer_id`, or -1.
  std::ptrdiff_t find(const std::string& answer_id) const;

  // Top min(k, size) hits by descending score, ties by ascending id.
  // Empty index returns {}. Throws InvalidArgument on k == 0 or a query of
  // the wrong dimension.
  std::vector<SearchHit> search_topk(std::span<const float> query, std::size_t k) const;

 private:
  friend class QuantizedIndex;
  friend struct IndexFileAccess;
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<std::string> payloads_;
  std::vector<float> vectors_;  // size x dim, row-major
  std::unordered_map<std::string, std::size_t> positions_;
};

// Symmetric per-vector int8: scale = max|x| / 127, code = round(x / scale).
class QuantizedIndex {
 public:
  QuantizedIndex() = default;

  static QuantizedIndex quantize(const Index& index);

  std::size_t size() const { return ids_.size(); }
  std::size_t dimension() const { return dim_; }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  const std::string& payload(std::size_t i) const { return payloads_[i]; }
  double scale(std::size_t i) const { return scales_[i]; }
  std::span<const std::int8_t> codes(std::size_t i) const {
    return {codes_.data() + i * dim_, dim_};
  }
  std::vector<double> dequantize(std::size_t i) const;
  std::ptrdiff_t find(const std::string& answer_id) const;

  // Same contract as Index::search_topk, scoring against code * scale.
  std::vector<SearchHit> search_topk(std::span<const float> query, std::size_t k) const;

 private:
  friend struct IndexFileAccess;
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<std::string> payloads_;
  std::vector<std::int8_t> codes_;
  std::vector<double> scales_;
  std::unordered_map<std::string, std::size_t> positions_;
};

// Quantizes one vector; exposed for tests of the rounding bound.
double quantize_vector(std::span<const float> v, std::span<std::int8_t> codes);

using AnyIndex = std::variant<Index, QuantizedIndex>;

std::size_t index_size(const AnyIndex& index);
std::size_t index_dimension(const AnyIndex& index);
std::vector<SearchHit> search_topk(const AnyIndex& index, std::span<const float> query,
                                   std::size_t k);
const std::string& index_payload(const AnyIndex& index, const std::string& answer_id);

inline constexpr char kIndexMagic[] = "VQAIDX1";
inline constexpr int kIndexMajorVersion = 1;

void save_index(const Index& index, const std::string& path);
void save_index(const QuantizedIndex& index, const std::string& path);
void save_index(const AnyIndex& index, const std::string& path);

// Throws CorruptFile on bad magic, CRC, truncation, or newer major version.
AnyIndex load_index(const std::string& path);

}  // namespace vernqa

#endif  // VERNQA_SIMINDEX_H_
