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

#include "vernqa/simindex.h"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "vernqa/binio.h"
#include "vernqa/error.h"

namespace vernqa {

using nlohmann::json;

namespace {

struct Scored {
  double score;
  std::size_t pos;
};

template <typename ScoreFn>
std::vector<SearchHit> top_k(std::size_t n, std::size_t k, const std::vector<std::string>& ids,
                             ScoreFn&& score) {
  std::vector<Scored> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = {score(i), i};
  const std::size_t m = std::min(k, n);
  auto better = [&ids](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return ids[a.pos] < ids[b.pos];
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m), all.end(), better);
  std::vector<SearchHit> hits;
  hits.reserve(m);
  for (std::size_t r = 0; r < m; ++r) hits.push_back({ids[all[r].pos], all[r].score, r + 1});
  return hits;
}

void check_query(std::size_t dim, std::span<const float> query, std::size_t k) {
  if (k == 0) throw InvalidArgument("search: k must be >= 1");
  if (query.size() != dim) {
    throw InvalidArgument("search: query dimension " + std::to_string(query.size()) +
                          " != index dimension " + std::to_string(dim));
  }
}

}  // namespace

Index Index::build(std::vector<IndexEntry> entries, std::size_t dimension) {
  Index idx;
  idx.dim_ = entries.empty() ? dimension : entries.front().vector.size();
  if (!entries.empty() && dimension != 0 && dimension != idx.dim_) {
    throw InvalidArgument("index: entries have dimension " + std::to_string(idx.dim_) +
                          ", expected " + std::to_string(dimension));
  }
  idx.vectors_.reserve(entries.size() * idx.dim_);
  for (IndexEntry& e : entries) {
    if (e.vector.size() != idx.dim_) {
      throw InvalidArgument("index: entry '" + e.answer_id + "' has dimension " +
                            std::to_string(e.vector.size()) + ", expected " +
                            std::to_string(idx.dim_));
    }
    if (!idx.positions_.emplace(e.answer_id, idx.ids_.size()).second) {
      throw InvalidArgument("index: duplicate answer id '" + e.answer_id + "'");
    }
    idx.vectors_.insert(idx.vectors_.end(), e.vector.begin(), e.vector.end());
    idx.ids_.push_back(std::move(e.answer_id));
    idx.payloads_.push_back(std::move(e.payload));
  }
  return idx;
}

std::ptrdiff_t Index::find(const std::string& answer_id) const {
  auto it = positions_.find(answer_id);
  return it == positions_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

std::vector<SearchHit> Index::search_topk(std::span<const float> query, std::size_t k) const {
  if (size() == 0) {
    if (k == 0) throw InvalidArgument("search: k must be >= 1");
    return {};
  }
  check_query(dim_, query, k);
  return top_k(size(), k, ids_, [&](std::size_t i) {
    const float* v = vectors_.data() + i * dim_;
    double acc = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) acc += static_cast<double>(v[d]) * query[d];
    return acc;
  });
}

double quantize_vector(std::span<const float> v, std::span<std::int8_t> codes) {
  double max_abs = 0.0;
  for (float x : v) max_abs = std::max(max_abs, std::abs(static_cast<double>(x)));
  if (max_abs == 0.0) {
    std::fill(codes.begin(), codes.end(), std::int8_t{0});
    return 0.0;
  }
  const double scale = max_abs / 127.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = v[i];
    double c = std::clamp(std::round(x / scale), -127.0, 127.0);
    // Division rounding can land a value just past a half-step; step back
    // when the neighbouring code is strictly closer.
    for (double alt : {c - 1.0, c + 1.0}) {
      if (alt >= -127.0 && alt <= 127.0 && std::abs(alt * scale - x) < std::abs(c * scale - x)) {
        c = alt;
      }
    }
    codes[i] = static_cast<std::int8_t>(c);
  }
  return scale;
}

QuantizedIndex QuantizedIndex::quantize(const Index& index) {
  QuantizedIndex q;
  q.dim_ = index.dim_;
  q.ids_ = index.ids_;
  q.payloads_ = index.payloads_;
  q.positions_ = index.positions_;
  q.codes_.resize(index.vectors_.size());
  q.scales_.resize(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    q.scales_[i] = quantize_vector(index.vector(i),
                                   std::span<std::int8_t>(q.codes_.data() + i * q.dim_, q.dim_));
  }
  return q;
}

std::vector<double> QuantizedIndex::dequantize(std::size_t i) const {
  std::vector<double> out(dim_);
  for (std::size_t d = 0; d < dim_; ++d) out[d] = codes_[i * dim_ + d] * scales_[i];
  return out;
}

std::ptrdiff_t QuantizedIndex::find(const std::string& answer_id) const {
  auto it = positions_.find(answer_id);
  return it == positions_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

std::vector<SearchHit> QuantizedIndex::search_topk(std::span<const float> query,
                                                   std::size_t k) const {
  if (size() == 0) {
    if (k == 0) throw InvalidArgument("search: k must be >= 1");
    return {};
  }
  check_query(dim_, query, k);
  return top_k(size(), k, ids_, [&](std::size_t i) {
    const std::int8_t* c = codes_.data() + i * dim_;
    double acc = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) acc += static_cast<double>(c[d]) * query[d];
    return acc * scales_[i];
  });
}

std::size_t index_size(const AnyIndex& index) {
  return std::visit([](const auto& i) { return i.size(); }, index);
}

std::size_t index_dimension(const AnyIndex& index) {
  return std::visit([](const auto& i) { return i.dimension(); }, index);
}

std::vector<SearchHit> search_topk(const AnyIndex& index, std::span<const float> query,
                                   std::size_t k) {
  return std::visit([&](const auto& i) { return i.search_topk(query, k); }, index);
}

const std::string& index_payload(const AnyIndex& index, const std::string& answer_id) {
  return std::visit(
      [&](const auto& i) -> const std::string& {
        const std::ptrdiff_t pos = i.find(answer_id);
        if (pos < 0) throw InvalidArgument("index: unknown answer id '" + answer_id + "'");
        return i.payload(static_cast<std::size_t>(pos));
      },
      index);
}

// ---------------------------------------------------------------------------
// Index file
//
//   "VQAIDX1"
//   u32 header length, header JSON {format_version, dimension, count, quantized}
//   count x (u32-prefixed id, u32-prefixed payload text)
//   exact:     count x dimension f32
//   quantized: count f64 scales, then count x dimension int8 codes
//   u32 CRC32 of every preceding byte

struct IndexFileAccess {
  static void write_table(ByteWriter& w, const std::vector<std::string>& ids,
                          const std::vector<std::string>& payloads) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      w.put_string(ids[i]);
      w.put_string(payloads[i]);
    }
  }

  static void write_header(ByteWriter& w, std::size_t dim, std::size_t count, bool quantized) {
    w.put_bytes(std::string_view(kIndexMagic, 7));
    const json header = {{"format_version", std::to_string(kIndexMajorVersion) + ".0"},
                         {"dimension", dim},
                         {"count", count},
                         {"quantized", quantized}};
    w.put_string(header.dump());
  }

  static void save(const Index& idx, const std::string& path) {
    ByteWriter w;
    write_header(w, idx.dim_, idx.size(), false);
    write_table(w, idx.ids_, idx.payloads_);
    for (float x : idx.vectors_) w.put_f32(x);
    w.write_with_crc(path);
  }

  static void save(const QuantizedIndex& idx, const std::string& path) {
    ByteWriter w;
    write_header(w, idx.dim_, idx.size(), true);
    write_table(w, idx.ids_, idx.payloads_);
    for (double s : idx.scales_) w.put_f64(s);
    for (std::int8_t c : idx.codes_) w.put_u8(static_cast<std::uint8_t>(c));
    w.write_with_crc(path);
  }

  static AnyIndex load(const std::string& path) {
    const std::vector<std::uint8_t> body = read_crc_file(path, std::string_view(kIndexMagic, 7));
    ByteReader rd(body);
    std::size_t dim = 0, count = 0;
    bool quantized = false;
    try {
      const json header = json::parse(rd.get_string());
      const std::string version = header.at("format_version").get<std::string>();
      const int major = std::stoi(version.substr(0, version.find('.')));
      if (major > kIndexMajorVersion) {
        throw CorruptFile("unsupported version " + version + " (this build reads " +
                          std::to_string(kIndexMajorVersion) + ".x)");
      }
      dim = header.at("dimension").get<std::size_t>();
      count = header.at("count").get<std::size_t>();
      quantized = header.at("quantized").get<bool>();
    } catch (const json::exception& e) {
      throw CorruptFile(std::string("index header: ") + e.what());
    } catch (const std::logic_error&) {
      throw CorruptFile("index header: malformed format_version");
    }
    // Every entry needs at least 8 bytes of table plus its payload.
    const std::size_t per_entry = 8 + (quantized ? 8 + dim : 4 * dim);
    if (count != 0 && rd.remaining() / count < per_entry) throw CorruptFile("truncated file");

    std::vector<std::string> ids(count), payloads(count);
    std::unordered_map<std::string, std::size_t> positions;
    for (std::size_t i = 0; i < count; ++i) {
      ids[i] = rd.get_string();
      payloads[i] = rd.get_string();
      if (!positions.emplace(ids[i], i).second) {
        throw CorruptFile("index file: duplicate id '" + ids[i] + "'");
      }
    }
    AnyIndex out;
    if (quantized) {
      QuantizedIndex q;
      q.dim_ = dim;
      q.scales_.resize(count);
      for (double& s : q.scales_) s = rd.get_f64();
      q.codes_.resize(count * dim);
      for (std::int8_t& c : q.codes_) c = static_cast<std::int8_t>(rd.get_u8());
      q.ids_ = std::move(ids);
      q.payloads_ = std::move(payloads);
      q.positions_ = std::move(positions);
      out = std::move(q);
    } else {
      Index x;
      x.dim_ = dim;
      x.vectors_.resize(count * dim);
      for (float& v : x.vectors_) v = rd.get_f32();
      x.ids_ = std::move(ids);
      x.payloads_ = std::move(payloads);
      x.positions_ = std::move(positions);
      out = std::move(x);
    }
    if (rd.remaining() != 0) throw CorruptFile("index file has trailing bytes");
    return out;
  }
};

void save_index(const Index& index, const std::string& path) { IndexFileAccess::save(index, path); }

void save_index(const QuantizedIndex& index, const std::string& path) {
  IndexFileAccess::save(index, path);
}

void save_index(const AnyIndex& index, const std::string& path) {
  std::visit([&](const auto& i) { IndexFileAccess::save(i, path); }, index);
}

AnyIndex load_index(const std::string& path) { return IndexFileAccess::load(path); }

}  // namespace vernqa
