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

#ifndef VERNQA_BINIO_H_
#define VERNQA_BINIO_H_

// Little-endian byte buffers shared by the checkpoint and index formats.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vernqa {

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

class ByteWriter {
 public:
  void put_bytes(std::string_view s);
  void put_u8(std::uint8_t v) { buf_.push_back(v); }
  void put_u32(std::uint32_t v);
  void put_u64(std::uint64_t v);
  void put_f32(float v);
  void put_f64(double v);
  // u32 length followed by the raw bytes.
  void put_string(std::string_view s);

  const std::vector<std::uint8_t>& bytes() const { return buf_; }

  // Appends CRC32 of everything written so far and writes the file.
  void write_with_crc(const std::string& path) const;

 private:
  std::vector<std::uint8_t> buf_;
};

// Bounds-checked reader; every overrun throws CorruptFile("truncated ...").
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::string get_bytes(std::size_t n);
  std::uint8_t get_u8();
  std::uint32_t get_u32();
  std::uint64_t get_u64();
  float get_f32();
  double get_f64();
  std::string get_string();

  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const;

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

// Reads `path`, checks the magic prefix and trailing CRC32, and returns the
// bytes between them. Throws IoError or CorruptFile.
std::vector<std::uint8_t> read_crc_file(const std::string& path,
                                        std::string_view magic);

}  // namespace vernqa

#endif  // VERNQA_BINIO_H_
