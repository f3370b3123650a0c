// include/xvec/base/binary-io.h

// Copyright 2026  The xvec Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef XVEC_BASE_BINARY_IO_H_
#define XVEC_BASE_BINARY_IO_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xvec {

// Little-endian serialization helpers shared by the archive, checkpoint and
// backend containers.

class BinaryWriter {
 public:
  void WriteBytes(std::string_view bytes);
  void WriteU32(std::uint32_t v);
  void WriteU64(std::uint64_t v);
  void WriteF32(float v);
  void WriteF64(double v);
  /// u32 length prefix followed by the raw bytes.
  void WriteString(std::string_view s);
  /// u64 count prefix followed by the values.
  void WriteF64Vector(std::span<const double> v);

  const std::string &buffer() const { return buffer_; }
  std::size_t size() const { return buffer_.size(); }

 private:
  std::string buffer_;
};

/// Reads from an in-memory byte buffer. Every read that would run past the
/// end throws FormatError naming the offset, expected and available bytes.
class BinaryReader {
 public:
  explicit BinaryReader(std::string data, std::string source = "<buffer>");

  std::string ReadBytes(std::size_t n);
  std::uint32_t ReadU32();
  std::uint64_t ReadU64();
  float ReadF32();
  double ReadF64();
  std::string ReadString();
  std::vector<double> ReadF64Vector();
  /// Reads `expected` as raw bytes; throws if they differ.
  void ExpectMagic(std::string_view expected);

  std::size_t offset() const { return offset_; }
  void Seek(std::size_t offset);
  std::size_t remaining() const { return data_.size() - offset_; }
  bool AtEnd() const { return offset_ == data_.size(); }
  const std::string &source() const { return source_; }

 private:
  void Require(std::size_t n) const;

  std::string data_;
  std::string source_;
  std::size_t offset_ = 0;
};

std::string ReadFileBytes(const std::string &path);
/// Writes to `path + ".tmp"` and renames, so readers never see partial files.
void WriteFileBytes(const std::string &path, std::string_view bytes);

/// 64-bit FNV-1a. Stable across platforms and process restarts.
std::uint64_t Fnv1a64(std::string_view bytes,
                      std::uint64_t basis = 14695981039346656037ULL);
std::string HexDigest(std::uint64_t h);

}  // namespace xvec

#endif  // XVEC_BASE_BINARY_IO_H_
