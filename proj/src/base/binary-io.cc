// src/base/binary-io.cc

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

#include "xvec/base/binary-io.h"

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "xvec/base/error.h"

namespace xvec {

namespace {
bool g_warnings_enabled = true;
}

void Warn(const std::string &message) {
  if (g_warnings_enabled) std::cerr << "WARNING: " << message << '\n';
}

void SetWarningsEnabled(bool enabled) { g_warnings_enabled = enabled; }

void BinaryWriter::WriteBytes(std::string_view bytes) { buffer_.append(bytes); }

void BinaryWriter::WriteU32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buffer_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void BinaryWriter::WriteU64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buffer_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void BinaryWriter::WriteF32(float v) { WriteU32(std::bit_cast<std::uint32_t>(v)); }

void BinaryWriter::WriteF64(double v) { WriteU64(std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::WriteString(std::string_view s) {
  WriteU32(static_cast<std::uint32_t>(s.size()));
  buffer_.append(s);
}

void BinaryWriter::WriteF64Vector(std::span<const double> v) {
  WriteU64(v.size());
  for (double x : v) WriteF64(x);
}

BinaryReader::BinaryReader(std::string data, std::string source)
    : data_(std::move(data)), source_(std::move(source)) {}

void BinaryReader::Require(std::size_t n) const {
  if (n > data_.size() - offset_) {
    std::ostringstream msg;
    msg << source_ << ": truncated at byte offset " << offset_ << ": expected "
        << n << " bytes, " << (data_.size() - offset_) << " available";
    throw FormatError(msg.str());
  }
}

std::string BinaryReader::ReadBytes(std::size_t n) {
  Require(n);
  std::string out = data_.substr(offset_, n);
  offset_ += n;
  return out;
}

std::uint32_t BinaryReader::ReadU32() {
  Require(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[offset_ + i])) << (8 * i);
  offset_ += 4;
  return v;
}

std::uint64_t BinaryReader::ReadU64() {
  Require(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[offset_ + i])) << (8 * i);
  offset_ += 8;
  return v;
}

float BinaryReader::ReadF32() { return std::bit_cast<float>(ReadU32()); }

double BinaryReader::ReadF64() { return std::bit_cast<double>(ReadU64()); }

std::string BinaryReader::ReadString() {
  std::uint32_t n = ReadU32();
  return ReadBytes(n);
}

std::vector<double> BinaryReader::ReadF64Vector() {
  std::uint64_t n = ReadU64();
  Require(n * 8);
  std::vector<double> v(n);
  for (auto &x : v) x = ReadF64();
  return v;
}

void BinaryReader::ExpectMagic(std::string_view expected) {
  std::size_t at = offset_;
  std::string got = ReadBytes(expected.size());
  if (got != expected) {
    std::ostringstream msg;
    msg << source_ << ": bad magic at byte offset " << at << ": expected \""
        << expected << "\"";
    throw FormatError(msg.str());
  }
}

void BinaryReader::Seek(std::size_t offset) {
  if (offset > data_.size()) {
    std::ostringstream msg;
    msg << source_ << ": seek to byte offset " << offset << " beyond end ("
        << data_.size() << " bytes)";
    throw FormatError(msg.str());
  }
  offset_ = offset;
}

std::string ReadFileBytes(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFileBytes(const std::string &path, std::string_view bytes) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot rename " + tmp + " to " + path + ": " + ec.message());
  }
}

std::uint64_t Fnv1a64(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::string HexDigest(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace xvec
