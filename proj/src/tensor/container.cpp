// Copyright 2026 The afx Authors.
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

#include "afx/tensor/container.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "afx/error.hpp"

namespace afx {

static_assert(std::endian::native == std::endian::little,
              "AFTX1 payloads are written with memcpy and assume a little-endian host");

namespace {

constexpr char kMagic[] = "AFTX1";
constexpr std::size_t kMagicSize = 5;

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  out.insert(out.end(), raw, raw + sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string get_string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  std::size_t pos() const { return pos_; }
  std::size_t size() const { return bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) fail(ErrorCode::kFormatError, "AFTX1 container truncated");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_container(std::span<const ContainerEntry> entries) {
  std::vector<std::uint8_t> out(kMagic, kMagic + kMagicSize);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(entries.size()));
  std::uint64_t offset = 0;
  for (const ContainerEntry& e : entries) {
    if (shape_numel(e.shape) != e.values.size()) {
      fail(ErrorCode::kShapeError, "entry '" + e.name + "' shape does not match its values");
    }
    put<std::uint32_t>(out, static_cast<std::uint32_t>(e.name.size()));
    out.insert(out.end(), e.name.begin(), e.name.end());
    put<std::uint32_t>(out, static_cast<std::uint32_t>(e.shape.size()));
    for (std::size_t d : e.shape) put<std::uint64_t>(out, d);
    put<std::uint8_t>(out, e.trainable ? 1 : 0);
    put<std::uint64_t>(out, offset);
    offset += e.values.size() * sizeof(double);
  }
  for (const ContainerEntry& e : entries) {
    for (double v : e.values) put<double>(out, v);
  }
  return out;
}

std::vector<ContainerEntry> decode_container(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  if (in.get_string(kMagicSize) != kMagic) fail(ErrorCode::kFormatError, "missing AFTX1 magic");
  const std::uint32_t count = in.get<std::uint32_t>();
  std::vector<ContainerEntry> entries(count);
  std::vector<std::uint64_t> offsets(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    ContainerEntry& e = entries[i];
    e.name = in.get_string(in.get<std::uint32_t>());
    const std::uint32_t rank = in.get<std::uint32_t>();
    if (rank > 8) fail(ErrorCode::kFormatError, "implausible rank in entry '" + e.name + "'");
    for (std::uint32_t r = 0; r < rank; ++r) e.shape.push_back(in.get<std::uint64_t>());
    const std::uint8_t flag = in.get<std::uint8_t>();
    if (flag > 1) fail(ErrorCode::kFormatError, "bad trainable flag in entry '" + e.name + "'");
    e.trainable = flag == 1;
    offsets[i] = in.get<std::uint64_t>();
  }
  const std::size_t payload_start = in.pos();
  std::uint64_t expected = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    ContainerEntry& e = entries[i];
    if (offsets[i] != expected) fail(ErrorCode::kFormatError, "non-contiguous payload for '" + e.name + "'");
    const std::size_t n = shape_numel(e.shape);
    const std::size_t begin = payload_start + offsets[i];
    if (begin + n * sizeof(double) > bytes.size()) {
      fail(ErrorCode::kFormatError, "payload of '" + e.name + "' runs past end of file");
    }
    e.values.resize(n);
    std::memcpy(e.values.data(), bytes.data() + begin, n * sizeof(double));
    expected += n * sizeof(double);
  }
  if (payload_start + expected != bytes.size()) fail(ErrorCode::kFormatError, "trailing bytes after payload");
  return entries;
}

void write_container(const std::filesystem::path& path, std::span<const ContainerEntry> entries) {
  const auto bytes = encode_container(entries);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIoError, "short write to " + path.string());
}

std::vector<ContainerEntry> read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot read " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_container(bytes);
}

const ContainerEntry& find_entry(std::span<const ContainerEntry> entries, std::string_view name) {
  for (const ContainerEntry& e : entries) {
    if (e.name == name) return e;
  }
  fail(ErrorCode::kFormatError, "container has no entry '" + std::string(name) + "'");
}

std::vector<ContainerEntry> snapshot_parameters(const ParameterSet& params) {
  std::vector<ContainerEntry> out;
  out.reserve(params.size());
  for (const Parameter& p : params.all()) {
    auto values = p.tensor().data();
    out.push_back({p.name(), p.tensor().shape(), p.trainable(), {values.begin(), values.end()}});
  }
  return out;
}

void restore_parameters(ParameterSet& params, std::span<const ContainerEntry> entries,
                        bool restore_flags) {
  for (Parameter& p : params.all()) {
    const ContainerEntry* match = nullptr;
    for (const ContainerEntry& e : entries) {
      if (e.name == p.name()) {
        match = &e;
        break;
      }
    }
    if (!match) fail(ErrorCode::kConfigMismatch, "checkpoint lacks parameter '" + p.name() + "'");
    if (match->shape != p.tensor().shape()) {
      fail(ErrorCode::kConfigMismatch, "parameter '" + p.name() + "' is " +
                                           shape_string(p.tensor().shape()) + " but checkpoint has " +
                                           shape_string(match->shape));
    }
    std::span<double> dst = p.tensor().mutable_data();
    std::copy(match->values.begin(), match->values.end(), dst.begin());
    if (restore_flags) p.set_trainable(match->trainable);
  }
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    fail(ErrorCode::kIoError, "SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_hex(std::string_view text) {
  return sha256_hex(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()),
                                                  text.size()));
}

std::string parameter_digest(const ParameterSet& params,
                             const std::function<bool(const Parameter&)>& pred) {
  std::vector<ContainerEntry> selected;
  for (const Parameter& p : params.all()) {
    if (!pred(p)) continue;
    auto values = p.tensor().data();
    // Flags are excluded so freezing alone does not change the digest.
    selected.push_back({p.name(), p.tensor().shape(), false, {values.begin(), values.end()}});
  }
  return sha256_hex(encode_container(selected));
}

}  // namespace afx
