// Copyright 2026 The InvRat Authors.
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

#include "invrat/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>

#include "invrat/error.hpp"
#include "invrat/io.hpp"

namespace invrat {
namespace {

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  std::uint64_t Uint(int width) {
    Need(width);
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += width;
    return v;
  }

  std::string Bytes(std::uint64_t n) {
    Need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void Need(std::uint64_t n) const {
    if (n > bytes_.size() - pos_) {
      throw ParseError("checkpoint truncated at byte " + std::to_string(pos_), 0);
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string EncodeCheckpoint(const ParameterStore& store,
                             const std::string& config_text) {
  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  PutU32(out, kCheckpointVersion);
  PutU64(out, config_text.size());
  out += config_text;
  PutU32(out, static_cast<std::uint32_t>(store.all().size()));
  for (const Parameter& p : store.all()) {
    PutU32(out, static_cast<std::uint32_t>(p.name.size()));
    out += p.name;
    PutU32(out, static_cast<std::uint32_t>(p.value.rank()));
    for (std::size_t d : p.value.shape()) PutU64(out, d);
    for (double v : p.value.data()) PutU64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

Checkpoint DecodeCheckpoint(const std::string& bytes) {
  Reader r(bytes);
  if (r.Bytes(sizeof(kCheckpointMagic)) !=
      std::string(kCheckpointMagic, sizeof(kCheckpointMagic))) {
    throw ParseError("not an invrat checkpoint (bad magic)", 0);
  }
  const auto version = r.Uint(4);
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version), 0);
  }
  Checkpoint ckpt;
  ckpt.config_text = r.Bytes(r.Uint(8));
  const auto count = r.Uint(4);
  for (std::uint64_t t = 0; t < count; ++t) {
    std::string name = r.Bytes(r.Uint(4));
    const auto rank = r.Uint(4);
    if (rank > 8) throw ParseError("checkpoint tensor '" + name + "' has rank " +
                                       std::to_string(rank), 0);
    Shape shape;
    for (std::uint64_t k = 0; k < rank; ++k) shape.push_back(r.Uint(8));
    const std::size_t n = ShapeSize(shape);
    if (n > bytes.size() / 8) throw ParseError("checkpoint tensor too large", 0);
    std::vector<double> data(n);
    for (double& v : data) v = std::bit_cast<double>(r.Uint(8));
    ckpt.tensors.emplace_back(std::move(name), Array(std::move(shape), std::move(data)));
  }
  if (!r.done()) throw ParseError("trailing bytes after checkpoint payload", 0);
  return ckpt;
}

void SaveCheckpoint(const std::string& path, const ParameterStore& store,
                    const std::string& config_text) {
  WriteFileAtomic(path, EncodeCheckpoint(store, config_text));
}

Checkpoint LoadCheckpoint(const std::string& path) {
  return DecodeCheckpoint(ReadFile(path));
}

void RestoreParameters(const Checkpoint& ckpt, ParameterStore& store) {
  if (ckpt.tensors.size() != store.all().size()) {
    throw InvalidArgument("checkpoint holds " + std::to_string(ckpt.tensors.size()) +
                          " tensors, model expects " +
                          std::to_string(store.all().size()));
  }
  for (const auto& [name, value] : ckpt.tensors) {
    Parameter& p = store.get(name);
    if (p.value.shape() != value.shape()) {
      throw ShapeError("checkpoint tensor '" + name + "' has shape " +
                       ShapeString(value.shape()) + ", model expects " +
                       ShapeString(p.value.shape()));
    }
    p.value = value;
  }
}

}  // namespace invrat
