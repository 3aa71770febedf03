// Copyright 2026 The Hypnospec Authors.
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

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "hypnospec/error.hpp"
#include "hypnospec/nn/micronet.hpp"

namespace hypnospec::nn {

namespace {

constexpr char kMagic[4] = {'E', 'G', 'M', 'W'};
constexpr std::uint16_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes.insert(bytes.end(), b, b + n);
  }
  template <typename Int>
  void put(Int v) { raw(&v, sizeof(v)); }
  std::vector<std::uint8_t> bytes;
};

class Reader {
 public:
  explicit Reader(std::vector<std::uint8_t> b) : bytes_(std::move(b)) {}
  void raw(void* p, std::size_t n) {
    if (pos_ + n > bytes_.size()) throw Error(Errc::kCheckpointFormat, "checkpoint is truncated");
    std::memcpy(p, bytes_.data() + pos_, n);
    pos_ += n;
  }
  template <typename Int>
  Int get() {
    Int v{};
    raw(&v, sizeof(v));
    return v;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

template <typename T>
std::vector<std::span<T>> arrays_of(Layer<T>& layer) {
  std::vector<std::span<T>> out;
  for (auto& p : layer.params()) out.push_back(p.value);
  for (auto s : layer.state()) out.push_back(s);
  return out;
}

}  // namespace

template <typename T>
void save_checkpoint(MicroNet<T>& model, const std::filesystem::path& path) {
  Writer w;
  w.raw(kMagic, 4);
  w.put<std::uint16_t>(kVersion);
  w.put<std::uint8_t>(sizeof(T));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.num_layers()));
  for (std::size_t i = 0; i < model.num_layers(); ++i) {
    auto& layer = model.layer(i);
    const auto desc = layer.describe();
    w.put<std::uint8_t>(static_cast<std::uint8_t>(layer.kind()));
    w.put<std::uint8_t>(layer.trainable() ? 1 : 0);
    w.put<std::uint16_t>(static_cast<std::uint16_t>(desc.size()));
    w.raw(desc.data(), desc.size());
    const auto arrays = arrays_of(layer);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(arrays.size()));
    for (const auto a : arrays) w.put<std::uint64_t>(a.size());
  }
  for (std::size_t i = 0; i < model.num_layers(); ++i) {
    for (const auto a : arrays_of(model.layer(i))) w.raw(a.data(), a.size_bytes());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(w.bytes.data()), static_cast<std::streamsize>(w.bytes.size()));
  if (!out) throw Error(Errc::kIo, fmt::format("cannot write checkpoint '{}'", path.string()));
}

template <typename T>
void load_checkpoint(MicroNet<T>& model, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, fmt::format("cannot open checkpoint '{}'", path.string()));
  Reader r(std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()));

  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw Error(Errc::kCheckpointFormat, "bad checkpoint magic");
  if (const auto v = r.get<std::uint16_t>(); v != kVersion) {
    throw Error(Errc::kCheckpointFormat, fmt::format("unsupported checkpoint version {}", v));
  }
  if (const auto width = r.get<std::uint8_t>(); width != sizeof(T)) {
    throw Error(Errc::kCheckpointFormat, fmt::format("checkpoint holds {}-byte reals, model uses {}", width, sizeof(T)));
  }
  if (const auto n = r.get<std::uint32_t>(); n != model.num_layers()) {
    throw Error(Errc::kCheckpointFormat, fmt::format("checkpoint has {} layers, model has {}", n, model.num_layers()));
  }
  std::vector<bool> trainable(model.num_layers());
  for (std::size_t i = 0; i < model.num_layers(); ++i) {
    auto& layer = model.layer(i);
    const auto kind = r.get<std::uint8_t>();
    trainable[i] = r.get<std::uint8_t>() != 0;
    std::string desc(r.get<std::uint16_t>(), '\0');
    r.raw(desc.data(), desc.size());
    if (kind != static_cast<std::uint8_t>(layer.kind()) || desc != layer.describe()) {
      throw Error(Errc::kCheckpointFormat,
                  fmt::format("layer {}: checkpoint has '{}', model has '{}'", i, desc, layer.describe()));
    }
    const auto arrays = arrays_of(layer);
    if (r.get<std::uint32_t>() != arrays.size()) {
      throw Error(Errc::kCheckpointFormat, fmt::format("layer {}: array count differs", i));
    }
    for (const auto a : arrays) {
      if (r.get<std::uint64_t>() != a.size()) {
        throw Error(Errc::kCheckpointFormat, fmt::format("layer {}: array length differs", i));
      }
    }
  }
  for (std::size_t i = 0; i < model.num_layers(); ++i) {
    for (const auto a : arrays_of(model.layer(i))) r.raw(a.data(), a.size_bytes());
    model.layer(i).set_trainable(trainable[i]);
  }
  if (!r.done()) throw Error(Errc::kCheckpointFormat, "trailing bytes after checkpoint payload");
}

template void save_checkpoint<float>(MicroNet<float>&, const std::filesystem::path&);
template void save_checkpoint<double>(MicroNet<double>&, const std::filesystem::path&);
template void load_checkpoint<float>(MicroNet<float>&, const std::filesystem::path&);
template void load_checkpoint<double>(MicroNet<double>&, const std::filesystem::path&);

}  // namespace hypnospec::nn
