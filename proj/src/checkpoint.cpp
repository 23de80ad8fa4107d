/*
 * Copyright 2026 The sketchpair Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "sketchpair/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "sketchpair/errors.hpp"
#include "sketchpair/image_io.hpp"

namespace sketchpair {
namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'S', 'K', 'P', 'C', 'K', 'P', 'T', '\0'};

std::uint64_t fnv1a(const char* data, std::size_t size) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  template <typename T>
  void put(T value) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    buffer_.append(bytes, sizeof(T));
  }
  void put_string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    buffer_.append(s);
  }
  void put_floats(const Tensor& t) {
    buffer_.append(reinterpret_cast<const char*>(t.raw()), t.size() * sizeof(float));
  }
  void raw(const char* data, std::size_t size) { buffer_.append(data, size); }
  const std::string& bytes() const { return buffer_; }

 private:
  std::string buffer_;
};

class Reader {
 public:
  Reader(const std::string& bytes, std::size_t limit, const fs::path& path)
      : bytes_(bytes), limit_(limit), path_(path) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string get_string() {
    const auto size = get<std::uint32_t>();
    need(size);
    std::string s = bytes_.substr(pos_, size);
    pos_ += size;
    return s;
  }
  void get_floats(Tensor& t) {
    need(t.size() * sizeof(float));
    std::memcpy(t.raw(), bytes_.data() + pos_, t.size() * sizeof(float));
    pos_ += t.size() * sizeof(float);
  }
  std::size_t position() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > limit_) {
      throw CheckpointError(CheckpointError::Kind::Truncated, "checkpoint " + path_.string() + " is truncated");
    }
  }

  const std::string& bytes_;
  std::size_t limit_;
  std::size_t pos_ = 0;
  fs::path path_;
};

}  // namespace

Network& Checkpoint::network(const std::string& name, std::string_view expected_arch) {
  for (Network& net : networks) {
    if (net.name() != name) continue;
    if (!expected_arch.empty()) {
      std::string expected;
      try {
        expected = render_spec(parse_spec(expected_arch));
      } catch (const ParseError&) {
        expected = std::string(expected_arch);
      }
      if (net.spec().arch() != expected) {
        throw CheckpointError(CheckpointError::Kind::ArchitectureMismatch,
                              "network " + name + " was saved with architecture " + net.spec().arch() +
                                  " but " + std::string(expected_arch) + " was expected");
      }
    }
    return net;
  }
  throw CheckpointError(CheckpointError::Kind::MissingNetwork, "checkpoint has no network named " + name);
}

void save_checkpoint(const fs::path& path, std::span<const Network* const> networks,
                     const CheckpointMetadata& metadata) {
  Writer w;
  w.raw(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::int64_t>(metadata.step);
  w.put<double>(metadata.lr);
  w.put<std::uint64_t>(metadata.seed);
  w.put_string(metadata.config);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(networks.size()));
  for (const Network* net : networks) {
    const NetworkSpec& spec = net->spec();
    const NetworkOptions& o = net->options();
    w.put_string(net->name());
    w.put<std::uint8_t>(net->role() == Role::Generator ? 0 : 1);
    w.put_string(spec.arch());
    w.put<std::int32_t>(spec.input_channels);
    w.put<std::int32_t>(spec.input_size);
    w.put<std::uint8_t>(spec.head == Head::None ? 0 : 1);
    w.put<float>(o.generator_alpha);
    w.put<float>(o.discriminator_alpha);
    w.put<float>(o.dropout_rate);
    w.put<std::int32_t>(o.dropout_layers);
    w.put<double>(o.init_std);
    w.put<double>(o.norm_eps);
    const auto& params = net->parameter_storage();
    w.put<std::uint32_t>(static_cast<std::uint32_t>(params.size()));
    for (const Parameter& p : params) {
      w.put_string(p.name);
      w.put<std::uint32_t>(static_cast<std::uint32_t>(p.value.rank()));
      for (auto d : p.value.shape()) w.put<std::int64_t>(d);
      w.put_floats(p.value);
    }
  }
  w.put<std::uint64_t>(fnv1a(w.bytes().data(), w.bytes().size()));
  try {
    atomic_write(path, w.bytes());
  } catch (const DataError& e) {
    throw CheckpointError(CheckpointError::Kind::Io, e.what());
  }
}

Checkpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointError::Kind::Io, "cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    if (bytes.size() < sizeof(kMagic) && std::memcmp(bytes.data(), kMagic, bytes.size()) == 0) {
      throw CheckpointError(CheckpointError::Kind::Truncated, "checkpoint " + path.string() + " is truncated");
    }
    throw CheckpointError(CheckpointError::Kind::BadMagic, path.string() + " is not a checkpoint");
  }
  const std::size_t body = bytes.size() >= sizeof(std::uint64_t) ? bytes.size() - sizeof(std::uint64_t) : 0;
  Reader r(bytes, bytes.size(), path);
  r.get<std::uint64_t>();  // magic
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError(CheckpointError::Kind::VersionMismatch,
                          "checkpoint " + path.string() + " has format version " + std::to_string(version) +
                              ", expected " + std::to_string(kCheckpointVersion));
  }
  // Field reads below are bounded by the body so a missing checksum reads as truncation.
  Reader b(bytes, body, path);
  b.get<std::uint64_t>();
  b.get<std::uint32_t>();

  Checkpoint ckpt;
  ckpt.metadata.step = b.get<std::int64_t>();
  ckpt.metadata.lr = b.get<double>();
  ckpt.metadata.seed = b.get<std::uint64_t>();
  ckpt.metadata.config = b.get_string();
  const auto count = b.get<std::uint32_t>();
  for (std::uint32_t n = 0; n < count; ++n) {
    const std::string name = b.get_string();
    const Role role = b.get<std::uint8_t>() == 0 ? Role::Generator : Role::Discriminator;
    const std::string arch = b.get_string();
    const int in_c = b.get<std::int32_t>();
    const int size = b.get<std::int32_t>();
    const Head head = b.get<std::uint8_t>() == 0 ? Head::None : Head::ScalarScore;
    NetworkOptions o;
    o.generator_alpha = b.get<float>();
    o.discriminator_alpha = b.get<float>();
    o.dropout_rate = b.get<float>();
    o.dropout_layers = b.get<std::int32_t>();
    o.init_std = b.get<double>();
    o.norm_eps = b.get<double>();

    NetworkSpec spec;
    try {
      spec = role == Role::Generator ? NetworkSpec::generator(arch, in_c, size)
                                     : NetworkSpec::discriminator(arch, in_c, size, head);
    } catch (const Error& e) {
      throw CheckpointError(CheckpointError::Kind::ArchitectureMismatch,
                            "checkpoint network " + name + " has an unusable architecture '" + arch + "': " + e.what());
    }
    Network net = Network::build(name, std::move(spec), role, 0, o, /*random_init=*/false);
    auto& params = net.parameter_storage();
    const auto param_count = b.get<std::uint32_t>();
    if (param_count != params.size()) {
      throw CheckpointError(CheckpointError::Kind::ArchitectureMismatch,
                            "network " + name + " stores " + std::to_string(param_count) + " parameters, " + arch +
                                " has " + std::to_string(params.size()));
    }
    for (Parameter& p : params) {
      const std::string pname = b.get_string();
      const auto rank = b.get<std::uint32_t>();
      Shape shape;
      for (std::uint32_t i = 0; i < rank && i < 8; ++i) shape.push_back(b.get<std::int64_t>());
      if (pname != p.name || shape != p.value.shape()) {
        throw CheckpointError(CheckpointError::Kind::ArchitectureMismatch,
                              "network " + name + ": stored parameter " + pname + " " + shape_str(shape) +
                                  " does not match " + p.name + " " + shape_str(p.value.shape()));
      }
      b.get_floats(p.value);
    }
    ckpt.networks.push_back(std::move(net));
  }
  if (b.position() != body) {
    throw CheckpointError(CheckpointError::Kind::Truncated,
                          "checkpoint " + path.string() + " has an inconsistent length");
  }
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + body, sizeof(stored));
  if (stored != fnv1a(bytes.data(), body)) {
    throw CheckpointError(CheckpointError::Kind::Truncated, "checkpoint " + path.string() + " fails its checksum");
  }
  return ckpt;
}

}  // namespace sketchpair
