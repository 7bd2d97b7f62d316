// Copyright 2026 The Hydra Authors.
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

#include "hydra/checkpoint.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "json.hpp"

#include "hydra/error.h"

namespace hydra {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

using nlohmann::json;

std::uint64_t Fnv1a(const char* data, std::size_t n) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 1099511628211ULL;
  }
  return h;
}

template <typename U>
void Put(std::string& out, U value) {
  char buf[sizeof(U)];
  std::memcpy(buf, &value, sizeof(U));
  out.append(buf, sizeof(U));
}

void PutU32(std::string& out, std::size_t value) {
  Require(value <= UINT32_MAX, ErrorCode::kInvalidArgument,
          "checkpoint field exceeds 32 bits");
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(value));
}

class Reader {
 public:
  Reader(const std::string& bytes, std::size_t end) : bytes_(bytes), end_(end) {}

  void Need(std::size_t n) const {
    Require(n <= end_ - pos_, ErrorCode::kIntegrity,
            "checkpoint truncated at byte " + std::to_string(pos_));
  }
  std::uint32_t U32() {
    Need(4);
    std::uint32_t v;
    std::memcpy(&v, bytes_.data() + pos_, 4);
    pos_ += 4;
    return v;
  }
  std::string Bytes(std::size_t n) {
    Need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void Floats(float* dst, std::size_t n) {
    Require(n <= (end_ - pos_) / sizeof(float), ErrorCode::kIntegrity,
            "checkpoint truncated at byte " + std::to_string(pos_));
    std::memcpy(dst, bytes_.data() + pos_, n * sizeof(float));
    pos_ += n * sizeof(float);
  }
  std::size_t pos() const { return pos_; }

 private:
  const std::string& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

json ConfigRecord(const ModelConfig& c) {
  return {{"vocab_size", c.vocab_size},     {"d_model", c.d_model},
          {"n_heads", c.n_heads},           {"encoder_layers", c.encoder_layers},
          {"decoder_layers", c.decoder_layers},
          {"shared_layers", c.shared_layers},
          {"num_decoders", c.num_decoders}, {"ff_width", c.ff_width},
          {"max_positions", c.max_positions},
          {"seed", c.seed},                 {"guided", c.guided}};
}

ModelConfig ConfigFromRecord(const json& r) {
  ModelConfig c;
  try {
    c.vocab_size = r.at("vocab_size").get<std::size_t>();
    c.d_model = r.at("d_model").get<std::size_t>();
    c.n_heads = r.at("n_heads").get<std::size_t>();
    c.encoder_layers = r.at("encoder_layers").get<std::size_t>();
    c.decoder_layers = r.at("decoder_layers").get<std::size_t>();
    c.shared_layers = r.at("shared_layers").get<std::size_t>();
    c.num_decoders = r.at("num_decoders").get<std::size_t>();
    c.ff_width = r.at("ff_width").get<std::size_t>();
    c.max_positions = r.at("max_positions").get<std::size_t>();
    c.seed = r.at("seed").get<std::uint64_t>();
    c.guided = r.value("guided", false);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kIntegrity, std::string("bad checkpoint header: ") + e.what());
  }
  return c;
}

}  // namespace

std::string SerializeCheckpoint(const Model<float>& model,
                                const Vocabulary* vocabulary) {
  json header = {{"format", kCheckpointFormat},
                 {"config", ConfigRecord(model.config())}};
  if (vocabulary) {
    header["vocabulary"] = vocabulary->tokens();
    header["vocabulary_fingerprint"] = vocabulary->Fingerprint();
  }
  const std::string text = header.dump();
  std::string out;
  PutU32(out, text.size());
  out += text;
  PutU32(out, model.parameters().size());
  for (const auto& p : model.parameters()) {
    PutU32(out, p.name.size());
    out += p.name;
    PutU32(out, p.value.shape().size());
    for (std::size_t dim : p.value.shape()) PutU32(out, dim);
    out.append(reinterpret_cast<const char*>(p.value.data().data()),
               p.value.size() * sizeof(float));
  }
  Put<std::uint64_t>(out, Fnv1a(out.data(), out.size()));
  return out;
}

LoadedCheckpoint ParseCheckpoint(const std::string& bytes) {
  Require(bytes.size() >= 4 + 8, ErrorCode::kIntegrity, "checkpoint truncated");
  const std::size_t body_end = bytes.size() - 8;
  Reader in(bytes, body_end);
  const std::uint32_t header_len = in.U32();
  json header;
  try {
    header = json::parse(in.Bytes(header_len));
  } catch (const json::parse_error& e) {
    Fail(ErrorCode::kIntegrity, std::string("bad checkpoint header: ") + e.what());
  }
  const std::string format = header.value("format", std::string());
  Require(format == kCheckpointFormat, ErrorCode::kUnsupportedVersion,
          "checkpoint format '" + format + "' is not " + kCheckpointFormat);
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + body_end, 8);
  Require(stored == Fnv1a(bytes.data(), body_end), ErrorCode::kIntegrity,
          "checkpoint checksum mismatch");

  const ModelConfig config = ConfigFromRecord(header.value("config", json::object()));
  std::map<std::string, Tensor<float>> tensors;
  const std::uint32_t count = in.U32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = in.Bytes(in.U32());
    numerics::Shape shape;
    const std::uint32_t ndims = in.U32();
    for (std::uint32_t d = 0; d < ndims; ++d) shape.push_back(in.U32());
    Tensor<float> t(shape);
    in.Floats(t.mutable_data().data(), t.size());
    tensors.emplace(std::move(name), std::move(t));
  }
  Require(in.pos() == body_end, ErrorCode::kIntegrity,
          "checkpoint has trailing bytes");
  std::optional<Vocabulary> vocabulary;
  if (header.contains("vocabulary")) {
    vocabulary = Vocabulary::FromTokens(
        header["vocabulary"].get<std::vector<std::string>>());
    Require(vocabulary->Fingerprint() ==
                header.value("vocabulary_fingerprint", std::uint64_t{0}),
            ErrorCode::kIntegrity, "checkpoint vocabulary fingerprint mismatch");
  }
  Model<float> model = Model<float>::FromTensors(config, tensors);
  return {std::move(model), std::move(vocabulary)};
}

void SaveCheckpoint(const Model<float>& model, const std::filesystem::path& path,
                    const Vocabulary* vocabulary) {
  const std::string bytes = SerializeCheckpoint(model, vocabulary);
  std::ofstream out(path, std::ios::binary);
  Require(out.good(), ErrorCode::kIo, "cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  Require(out.good(), ErrorCode::kIo, "failed writing " + path.string());
}

LoadedCheckpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorCode::kIo, "cannot open checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return ParseCheckpoint(bytes);
}

}  // namespace hydra
