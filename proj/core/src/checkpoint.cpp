#include "zclassifier/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "config_json.hpp"

namespace zc {

namespace {

constexpr char kMagic[5] = {'Z', 'C', 'L', 'F', '1'};

using detail::Json;

Json manifest_json(const Model& model) {
  Json m;
  m["config"] = detail::backbone_to_json(model.config);
  m["seed"] = model.rng_seed;
  Json params = Json::array();
  for (const auto& [name, tensor] : model.params) {
    Json p;
    p["name"] = name;
    p["shape"] = tensor.shape();
    params.push_back(std::move(p));
  }
  m["params"] = std::move(params);
  return m;
}

}  // namespace

void save_checkpoint(const Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(CheckpointError::Kind::io, "checkpoint: cannot open " + path);

  const std::string manifest = manifest_json(model).dump();
  if (manifest.size() > 0xFFFFFFFFull) {
    throw CheckpointError(CheckpointError::Kind::io, "checkpoint: manifest too large");
  }
  const std::uint32_t len = static_cast<std::uint32_t>(manifest.size());
  unsigned char len_le[4] = {static_cast<unsigned char>(len & 0xFF),
                             static_cast<unsigned char>((len >> 8) & 0xFF),
                             static_cast<unsigned char>((len >> 16) & 0xFF),
                             static_cast<unsigned char>((len >> 24) & 0xFF)};
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char*>(len_le), 4);
  out.write(manifest.data(), static_cast<std::streamsize>(manifest.size()));

  std::vector<unsigned char> payload;
  for (const auto& [name, tensor] : model.params) {
    for (double v : tensor.vec()) {
      const float f = static_cast<float>(v);
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      payload.push_back(static_cast<unsigned char>(bits & 0xFF));
      payload.push_back(static_cast<unsigned char>((bits >> 8) & 0xFF));
      payload.push_back(static_cast<unsigned char>((bits >> 16) & 0xFF));
      payload.push_back(static_cast<unsigned char>((bits >> 24) & 0xFF));
    }
  }
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
  if (!out) throw CheckpointError(CheckpointError::Kind::io, "checkpoint: write failed for " + path);
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointError::Kind::io, "checkpoint: cannot open " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < sizeof(kMagic) + 4 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError(CheckpointError::Kind::bad_magic, "checkpoint: bad magic in " + path);
  }
  const unsigned char* lp = reinterpret_cast<const unsigned char*>(bytes.data() + sizeof(kMagic));
  const std::uint32_t manifest_len = static_cast<std::uint32_t>(lp[0]) |
                                     (static_cast<std::uint32_t>(lp[1]) << 8) |
                                     (static_cast<std::uint32_t>(lp[2]) << 16) |
                                     (static_cast<std::uint32_t>(lp[3]) << 24);
  const std::size_t manifest_start = sizeof(kMagic) + 4;
  if (bytes.size() < manifest_start + manifest_len) {
    throw CheckpointError(CheckpointError::Kind::truncated_payload,
                          "checkpoint: truncated manifest in " + path);
  }

  Json manifest;
  try {
    manifest = Json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(manifest_start),
                           bytes.begin() + static_cast<std::ptrdiff_t>(manifest_start + manifest_len));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(CheckpointError::Kind::bad_manifest,
                          std::string("checkpoint: manifest parse error: ") + e.what());
  }

  Model model;
  try {
    model.config = detail::backbone_from_json(manifest.at("config"));
    model.rng_seed = manifest.at("seed").get<std::uint64_t>();
  } catch (const std::exception& e) {
    throw CheckpointError(CheckpointError::Kind::bad_manifest,
                          std::string("checkpoint: invalid manifest: ") + e.what());
  }

  const auto expected = expected_parameters(model.config);
  const Json& params = manifest.at("params");
  if (!params.is_array() || params.size() != expected.size()) {
    throw CheckpointError(CheckpointError::Kind::shape_mismatch,
                          "checkpoint: manifest lists " + std::to_string(params.size()) +
                              " parameters, config implies " + std::to_string(expected.size()));
  }
  std::size_t total = 0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const std::string name = params[i].at("name").get<std::string>();
    const Shape shape = params[i].at("shape").get<Shape>();
    if (name != expected[i].first || shape != expected[i].second) {
      throw CheckpointError(CheckpointError::Kind::shape_mismatch,
                            "checkpoint: parameter " + std::to_string(i) + " is " + name + " " +
                                shape_str(shape) + ", config implies " + expected[i].first + " " +
                                shape_str(expected[i].second));
    }
    total += shape_numel(shape);
  }

  const std::size_t payload_start = manifest_start + manifest_len;
  if (bytes.size() - payload_start != total * 4) {
    throw CheckpointError(CheckpointError::Kind::truncated_payload,
                          "checkpoint: truncated payload, expected " + std::to_string(total * 4) +
                              " bytes, got " + std::to_string(bytes.size() - payload_start));
  }

  const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data() + payload_start);
  for (const auto& [name, shape] : expected) {
    Tensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) {
      std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                           (static_cast<std::uint32_t>(p[2]) << 16) |
                           (static_cast<std::uint32_t>(p[3]) << 24);
      p += 4;
      float f;
      std::memcpy(&f, &bits, 4);
      t[i] = static_cast<double>(f);
    }
    model.params.emplace_back(name, std::move(t));
  }
  return model;
}

}  // namespace zc
