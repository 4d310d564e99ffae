#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "zclassifier/backbone.hpp"
#include "zclassifier/checkpoint.hpp"
#include "zclassifier/rng.hpp"

using namespace zc;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("zclf_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

}  // namespace

TEST_CASE("checkpoint round-trip reproduces forward outputs within float32 rounding") {
  TempDir dir;
  auto cfg = BackboneConfig::mlp_mini(10, 5, HeadKind::make_zclassifier(10.0, 4, 1), true, {24, 24});
  Model m = init_model(cfg, 71);
  const std::string path = dir.file("model.zclf");
  save_checkpoint(m, path);
  Model loaded = load_checkpoint(path);

  CHECK(loaded.rng_seed == m.rng_seed);
  CHECK(loaded.config.num_classes == cfg.num_classes);
  CHECK(loaded.config.head.lambda == cfg.head.lambda);

  Rng rng(5);
  Tensor batch = rng.normal_tensor({8, 10});
  GaussianLogits a = forward_gaussian(m, batch);
  GaussianLogits b = forward_gaussian(loaded, batch);
  for (std::size_t i = 0; i < a.mu.size(); ++i) {
    CHECK(std::fabs(a.mu[i] - b.mu[i]) <= 1e-5 * (1.0 + std::fabs(a.mu[i])));
    CHECK(std::fabs(a.log_var[i] - b.log_var[i]) <= 1e-5 * (1.0 + std::fabs(a.log_var[i])));
  }
}

TEST_CASE("checkpoint write is byte-stable for identical models") {
  TempDir dir;
  auto cfg = BackboneConfig::mlp_mini(6, 3, HeadKind::make_softmax(), false, {12});
  Model m = init_model(cfg, 13);
  save_checkpoint(m, dir.file("a.zclf"));
  save_checkpoint(m, dir.file("b.zclf"));
  std::ifstream fa(dir.file("a.zclf"), std::ios::binary);
  std::ifstream fb(dir.file("b.zclf"), std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK(sa == sb);
  CHECK(sa.substr(0, 5) == "ZCLF1");
}

TEST_CASE("corrupted magic raises bad_magic") {
  TempDir dir;
  auto cfg = BackboneConfig::mlp_mini(4, 2, HeadKind::make_softmax(), true, {6});
  Model m = init_model(cfg, 1);
  const std::string path = dir.file("model.zclf");
  save_checkpoint(m, path);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("XXLF1", 5);
  }
  try {
    load_checkpoint(path);
    FAIL("expected bad_magic");
  } catch (const CheckpointError& e) {
    CHECK(e.kind() == CheckpointError::Kind::bad_magic);
    CHECK(std::string(e.what()).find("bad magic") != std::string::npos);
  }
}

TEST_CASE("truncated payload raises truncated_payload") {
  TempDir dir;
  auto cfg = BackboneConfig::mlp_mini(4, 2, HeadKind::make_softmax(), true, {6});
  Model m = init_model(cfg, 1);
  const std::string path = dir.file("model.zclf");
  save_checkpoint(m, path);
  const auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - 8);
  try {
    load_checkpoint(path);
    FAIL("expected truncated_payload");
  } catch (const CheckpointError& e) {
    CHECK(e.kind() == CheckpointError::Kind::truncated_payload);
  }
}

TEST_CASE("missing file raises io error") {
  try {
    load_checkpoint("/nonexistent/definitely/missing.zclf");
    FAIL("expected io error");
  } catch (const CheckpointError& e) {
    CHECK(e.kind() == CheckpointError::Kind::io);
  }
}
