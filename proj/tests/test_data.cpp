#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "zclassifier/data.hpp"
#include "zclassifier/rng.hpp"

using namespace zc;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("zc_data_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_cifar_file(const std::string& path, std::size_t records, unsigned char label_base,
                      unsigned char pixel_fill) {
  std::ofstream out(path, std::ios::binary);
  std::vector<unsigned char> record(3073, pixel_fill);
  for (std::size_t r = 0; r < records; ++r) {
    record[0] = static_cast<unsigned char>((label_base + r) % 10);
    out.write(reinterpret_cast<const char*>(record.data()), 3073);
  }
}

// Independent oracle: assign each point to the closest generator center.
double nearest_centroid_accuracy(const Dataset& d, const std::vector<std::vector<double>>& centers) {
  const std::size_t n = d.size(), dim = d.inputs.dim(1);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centers.size(); ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        const double diff = d.inputs[i * dim + j] - centers[c][j];
        s += diff * diff;
      }
      if (s < best_d) {
        best_d = s;
        best = c;
      }
    }
    if (static_cast<int>(best) == d.labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

}  // namespace

TEST_CASE("blobs are balanced, deterministic, and separable") {
  BlobConfig cfg;
  cfg.k = 10;
  cfg.n_per_class = 200;
  cfg.dim = 16;
  cfg.spread = 1.0;
  Dataset a = gen_blobs(cfg, 42);
  Dataset b = gen_blobs(cfg, 42);

  CHECK(a.size() == 2000);
  CHECK(a.domain == Domain::ind);
  std::vector<int> counts(10, 0);
  for (int y : a.labels) ++counts[static_cast<std::size_t>(y)];
  for (int c : counts) CHECK(c == 200);

  for (std::size_t i = 0; i < a.inputs.size(); ++i) CHECK(a.inputs[i] == b.inputs[i]);

  const double acc = nearest_centroid_accuracy(a, blob_centers(cfg));
  CHECK(acc >= 0.999);
}

TEST_CASE("blob centers honor the pairwise separation floor") {
  for (std::size_t dim : {std::size_t{1}, std::size_t{2}, std::size_t{5}, std::size_t{16}}) {
    BlobConfig cfg;
    cfg.k = 5;
    cfg.dim = dim;
    cfg.spread = 0.7;
    auto centers = blob_centers(cfg);
    for (std::size_t a = 0; a < centers.size(); ++a)
      for (std::size_t b = a + 1; b < centers.size(); ++b) {
        double d = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
          const double diff = centers[a][j] - centers[b][j];
          d += diff * diff;
        }
        CHECK(std::sqrt(d) >= 6.0 * cfg.spread - 1e-9);
      }
  }
  BlobConfig bad;
  bad.k = 1;
  CHECK_THROWS_AS(blob_centers(bad), std::invalid_argument);
  BlobConfig bad2;
  bad2.spread = 0.0;
  CHECK_THROWS_AS(blob_centers(bad2), std::invalid_argument);
}

TEST_CASE("gaussian noise matches N(0,1) moments") {
  Dataset d = gen_gaussian_noise({16}, 6250, 9);  // 1e5 values
  CHECK(d.domain == Domain::ood_gaussian);
  CHECK_FALSE(d.labeled());
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t i = 0; i < d.inputs.size(); ++i) {
    sum += d.inputs[i];
    sumsq += d.inputs[i] * d.inputs[i];
  }
  const double n = static_cast<double>(d.inputs.size());
  CHECK(std::fabs(sum / n) < 0.02);
  CHECK(std::fabs(sumsq / n - sum / n * sum / n - 1.0) < 0.05);
}

TEST_CASE("uniform noise respects bounds and rejects bad ranges") {
  Dataset d = gen_uniform_noise({8}, 100, -1.0, 1.0, 3);
  CHECK(d.domain == Domain::ood_uniform);
  for (std::size_t i = 0; i < d.inputs.size(); ++i) {
    CHECK(d.inputs[i] >= -1.0);
    CHECK(d.inputs[i] < 1.0);
  }
  CHECK_THROWS_AS(gen_uniform_noise({8}, 10, 1.0, 1.0, 3), std::invalid_argument);

  // Near-degenerate range produces near-constant inputs.
  Dataset tight = gen_uniform_noise({4}, 50, 0.5, 0.5 + 1e-9, 3);
  for (std::size_t i = 0; i < tight.inputs.size(); ++i)
    CHECK(tight.inputs[i] == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("shifted blobs translate every center") {
  BlobConfig cfg;
  cfg.k = 3;
  cfg.n_per_class = 50;
  cfg.dim = 4;
  std::vector<double> shift{10.0, -5.0, 0.0, 2.0};
  Dataset shifted = gen_shifted_blobs(cfg, shift, 7);
  CHECK(shifted.domain == Domain::ood_natural);
  CHECK_FALSE(shifted.labeled());

  Dataset base = gen_blobs(cfg, 7);
  // Same seed, same draw stream: inputs differ exactly by the shift.
  for (std::size_t i = 0; i < base.size(); ++i)
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(shifted.inputs[i * 4 + j] ==
            doctest::Approx(base.inputs[i * 4 + j] + shift[j]).epsilon(1e-12));

  CHECK_THROWS_AS(gen_shifted_blobs(cfg, {1.0}, 7), std::invalid_argument);
  Dataset labeled = gen_shifted_blobs(cfg, shift, 7, true);
  CHECK(labeled.labeled());
}

TEST_CASE("normalization is a train-stat transform, reapplied verbatim") {
  BlobConfig cfg;
  cfg.k = 3;
  cfg.n_per_class = 100;
  cfg.dim = 5;
  Dataset train = gen_blobs(cfg, 11);
  Normalization norm = compute_normalization(train);
  Dataset train_n = apply_normalization(train, norm);

  // Self-consistency: standardized train columns have mean 0, std 1.
  const std::size_t n = train_n.size(), d = 5;
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += train_n.inputs[i * d + j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double diff = train_n.inputs[i * d + j] - mean;
      var += diff * diff;
    }
    var /= static_cast<double>(n);
    CHECK(std::fabs(mean) < 1e-6);
    CHECK(std::fabs(std::sqrt(var) - 1.0) < 1e-6);
  }

  // OOD data passes through the same affine map, not its own stats.
  Dataset ood = gen_gaussian_noise({5}, 50, 13);
  Dataset ood_n = apply_normalization(ood, norm);
  for (std::size_t i = 0; i < 50; ++i)
    for (std::size_t j = 0; j < d; ++j)
      CHECK(ood_n.inputs[i * d + j] ==
            doctest::Approx((ood.inputs[i * d + j] - norm.mean[j]) / norm.stddev[j]).epsilon(1e-12));
}

TEST_CASE("cifar10 loader parses canonical records") {
  TempDir dir;
  for (int i = 1; i <= 5; ++i)
    write_cifar_file(dir.file("data_batch_" + std::to_string(i) + ".bin"), 4, 0, 128);
  write_cifar_file(dir.file("test_batch.bin"), 2, 3, 64);

  CifarPair pair = load_cifar10(dir.path.string());
  CHECK(pair.train.size() == 20);
  CHECK(pair.test.size() == 2);
  CHECK(pair.train.inputs.shape() == Shape{20, 3, 32, 32});
  for (int y : pair.train.labels) {
    CHECK(y >= 0);
    CHECK(y <= 9);
  }
  CHECK(pair.train.labels[0] == 0);
  CHECK(pair.train.labels[1] == 1);
  CHECK(pair.test.labels[0] == 3);
}

TEST_CASE("cifar10 loader verifies the canonical 50000/10000 split") {
  TempDir dir;
  for (int i = 1; i <= 5; ++i)
    write_cifar_file(dir.file("data_batch_" + std::to_string(i) + ".bin"), 10000, 0, 100);
  write_cifar_file(dir.file("test_batch.bin"), 10000, 1, 100);
  CifarPair pair = load_cifar10(dir.path.string());
  CHECK(pair.train.size() == 50000);
  CHECK(pair.test.size() == 10000);
}

TEST_CASE("cifar10 loader rejects malformed files") {
  SUBCASE("wrong size") {
    TempDir dir;
    for (int i = 1; i <= 5; ++i)
      write_cifar_file(dir.file("data_batch_" + std::to_string(i) + ".bin"), 2, 0, 1);
    write_cifar_file(dir.file("test_batch.bin"), 1, 0, 1);
    std::ofstream(dir.file("data_batch_3.bin"), std::ios::binary | std::ios::app) << "extra";
    CHECK_THROWS_WITH_AS(load_cifar10(dir.path.string()), doctest::Contains("wrong file size"),
                         std::runtime_error);
  }
  SUBCASE("label byte out of range") {
    TempDir dir;
    for (int i = 1; i <= 5; ++i)
      write_cifar_file(dir.file("data_batch_" + std::to_string(i) + ".bin"), 2, 0, 1);
    write_cifar_file(dir.file("test_batch.bin"), 1, 0, 1);
    {
      std::fstream f(dir.file("data_batch_2.bin"), std::ios::in | std::ios::out | std::ios::binary);
      f.seekp(0);
      char bad = 11;
      f.write(&bad, 1);
    }
    CHECK_THROWS_WITH_AS(load_cifar10(dir.path.string()), doctest::Contains("> 9"),
                         std::runtime_error);
  }
  SUBCASE("missing directory") {
    CHECK_THROWS_AS(load_cifar10("/definitely/not/here"), std::runtime_error);
  }
}

TEST_CASE("csv export writes one row per sample with label last") {
  TempDir dir;
  BlobConfig cfg;
  cfg.k = 2;
  cfg.n_per_class = 3;
  cfg.dim = 2;
  Dataset d = gen_blobs(cfg, 5);
  const std::string path = dir.file("blobs.csv");
  export_csv(d, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "x0,x1,label");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 6);
}
