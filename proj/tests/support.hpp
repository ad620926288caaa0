#pragma once

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "scanalr/data.hpp"

namespace testing {

/// Scratch file under the system temp directory, removed on destruction.
class TempFile {
 public:
  explicit TempFile(const std::string& contents, const std::string& suffix = ".csv") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("scanalr_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + suffix);
    std::ofstream(path_, std::ios::binary) << contents;
  }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;
  ~TempFile() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

/// J subjects uniform on [0, side]^2 with Bernoulli(p) labels; `covs` extra
/// N(0,1) covariate columns. Coordinates rounded to `grid` to create ties.
inline scanalr::PointDataset random_points(std::size_t J, double p, std::uint64_t seed, std::size_t covs = 0,
                                           double side = 100.0, double grid = 0.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, side);
  std::bernoulli_distribution coin(p);
  std::normal_distribution<double> normal;
  std::vector<double> coords(2 * J);
  std::vector<std::uint8_t> cases(J);
  std::vector<double> cov;
  for (std::size_t i = 0; i < J; ++i) {
    for (int k = 0; k < 2; ++k) {
      double v = unif(rng);
      if (grid > 0.0) v = grid * std::round(v / grid);
      coords[2 * i + k] = v;
    }
    cases[i] = coin(rng);
  }
  // keep 0 < I < J
  cases[0] = 1;
  cases[1] = 0;
  if (covs > 0) {
    cov.resize(J * (covs + 1));
    for (std::size_t i = 0; i < J; ++i) {
      cov[i * (covs + 1)] = 1.0;
      for (std::size_t k = 1; k <= covs; ++k) cov[i * (covs + 1) + k] = normal(rng);
    }
  }
  return scanalr::PointDataset(2, std::move(coords), std::move(cases), std::move(cov), covs ? covs + 1 : 0);
}

}  // namespace testing
