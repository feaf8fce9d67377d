#pragma once

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "frdim/prob.hpp"
#include "frdim/random.hpp"

namespace frdim::test {

// Dirichlet(1) rows, built from exponentials so the helper does not share
// code with the library's samplers.
inline StateSequence random_sequence(std::size_t n, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  StateSequence seq(k);
  std::vector<double> row(k);
  for (std::size_t t = 0; t < n; ++t) {
    double s = 0.0;
    for (auto& v : row) s += v = -std::log(rng.uniform_open());
    for (auto& v : row) v /= s;
    seq.push_back(row);
  }
  return seq;
}

inline std::vector<double> random_row(std::size_t k, Rng& rng) {
  std::vector<double> row(k);
  double s = 0.0;
  for (auto& v : row) s += v = -std::log(rng.uniform_open());
  for (auto& v : row) v /= s;
  return row;
}

class TempDir {
 public:
  TempDir() {
    path_ = std::filesystem::temp_directory_path() /
            ("frdim_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::filesystem::path path_;
};

}  // namespace frdim::test
