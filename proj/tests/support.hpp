#pragma once

// Fixtures shared by the unit tests.

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "spraycp/domain.hpp"
#include "spraycp/random.hpp"

namespace spraycp::test {

inline ProbVector probs(std::initializer_list<double> p) { return ProbVector::from(std::vector<double>(p)); }

/// Random probability vector. One call in four quantizes entries to eighths
/// (before normalizing) so that exact ties and zeros show up.
inline std::vector<double> random_row(Rng& rng, std::size_t k) {
  std::vector<double> p(k);
  double total = 0.0;
  const bool coarse = rng.below(4) == 0;
  for (auto& v : p) {
    v = coarse ? static_cast<double>(rng.below(9)) : rng.gamma(0.7);
    total += v;
  }
  if (!(total > 0.0)) {
    p.assign(k, 0.0);
    p[rng.below(k)] = 1.0;
    return p;
  }
  for (auto& v : p) v /= total;
  return p;
}

inline ProbVector random_probs(Rng& rng, std::size_t k) { return ProbVector::from(random_row(rng, k)); }

/// Dataset with k classes whose examples are (label, probs) pairs.
inline Dataset make_dataset(int k, ClassLabel weed, const std::vector<std::pair<int, std::vector<double>>>& rows) {
  Dataset ds{k, weed, {}, {}};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ds.examples.push_back(Example{"e" + std::to_string(i), "", ClassLabel{rows[i].first}, ProbVector::from(rows[i].second)});
  }
  return ds;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("spraycp-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace spraycp::test
