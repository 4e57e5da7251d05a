#pragma once

// Deterministic random streams. A stream is fully determined by
// (master seed, index, tag), so replications can run in any order on any
// number of threads and still draw the same numbers.

#include <cstdint>
#include <random>
#include <vector>

namespace betadpd {

enum class StreamTag : std::uint32_t {
  design = 1,
  response = 2,
  contamination = 3,
  jitter = 4,
};

class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t index, StreamTag tag);

  double uniform();  // [0, 1)
  double normal();
  /// Beta(a, b) through two gamma variates; never returns exactly 0 or 1.
  double beta(double a, double b);
  /// k distinct indices from {0, ..., n-1}, in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace betadpd
