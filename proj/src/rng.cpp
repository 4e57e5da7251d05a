#include "betadpd/rng.hpp"

#include <numeric>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "betadpd/error.hpp"

namespace betadpd {
namespace {

// Boost distributions, unlike the std ones, produce the same sequence on every
// standard library.
std::mt19937_64 make_engine(std::uint64_t master, std::uint64_t index, StreamTag tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(tag)};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t index, StreamTag tag)
    : engine_(make_engine(master_seed, index, tag)) {}

double RngStream::uniform() { return boost::random::uniform_01<double>()(engine_); }

double RngStream::normal() { return boost::random::normal_distribution<double>()(engine_); }

double RngStream::beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("beta shapes must be positive");
  boost::random::gamma_distribution<double> ga(a), gb(b);
  for (;;) {
    const double u = ga(engine_);
    const double v = gb(engine_);
    const double y = u / (u + v);
    if (y > 0.0 && y < 1.0) return y;
  }
}

std::vector<std::size_t> RngStream::sample_without_replacement(std::size_t n, std::size_t k) {
  if (k > n) throw DomainError("cannot sample more indices than available");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    boost::random::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(engine_)]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace betadpd
