#include "bsdelab/math_util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "bsdelab/errors.hpp"

namespace bsdelab {

namespace {

constexpr std::size_t kLeaf = 64;

double pairwise_rec(const double* xs, std::size_t n) {
  if (n <= kLeaf) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += xs[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_rec(xs, h) + pairwise_rec(xs + h, n - h);
}

}  // namespace

double pairwise_sum(std::span<const double> xs) {
  return pairwise_rec(xs.data(), xs.size());
}

double pairwise_mean(std::span<const double> xs) {
  if (xs.empty()) throw DomainError("pairwise_mean: empty range");
  return pairwise_sum(xs) / static_cast<double>(xs.size());
}

MomentSummary summarize(std::span<const double> xs) {
  MomentSummary s;
  s.n = xs.size();
  if (s.n == 0) throw DomainError("summarize: empty range");
  s.mean = pairwise_mean(xs);
  if (s.n == 1) return s;
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = xs[i] - s.mean;
    sq[i] = d * d;
  }
  const double var = pairwise_sum(sq) / static_cast<double>(s.n - 1);
  s.stddev = std::sqrt(var);
  s.stderr_of_mean = s.stddev / std::sqrt(static_cast<double>(s.n));
  return s;
}

double percentile(std::vector<double> xs, double q) {
  if (xs.empty()) throw DomainError("percentile: empty range");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("percentile: q outside [0,1]");
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * xs[lo] + w * xs[hi];
}

std::size_t thread_cap() {
  std::size_t hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  std::size_t cap = std::min<std::size_t>(hw, 8);
  if (const char* env = std::getenv("BSDELAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) cap = std::min<std::size_t>(static_cast<std::size_t>(v), hw);
  }
  return cap;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t workers = std::min(thread_cap(), n);
  if (workers <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& t : pool) t.join();
}

double blocked_sum(std::size_t n, std::size_t block_size,
                   const std::function<double(std::size_t, std::size_t)>& partial) {
  if (n == 0) return 0.0;
  if (block_size == 0) throw DomainError("blocked_sum: zero block size");
  const std::size_t nblocks = (n + block_size - 1) / block_size;
  std::vector<double> partials(nblocks);
  parallel_for(nblocks, [&](std::size_t bb, std::size_t be) {
    for (std::size_t blk = bb; blk < be; ++blk) {
      const std::size_t b = blk * block_size;
      const std::size_t e = std::min(n, b + block_size);
      partials[blk] = partial(b, e);
    }
  });
  return pairwise_sum(partials);
}

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::string to_hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

}  // namespace bsdelab
