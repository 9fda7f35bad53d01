#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace bsdelab {

/// Pairwise (cascade) summation. The result depends only on the order of the
/// elements, never on chunking or thread count, and the error grows like
/// O(log n) instead of O(n).
double pairwise_sum(std::span<const double> xs);

double pairwise_mean(std::span<const double> xs);

struct MomentSummary {
  double mean = 0.0;
  double stddev = 0.0;
  double stderr_of_mean = 0.0;
  std::size_t n = 0;
};

MomentSummary summarize(std::span<const double> xs);

/// q in [0,1]; linear interpolation between order statistics. Copies + sorts.
double percentile(std::vector<double> xs, double q);

/// Deterministic blocked reduction: the range [0,n) is cut into fixed-size
/// blocks, `partial` produces one double per block, and the partials are
/// combined with pairwise_sum in block order. Because the block boundaries
/// are fixed by n alone, the result is independent of how (or whether) the
/// blocks are computed in parallel.
double blocked_sum(std::size_t n, std::size_t block_size,
                   const std::function<double(std::size_t begin, std::size_t end)>& partial);

inline constexpr std::size_t kDefaultBlock = 8192;

/// Runs fn(begin, end) over a partition of [0,n). Worker count comes from
/// BSDELAB_THREADS (capped at hardware_concurrency, default min(hw, 8)).
/// Writers must touch disjoint slices; combined with blocked_sum above this
/// keeps every reduction in the library bit-stable across thread counts.
void parallel_for(std::size_t n, const std::function<void(std::size_t begin, std::size_t end)>& fn);

std::size_t thread_cap();

/// FNV-1a 64-bit over raw bytes; used for config hashes and data digests.
std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 14695981039346656037ull);
std::string to_hex(std::uint64_t v);

}  // namespace bsdelab
