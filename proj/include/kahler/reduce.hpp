#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kahler {

// Points per block. The partition depends only on n, so sums are identical for any thread count.
inline constexpr std::size_t kReduceBlock = 512;

void set_threads(int n);
int max_threads();

// Sum of term(i, acc) over i in [0, n): serial accumulation inside fixed blocks, OpenMP over
// blocks, then a pairwise tree over block partials in index order.
template <class Acc, class Term>
Acc block_reduce(std::size_t n, const Acc& zero, Term&& term) {
  const std::size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
  if (nblocks == 0) return zero;
  std::vector<Acc> partial(nblocks, zero);
  std::vector<std::exception_ptr> errors(nblocks);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nblocks); ++b) {
    try {
      Acc acc = zero;
      const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
      const std::size_t hi = lo + kReduceBlock < n ? lo + kReduceBlock : n;
      for (std::size_t i = lo; i < hi; ++i) term(i, acc);
      partial[b] = std::move(acc);
    } catch (...) {
      errors[b] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (std::size_t stride = 1; stride < nblocks; stride *= 2)
    for (std::size_t i = 0; i + stride < nblocks; i += 2 * stride) partial[i] += partial[i + stride];
  return partial[0];
}

// Reference: one accumulator, strictly sequential.
template <class Acc, class Term>
Acc serial_reduce(std::size_t n, const Acc& zero, Term&& term) {
  Acc acc = zero;
  for (std::size_t i = 0; i < n; ++i) term(i, acc);
  return acc;
}

}  // namespace kahler
