#include "gemm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#if defined(__FMA__)
#include <immintrin.h>
#endif

namespace pathgraph::ag::detail {
namespace {

#if defined(__AVX512F__)
constexpr std::size_t kLanes = 8;
#elif defined(__AVX__)
constexpr std::size_t kLanes = 4;
#else
constexpr std::size_t kLanes = 2;
#endif
using vec = double __attribute__((vector_size(kLanes * sizeof(double)), aligned(8), may_alias));

constexpr std::size_t kRows = 8;
constexpr std::size_t kCols = kLanes;

// Every path computes acc <- acc + a * b with the same rounding: fused when the
// target has FMA, otherwise a separate multiply and add (this file is built
// with -ffp-contract=off so the compiler cannot fuse some paths and not others).
inline double madd(double acc, double a, double b) {
#if defined(__FMA__)
  return std::fma(a, b, acc);
#else
  return acc + a * b;
#endif
}

inline vec madd(vec acc, double a, vec b) {
#if defined(__AVX512F__)
  return reinterpret_cast<vec>(_mm512_fmadd_pd(_mm512_set1_pd(a), reinterpret_cast<__m512d>(b),
                                               reinterpret_cast<__m512d>(acc)));
#elif defined(__FMA__)
  return reinterpret_cast<vec>(_mm256_fmadd_pd(_mm256_set1_pd(a), reinterpret_cast<__m256d>(b),
                                               reinterpret_cast<__m256d>(acc)));
#else
  return acc + a * b;
#endif
}

// pa holds kRows rows of a interleaved by k; pb holds a k x kCols strip of b.
void full_tile(const double* pa, const double* pb, double* c, std::size_t k, std::size_t m) {
  vec acc[kRows] = {};
  for (std::size_t p = 0; p < k; ++p) {
    const vec bv = *reinterpret_cast<const vec*>(pb + p * kCols);
#pragma GCC unroll 16
    for (std::size_t r = 0; r < kRows; ++r) acc[r] = madd(acc[r], pa[p * kRows + r], bv);
  }
  for (std::size_t r = 0; r < kRows; ++r) *reinterpret_cast<vec*>(c + r * m) = acc[r];
}

void edge_tile(const double* a, const double* b, double* c, std::size_t rows, std::size_t k, std::size_t m,
               std::size_t width) {
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < width; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc = madd(acc, a[r * k + p], b[p * m + j]);
      c[r * m + j] = acc;
    }
  }
}

}  // namespace

void gemm_rowstable(const double* a, const double* b, double* c, std::size_t n, std::size_t k, std::size_t m) {
  const std::size_t full_rows = n - n % kRows;
  const std::size_t full_cols = m - m % kCols;
  std::vector<double> pa(full_rows * k);
  for (std::size_t i = 0; i < full_rows; i += kRows)
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t r = 0; r < kRows; ++r) pa[i * k + p * kRows + r] = a[(i + r) * k + p];

  std::vector<double> pb(k * kCols);
  for (std::size_t j0 = 0; j0 < full_cols; j0 += kCols) {
    for (std::size_t p = 0; p < k; ++p) std::memcpy(&pb[p * kCols], b + p * m + j0, kCols * sizeof(double));
    for (std::size_t i = 0; i < full_rows; i += kRows) full_tile(pa.data() + i * k, pb.data(), c + i * m + j0, k, m);
    edge_tile(a + full_rows * k, b + j0, c + full_rows * m + j0, n - full_rows, k, m, kCols);
  }
  if (full_cols < m) edge_tile(a, b + full_cols, c + full_cols, n, k, m, m - full_cols);
}

}  // namespace pathgraph::ag::detail
