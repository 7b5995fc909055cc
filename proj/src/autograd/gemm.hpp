#pragma once

#include <cstddef>

namespace pathgraph::ag::detail {

// c = a * b for row-major a (n x k), b (k x m), c (n x m). Every output element
// is the k-ascending sum of products, independent of its row position, so
// relabeling rows of a permutes rows of c bitwise.
void gemm_rowstable(const double* a, const double* b, double* c, std::size_t n, std::size_t k, std::size_t m);

}  // namespace pathgraph::ag::detail
