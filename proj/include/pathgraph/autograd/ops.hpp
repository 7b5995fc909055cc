#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pathgraph/autograd/tape.hpp"

namespace pathgraph::ag {

using Index = std::vector<std::size_t>;

/// Constant sparse matrix in coordinate form, used for fixed linear
/// aggregation operators (spline basis aggregation, normalised adjacency).
struct SparseMatrix {
  struct Entry {
    std::size_t row;
    std::size_t col;
    double value;
  };
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Entry> entries;
};

inline constexpr double kDefaultLeakySlope = 0.2;

Var matmul(Var a, Var b);
Var add(Var a, Var b);
/// a (R x C) + bias (1 x C) broadcast over rows. The only broadcast supported.
Var add_row(Var a, Var bias);
Var scale(Var a, double factor);
Var leaky_relu(Var a, double slope = kDefaultLeakySlope);
Var relu(Var a);
Var exp(Var a);

/// Softmax over rows sharing a segment id, independently per column.
Var segment_softmax(Var logits, const Index& segment_ids, std::size_t num_segments);
/// Row means per segment; empty segments produce zero rows.
Var segment_mean(Var values, const Index& segment_ids, std::size_t num_segments);

Var gather_rows(Var x, const Index& rows);
Var scatter_add_rows(Var x, const Index& target_rows, std::size_t num_rows);
Var concat_cols(std::span<const Var> parts);
/// x (R x C) with row r multiplied by s(r, 0).
Var row_scale(Var x, Var s);
/// S x for a constant sparse S.
Var spmm(const SparseMatrix& s, Var x);

/// Same row-major data viewed as rows x cols.
Var reshape(Var x, std::size_t rows, std::size_t cols);

Var sum_all(Var x);
Var mean_all(Var x);
Var element(Var x, std::size_t row, std::size_t col);

/// -log softmax(logits)[label] for a 1 x C logit row, max-shifted.
Var softmax_cross_entropy(Var logits, std::size_t label);

}  // namespace pathgraph::ag
