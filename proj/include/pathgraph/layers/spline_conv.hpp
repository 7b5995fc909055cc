#pragma once

#include <cstddef>
#include <optional>

#include "pathgraph/autograd/ops.hpp"
#include "pathgraph/graphio/graph.hpp"

namespace pathgraph::layers {

/// Shape of a tensor-product B-spline kernel g(u) = sum_p w_p Nx_p(u_x) Ny_p(u_y).
/// Kernel element p = iy * size_x + ix.
struct SplineKernelShape {
  int degree = 1;
  std::size_t size_x = 5;
  std::size_t size_y = 5;

  std::size_t num_elements() const noexcept { return size_x * size_y; }
  friend bool operator==(const SplineKernelShape&, const SplineKernelShape&) = default;
};

void validate(const SplineKernelShape& shape);

/// Constant per-graph aggregation operator: row i * P + p, column j holds
/// (1 / |N_i|) * Nx_p(u_ij.x) * Ny_p(u_ij.y) summed over edges j -> i.
/// Multiplying it with node features yields, per node, the basis-weighted
/// neighbourhood mean for every kernel element at once.
struct SplineAggregation {
  std::size_t num_nodes = 0;
  std::size_t num_elements = 0;
  ag::SparseMatrix op;
};

SplineAggregation build_spline_aggregation(const graphio::EdgeList& edges, const graphio::PseudoCoords& pseudo,
                                           std::size_t num_nodes, const SplineKernelShape& shape);

/// Trainable pieces of one spline convolution, as tape variables.
/// weight: (P * d_in) x d_out, i.e. the P x d_in x d_out kernel flattened;
/// root: d_in x d_out (absent when the literal neighbour-only form is used);
/// bias: 1 x d_out.
struct SplineConvParams {
  ag::Var weight;
  std::optional<ag::Var> root;
  ag::Var bias;
};

/// f'_i = root^T f_i + (1/|N_i|) sum_{j in N_i} g(u(i,j))^T f_j + bias.
/// Nodes without neighbours receive only the root and bias terms.
ag::Var spline_conv_forward(const SplineAggregation& aggregation, ag::Var features, const SplineConvParams& params);

}  // namespace pathgraph::layers
