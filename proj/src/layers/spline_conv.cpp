#include "pathgraph/layers/spline_conv.hpp"

#include <string>

#include "pathgraph/error.hpp"
#include "pathgraph/layers/bspline.hpp"

namespace pathgraph::layers {

void validate(const SplineKernelShape& shape) {
  if (shape.degree < 0) fail(ErrorKind::config, "spline degree must be >= 0");
  const auto min_size = static_cast<std::size_t>(shape.degree) + 1;
  if (shape.size_x < min_size || shape.size_y < min_size) {
    fail(ErrorKind::config, "spline kernel size " + std::to_string(shape.size_x) + "x" + std::to_string(shape.size_y) +
                                " must be at least degree + 1 = " + std::to_string(min_size) + " per axis");
  }
}

SplineAggregation build_spline_aggregation(const graphio::EdgeList& edges, const graphio::PseudoCoords& pseudo,
                                           std::size_t num_nodes, const SplineKernelShape& shape) {
  validate(shape);
  if (pseudo.u.size() != edges.size()) {
    fail(ErrorKind::shape, "spline aggregation: " + std::to_string(pseudo.u.size()) + " pseudo coordinates for " +
                               std::to_string(edges.size()) + " edges");
  }
  std::vector<double> in_degree(num_nodes, 0.0);
  for (const auto& e : edges) {
    if (e.dst >= num_nodes || e.src >= num_nodes) fail(ErrorKind::index, "spline aggregation: edge outside node range");
    in_degree[e.dst] += 1.0;
  }

  SplineAggregation agg;
  agg.num_nodes = num_nodes;
  agg.num_elements = shape.num_elements();
  agg.op.rows = num_nodes * agg.num_elements;
  agg.op.cols = num_nodes;
  agg.op.entries.reserve(edges.size() * static_cast<std::size_t>((shape.degree + 1) * (shape.degree + 1)));

  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    const BasisValues bx = bspline_basis(pseudo.u[k][0], shape.degree, shape.size_x);
    const BasisValues by = bspline_basis(pseudo.u[k][1], shape.degree, shape.size_y);
    const double inv = 1.0 / in_degree[e.dst];
    for (std::size_t a = 0; a < by.index.size(); ++a) {
      for (std::size_t b = 0; b < bx.index.size(); ++b) {
        const std::size_t p = by.index[a] * shape.size_x + bx.index[b];
        agg.op.entries.push_back({e.dst * agg.num_elements + p, e.src, inv * by.weight[a] * bx.weight[b]});
      }
    }
  }
  return agg;
}

ag::Var spline_conv_forward(const SplineAggregation& aggregation, ag::Var features, const SplineConvParams& params) {
  const std::size_t n = aggregation.num_nodes;
  if (features.rows() != n) {
    fail(ErrorKind::shape, "spline_conv: features " + ag::shape_string(features.shape()) + " for " +
                               std::to_string(n) + " nodes");
  }
  const std::size_t d_in = features.cols();
  if (params.weight.rows() != aggregation.num_elements * d_in) {
    fail(ErrorKind::shape, "spline_conv: kernel " + ag::shape_string(params.weight.shape()) + " does not match " +
                               std::to_string(aggregation.num_elements) + " elements x " + std::to_string(d_in) +
                               " input channels");
  }
  ag::Var blocks = ag::spmm(aggregation.op, features);  // (N * P) x d_in
  ag::Var z = ag::reshape(blocks, n, aggregation.num_elements * d_in);
  ag::Var out = ag::matmul(z, params.weight);
  if (params.root) out = ag::add(out, ag::matmul(features, *params.root));
  return ag::add_row(out, params.bias);
}

}  // namespace pathgraph::layers
