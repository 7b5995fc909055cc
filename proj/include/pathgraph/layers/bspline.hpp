#pragma once

#include <cstddef>
#include <vector>

namespace pathgraph::layers {

/// Nonzero B-spline basis values at one parameter value.
struct BasisValues {
  std::vector<std::size_t> index;
  std::vector<double> weight;
};

/// Evaluates the `size` degree-`degree` B-spline bases of the open uniform
/// knot vector on [0, 1] at `u` (clamped to [0, 1]). At most degree + 1
/// bases are nonzero; exact zeros are omitted. Weights are nonnegative and
/// sum to one.
BasisValues bspline_basis(double u, int degree, std::size_t size);

/// The open uniform knot vector: degree + 1 repeated end knots and
/// size - degree - 1 equally spaced interior knots.
std::vector<double> open_uniform_knots(int degree, std::size_t size);

}  // namespace pathgraph::layers
