#pragma once

#include <functional>
#include <vector>

#include "pathgraph/autograd/tape.hpp"

namespace pathgraph::ag {

/// Builds a scalar on `tape` from the leaf `x`.
using ScalarFn = std::function<Var(Tape& tape, Var x)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  Tensor analytic;
  Tensor numeric;
};

/// Compares tape gradients of f at x against central differences:
/// max_i |g_i - (f(x+eps e_i) - f(x-eps e_i)) / 2eps| / max(1, |g_i|).
GradCheckReport finite_diff_check(const ScalarFn& f, const Tensor& x, double eps = 1e-5);

/// Multi-input variant: every tensor in `xs` becomes a leaf and is checked.
using MultiScalarFn = std::function<Var(Tape& tape, const std::vector<Var>& xs)>;
GradCheckReport finite_diff_check(const MultiScalarFn& f, const std::vector<Tensor>& xs, double eps = 1e-5);

}  // namespace pathgraph::ag
