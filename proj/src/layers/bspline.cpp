#include "pathgraph/layers/bspline.hpp"

#include <algorithm>
#include <cassert>
#include <string>

#include "pathgraph/error.hpp"

namespace pathgraph::layers {

std::vector<double> open_uniform_knots(int degree, std::size_t size) {
  if (degree < 0) fail(ErrorKind::invalid_argument, "B-spline degree must be >= 0");
  const auto m = static_cast<std::size_t>(degree);
  if (size < m + 1) {
    fail(ErrorKind::invalid_argument, "B-spline kernel size " + std::to_string(size) + " is below degree + 1 = " +
                                          std::to_string(m + 1));
  }
  const std::size_t spans = size - m;
  std::vector<double> knots(size + m + 1);
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (i <= m) {
      knots[i] = 0.0;
    } else if (i >= size) {
      knots[i] = 1.0;
    } else {
      knots[i] = double(i - m) / double(spans);
    }
  }
  return knots;
}

// Span search plus the triangular basis recurrence (Piegl & Tiller, The
// NURBS Book, A2.1/A2.2).
BasisValues bspline_basis(double u, int degree, std::size_t size) {
  assert(u >= -1e-9 && u <= 1.0 + 1e-9);
  u = std::clamp(u, 0.0, 1.0);
  const std::vector<double> knots = open_uniform_knots(degree, size);
  const auto m = static_cast<std::size_t>(degree);

  // Largest span with knots[span] <= u < knots[span + 1]; u == 1 uses the last.
  std::size_t span = size - 1;
  if (u < 1.0) {
    span = static_cast<std::size_t>(std::upper_bound(knots.begin() + m, knots.begin() + size + 1, u) -
                                    knots.begin()) - 1;
  }

  std::vector<double> values(m + 1, 0.0);
  std::vector<double> left(m + 1, 0.0);
  std::vector<double> right(m + 1, 0.0);
  values[0] = 1.0;
  for (std::size_t j = 1; j <= m; ++j) {
    left[j] = u - knots[span + 1 - j];
    right[j] = knots[span + j] - u;
    double saved = 0.0;
    for (std::size_t r = 0; r < j; ++r) {
      const double temp = values[r] / (right[r + 1] + left[j - r]);
      values[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    values[j] = saved;
  }

  BasisValues out;
  for (std::size_t r = 0; r <= m; ++r) {
    if (values[r] == 0.0) continue;
    out.index.push_back(span - m + r);
    out.weight.push_back(values[r]);
  }
  return out;
}

}  // namespace pathgraph::layers
