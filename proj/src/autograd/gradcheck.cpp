#include "pathgraph/autograd/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace pathgraph::ag {

GradCheckReport finite_diff_check(const MultiScalarFn& f, const std::vector<Tensor>& xs, double eps) {
  std::size_t total = 0;
  for (const Tensor& x : xs) total += x.size();

  GradCheckReport report;
  report.analytic = Tensor({total});
  report.numeric = Tensor({total});

  {
    Tape tape;
    std::vector<Var> leaves;
    for (const Tensor& x : xs) leaves.push_back(tape.leaf(x, true));
    Var out = f(tape, leaves);
    tape.backward(out);
    std::size_t k = 0;
    for (Var leaf : leaves)
      for (double g : tape.grad(leaf).data()) report.analytic[k++] = g;
  }

  auto evaluate = [&](const std::vector<Tensor>& inputs) {
    Tape tape;
    std::vector<Var> leaves;
    for (const Tensor& x : inputs) leaves.push_back(tape.leaf(x, false));
    return f(tape, leaves).value().item();
  };

  std::vector<Tensor> probe = xs;
  std::size_t k = 0;
  for (std::size_t t = 0; t < probe.size(); ++t) {
    for (std::size_t i = 0; i < probe[t].size(); ++i, ++k) {
      const double saved = probe[t][i];
      probe[t][i] = saved + eps;
      const double plus = evaluate(probe);
      probe[t][i] = saved - eps;
      const double minus = evaluate(probe);
      probe[t][i] = saved;
      report.numeric[k] = (plus - minus) / (2.0 * eps);

      const double err =
          std::abs(report.analytic[k] - report.numeric[k]) / std::max(1.0, std::abs(report.analytic[k]));
      if (err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst_index = k;
      }
    }
  }
  return report;
}

GradCheckReport finite_diff_check(const ScalarFn& f, const Tensor& x, double eps) {
  return finite_diff_check([&f](Tape& tape, const std::vector<Var>& xs) { return f(tape, xs[0]); },
                           std::vector<Tensor>{x}, eps);
}

}  // namespace pathgraph::ag
