#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace pathgraph::metrics {

/// C x C counts, rows = true class, columns = predicted class.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t num_classes);
  static ConfusionMatrix from_rows(const std::vector<std::vector<std::uint64_t>>& rows);

  void add(std::size_t truth, std::size_t predicted, std::uint64_t count = 1);

  std::size_t num_classes() const noexcept { return classes_; }
  std::uint64_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * classes_ + predicted]; }
  std::uint64_t total() const noexcept;
  std::vector<std::vector<std::uint64_t>> rows() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t classes_;
  std::vector<std::uint64_t> counts_;
};

enum class KappaWeighting { none, quadratic };

std::string to_string(KappaWeighting weighting);

/// Cohen's kappa 1 - sum(w O) / sum(w E) over observed proportions O and the
/// outer product E of the marginals; w is 0/1 disagreement or
/// (i - j)^2 / (C - 1)^2. When sum(w E) is zero the result is 1 if sum(w O)
/// is also zero, otherwise Error(undefined_kappa). Empty matrices throw
/// Error(invalid_argument).
double kappa(const ConfusionMatrix& cm, KappaWeighting weighting);

double accuracy(const ConfusionMatrix& cm);

}  // namespace pathgraph::metrics
