#include "pathgraph/metrics/kappa.hpp"

#include <numeric>

#include "pathgraph/error.hpp"

namespace pathgraph::metrics {

ConfusionMatrix::ConfusionMatrix(std::size_t num_classes)
    : classes_(num_classes), counts_(num_classes * num_classes, 0) {
  if (num_classes == 0) fail(ErrorKind::invalid_argument, "confusion matrix needs at least one class");
}

ConfusionMatrix ConfusionMatrix::from_rows(const std::vector<std::vector<std::uint64_t>>& rows) {
  ConfusionMatrix cm(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) fail(ErrorKind::invalid_argument, "confusion matrix must be square");
    for (std::size_t j = 0; j < rows.size(); ++j) cm.counts_[i * rows.size() + j] = rows[i][j];
  }
  return cm;
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted, std::uint64_t count) {
  if (truth >= classes_ || predicted >= classes_) {
    fail(ErrorKind::invalid_argument, "confusion entry (" + std::to_string(truth) + ", " + std::to_string(predicted) +
                                          ") outside " + std::to_string(classes_) + " classes");
  }
  counts_[truth * classes_ + predicted] += count;
}

std::uint64_t ConfusionMatrix::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::vector<std::vector<std::uint64_t>> ConfusionMatrix::rows() const {
  std::vector<std::vector<std::uint64_t>> out(classes_, std::vector<std::uint64_t>(classes_));
  for (std::size_t i = 0; i < classes_; ++i)
    for (std::size_t j = 0; j < classes_; ++j) out[i][j] = at(i, j);
  return out;
}

std::string to_string(KappaWeighting weighting) {
  return weighting == KappaWeighting::quadratic ? "quadratic" : "none";
}

double kappa(const ConfusionMatrix& cm, KappaWeighting weighting) {
  const std::size_t c = cm.num_classes();
  const double n = static_cast<double>(cm.total());
  if (n == 0.0) fail(ErrorKind::invalid_argument, "kappa of an empty confusion matrix");

  std::vector<double> row(c, 0.0), col(c, 0.0);
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      row[i] += double(cm.at(i, j)) / n;
      col[j] += double(cm.at(i, j)) / n;
    }
  }

  auto weight = [&](std::size_t i, std::size_t j) {
    if (i == j) return 0.0;
    if (weighting == KappaWeighting::none) return 1.0;
    const double d = double(i) - double(j);
    return d * d / (double(c - 1) * double(c - 1));
  };

  double observed = 0.0, expected = 0.0;
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double w = weight(i, j);
      observed += w * double(cm.at(i, j)) / n;
      expected += w * row[i] * col[j];
    }
  }
  if (expected == 0.0) {
    if (observed == 0.0) return 1.0;
    fail(ErrorKind::undefined_kappa, "kappa undefined: zero expected disagreement with nonzero observed disagreement");
  }
  return 1.0 - observed / expected;
}

double accuracy(const ConfusionMatrix& cm) {
  const std::uint64_t n = cm.total();
  if (n == 0) fail(ErrorKind::invalid_argument, "accuracy of an empty confusion matrix");
  std::uint64_t hits = 0;
  for (std::size_t i = 0; i < cm.num_classes(); ++i) hits += cm.at(i, i);
  return double(hits) / double(n);
}

}  // namespace pathgraph::metrics
