#include "pathgraph/autograd/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gemm.hpp"
#include "pathgraph/error.hpp"

namespace pathgraph::ag {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const RowMajor>;
using Map = Eigen::Map<RowMajor>;

MapC view(const Tensor& t) { return MapC(t.data().data(), t.rows(), t.cols()); }
Map view(Tensor& t) { return Map(t.data().data(), t.rows(), t.cols()); }

Tape& tape_of(Var a) {
  if (a.tape == nullptr) fail(ErrorKind::invalid_argument, "variable is not attached to a tape");
  return *a.tape;
}

void require_rank2(const char* op, Var v) {
  if (v.value().rank() != 2) {
    fail(ErrorKind::shape, std::string(op) + ": expected rank-2 input, got " + shape_string(v.shape()));
  }
}

void require_same_shape(const char* op, Var a, Var b) {
  if (a.shape() != b.shape()) {
    fail(ErrorKind::shape, std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                               shape_string(b.shape()));
  }
}

void check_index(const char* op, const Index& idx, std::size_t bound) {
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] >= bound) {
      fail(ErrorKind::index, std::string(op) + ": index " + std::to_string(idx[k]) + " at position " +
                                 std::to_string(k) + " out of range [0, " + std::to_string(bound) + ")");
    }
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  require_rank2("matmul", a);
  require_rank2("matmul", b);
  if (a.cols() != b.rows()) {
    fail(ErrorKind::shape, "matmul: shape mismatch " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  Tensor out = Tensor::matrix(a.rows(), b.cols());
  detail::gemm_rowstable(a.value().data().data(), b.value().data().data(), out.data().data(), a.rows(), a.cols(),
                         b.cols());
  return tape_of(a).record("matmul", std::move(out), {a, b}, [a, b](const Tensor& up, const Tensor&, GradSink& sink) {
    if (sink.wants(a)) view(sink.adjoint(a)).noalias() += view(up) * view(sink.value(b)).transpose();
    if (sink.wants(b)) view(sink.adjoint(b)).noalias() += view(sink.value(a)).transpose() * view(up);
  });
}

Var add(Var a, Var b) {
  require_same_shape("add", a, b);
  Tensor out = a.value();
  out.accumulate(b.value());
  return tape_of(a).record("add", std::move(out), {a, b}, [a, b](const Tensor& up, const Tensor&, GradSink& sink) {
    if (sink.wants(a)) sink.adjoint(a).accumulate(up);
    if (sink.wants(b)) sink.adjoint(b).accumulate(up);
  });
}

Var add_row(Var a, Var bias) {
  require_rank2("add_row", a);
  require_rank2("add_row", bias);
  if (bias.rows() != 1 || bias.cols() != a.cols()) {
    fail(ErrorKind::shape,
         "add_row: bias " + shape_string(bias.shape()) + " does not match rows of " + shape_string(a.shape()));
  }
  Tensor out = a.value();
  const Tensor& b = bias.value();
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += b(0, c);
  return tape_of(a).record("add_row", std::move(out), {a, bias}, [a, bias](const Tensor& up, const Tensor&, GradSink& sink) {
    if (sink.wants(a)) sink.adjoint(a).accumulate(up);
    if (sink.wants(bias)) {
      Tensor& g = sink.adjoint(bias);
      for (std::size_t r = 0; r < up.rows(); ++r)
        for (std::size_t c = 0; c < up.cols(); ++c) g(0, c) += up(r, c);
    }
  });
}

Var scale(Var a, double factor) {
  Tensor out = a.value();
  for (double& v : out.data()) v *= factor;
  return tape_of(a).record("scale", std::move(out), {a}, [a, factor](const Tensor& up, const Tensor&, GradSink& sink) {
    Tensor& g = sink.adjoint(a);
    for (std::size_t i = 0; i < up.size(); ++i) g[i] += factor * up[i];
  });
}

Var leaky_relu(Var a, double slope) {
  require_rank2("leaky_relu", a);
  Tensor out = a.value();
  for (double& v : out.data()) v = v > 0.0 ? v : slope * v;
  return tape_of(a).record("leaky_relu", std::move(out), {a}, [a, slope](const Tensor& up, const Tensor&, GradSink& sink) {
    const Tensor& x = sink.value(a);
    Tensor& g = sink.adjoint(a);
    for (std::size_t i = 0; i < up.size(); ++i) g[i] += (x[i] > 0.0 ? 1.0 : slope) * up[i];
  });
}

Var relu(Var a) {
  require_rank2("relu", a);
  Tensor out = a.value();
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return tape_of(a).record("relu", std::move(out), {a}, [a](const Tensor& up, const Tensor&, GradSink& sink) {
    const Tensor& x = sink.value(a);
    Tensor& g = sink.adjoint(a);
    for (std::size_t i = 0; i < up.size(); ++i)
      if (x[i] > 0.0) g[i] += up[i];
  });
}

Var exp(Var a) {
  require_rank2("exp", a);
  Tensor out = a.value();
  for (double& v : out.data()) v = std::exp(v);
  return tape_of(a).record("exp", std::move(out), {a}, [a](const Tensor& up, const Tensor& y, GradSink& sink) {
    Tensor& g = sink.adjoint(a);
    for (std::size_t i = 0; i < up.size(); ++i) g[i] += y[i] * up[i];
  });
}

Var segment_softmax(Var logits, const Index& segment_ids, std::size_t num_segments) {
  require_rank2("segment_softmax", logits);
  const Tensor& x = logits.value();
  if (segment_ids.size() != x.rows()) {
    fail(ErrorKind::shape, "segment_softmax: " + std::to_string(segment_ids.size()) + " segment ids for " +
                               std::to_string(x.rows()) + " rows");
  }
  check_index("segment_softmax", segment_ids, num_segments);
  const std::size_t cols = x.cols();

  Tensor seg_max = Tensor::matrix(num_segments, cols, -std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < cols; ++c) seg_max(segment_ids[r], c) = std::max(seg_max(segment_ids[r], c), x(r, c));

  Tensor out = Tensor::matrix(x.rows(), cols);
  Tensor seg_sum = Tensor::matrix(num_segments, cols);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      out(r, c) = std::exp(x(r, c) - seg_max(segment_ids[r], c));
      seg_sum(segment_ids[r], c) += out(r, c);
    }
  }
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < cols; ++c) out(r, c) /= seg_sum(segment_ids[r], c);

  return tape_of(logits).record(
      "segment_softmax", std::move(out), {logits},
      [logits, segment_ids, num_segments](const Tensor& up, const Tensor& y, GradSink& sink) {
        const std::size_t cols = y.cols();
        Tensor dot = Tensor::matrix(num_segments, cols);
        for (std::size_t r = 0; r < y.rows(); ++r)
          for (std::size_t c = 0; c < cols; ++c) dot(segment_ids[r], c) += y(r, c) * up(r, c);
        Tensor& g = sink.adjoint(logits);
        for (std::size_t r = 0; r < y.rows(); ++r)
          for (std::size_t c = 0; c < cols; ++c) g(r, c) += y(r, c) * (up(r, c) - dot(segment_ids[r], c));
      });
}

Var segment_mean(Var values, const Index& segment_ids, std::size_t num_segments) {
  require_rank2("segment_mean", values);
  const Tensor& x = values.value();
  if (segment_ids.size() != x.rows()) {
    fail(ErrorKind::shape, "segment_mean: " + std::to_string(segment_ids.size()) + " segment ids for " +
                               std::to_string(x.rows()) + " rows");
  }
  check_index("segment_mean", segment_ids, num_segments);
  std::vector<double> count(num_segments, 0.0);
  for (std::size_t s : segment_ids) count[s] += 1.0;

  Tensor out = Tensor::matrix(num_segments, x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) out(segment_ids[r], c) += x(r, c);
  for (std::size_t s = 0; s < num_segments; ++s)
    if (count[s] > 0.0)
      for (std::size_t c = 0; c < x.cols(); ++c) out(s, c) /= count[s];

  return tape_of(values).record("segment_mean", std::move(out), {values},
                                [values, segment_ids, count](const Tensor& up, const Tensor&, GradSink& sink) {
                                  Tensor& g = sink.adjoint(values);
                                  for (std::size_t r = 0; r < g.rows(); ++r) {
                                    const std::size_t s = segment_ids[r];
                                    for (std::size_t c = 0; c < g.cols(); ++c) g(r, c) += up(s, c) / count[s];
                                  }
                                });
}

Var gather_rows(Var x, const Index& rows) {
  require_rank2("gather_rows", x);
  const Tensor& src = x.value();
  check_index("gather_rows", rows, src.rows());
  const std::size_t cols = src.cols();
  Tensor out = Tensor::matrix(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r)
    std::copy_n(src.data().begin() + rows[r] * cols, cols, out.data().begin() + r * cols);
  return tape_of(x).record("gather_rows", std::move(out), {x}, [x, rows](const Tensor& up, const Tensor&, GradSink& sink) {
    Tensor& g = sink.adjoint(x);
    const std::size_t cols = up.cols();
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < cols; ++c) g(rows[r], c) += up(r, c);
  });
}

Var scatter_add_rows(Var x, const Index& target_rows, std::size_t num_rows) {
  require_rank2("scatter_add_rows", x);
  const Tensor& src = x.value();
  if (target_rows.size() != src.rows()) {
    fail(ErrorKind::shape, "scatter_add_rows: " + std::to_string(target_rows.size()) + " targets for " +
                               std::to_string(src.rows()) + " rows");
  }
  check_index("scatter_add_rows", target_rows, num_rows);
  const std::size_t cols = src.cols();
  Tensor out = Tensor::matrix(num_rows, cols);
  for (std::size_t r = 0; r < src.rows(); ++r)
    for (std::size_t c = 0; c < cols; ++c) out(target_rows[r], c) += src(r, c);
  return tape_of(x).record("scatter_add_rows", std::move(out), {x},
                           [x, target_rows](const Tensor& up, const Tensor&, GradSink& sink) {
                             Tensor& g = sink.adjoint(x);
                             const std::size_t cols = up.cols();
                             for (std::size_t r = 0; r < target_rows.size(); ++r)
                               for (std::size_t c = 0; c < cols; ++c) g(r, c) += up(target_rows[r], c);
                           });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) fail(ErrorKind::invalid_argument, "concat_cols: no inputs");
  const std::size_t rows = parts[0].rows();
  std::size_t total = 0;
  for (Var p : parts) {
    require_rank2("concat_cols", p);
    if (p.rows() != rows) {
      fail(ErrorKind::shape, "concat_cols: row mismatch " + shape_string(parts[0].shape()) + " vs " +
                                 shape_string(p.shape()));
    }
    total += p.cols();
  }
  Tensor out = Tensor::matrix(rows, total);
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (Var p : parts) {
    const Tensor& v = p.value();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(v.data().begin() + r * v.cols(), v.cols(), out.data().begin() + r * total + offset);
    offsets.push_back(offset);
    offset += v.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return tape_of(parts[0]).record("concat_cols", std::move(out), inputs,
                                  [inputs, offsets](const Tensor& up, const Tensor&, GradSink& sink) {
                                    const std::size_t total = up.cols();
                                    for (std::size_t k = 0; k < inputs.size(); ++k) {
                                      if (!sink.wants(inputs[k])) continue;
                                      Tensor& g = sink.adjoint(inputs[k]);
                                      for (std::size_t r = 0; r < g.rows(); ++r)
                                        for (std::size_t c = 0; c < g.cols(); ++c)
                                          g(r, c) += up.data()[r * total + offsets[k] + c];
                                    }
                                  });
}

Var row_scale(Var x, Var s) {
  require_rank2("row_scale", x);
  require_rank2("row_scale", s);
  if (s.cols() != 1 || s.rows() != x.rows()) {
    fail(ErrorKind::shape, "row_scale: scale " + shape_string(s.shape()) + " does not match " + shape_string(x.shape()));
  }
  Tensor out = x.value();
  const Tensor& sv = s.value();
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) *= sv(r, 0);
  return tape_of(x).record("row_scale", std::move(out), {x, s}, [x, s](const Tensor& up, const Tensor&, GradSink& sink) {
    const Tensor& xv = sink.value(x);
    const Tensor& sv = sink.value(s);
    if (sink.wants(x)) {
      Tensor& g = sink.adjoint(x);
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) g(r, c) += sv(r, 0) * up(r, c);
    }
    if (sink.wants(s)) {
      Tensor& g = sink.adjoint(s);
      for (std::size_t r = 0; r < xv.rows(); ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < xv.cols(); ++c) acc += xv(r, c) * up(r, c);
        g(r, 0) += acc;
      }
    }
  });
}

Var spmm(const SparseMatrix& s, Var x) {
  require_rank2("spmm", x);
  if (s.cols != x.rows()) {
    fail(ErrorKind::shape, "spmm: sparse (" + std::to_string(s.rows) + ", " + std::to_string(s.cols) + ") x " +
                               shape_string(x.shape()));
  }
  const Tensor& xv = x.value();
  const std::size_t cols = xv.cols();
  Tensor out = Tensor::matrix(s.rows, cols);
  for (const auto& e : s.entries) {
    if (e.row >= s.rows || e.col >= s.cols) fail(ErrorKind::index, "spmm: entry outside matrix bounds");
    const double* src = xv.data().data() + e.col * cols;
    double* dst = out.data().data() + e.row * cols;
    for (std::size_t c = 0; c < cols; ++c) dst[c] += e.value * src[c];
  }
  return tape_of(x).record("spmm", std::move(out), {x}, [s, x](const Tensor& up, const Tensor&, GradSink& sink) {
    Tensor& g = sink.adjoint(x);
    const std::size_t cols = up.cols();
    for (const auto& e : s.entries) {
      const double* src = up.data().data() + e.row * cols;
      double* dst = g.data().data() + e.col * cols;
      for (std::size_t c = 0; c < cols; ++c) dst[c] += e.value * src[c];
    }
  });
}

Var reshape(Var x, std::size_t rows, std::size_t cols) {
  Tensor out = x.value().reshaped({rows, cols});
  return tape_of(x).record("reshape", std::move(out), {x}, [x](const Tensor& up, const Tensor&, GradSink& sink) {
    Tensor& g = sink.adjoint(x);
    for (std::size_t i = 0; i < up.size(); ++i) g[i] += up[i];
  });
}

Var sum_all(Var x) {
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  return tape_of(x).record("sum_all", Tensor::scalar(total), {x}, [x](const Tensor& up, const Tensor&, GradSink& sink) {
    Tensor& g = sink.adjoint(x);
    const double u = up[0];
    for (double& v : g.data()) v += u;
  });
}

Var mean_all(Var x) {
  const std::size_t n = x.value().size();
  if (n == 0) fail(ErrorKind::invalid_argument, "mean_all of empty tensor");
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  return tape_of(x).record("mean_all", Tensor::scalar(total / static_cast<double>(n)), {x},
                           [x, n](const Tensor& up, const Tensor&, GradSink& sink) {
                             Tensor& g = sink.adjoint(x);
                             const double u = up[0] / static_cast<double>(n);
                             for (double& v : g.data()) v += u;
                           });
}

Var element(Var x, std::size_t row, std::size_t col) {
  require_rank2("element", x);
  if (row >= x.rows() || col >= x.cols()) {
    fail(ErrorKind::index, "element: (" + std::to_string(row) + ", " + std::to_string(col) + ") outside " +
                               shape_string(x.shape()));
  }
  return tape_of(x).record("element", Tensor::scalar(x.value()(row, col)), {x},
                           [x, row, col](const Tensor& up, const Tensor&, GradSink& sink) { sink.adjoint(x)(row, col) += up[0]; });
}

Var softmax_cross_entropy(Var logits, std::size_t label) {
  require_rank2("softmax_cross_entropy", logits);
  if (logits.rows() != 1) {
    fail(ErrorKind::shape, "softmax_cross_entropy: expected 1 x C logits, got " + shape_string(logits.shape()));
  }
  const Tensor& z = logits.value();
  const std::size_t classes = z.cols();
  if (label >= classes) {
    fail(ErrorKind::invalid_argument,
         "label " + std::to_string(label) + " out of range for " + std::to_string(classes) + " classes");
  }
  double zmax = z[0];
  for (std::size_t c = 1; c < classes; ++c) zmax = std::max(zmax, z[c]);
  std::vector<double> prob(classes);
  double total = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    prob[c] = std::exp(z[c] - zmax);
    total += prob[c];
  }
  for (double& p : prob) p /= total;
  const double loss = std::log(total) + zmax - z[label];
  return tape_of(logits).record("softmax_cross_entropy", Tensor::scalar(loss), {logits},
                                [logits, label, prob](const Tensor& up, const Tensor&, GradSink& sink) {
                                  Tensor& g = sink.adjoint(logits);
                                  for (std::size_t c = 0; c < prob.size(); ++c)
                                    g[c] += up[0] * (prob[c] - (c == label ? 1.0 : 0.0));
                                });
}

}  // namespace pathgraph::ag
