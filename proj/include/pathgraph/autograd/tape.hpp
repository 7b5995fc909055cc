#pragma once

#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

#include "pathgraph/autograd/tensor.hpp"

namespace pathgraph::ag {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while
/// the owning tape is alive.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Tensor& grad() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

/// Adjoint buffers handed to a backward rule. `adjoint(v)` is lazily
/// zero-initialised; rules must only add into it.
class GradSink {
 public:
  bool wants(Var v) const;
  Tensor& adjoint(Var v);
  const Tensor& value(Var v) const;

 private:
  friend class Tape;
  GradSink(Tape& tape, std::vector<Tensor>& adjoints) : tape_(tape), adjoints_(adjoints) {}
  Tape& tape_;
  std::vector<Tensor>& adjoints_;
};

/// Receives the adjoint of the node's output and the output value itself.
using BackwardFn = std::function<void(const Tensor& upstream, const Tensor& output, GradSink& sink)>;

/// Forward recording of primitive applications with reverse-mode replay.
///
/// Nodes are appended in evaluation order, so the record is topologically
/// sorted by construction and backward() is a single reverse sweep that
/// visits each node at most once. Gradients accumulate: leaves created with
/// requires_grad and nodes passed to retain_grad() keep a persistent grad
/// that every backward() call adds into. Intermediate adjoints are scratch
/// and discarded after each sweep, so a second backward() without
/// zero_grad() exactly doubles every persistent grad.
class Tape {
 public:
  Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value, bool requires_grad = false);
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  /// Appends the result of a primitive. The backward rule is dropped when
  /// no input requires a gradient.
  Var record(std::string_view op, Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);
  Var record(std::string_view op, Tensor value, const std::vector<Var>& inputs, BackwardFn backward);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const;

  /// Persistent gradient of a leaf or retained node.
  const Tensor& grad(Var v) const;
  void retain_grad(Var v);
  bool retains_grad(Var v) const;

  void backward(Var loss);
  void zero_grad();

  std::size_t size() const noexcept { return nodes_.size(); }

  /// NaN/Inf in any primitive output raises a numeric error. On by default
  /// in debug builds.
  void set_check_finite(bool enabled) noexcept { check_finite_ = enabled; }
  bool check_finite() const noexcept { return check_finite_; }

 private:
  struct Node {
    std::string_view op;
    Tensor value;
    Tensor grad;  // persistent; empty unless leaf-with-grad or retained
    bool requires_grad = false;
    bool persistent = false;
    BackwardFn backward;
  };

  const Node& node(Var v) const;
  Node& node(Var v);

  std::vector<Node> nodes_;
  bool check_finite_;
};

}  // namespace pathgraph::ag
