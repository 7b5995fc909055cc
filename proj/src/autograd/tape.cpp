#include "pathgraph/autograd/tape.hpp"

#include <string>

#include "pathgraph/error.hpp"

namespace pathgraph::ag {

const Tensor& Var::value() const { return tape->value(*this); }
const Tensor& Var::grad() const { return tape->grad(*this); }

bool GradSink::wants(Var v) const { return tape_.requires_grad(v); }

Tensor& GradSink::adjoint(Var v) {
  Tensor& adj = adjoints_[v.id];
  if (adj.empty()) adj = Tensor(tape_.value(v).shape());
  return adj;
}

const Tensor& GradSink::value(Var v) const { return tape_.value(v); }

Tape::Tape() {
#ifdef NDEBUG
  check_finite_ = false;
#else
  check_finite_ = true;
#endif
}

Var Tape::leaf(Tensor value, bool requires_grad) {
  Node n;
  n.op = "leaf";
  if (check_finite_ && !value.all_finite()) fail(ErrorKind::numeric, "non-finite value in leaf tensor");
  n.requires_grad = requires_grad;
  n.persistent = requires_grad;
  if (requires_grad) n.grad = Tensor(value.shape());
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{this, nodes_.size() - 1};
}

Var Tape::record(std::string_view op, Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  return record(op, std::move(value), std::vector<Var>(inputs), std::move(backward));
}

Var Tape::record(std::string_view op, Tensor value, const std::vector<Var>& inputs, BackwardFn backward) {
  bool needs = false;
  for (Var in : inputs) {
    if (in.tape != this) fail(ErrorKind::invalid_argument, std::string(op) + ": input recorded on another tape");
    needs = needs || nodes_[in.id].requires_grad;
  }
  if (check_finite_ && !value.all_finite()) {
    fail(ErrorKind::numeric, std::string(op) + ": non-finite output");
  }
  Node n;
  n.op = op;
  n.value = std::move(value);
  n.requires_grad = needs;
  if (needs) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{this, nodes_.size() - 1};
}

const Tape::Node& Tape::node(Var v) const {
  if (v.tape != this || v.id >= nodes_.size()) fail(ErrorKind::index, "variable does not belong to this tape");
  return nodes_[v.id];
}

Tape::Node& Tape::node(Var v) {
  if (v.tape != this || v.id >= nodes_.size()) fail(ErrorKind::index, "variable does not belong to this tape");
  return nodes_[v.id];
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

const Tensor& Tape::grad(Var v) const {
  const Node& n = node(v);
  if (!n.persistent) {
    fail(ErrorKind::invalid_argument,
         "gradient of node " + std::to_string(v.id) + " (" + std::string(n.op) + ") is not retained");
  }
  return n.grad;
}

void Tape::retain_grad(Var v) {
  Node& n = node(v);
  if (n.persistent) return;
  n.persistent = true;
  n.grad = Tensor(n.value.shape());
}

bool Tape::retains_grad(Var v) const { return node(v).persistent; }

void Tape::backward(Var loss) {
  const Node& root = node(loss);
  if (root.value.size() != 1) {
    fail(ErrorKind::invalid_argument, "backward needs a scalar loss, got shape " + shape_string(root.value.shape()));
  }
  if (!root.requires_grad) return;

  std::vector<Tensor> adjoints(loss.id + 1);
  adjoints[loss.id] = Tensor(root.value.shape(), 1.0);
  GradSink sink(*this, adjoints);

  for (std::size_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (adjoints[id].empty() || !n.requires_grad) continue;
    if (n.backward) n.backward(adjoints[id], n.value, sink);
    if (n.persistent) n.grad.accumulate(adjoints[id]);
    adjoints[id] = Tensor();
  }
}

void Tape::zero_grad() {
  for (Node& n : nodes_) {
    if (n.persistent) n.grad.fill(0.0);
  }
}

}  // namespace pathgraph::ag
