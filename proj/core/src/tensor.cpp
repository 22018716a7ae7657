#include "psmnet/tensor.hpp"

#include <sstream>
#include <unordered_set>

#include "psmnet/errors.hpp"

namespace psmnet {

int64_t shape_numel(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

namespace detail {

void Node::ensure_grad() {
  if (grad.empty()) grad.assign(value.size(), Scalar(0));
}

std::shared_ptr<Node> make_node(Shape shape, bool requires_grad) {
  auto node = std::make_shared<Node>();
  node->value.assign(static_cast<size_t>(shape_numel(shape)), Scalar(0));
  node->shape = std::move(shape);
  node->requires_grad = requires_grad;
  return node;
}

}  // namespace detail

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return Tensor(detail::make_node(std::move(shape), requires_grad));
}

Tensor Tensor::full(Shape shape, Scalar fill, bool requires_grad) {
  Tensor t = zeros(std::move(shape), requires_grad);
  for (Scalar& v : t.values()) v = fill;
  return t;
}

Tensor Tensor::from(Shape shape, std::vector<Scalar> values, bool requires_grad) {
  if (shape_numel(shape) != static_cast<int64_t>(values.size())) {
    throw ShapeError("tensor data length " + std::to_string(values.size()) +
                     " does not match shape " + shape_str(shape));
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::vector(std::initializer_list<Scalar> values, bool requires_grad) {
  return from({static_cast<int64_t>(values.size())},
              std::vector<Scalar>(values), requires_grad);
}

const Shape& Tensor::shape() const {
  if (!node_) throw ShapeError("use of undefined tensor");
  return node_->shape;
}

int64_t Tensor::dim(int axis) const {
  const Shape& s = shape();
  if (axis < 0 || axis >= static_cast<int>(s.size())) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " +
                     shape_str(s));
  }
  return s[static_cast<size_t>(axis)];
}

int64_t Tensor::numel() const {
  if (!node_) return 0;
  return node_->numel();
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

void Tensor::set_requires_grad(bool flag) {
  if (!node_) throw ShapeError("use of undefined tensor");
  if (node_->backprop) {
    throw ConfigError("requires_grad can only be toggled on leaf tensors");
  }
  node_->requires_grad = flag;
}

const std::vector<Scalar>& Tensor::values() const {
  if (!node_) throw ShapeError("use of undefined tensor");
  return node_->value;
}

std::vector<Scalar>& Tensor::values() {
  if (!node_) throw ShapeError("use of undefined tensor");
  return node_->value;
}

bool Tensor::has_grad() const { return node_ && !node_->grad.empty(); }

const std::vector<Scalar>& Tensor::grad() const {
  if (!has_grad()) {
    throw NumericError("gradient requested but backward never populated it");
  }
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_) node_->grad.clear();
}

Scalar Tensor::at(std::initializer_list<int64_t> indices) const {
  const Shape& s = shape();
  if (indices.size() != s.size()) {
    throw ShapeError("index rank " + std::to_string(indices.size()) +
                     " vs tensor rank " + std::to_string(s.size()));
  }
  int64_t flat = 0;
  size_t axis = 0;
  for (int64_t idx : indices) {
    if (idx < 0 || idx >= s[axis]) {
      throw ShapeError("index out of range on axis " + std::to_string(axis));
    }
    flat = flat * s[axis] + idx;
    ++axis;
  }
  return node_->value[static_cast<size_t>(flat)];
}

Graph Graph::trace(const Tensor& root) {
  Graph graph;
  if (!root.defined() || !root.requires_grad()) return graph;

  // Iterative post-order DFS over requires_grad parents: parents are emitted
  // before their consumers, each node exactly once.
  std::unordered_set<detail::Node*> visited;
  struct Frame {
    detail::Node* node;
    size_t next_parent;
  };
  std::vector<Frame> stack;
  stack.push_back({root.node(), 0});
  visited.insert(root.node());
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next_parent < top.node->parents.size()) {
      detail::Node* parent = top.node->parents[top.next_parent++].get();
      if (parent->requires_grad && !visited.count(parent)) {
        visited.insert(parent);
        stack.push_back({parent, 0});
      }
    } else {
      graph.order.push_back(top.node);
      stack.pop_back();
    }
  }
  return graph;
}

void backward(const Tensor& loss) {
  if (!loss.defined()) throw ShapeError("backward on undefined tensor");
  if (loss.numel() != 1) {
    throw ShapeError("backward expects a scalar loss, got shape " +
                     shape_str(loss.shape()));
  }
  if (!loss.requires_grad()) return;

  Graph graph = Graph::trace(loss);
  for (detail::Node* node : graph.order) node->ensure_grad();
  loss.node()->grad[0] += Scalar(1);
  for (auto it = graph.order.rbegin(); it != graph.order.rend(); ++it) {
    detail::Node* node = *it;
    if (node->backprop) node->backprop(*node);
  }
}

}  // namespace psmnet
