#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

#include "psmnet/scalar.hpp"

namespace psmnet {

using Shape = std::vector<int64_t>;

int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

// One value in the autodiff DAG. `backprop`, when set, pulls this node's
// gradient into the gradients of its parents.
struct Node {
  Shape shape;
  std::vector<Scalar> value;
  bool requires_grad = false;
  std::vector<Scalar> grad;  // empty until backward reaches the node
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backprop;

  int64_t numel() const { return static_cast<int64_t>(value.size()); }
  void ensure_grad();
};

std::shared_ptr<Node> make_node(Shape shape, bool requires_grad);

}  // namespace detail

// Dense N-dimensional tensor; a cheap handle onto a shared autodiff node.
// Tensors are immutable once produced by an op. Leaf tensors (parameters,
// inputs) expose mutable storage so the optimizer can update them in place
// between passes.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, Scalar fill, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<Scalar> values,
                     bool requires_grad = false);
  // Convenience for 1-D literals in tests.
  static Tensor vector(std::initializer_list<Scalar> values,
                       bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  int rank() const { return static_cast<int>(shape().size()); }
  int64_t dim(int axis) const;
  int64_t numel() const;
  bool requires_grad() const;
  void set_requires_grad(bool flag);  // leaves only

  const std::vector<Scalar>& values() const;
  std::vector<Scalar>& values();

  bool has_grad() const;
  const std::vector<Scalar>& grad() const;  // throws if backward never reached
  void zero_grad();

  // Row-major element access; indices.size() must equal rank().
  Scalar at(std::initializer_list<int64_t> indices) const;

  detail::Node* node() const { return node_.get(); }
  const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

// Topologically ordered trace of the ops feeding a root: every node's parents
// appear before the node itself, and each node appears exactly once.
struct Graph {
  std::vector<detail::Node*> order;
  static Graph trace(const Tensor& root);
};

// Reverse-mode sweep from a scalar loss. Each reachable requires_grad tensor
// ends up with a populated gradient (possibly zero). Gradients accumulate
// across repeated backward calls; zero them explicitly between steps.
void backward(const Tensor& loss);

}  // namespace psmnet
