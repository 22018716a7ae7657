#pragma once

#include <memory>
#include <vector>

#include "psmnet/errors.hpp"
#include "psmnet/tensor.hpp"

namespace psmnet::detail {

inline std::shared_ptr<Node> op_node(Shape shape,
                                     std::vector<std::shared_ptr<Node>> parents) {
  bool requires_grad = false;
  for (const auto& p : parents) requires_grad = requires_grad || p->requires_grad;
  auto node = make_node(std::move(shape), requires_grad);
  node->parents = std::move(parents);
  return node;
}

// outer * n * inner decomposition for iteration along one axis.
struct AxisSplit {
  int64_t outer = 1;
  int64_t n = 1;
  int64_t inner = 1;
};

inline AxisSplit split_axis(const Shape& shape, int axis) {
  if (axis < 0 || axis >= static_cast<int>(shape.size())) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " +
                     shape_str(shape));
  }
  AxisSplit s;
  for (int i = 0; i < axis; ++i) s.outer *= shape[static_cast<size_t>(i)];
  s.n = shape[static_cast<size_t>(axis)];
  for (size_t i = static_cast<size_t>(axis) + 1; i < shape.size(); ++i) {
    s.inner *= shape[i];
  }
  return s;
}

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                     " vs " + shape_str(b.shape()));
  }
}

}  // namespace psmnet::detail
