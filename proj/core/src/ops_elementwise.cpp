#include <algorithm>
#include <cmath>

#include "ops_common.hpp"
#include "psmnet/ops.hpp"

namespace psmnet {

using detail::Node;

OpCounters& op_counters() {
  static OpCounters counters;
  return counters;
}

Tensor relu(const Tensor& input) {
  auto out = detail::op_node(input.shape(), {input.node_ptr()});
  const auto& x = input.values();
  for (size_t i = 0; i < x.size(); ++i) {
    out->value[i] = x[i] > Scalar(0) ? x[i] : Scalar(0);
  }
  if (out->requires_grad) {
    out->backprop = [](Node& self) {
      Node& in = *self.parents[0];
      if (!in.requires_grad) return;
      in.ensure_grad();
      for (size_t i = 0; i < self.grad.size(); ++i) {
        if (in.value[i] > Scalar(0)) in.grad[i] += self.grad[i];
      }
    };
  }
  return Tensor(out);
}

Tensor add(const Tensor& a, const Tensor& b) {
  detail::check_same_shape(a, b, "add");
  auto out = detail::op_node(a.shape(), {a.node_ptr(), b.node_ptr()});
  const auto& av = a.values();
  const auto& bv = b.values();
  for (size_t i = 0; i < av.size(); ++i) out->value[i] = av[i] + bv[i];
  if (out->requires_grad) {
    out->backprop = [](Node& self) {
      for (int p = 0; p < 2; ++p) {
        Node& in = *self.parents[static_cast<size_t>(p)];
        if (!in.requires_grad) continue;
        in.ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) in.grad[i] += self.grad[i];
      }
    };
  }
  return Tensor(out);
}

Tensor sub(const Tensor& a, const Tensor& b) {
  detail::check_same_shape(a, b, "sub");
  auto out = detail::op_node(a.shape(), {a.node_ptr(), b.node_ptr()});
  const auto& av = a.values();
  const auto& bv = b.values();
  for (size_t i = 0; i < av.size(); ++i) out->value[i] = av[i] - bv[i];
  if (out->requires_grad) {
    out->backprop = [](Node& self) {
      Node& a_in = *self.parents[0];
      Node& b_in = *self.parents[1];
      if (a_in.requires_grad) {
        a_in.ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) a_in.grad[i] += self.grad[i];
      }
      if (b_in.requires_grad) {
        b_in.ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) b_in.grad[i] -= self.grad[i];
      }
    };
  }
  return Tensor(out);
}

Tensor mul(const Tensor& a, const Tensor& b) {
  detail::check_same_shape(a, b, "mul");
  auto out = detail::op_node(a.shape(), {a.node_ptr(), b.node_ptr()});
  const auto& av = a.values();
  const auto& bv = b.values();
  for (size_t i = 0; i < av.size(); ++i) out->value[i] = av[i] * bv[i];
  if (out->requires_grad) {
    out->backprop = [](Node& self) {
      Node& a_in = *self.parents[0];
      Node& b_in = *self.parents[1];
      if (a_in.requires_grad) {
        a_in.ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) {
          a_in.grad[i] += self.grad[i] * b_in.value[i];
        }
      }
      if (b_in.requires_grad) {
        b_in.ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) {
          b_in.grad[i] += self.grad[i] * a_in.value[i];
        }
      }
    };
  }
  return Tensor(out);
}

Tensor negate(const Tensor& input) {
  auto out = detail::op_node(input.shape(), {input.node_ptr()});
  const auto& x = input.values();
  for (size_t i = 0; i < x.size(); ++i) out->value[i] = -x[i];
  if (out->requires_grad) {
    out->backprop = [](Node& self) {
      Node& in = *self.parents[0];
      if (!in.requires_grad) return;
      in.ensure_grad();
      for (size_t i = 0; i < self.grad.size(); ++i) in.grad[i] -= self.grad[i];
    };
  }
  return Tensor(out);
}

Tensor scale(const Tensor& input, Scalar factor) {
  auto out = detail::op_node(input.shape(), {input.node_ptr()});
  const auto& x = input.values();
  for (size_t i = 0; i < x.size(); ++i) out->value[i] = x[i] * factor;
  if (out->requires_grad) {
    out->backprop = [factor](Node& self) {
      Node& in = *self.parents[0];
      if (!in.requires_grad) return;
      in.ensure_grad();
      for (size_t i = 0; i < self.grad.size(); ++i) {
        in.grad[i] += self.grad[i] * factor;
      }
    };
  }
  return Tensor(out);
}

Tensor concat(const std::vector<Tensor>& tensors, int axis) {
  if (tensors.empty()) throw ShapeError("concat of zero tensors");
  const Shape& first = tensors[0].shape();
  Shape out_shape = first;
  int64_t total = 0;
  for (const Tensor& t : tensors) {
    const Shape& s = t.shape();
    if (s.size() != first.size()) {
      throw ShapeError("concat: rank mismatch " + shape_str(first) + " vs " +
                       shape_str(s));
    }
    for (size_t i = 0; i < s.size(); ++i) {
      if (static_cast<int>(i) != axis && s[i] != first[i]) {
        throw ShapeError("concat: non-concat axis " + std::to_string(i) +
                         " differs: " + shape_str(first) + " vs " + shape_str(s));
      }
    }
    total += t.dim(axis);
  }
  out_shape[static_cast<size_t>(axis)] = total;

  std::vector<std::shared_ptr<Node>> parents;
  parents.reserve(tensors.size());
  for (const Tensor& t : tensors) parents.push_back(t.node_ptr());
  auto out = detail::op_node(out_shape, std::move(parents));

  const auto out_split = detail::split_axis(out_shape, axis);
  int64_t offset = 0;
  for (const Tensor& t : tensors) {
    const auto split = detail::split_axis(t.shape(), axis);
    const auto& src = t.values();
    for (int64_t o = 0; o < split.outer; ++o) {
      const int64_t src_base = o * split.n * split.inner;
      const int64_t dst_base = (o * out_split.n + offset) * out_split.inner;
      std::copy(src.begin() + src_base,
                src.begin() + src_base + split.n * split.inner,
                out->value.begin() + dst_base);
    }
    offset += split.n;
  }

  if (out->requires_grad) {
    out->backprop = [axis](Node& self) {
      const auto out_split = detail::split_axis(self.shape, axis);
      int64_t offset = 0;
      for (auto& parent : self.parents) {
        Node& in = *parent;
        const auto split = detail::split_axis(in.shape, axis);
        if (in.requires_grad) {
          in.ensure_grad();
          for (int64_t o = 0; o < split.outer; ++o) {
            const int64_t dst_base = o * split.n * split.inner;
            const int64_t src_base = (o * out_split.n + offset) * out_split.inner;
            for (int64_t i = 0; i < split.n * split.inner; ++i) {
              in.grad[static_cast<size_t>(dst_base + i)] +=
                  self.grad[static_cast<size_t>(src_base + i)];
            }
          }
        }
        offset += split.n;
      }
    };
  }
  return Tensor(out);
}

Tensor reshape(const Tensor& input, Shape shape) {
  if (shape_numel(shape) != input.numel()) {
    throw ShapeError("reshape: " + shape_str(input.shape()) + " has " +
                     std::to_string(input.numel()) + " elements, target " +
                     shape_str(shape));
  }
  auto out = detail::op_node(std::move(shape), {input.node_ptr()});
  out->value = input.values();
  if (out->requires_grad) {
    out->backprop = [](Node& self) {
      Node& in = *self.parents[0];
      if (!in.requires_grad) return;
      in.ensure_grad();
      for (size_t i = 0; i < self.grad.size(); ++i) in.grad[i] += self.grad[i];
    };
  }
  return Tensor(out);
}

Tensor softmax(const Tensor& input, int axis) {
  const auto split = detail::split_axis(input.shape(), axis);
  auto out = detail::op_node(input.shape(), {input.node_ptr()});
  const auto& x = input.values();
  for (int64_t o = 0; o < split.outer; ++o) {
    for (int64_t i = 0; i < split.inner; ++i) {
      const int64_t base = o * split.n * split.inner + i;
      Scalar max_val = x[static_cast<size_t>(base)];
      for (int64_t k = 1; k < split.n; ++k) {
        max_val = std::max(max_val, x[static_cast<size_t>(base + k * split.inner)]);
      }
      Scalar denom = 0;
      for (int64_t k = 0; k < split.n; ++k) {
        const size_t idx = static_cast<size_t>(base + k * split.inner);
        out->value[idx] = std::exp(x[idx] - max_val);
        denom += out->value[idx];
      }
      for (int64_t k = 0; k < split.n; ++k) {
        out->value[static_cast<size_t>(base + k * split.inner)] /= denom;
      }
    }
  }
  if (out->requires_grad) {
    out->backprop = [axis](Node& self) {
      Node& in = *self.parents[0];
      if (!in.requires_grad) return;
      in.ensure_grad();
      const auto split = detail::split_axis(self.shape, axis);
      for (int64_t o = 0; o < split.outer; ++o) {
        for (int64_t i = 0; i < split.inner; ++i) {
          const int64_t base = o * split.n * split.inner + i;
          Scalar dot = 0;
          for (int64_t k = 0; k < split.n; ++k) {
            const size_t idx = static_cast<size_t>(base + k * split.inner);
            dot += self.grad[idx] * self.value[idx];
          }
          for (int64_t k = 0; k < split.n; ++k) {
            const size_t idx = static_cast<size_t>(base + k * split.inner);
            in.grad[idx] += self.value[idx] * (self.grad[idx] - dot);
          }
        }
      }
    };
  }
  return Tensor(out);
}

Tensor sum_all(const Tensor& input) {
  auto out = detail::op_node(Shape{1}, {input.node_ptr()});
  Scalar total = 0;
  for (Scalar v : input.values()) total += v;
  out->value[0] = total;
  if (out->requires_grad) {
    out->backprop = [](Node& self) {
      Node& in = *self.parents[0];
      if (!in.requires_grad) return;
      in.ensure_grad();
      const Scalar g = self.grad[0];
      for (size_t i = 0; i < in.grad.size(); ++i) in.grad[i] += g;
    };
  }
  return Tensor(out);
}

Tensor sum_axis(const Tensor& input, int axis) {
  const auto split = detail::split_axis(input.shape(), axis);
  Shape out_shape;
  for (size_t i = 0; i < input.shape().size(); ++i) {
    if (static_cast<int>(i) != axis) out_shape.push_back(input.shape()[i]);
  }
  if (out_shape.empty()) out_shape.push_back(1);
  auto out = detail::op_node(out_shape, {input.node_ptr()});
  const auto& x = input.values();
  for (int64_t o = 0; o < split.outer; ++o) {
    for (int64_t i = 0; i < split.inner; ++i) {
      Scalar total = 0;
      const int64_t base = o * split.n * split.inner + i;
      for (int64_t k = 0; k < split.n; ++k) {
        total += x[static_cast<size_t>(base + k * split.inner)];
      }
      out->value[static_cast<size_t>(o * split.inner + i)] = total;
    }
  }
  if (out->requires_grad) {
    out->backprop = [axis](Node& self) {
      Node& in = *self.parents[0];
      if (!in.requires_grad) return;
      in.ensure_grad();
      const auto split = detail::split_axis(in.shape, axis);
      for (int64_t o = 0; o < split.outer; ++o) {
        for (int64_t i = 0; i < split.inner; ++i) {
          const Scalar g = self.grad[static_cast<size_t>(o * split.inner + i)];
          const int64_t base = o * split.n * split.inner + i;
          for (int64_t k = 0; k < split.n; ++k) {
            in.grad[static_cast<size_t>(base + k * split.inner)] += g;
          }
        }
      }
    };
  }
  return Tensor(out);
}

Tensor scale_axis(const Tensor& input, int axis, std::vector<Scalar> coeff) {
  const auto split = detail::split_axis(input.shape(), axis);
  if (split.n != static_cast<int64_t>(coeff.size())) {
    throw ShapeError("scale_axis: axis length " + std::to_string(split.n) +
                     " vs " + std::to_string(coeff.size()) + " coefficients");
  }
  auto out = detail::op_node(input.shape(), {input.node_ptr()});
  const auto& x = input.values();
  for (int64_t o = 0; o < split.outer; ++o) {
    for (int64_t k = 0; k < split.n; ++k) {
      const int64_t base = (o * split.n + k) * split.inner;
      const Scalar c = coeff[static_cast<size_t>(k)];
      for (int64_t i = 0; i < split.inner; ++i) {
        out->value[static_cast<size_t>(base + i)] =
            x[static_cast<size_t>(base + i)] * c;
      }
    }
  }
  if (out->requires_grad) {
    out->backprop = [axis, coeff = std::move(coeff)](Node& self) {
      Node& in = *self.parents[0];
      if (!in.requires_grad) return;
      in.ensure_grad();
      const auto split = detail::split_axis(in.shape, axis);
      for (int64_t o = 0; o < split.outer; ++o) {
        for (int64_t k = 0; k < split.n; ++k) {
          const int64_t base = (o * split.n + k) * split.inner;
          const Scalar c = coeff[static_cast<size_t>(k)];
          for (int64_t i = 0; i < split.inner; ++i) {
            in.grad[static_cast<size_t>(base + i)] +=
                self.grad[static_cast<size_t>(base + i)] * c;
          }
        }
      }
    };
  }
  return Tensor(out);
}

}  // namespace psmnet
