#include <cmath>

#include "ops_common.hpp"
#include "psmnet/ops.hpp"

namespace psmnet {

using detail::Node;

Tensor batch_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                  BatchNormStats* running, Mode mode, Scalar momentum,
                  Scalar epsilon) {
  if (input.rank() < 2) {
    throw ShapeError("batch_norm: expected rank >= 2, got " +
                     shape_str(input.shape()));
  }
  if (epsilon <= 0) throw ShapeError("batch_norm: epsilon must be positive");
  const int64_t C = input.dim(1);
  if (gamma.rank() != 1 || gamma.dim(0) != C || beta.rank() != 1 || beta.dim(0) != C) {
    throw ShapeError("batch_norm: gamma/beta must have length " + std::to_string(C));
  }
  if (running && (static_cast<int64_t>(running->mean.size()) != C ||
                  static_cast<int64_t>(running->var.size()) != C)) {
    throw ShapeError("batch_norm: running stats length mismatch");
  }
  if (mode == Mode::kEval && !running) {
    throw ShapeError("batch_norm: eval mode requires running statistics");
  }

  const Shape& s = input.shape();
  const int64_t B = s[0];
  int64_t spatial = 1;
  for (size_t i = 2; i < s.size(); ++i) spatial *= s[i];
  const int64_t n_per_channel = B * spatial;

  auto out = detail::op_node(s, {input.node_ptr(), gamma.node_ptr(), beta.node_ptr()});
  const Scalar* x = input.values().data();
  const Scalar* g = gamma.values().data();
  const Scalar* bt = beta.values().data();
  Scalar* y = out->value.data();

  std::vector<Scalar> mean(static_cast<size_t>(C)), invstd(static_cast<size_t>(C));
  if (mode == Mode::kTrain) {
    for (int64_t c = 0; c < C; ++c) {
      Scalar m = 0;
      for (int64_t b = 0; b < B; ++b) {
        const Scalar* p = x + (b * C + c) * spatial;
        for (int64_t i = 0; i < spatial; ++i) m += p[i];
      }
      m /= Scalar(n_per_channel);
      Scalar v = 0;
      for (int64_t b = 0; b < B; ++b) {
        const Scalar* p = x + (b * C + c) * spatial;
        for (int64_t i = 0; i < spatial; ++i) {
          const Scalar d = p[i] - m;
          v += d * d;
        }
      }
      v /= Scalar(n_per_channel);  // biased, matches normalization below
      mean[static_cast<size_t>(c)] = m;
      invstd[static_cast<size_t>(c)] = Scalar(1) / std::sqrt(v + epsilon);
      if (running) {
        running->mean[static_cast<size_t>(c)] =
            (Scalar(1) - momentum) * running->mean[static_cast<size_t>(c)] + momentum * m;
        running->var[static_cast<size_t>(c)] =
            (Scalar(1) - momentum) * running->var[static_cast<size_t>(c)] + momentum * v;
      }
    }
  } else {
    for (int64_t c = 0; c < C; ++c) {
      mean[static_cast<size_t>(c)] = running->mean[static_cast<size_t>(c)];
      invstd[static_cast<size_t>(c)] =
          Scalar(1) / std::sqrt(running->var[static_cast<size_t>(c)] + epsilon);
    }
  }

  for (int64_t b = 0; b < B; ++b) {
    for (int64_t c = 0; c < C; ++c) {
      const Scalar m = mean[static_cast<size_t>(c)];
      const Scalar is = invstd[static_cast<size_t>(c)];
      const Scalar gc = g[c], bc = bt[c];
      const Scalar* p = x + (b * C + c) * spatial;
      Scalar* q = y + (b * C + c) * spatial;
      for (int64_t i = 0; i < spatial; ++i) q[i] = (p[i] - m) * is * gc + bc;
    }
  }

  if (out->requires_grad) {
    const bool train = mode == Mode::kTrain;
    out->backprop = [mean = std::move(mean), invstd = std::move(invstd), train,
                     spatial, n_per_channel](Node& self) {
      Node& in_n = *self.parents[0];
      Node& g_n = *self.parents[1];
      Node& b_n = *self.parents[2];
      const int64_t B = in_n.shape[0], C = in_n.shape[1];
      const Scalar* x = in_n.value.data();
      const Scalar* dy = self.grad.data();

      for (int64_t c = 0; c < C; ++c) {
        const Scalar m = mean[static_cast<size_t>(c)];
        const Scalar is = invstd[static_cast<size_t>(c)];
        Scalar sum_dy = 0, sum_dy_xhat = 0;
        for (int64_t b = 0; b < B; ++b) {
          const Scalar* px = x + (b * C + c) * spatial;
          const Scalar* pg = dy + (b * C + c) * spatial;
          for (int64_t i = 0; i < spatial; ++i) {
            sum_dy += pg[i];
            sum_dy_xhat += pg[i] * (px[i] - m) * is;
          }
        }
        if (b_n.requires_grad) {
          b_n.ensure_grad();
          b_n.grad[static_cast<size_t>(c)] += sum_dy;
        }
        if (g_n.requires_grad) {
          g_n.ensure_grad();
          g_n.grad[static_cast<size_t>(c)] += sum_dy_xhat;
        }
        if (in_n.requires_grad) {
          in_n.ensure_grad();
          const Scalar gc = g_n.value[static_cast<size_t>(c)];
          const Scalar inv_n = Scalar(1) / Scalar(n_per_channel);
          for (int64_t b = 0; b < B; ++b) {
            const Scalar* px = x + (b * C + c) * spatial;
            const Scalar* pg = dy + (b * C + c) * spatial;
            Scalar* pd = in_n.grad.data() + (b * C + c) * spatial;
            for (int64_t i = 0; i < spatial; ++i) {
              if (train) {
                const Scalar xhat = (px[i] - m) * is;
                pd[i] += gc * is * (pg[i] - inv_n * sum_dy - xhat * inv_n * sum_dy_xhat);
              } else {
                pd[i] += gc * is * pg[i];
              }
            }
          }
        }
      }
    };
  }
  return Tensor(out);
}

}  // namespace psmnet
