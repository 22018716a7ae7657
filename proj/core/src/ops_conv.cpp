#include <algorithm>

#include "ops_common.hpp"
#include "parallel.hpp"
#include "psmnet/ops.hpp"

namespace psmnet {

using detail::Node;
using detail::parallel_for;

namespace {

// b > 0 in both helpers.
int64_t ceil_div(int64_t a, int64_t b) {
  return a >= 0 ? (a + b - 1) / b : -((-a) / b);
}
int64_t floor_div(int64_t a, int64_t b) {
  return a >= 0 ? a / b : -((-a + b - 1) / b);
}

int64_t conv_out_dim(int64_t in, int64_t k, int stride, int pad, int dil) {
  return (in + 2 * pad - dil * (k - 1) - 1) / stride + 1;
}

// Output range [lo, hi] such that o*stride - pad + tap*dil lands in [0, in).
struct TapRange {
  int64_t lo, hi;
};
TapRange tap_range(int64_t in, int64_t out, int stride, int pad, int dil,
                   int64_t tap) {
  const int64_t off = tap * dil - pad;
  TapRange r;
  r.lo = std::max<int64_t>(0, ceil_div(-off, stride));
  r.hi = std::min<int64_t>(out - 1, floor_div(in - 1 - off, stride));
  return r;
}

void check_bias(const Tensor& bias, int64_t out_channels, const char* op) {
  if (!bias.defined()) return;
  if (bias.rank() != 1 || bias.dim(0) != out_channels) {
    throw ShapeError(std::string(op) + ": bias shape " + shape_str(bias.shape()) +
                     " vs " + std::to_string(out_channels) + " output channels");
  }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              int stride, int padding, int dilation) {
  if (input.rank() != 4 || weight.rank() != 4) {
    throw ShapeError("conv2d: expected 4-D input/weight, got " +
                     shape_str(input.shape()) + " and " + shape_str(weight.shape()));
  }
  if (stride < 1 || padding < 0 || dilation < 1) {
    throw ShapeError("conv2d: invalid stride/padding/dilation");
  }
  if (input.dim(1) != weight.dim(1)) {
    throw ShapeError("conv2d: input channels " + shape_str(input.shape()) +
                     " do not match weight " + shape_str(weight.shape()));
  }
  check_bias(bias, weight.dim(0), "conv2d");

  const int64_t B = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  const int64_t K = weight.dim(0), KH = weight.dim(2), KW = weight.dim(3);
  const int64_t OH = conv_out_dim(H, KH, stride, padding, dilation);
  const int64_t OW = conv_out_dim(W, KW, stride, padding, dilation);
  if (OH < 1 || OW < 1) {
    throw ShapeError("conv2d: kernel does not fit input " + shape_str(input.shape()));
  }
  ++op_counters().conv2d;

  std::vector<std::shared_ptr<Node>> parents{input.node_ptr(), weight.node_ptr()};
  if (bias.defined()) parents.push_back(bias.node_ptr());
  auto out = detail::op_node({B, K, OH, OW}, std::move(parents));

  const Scalar* in = input.values().data();
  const Scalar* w = weight.values().data();
  const Scalar* bptr = bias.defined() ? bias.values().data() : nullptr;
  Scalar* o = out->value.data();

  parallel_for(B * K, [&](int64_t plane) {
    const int64_t b = plane / K, k = plane % K;
    Scalar* dst = o + plane * OH * OW;
    if (bptr) {
      std::fill(dst, dst + OH * OW, bptr[k]);
    }
    for (int64_t c = 0; c < C; ++c) {
      const Scalar* src = in + (b * C + c) * H * W;
      const Scalar* wk = w + (k * C + c) * KH * KW;
      for (int64_t i = 0; i < KH; ++i) {
        const TapRange ry = tap_range(H, OH, stride, padding, dilation, i);
        for (int64_t j = 0; j < KW; ++j) {
          const Scalar wv = wk[i * KW + j];
          const TapRange rx = tap_range(W, OW, stride, padding, dilation, j);
          for (int64_t oy = ry.lo; oy <= ry.hi; ++oy) {
            const int64_t iy = oy * stride - padding + i * dilation;
            const Scalar* srow = src + iy * W + rx.lo * stride - padding + j * dilation;
            Scalar* drow = dst + oy * OW + rx.lo;
            const int64_t n = rx.hi - rx.lo + 1;
            for (int64_t t = 0; t < n; ++t) drow[t] += wv * srow[t * stride];
          }
        }
      }
    }
  });

  if (out->requires_grad) {
    const bool has_bias = bias.defined();
    out->backprop = [stride, padding, dilation, has_bias](Node& self) {
      Node& in_n = *self.parents[0];
      Node& w_n = *self.parents[1];
      const int64_t B = in_n.shape[0], C = in_n.shape[1], H = in_n.shape[2],
                    W = in_n.shape[3];
      const int64_t K = w_n.shape[0], KH = w_n.shape[2], KW = w_n.shape[3];
      const int64_t OH = self.shape[2], OW = self.shape[3];
      const Scalar* g = self.grad.data();

      if (has_bias && self.parents[2]->requires_grad) {
        Node& b_n = *self.parents[2];
        b_n.ensure_grad();
        for (int64_t b = 0; b < B; ++b) {
          for (int64_t k = 0; k < K; ++k) {
            const Scalar* gp = g + (b * K + k) * OH * OW;
            Scalar total = 0;
            for (int64_t t = 0; t < OH * OW; ++t) total += gp[t];
            b_n.grad[static_cast<size_t>(k)] += total;
          }
        }
      }

      if (w_n.requires_grad) {
        w_n.ensure_grad();
        const Scalar* in = in_n.value.data();
        Scalar* gw = w_n.grad.data();
        parallel_for(K, [&](int64_t k) {
          for (int64_t c = 0; c < C; ++c) {
            Scalar* gwk = gw + (k * C + c) * KH * KW;
            for (int64_t i = 0; i < KH; ++i) {
              const TapRange ry = tap_range(H, OH, stride, padding, dilation, i);
              for (int64_t j = 0; j < KW; ++j) {
                const TapRange rx = tap_range(W, OW, stride, padding, dilation, j);
                Scalar acc = 0;
                for (int64_t b = 0; b < B; ++b) {
                  const Scalar* src = in + (b * C + c) * H * W;
                  const Scalar* gp = g + (b * K + k) * OH * OW;
                  for (int64_t oy = ry.lo; oy <= ry.hi; ++oy) {
                    const int64_t iy = oy * stride - padding + i * dilation;
                    const Scalar* srow =
                        src + iy * W + rx.lo * stride - padding + j * dilation;
                    const Scalar* grow = gp + oy * OW + rx.lo;
                    const int64_t n = rx.hi - rx.lo + 1;
                    for (int64_t t = 0; t < n; ++t) acc += grow[t] * srow[t * stride];
                  }
                }
                gwk[i * KW + j] += acc;
              }
            }
          }
        });
      }

      if (in_n.requires_grad) {
        in_n.ensure_grad();
        const Scalar* w = w_n.value.data();
        Scalar* gi = in_n.grad.data();
        parallel_for(B * C, [&](int64_t plane) {
          const int64_t b = plane / C, c = plane % C;
          Scalar* gdst = gi + plane * H * W;
          for (int64_t k = 0; k < K; ++k) {
            const Scalar* gp = g + (b * K + k) * OH * OW;
            const Scalar* wk = w + (k * C + c) * KH * KW;
            for (int64_t i = 0; i < KH; ++i) {
              const TapRange ry = tap_range(H, OH, stride, padding, dilation, i);
              for (int64_t j = 0; j < KW; ++j) {
                const Scalar wv = wk[i * KW + j];
                const TapRange rx = tap_range(W, OW, stride, padding, dilation, j);
                for (int64_t oy = ry.lo; oy <= ry.hi; ++oy) {
                  const int64_t iy = oy * stride - padding + i * dilation;
                  Scalar* grow =
                      gdst + iy * W + rx.lo * stride - padding + j * dilation;
                  const Scalar* gsrc = gp + oy * OW + rx.lo;
                  const int64_t n = rx.hi - rx.lo + 1;
                  for (int64_t t = 0; t < n; ++t) grow[t * stride] += wv * gsrc[t];
                }
              }
            }
          }
        });
      }
    };
  }
  return Tensor(out);
}

Tensor conv3d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              int stride, int padding) {
  if (input.rank() != 5 || weight.rank() != 5) {
    throw ShapeError("conv3d: expected 5-D input/weight, got " +
                     shape_str(input.shape()) + " and " + shape_str(weight.shape()));
  }
  if (stride < 1 || padding < 0) throw ShapeError("conv3d: invalid stride/padding");
  if (input.dim(1) != weight.dim(1)) {
    throw ShapeError("conv3d: input channels " + shape_str(input.shape()) +
                     " do not match weight " + shape_str(weight.shape()));
  }
  check_bias(bias, weight.dim(0), "conv3d");

  const int64_t B = input.dim(0), C = input.dim(1), D = input.dim(2),
                H = input.dim(3), W = input.dim(4);
  const int64_t K = weight.dim(0), KD = weight.dim(2), KH = weight.dim(3),
                KW = weight.dim(4);
  const int64_t OD = conv_out_dim(D, KD, stride, padding, 1);
  const int64_t OH = conv_out_dim(H, KH, stride, padding, 1);
  const int64_t OW = conv_out_dim(W, KW, stride, padding, 1);
  if (OD < 1 || OH < 1 || OW < 1) {
    throw ShapeError("conv3d: kernel does not fit input " + shape_str(input.shape()));
  }
  ++op_counters().conv3d;

  std::vector<std::shared_ptr<Node>> parents{input.node_ptr(), weight.node_ptr()};
  if (bias.defined()) parents.push_back(bias.node_ptr());
  auto out = detail::op_node({B, K, OD, OH, OW}, std::move(parents));

  const Scalar* in = input.values().data();
  const Scalar* w = weight.values().data();
  const Scalar* bptr = bias.defined() ? bias.values().data() : nullptr;
  Scalar* o = out->value.data();

  parallel_for(B * K, [&](int64_t plane) {
    const int64_t b = plane / K, k = plane % K;
    Scalar* dst = o + plane * OD * OH * OW;
    if (bptr) std::fill(dst, dst + OD * OH * OW, bptr[k]);
    for (int64_t c = 0; c < C; ++c) {
      const Scalar* src = in + (b * C + c) * D * H * W;
      const Scalar* wk = w + (k * C + c) * KD * KH * KW;
      for (int64_t iz = 0; iz < KD; ++iz) {
        const TapRange rz = tap_range(D, OD, stride, padding, 1, iz);
        for (int64_t i = 0; i < KH; ++i) {
          const TapRange ry = tap_range(H, OH, stride, padding, 1, i);
          for (int64_t j = 0; j < KW; ++j) {
            const Scalar wv = wk[(iz * KH + i) * KW + j];
            const TapRange rx = tap_range(W, OW, stride, padding, 1, j);
            const int64_t n = rx.hi - rx.lo + 1;
            for (int64_t oz = rz.lo; oz <= rz.hi; ++oz) {
              const int64_t dz = oz * stride - padding + iz;
              for (int64_t oy = ry.lo; oy <= ry.hi; ++oy) {
                const int64_t iy = oy * stride - padding + i;
                const Scalar* srow =
                    src + (dz * H + iy) * W + rx.lo * stride - padding + j;
                Scalar* drow = dst + (oz * OH + oy) * OW + rx.lo;
                for (int64_t t = 0; t < n; ++t) drow[t] += wv * srow[t * stride];
              }
            }
          }
        }
      }
    }
  });

  if (out->requires_grad) {
    const bool has_bias = bias.defined();
    out->backprop = [stride, padding, has_bias](Node& self) {
      Node& in_n = *self.parents[0];
      Node& w_n = *self.parents[1];
      const int64_t B = in_n.shape[0], C = in_n.shape[1], D = in_n.shape[2],
                    H = in_n.shape[3], W = in_n.shape[4];
      const int64_t K = w_n.shape[0], KD = w_n.shape[2], KH = w_n.shape[3],
                    KW = w_n.shape[4];
      const int64_t OD = self.shape[2], OH = self.shape[3], OW = self.shape[4];
      const Scalar* g = self.grad.data();

      if (has_bias && self.parents[2]->requires_grad) {
        Node& b_n = *self.parents[2];
        b_n.ensure_grad();
        for (int64_t b = 0; b < B; ++b) {
          for (int64_t k = 0; k < K; ++k) {
            const Scalar* gp = g + (b * K + k) * OD * OH * OW;
            Scalar total = 0;
            for (int64_t t = 0; t < OD * OH * OW; ++t) total += gp[t];
            b_n.grad[static_cast<size_t>(k)] += total;
          }
        }
      }

      if (w_n.requires_grad) {
        w_n.ensure_grad();
        const Scalar* in = in_n.value.data();
        Scalar* gw = w_n.grad.data();
        parallel_for(K, [&](int64_t k) {
          for (int64_t c = 0; c < C; ++c) {
            Scalar* gwk = gw + (k * C + c) * KD * KH * KW;
            for (int64_t iz = 0; iz < KD; ++iz) {
              const TapRange rz = tap_range(D, OD, stride, padding, 1, iz);
              for (int64_t i = 0; i < KH; ++i) {
                const TapRange ry = tap_range(H, OH, stride, padding, 1, i);
                for (int64_t j = 0; j < KW; ++j) {
                  const TapRange rx = tap_range(W, OW, stride, padding, 1, j);
                  const int64_t n = rx.hi - rx.lo + 1;
                  Scalar acc = 0;
                  for (int64_t b = 0; b < B; ++b) {
                    const Scalar* src = in + (b * C + c) * D * H * W;
                    const Scalar* gp = g + (b * K + k) * OD * OH * OW;
                    for (int64_t oz = rz.lo; oz <= rz.hi; ++oz) {
                      const int64_t dz = oz * stride - padding + iz;
                      for (int64_t oy = ry.lo; oy <= ry.hi; ++oy) {
                        const int64_t iy = oy * stride - padding + i;
                        const Scalar* srow =
                            src + (dz * H + iy) * W + rx.lo * stride - padding + j;
                        const Scalar* grow = gp + (oz * OH + oy) * OW + rx.lo;
                        for (int64_t t = 0; t < n; ++t) {
                          acc += grow[t] * srow[t * stride];
                        }
                      }
                    }
                  }
                  gwk[(iz * KH + i) * KW + j] += acc;
                }
              }
            }
          }
        });
      }

      if (in_n.requires_grad) {
        in_n.ensure_grad();
        const Scalar* w = w_n.value.data();
        Scalar* gi = in_n.grad.data();
        parallel_for(B * C, [&](int64_t plane) {
          const int64_t b = plane / C, c = plane % C;
          Scalar* gdst = gi + plane * D * H * W;
          for (int64_t k = 0; k < K; ++k) {
            const Scalar* gp = g + (b * K + k) * OD * OH * OW;
            const Scalar* wk = w + (k * C + c) * KD * KH * KW;
            for (int64_t iz = 0; iz < KD; ++iz) {
              const TapRange rz = tap_range(D, OD, stride, padding, 1, iz);
              for (int64_t i = 0; i < KH; ++i) {
                const TapRange ry = tap_range(H, OH, stride, padding, 1, i);
                for (int64_t j = 0; j < KW; ++j) {
                  const Scalar wv = wk[(iz * KH + i) * KW + j];
                  const TapRange rx = tap_range(W, OW, stride, padding, 1, j);
                  const int64_t n = rx.hi - rx.lo + 1;
                  for (int64_t oz = rz.lo; oz <= rz.hi; ++oz) {
                    const int64_t dz = oz * stride - padding + iz;
                    for (int64_t oy = ry.lo; oy <= ry.hi; ++oy) {
                      const int64_t iy = oy * stride - padding + i;
                      Scalar* grow =
                          gdst + (dz * H + iy) * W + rx.lo * stride - padding + j;
                      const Scalar* gsrc = gp + (oz * OH + oy) * OW + rx.lo;
                      for (int64_t t = 0; t < n; ++t) {
                        grow[t * stride] += wv * gsrc[t];
                      }
                    }
                  }
                }
              }
            }
          }
        });
      }
    };
  }
  return Tensor(out);
}

Tensor conv_transpose3d(const Tensor& input, const Tensor& weight,
                        const Tensor& bias, int stride, int padding,
                        int output_padding) {
  if (input.rank() != 5 || weight.rank() != 5) {
    throw ShapeError("conv_transpose3d: expected 5-D input/weight, got " +
                     shape_str(input.shape()) + " and " + shape_str(weight.shape()));
  }
  if (stride < 1 || padding < 0 || output_padding < 0 || output_padding >= stride) {
    throw ShapeError("conv_transpose3d: invalid stride/padding/output_padding");
  }
  if (input.dim(1) != weight.dim(0)) {
    throw ShapeError("conv_transpose3d: input channels " + shape_str(input.shape()) +
                     " do not match weight " + shape_str(weight.shape()));
  }
  const int64_t B = input.dim(0), C = input.dim(1), D = input.dim(2),
                H = input.dim(3), W = input.dim(4);
  const int64_t K = weight.dim(1), KD = weight.dim(2), KH = weight.dim(3),
                KW = weight.dim(4);
  check_bias(bias, K, "conv_transpose3d");
  const int64_t OD = (D - 1) * stride - 2 * padding + KD + output_padding;
  const int64_t OH = (H - 1) * stride - 2 * padding + KH + output_padding;
  const int64_t OW = (W - 1) * stride - 2 * padding + KW + output_padding;
  if (OD < 1 || OH < 1 || OW < 1) {
    throw ShapeError("conv_transpose3d: empty output for input " +
                     shape_str(input.shape()));
  }
  ++op_counters().conv_transpose3d;

  std::vector<std::shared_ptr<Node>> parents{input.node_ptr(), weight.node_ptr()};
  if (bias.defined()) parents.push_back(bias.node_ptr());
  auto out = detail::op_node({B, K, OD, OH, OW}, std::move(parents));

  const Scalar* in = input.values().data();
  const Scalar* w = weight.values().data();
  const Scalar* bptr = bias.defined() ? bias.values().data() : nullptr;
  Scalar* o = out->value.data();

  // Input index range [lo, hi] whose scatter target z*stride - pad + tap is a
  // valid output coordinate.
  auto src_range = [&](int64_t in_dim, int64_t out_dim, int64_t tap) {
    TapRange r;
    const int64_t off = tap - padding;
    r.lo = std::max<int64_t>(0, ceil_div(-off, stride));
    r.hi = std::min<int64_t>(in_dim - 1, floor_div(out_dim - 1 - off, stride));
    return r;
  };

  parallel_for(B * K, [&](int64_t plane) {
    const int64_t b = plane / K, k = plane % K;
    Scalar* dst = o + plane * OD * OH * OW;
    if (bptr) std::fill(dst, dst + OD * OH * OW, bptr[k]);
    for (int64_t c = 0; c < C; ++c) {
      const Scalar* src = in + (b * C + c) * D * H * W;
      const Scalar* wk = w + (c * K + k) * KD * KH * KW;
      for (int64_t iz = 0; iz < KD; ++iz) {
        const TapRange rz = src_range(D, OD, iz);
        for (int64_t i = 0; i < KH; ++i) {
          const TapRange ry = src_range(H, OH, i);
          for (int64_t j = 0; j < KW; ++j) {
            const Scalar wv = wk[(iz * KH + i) * KW + j];
            const TapRange rx = src_range(W, OW, j);
            const int64_t n = rx.hi - rx.lo + 1;
            for (int64_t z = rz.lo; z <= rz.hi; ++z) {
              const int64_t oz = z * stride - padding + iz;
              for (int64_t y = ry.lo; y <= ry.hi; ++y) {
                const int64_t oy = y * stride - padding + i;
                const Scalar* srow = src + (z * H + y) * W + rx.lo;
                Scalar* drow =
                    dst + (oz * OH + oy) * OW + rx.lo * stride - padding + j;
                for (int64_t t = 0; t < n; ++t) drow[t * stride] += wv * srow[t];
              }
            }
          }
        }
      }
    }
  });

  if (out->requires_grad) {
    const bool has_bias = bias.defined();
    out->backprop = [stride, padding, has_bias](Node& self) {
      Node& in_n = *self.parents[0];
      Node& w_n = *self.parents[1];
      const int64_t B = in_n.shape[0], C = in_n.shape[1], D = in_n.shape[2],
                    H = in_n.shape[3], W = in_n.shape[4];
      const int64_t K = w_n.shape[1], KD = w_n.shape[2], KH = w_n.shape[3],
                    KW = w_n.shape[4];
      const int64_t OD = self.shape[2], OH = self.shape[3], OW = self.shape[4];
      const Scalar* g = self.grad.data();

      auto src_range = [&](int64_t in_dim, int64_t out_dim, int64_t tap) {
        TapRange r;
        const int64_t off = tap - padding;
        r.lo = std::max<int64_t>(0, ceil_div(-off, stride));
        r.hi = std::min<int64_t>(in_dim - 1, floor_div(out_dim - 1 - off, stride));
        return r;
      };

      if (has_bias && self.parents[2]->requires_grad) {
        Node& b_n = *self.parents[2];
        b_n.ensure_grad();
        for (int64_t b = 0; b < B; ++b) {
          for (int64_t k = 0; k < K; ++k) {
            const Scalar* gp = g + (b * K + k) * OD * OH * OW;
            Scalar total = 0;
            for (int64_t t = 0; t < OD * OH * OW; ++t) total += gp[t];
            b_n.grad[static_cast<size_t>(k)] += total;
          }
        }
      }

      // grad input: gather from output grad, the adjoint of the scatter.
      if (in_n.requires_grad) {
        in_n.ensure_grad();
        const Scalar* w = w_n.value.data();
        Scalar* gi = in_n.grad.data();
        parallel_for(B * C, [&](int64_t plane) {
          const int64_t b = plane / C, c = plane % C;
          Scalar* gdst = gi + plane * D * H * W;
          for (int64_t k = 0; k < K; ++k) {
            const Scalar* gp = g + (b * K + k) * OD * OH * OW;
            const Scalar* wk = w + (c * K + k) * KD * KH * KW;
            for (int64_t iz = 0; iz < KD; ++iz) {
              const TapRange rz = src_range(D, OD, iz);
              for (int64_t i = 0; i < KH; ++i) {
                const TapRange ry = src_range(H, OH, i);
                for (int64_t j = 0; j < KW; ++j) {
                  const Scalar wv = wk[(iz * KH + i) * KW + j];
                  const TapRange rx = src_range(W, OW, j);
                  const int64_t n = rx.hi - rx.lo + 1;
                  for (int64_t z = rz.lo; z <= rz.hi; ++z) {
                    const int64_t oz = z * stride - padding + iz;
                    for (int64_t y = ry.lo; y <= ry.hi; ++y) {
                      const int64_t oy = y * stride - padding + i;
                      Scalar* grow = gdst + (z * H + y) * W + rx.lo;
                      const Scalar* gsrc =
                          gp + (oz * OH + oy) * OW + rx.lo * stride - padding + j;
                      for (int64_t t = 0; t < n; ++t) {
                        grow[t] += wv * gsrc[t * stride];
                      }
                    }
                  }
                }
              }
            }
          }
        });
      }

      if (w_n.requires_grad) {
        w_n.ensure_grad();
        const Scalar* in = in_n.value.data();
        Scalar* gw = w_n.grad.data();
        parallel_for(C, [&](int64_t c) {
          for (int64_t k = 0; k < K; ++k) {
            Scalar* gwk = gw + (c * K + k) * KD * KH * KW;
            for (int64_t iz = 0; iz < KD; ++iz) {
              const TapRange rz = src_range(D, OD, iz);
              for (int64_t i = 0; i < KH; ++i) {
                const TapRange ry = src_range(H, OH, i);
                for (int64_t j = 0; j < KW; ++j) {
                  const TapRange rx = src_range(W, OW, j);
                  const int64_t n = rx.hi - rx.lo + 1;
                  Scalar acc = 0;
                  for (int64_t b = 0; b < B; ++b) {
                    const Scalar* src = in + (b * C + c) * D * H * W;
                    const Scalar* gp = g + (b * K + k) * OD * OH * OW;
                    for (int64_t z = rz.lo; z <= rz.hi; ++z) {
                      const int64_t oz = z * stride - padding + iz;
                      for (int64_t y = ry.lo; y <= ry.hi; ++y) {
                        const int64_t oy = y * stride - padding + i;
                        const Scalar* srow = src + (z * H + y) * W + rx.lo;
                        const Scalar* grow =
                            gp + (oz * OH + oy) * OW + rx.lo * stride - padding + j;
                        for (int64_t t = 0; t < n; ++t) {
                          acc += srow[t] * grow[t * stride];
                        }
                      }
                    }
                  }
                  gwk[(iz * KH + i) * KW + j] += acc;
                }
              }
            }
          }
        });
      }
    };
  }
  return Tensor(out);
}

}  // namespace psmnet
