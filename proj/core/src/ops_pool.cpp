#include <cmath>

#include "ops_common.hpp"
#include "psmnet/ops.hpp"

namespace psmnet {

using detail::Node;

Tensor avg_pool2d(const Tensor& input, int kernel, int stride) {
  if (input.rank() != 4) {
    throw ShapeError("avg_pool2d: expected 4-D input, got " +
                     shape_str(input.shape()));
  }
  if (kernel < 1 || stride < 1) throw ShapeError("avg_pool2d: invalid kernel/stride");
  const int64_t B = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  if (H < kernel || W < kernel) {
    throw ShapeError("avg_pool2d: kernel " + std::to_string(kernel) +
                     " larger than input " + shape_str(input.shape()));
  }
  const int64_t OH = (H - kernel) / stride + 1;
  const int64_t OW = (W - kernel) / stride + 1;
  auto out = detail::op_node({B, C, OH, OW}, {input.node_ptr()});

  const Scalar* in = input.values().data();
  Scalar* o = out->value.data();
  const Scalar inv = Scalar(1) / (Scalar(kernel) * Scalar(kernel));
  for (int64_t p = 0; p < B * C; ++p) {
    const Scalar* src = in + p * H * W;
    Scalar* dst = o + p * OH * OW;
    for (int64_t oy = 0; oy < OH; ++oy) {
      for (int64_t ox = 0; ox < OW; ++ox) {
        Scalar acc = 0;
        for (int64_t i = 0; i < kernel; ++i) {
          const Scalar* row = src + (oy * stride + i) * W + ox * stride;
          for (int64_t j = 0; j < kernel; ++j) acc += row[j];
        }
        dst[oy * OW + ox] = acc * inv;
      }
    }
  }

  if (out->requires_grad) {
    out->backprop = [kernel, stride, inv](Node& self) {
      Node& in_n = *self.parents[0];
      if (!in_n.requires_grad) return;
      in_n.ensure_grad();
      const int64_t H = in_n.shape[2], W = in_n.shape[3];
      const int64_t OH = self.shape[2], OW = self.shape[3];
      const int64_t planes = self.shape[0] * self.shape[1];
      for (int64_t p = 0; p < planes; ++p) {
        Scalar* gdst = in_n.grad.data() + p * H * W;
        const Scalar* gsrc = self.grad.data() + p * OH * OW;
        for (int64_t oy = 0; oy < OH; ++oy) {
          for (int64_t ox = 0; ox < OW; ++ox) {
            const Scalar g = gsrc[oy * OW + ox] * inv;
            for (int64_t i = 0; i < kernel; ++i) {
              Scalar* row = gdst + (oy * stride + i) * W + ox * stride;
              for (int64_t j = 0; j < kernel; ++j) row[j] += g;
            }
          }
        }
      }
    };
  }
  return Tensor(out);
}

namespace {

// Align-corners sample positions for one axis.
struct LerpTable {
  std::vector<int64_t> lo, hi;
  std::vector<Scalar> w;  // weight of hi; lo gets 1-w
};

LerpTable lerp_table(int64_t in, int64_t out) {
  LerpTable t;
  t.lo.resize(static_cast<size_t>(out));
  t.hi.resize(static_cast<size_t>(out));
  t.w.resize(static_cast<size_t>(out));
  const Scalar scale = out > 1 ? Scalar(in - 1) / Scalar(out - 1) : Scalar(0);
  for (int64_t o = 0; o < out; ++o) {
    const Scalar pos = Scalar(o) * scale;
    int64_t lo = static_cast<int64_t>(std::floor(pos));
    if (lo > in - 1) lo = in - 1;
    int64_t hi = lo + 1 < in ? lo + 1 : in - 1;
    t.lo[static_cast<size_t>(o)] = lo;
    t.hi[static_cast<size_t>(o)] = hi;
    t.w[static_cast<size_t>(o)] = pos - Scalar(lo);
  }
  return t;
}

}  // namespace

Tensor upsample_bilinear2d(const Tensor& input, int64_t out_h, int64_t out_w) {
  if (input.rank() != 4) {
    throw ShapeError("upsample_bilinear2d: expected 4-D input, got " +
                     shape_str(input.shape()));
  }
  if (out_h < 1 || out_w < 1) throw ShapeError("upsample_bilinear2d: bad target dims");
  const int64_t B = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  auto out = detail::op_node({B, C, out_h, out_w}, {input.node_ptr()});

  const LerpTable ty = lerp_table(H, out_h);
  const LerpTable tx = lerp_table(W, out_w);
  const Scalar* in = input.values().data();
  Scalar* o = out->value.data();
  for (int64_t p = 0; p < B * C; ++p) {
    const Scalar* src = in + p * H * W;
    Scalar* dst = o + p * out_h * out_w;
    for (int64_t oy = 0; oy < out_h; ++oy) {
      const int64_t y0 = ty.lo[static_cast<size_t>(oy)], y1 = ty.hi[static_cast<size_t>(oy)];
      const Scalar wy = ty.w[static_cast<size_t>(oy)];
      for (int64_t ox = 0; ox < out_w; ++ox) {
        const int64_t x0 = tx.lo[static_cast<size_t>(ox)], x1 = tx.hi[static_cast<size_t>(ox)];
        const Scalar wx = tx.w[static_cast<size_t>(ox)];
        const Scalar top = src[y0 * W + x0] * (1 - wx) + src[y0 * W + x1] * wx;
        const Scalar bot = src[y1 * W + x0] * (1 - wx) + src[y1 * W + x1] * wx;
        dst[oy * out_w + ox] = top * (1 - wy) + bot * wy;
      }
    }
  }

  if (out->requires_grad) {
    out->backprop = [ty, tx](Node& self) {
      Node& in_n = *self.parents[0];
      if (!in_n.requires_grad) return;
      in_n.ensure_grad();
      const int64_t H = in_n.shape[2], W = in_n.shape[3];
      const int64_t OH = self.shape[2], OW = self.shape[3];
      const int64_t planes = self.shape[0] * self.shape[1];
      for (int64_t p = 0; p < planes; ++p) {
        Scalar* gdst = in_n.grad.data() + p * H * W;
        const Scalar* gsrc = self.grad.data() + p * OH * OW;
        for (int64_t oy = 0; oy < OH; ++oy) {
          const int64_t y0 = ty.lo[static_cast<size_t>(oy)], y1 = ty.hi[static_cast<size_t>(oy)];
          const Scalar wy = ty.w[static_cast<size_t>(oy)];
          for (int64_t ox = 0; ox < OW; ++ox) {
            const int64_t x0 = tx.lo[static_cast<size_t>(ox)], x1 = tx.hi[static_cast<size_t>(ox)];
            const Scalar wx = tx.w[static_cast<size_t>(ox)];
            const Scalar g = gsrc[oy * OW + ox];
            gdst[y0 * W + x0] += g * (1 - wy) * (1 - wx);
            gdst[y0 * W + x1] += g * (1 - wy) * wx;
            gdst[y1 * W + x0] += g * wy * (1 - wx);
            gdst[y1 * W + x1] += g * wy * wx;
          }
        }
      }
    };
  }
  return Tensor(out);
}

Tensor upsample_trilinear3d(const Tensor& input, int64_t out_d, int64_t out_h,
                            int64_t out_w) {
  if (input.rank() != 5) {
    throw ShapeError("upsample_trilinear3d: expected 5-D input, got " +
                     shape_str(input.shape()));
  }
  if (out_d < 1 || out_h < 1 || out_w < 1) {
    throw ShapeError("upsample_trilinear3d: bad target dims");
  }
  const int64_t B = input.dim(0), C = input.dim(1), D = input.dim(2),
                H = input.dim(3), W = input.dim(4);
  auto out = detail::op_node({B, C, out_d, out_h, out_w}, {input.node_ptr()});

  const LerpTable tz = lerp_table(D, out_d);
  const LerpTable ty = lerp_table(H, out_h);
  const LerpTable tx = lerp_table(W, out_w);
  const Scalar* in = input.values().data();
  Scalar* o = out->value.data();
  for (int64_t p = 0; p < B * C; ++p) {
    const Scalar* src = in + p * D * H * W;
    Scalar* dst = o + p * out_d * out_h * out_w;
    for (int64_t oz = 0; oz < out_d; ++oz) {
      const int64_t z0 = tz.lo[static_cast<size_t>(oz)], z1 = tz.hi[static_cast<size_t>(oz)];
      const Scalar wz = tz.w[static_cast<size_t>(oz)];
      for (int64_t oy = 0; oy < out_h; ++oy) {
        const int64_t y0 = ty.lo[static_cast<size_t>(oy)], y1 = ty.hi[static_cast<size_t>(oy)];
        const Scalar wy = ty.w[static_cast<size_t>(oy)];
        for (int64_t ox = 0; ox < out_w; ++ox) {
          const int64_t x0 = tx.lo[static_cast<size_t>(ox)], x1 = tx.hi[static_cast<size_t>(ox)];
          const Scalar wx = tx.w[static_cast<size_t>(ox)];
          const Scalar f00 = src[(z0 * H + y0) * W + x0] * (1 - wx) +
                             src[(z0 * H + y0) * W + x1] * wx;
          const Scalar f01 = src[(z0 * H + y1) * W + x0] * (1 - wx) +
                             src[(z0 * H + y1) * W + x1] * wx;
          const Scalar f10 = src[(z1 * H + y0) * W + x0] * (1 - wx) +
                             src[(z1 * H + y0) * W + x1] * wx;
          const Scalar f11 = src[(z1 * H + y1) * W + x0] * (1 - wx) +
                             src[(z1 * H + y1) * W + x1] * wx;
          const Scalar f0 = f00 * (1 - wy) + f01 * wy;
          const Scalar f1 = f10 * (1 - wy) + f11 * wy;
          dst[(oz * out_h + oy) * out_w + ox] = f0 * (1 - wz) + f1 * wz;
        }
      }
    }
  }

  if (out->requires_grad) {
    out->backprop = [tz, ty, tx](Node& self) {
      Node& in_n = *self.parents[0];
      if (!in_n.requires_grad) return;
      in_n.ensure_grad();
      const int64_t D = in_n.shape[2], H = in_n.shape[3], W = in_n.shape[4];
      const int64_t OD = self.shape[2], OH = self.shape[3], OW = self.shape[4];
      const int64_t planes = self.shape[0] * self.shape[1];
      for (int64_t p = 0; p < planes; ++p) {
        Scalar* gdst = in_n.grad.data() + p * D * H * W;
        const Scalar* gsrc = self.grad.data() + p * OD * OH * OW;
        for (int64_t oz = 0; oz < OD; ++oz) {
          const int64_t z0 = tz.lo[static_cast<size_t>(oz)], z1 = tz.hi[static_cast<size_t>(oz)];
          const Scalar wz = tz.w[static_cast<size_t>(oz)];
          for (int64_t oy = 0; oy < OH; ++oy) {
            const int64_t y0 = ty.lo[static_cast<size_t>(oy)], y1 = ty.hi[static_cast<size_t>(oy)];
            const Scalar wy = ty.w[static_cast<size_t>(oy)];
            for (int64_t ox = 0; ox < OW; ++ox) {
              const int64_t x0 = tx.lo[static_cast<size_t>(ox)], x1 = tx.hi[static_cast<size_t>(ox)];
              const Scalar wx = tx.w[static_cast<size_t>(ox)];
              const Scalar g = gsrc[(oz * OH + oy) * OW + ox];
              gdst[(z0 * H + y0) * W + x0] += g * (1 - wz) * (1 - wy) * (1 - wx);
              gdst[(z0 * H + y0) * W + x1] += g * (1 - wz) * (1 - wy) * wx;
              gdst[(z0 * H + y1) * W + x0] += g * (1 - wz) * wy * (1 - wx);
              gdst[(z0 * H + y1) * W + x1] += g * (1 - wz) * wy * wx;
              gdst[(z1 * H + y0) * W + x0] += g * wz * (1 - wy) * (1 - wx);
              gdst[(z1 * H + y0) * W + x1] += g * wz * (1 - wy) * wx;
              gdst[(z1 * H + y1) * W + x0] += g * wz * wy * (1 - wx);
              gdst[(z1 * H + y1) * W + x1] += g * wz * wy * wx;
            }
          }
        }
      }
    };
  }
  return Tensor(out);
}

}  // namespace psmnet
