#pragma once

#include <cstdint>
#include <vector>

#include "psmnet/tensor.hpp"

namespace psmnet {

enum class Mode { kTrain, kEval };

// Running batch-norm statistics, one entry per channel. Owned by the layer,
// updated in place by train-mode forwards.
struct BatchNormStats {
  std::vector<Scalar> mean;
  std::vector<Scalar> var;
};

// Counts of executed structural ops, for tests that pin layer counts.
struct OpCounters {
  int64_t conv2d = 0;
  int64_t conv3d = 0;
  int64_t conv_transpose3d = 0;
  void reset() { *this = OpCounters{}; }
};
OpCounters& op_counters();

// 2-D cross-correlation, NCHW input, KCRS weight, optional bias (pass an
// undefined tensor to skip). Differentiable w.r.t. input, weight and bias.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              int stride, int padding, int dilation = 1);

// 3-D cross-correlation, NCDHW input, KCDRS weight.
Tensor conv3d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              int stride, int padding);

// Transposed 3-D convolution with weight layout [C_in, K, kd, kh, kw].
// stride 2 / padding 1 / output_padding 1 with a 3^3 kernel doubles every
// spatial dim; the forward equals the input-gradient of the matching conv3d.
Tensor conv_transpose3d(const Tensor& input, const Tensor& weight,
                        const Tensor& bias, int stride, int padding,
                        int output_padding);

// Normalizes over all axes but the channel axis (1). Train mode uses batch
// statistics and updates `running` by exponential moving average; eval mode
// reads `running`. Differentiable w.r.t. input, gamma, beta in both modes.
Tensor batch_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                  BatchNormStats* running, Mode mode, Scalar momentum,
                  Scalar epsilon);

Tensor relu(const Tensor& input);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor negate(const Tensor& input);
Tensor scale(const Tensor& input, Scalar factor);
Tensor concat(const std::vector<Tensor>& tensors, int axis);
Tensor reshape(const Tensor& input, Shape shape);

// Non-overlapping when stride == kernel (the SPP case); trailing partial
// windows are truncated.
Tensor avg_pool2d(const Tensor& input, int kernel, int stride);

// Align-corners interpolation: output corners sample input corners exactly;
// upsampling to the identical size returns the input values unchanged.
Tensor upsample_bilinear2d(const Tensor& input, int64_t out_h, int64_t out_w);
Tensor upsample_trilinear3d(const Tensor& input, int64_t out_d, int64_t out_h,
                            int64_t out_w);

// Max-subtracted softmax along `axis`; finite inputs cannot overflow.
Tensor softmax(const Tensor& input, int axis);

Tensor sum_all(const Tensor& input);            // scalar
Tensor sum_axis(const Tensor& input, int axis); // removes the axis
// Multiplies slice k along `axis` by coeff[k].
Tensor scale_axis(const Tensor& input, int axis, std::vector<Scalar> coeff);

}  // namespace psmnet
