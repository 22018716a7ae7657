#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "psmnet/ops.hpp"
#include "psmnet/tensor.hpp"

namespace psmnet {

// Trainable tensor plus its Adam state. The tensor is a graph leaf with
// requires_grad set; the optimizer rewrites its values in place.
struct Parameter {
  std::string name;
  Tensor value;
  std::vector<Scalar> adam_m;
  std::vector<Scalar> adam_v;
  int64_t adam_t = 0;
};

// Named non-trainable state (batch-norm running statistics).
struct Buffer {
  std::string name;
  std::vector<Scalar> data;
};

// Owns every parameter and buffer of a model; names are unique paths.
class ParameterStore {
 public:
  Parameter* add_parameter(const std::string& name, Tensor value);
  Buffer* add_buffer(const std::string& name, std::vector<Scalar> data);

  const std::vector<std::unique_ptr<Parameter>>& parameters() const { return params_; }
  std::vector<std::unique_ptr<Parameter>>& parameters() { return params_; }
  const std::vector<std::unique_ptr<Buffer>>& buffers() const { return buffers_; }
  std::vector<std::unique_ptr<Buffer>>& buffers() { return buffers_; }

  Parameter* find_parameter(const std::string& name);
  Buffer* find_buffer(const std::string& name);

  int64_t parameter_count() const;  // total scalar count
  void zero_grads();

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::vector<std::unique_ptr<Buffer>> buffers_;
};

// Bias-corrected Adam update, applied in place. Every parameter must carry a
// gradient from a preceding backward pass.
void adam_step(std::vector<std::unique_ptr<Parameter>>& params, Scalar learning_rate,
               Scalar beta1 = 0.9, Scalar beta2 = 0.999, Scalar epsilon = 1e-8);

// Fan-in-scaled normal init: std = sqrt(2 / fan_in).
Tensor he_normal(Shape shape, int64_t fan_in, std::mt19937_64& rng);

// Layer helpers. Each registers its parameters (and buffers) under
// `prefix` at construction and keeps raw pointers into the store.

struct Conv2dLayer {
  Parameter* weight = nullptr;
  int stride = 1, padding = 0, dilation = 1;

  Conv2dLayer() = default;
  Conv2dLayer(ParameterStore& store, const std::string& prefix, int64_t in_ch,
              int64_t out_ch, int kernel, int stride, int padding, int dilation,
              std::mt19937_64& rng);
  Tensor forward(const Tensor& x) const;
};

struct BatchNorm {
  Parameter* gamma = nullptr;
  Parameter* beta = nullptr;
  Buffer* running_mean = nullptr;
  Buffer* running_var = nullptr;
  Scalar momentum = 0.1;
  Scalar epsilon = 1e-5;

  BatchNorm() = default;
  BatchNorm(ParameterStore& store, const std::string& prefix, int64_t channels);
  Tensor forward(const Tensor& x, Mode mode) const;
};

// conv -> batch norm (no activation; ReLU is applied by callers where the
// architecture asks for it).
struct ConvBn2d {
  Conv2dLayer conv;
  BatchNorm bn;

  ConvBn2d() = default;
  ConvBn2d(ParameterStore& store, const std::string& prefix, int64_t in_ch,
           int64_t out_ch, int kernel, int stride, int padding, int dilation,
           std::mt19937_64& rng);
  Tensor forward(const Tensor& x, Mode mode) const;
};

struct Conv3dLayer {
  Parameter* weight = nullptr;
  int stride = 1, padding = 0;

  Conv3dLayer() = default;
  Conv3dLayer(ParameterStore& store, const std::string& prefix, int64_t in_ch,
              int64_t out_ch, int kernel, int stride, int padding,
              std::mt19937_64& rng);
  Tensor forward(const Tensor& x) const;
};

struct ConvBn3d {
  Conv3dLayer conv;
  BatchNorm bn;

  ConvBn3d() = default;
  ConvBn3d(ParameterStore& store, const std::string& prefix, int64_t in_ch,
           int64_t out_ch, int kernel, int stride, int padding,
           std::mt19937_64& rng);
  Tensor forward(const Tensor& x, Mode mode) const;
};

// Transposed conv3d doubling each spatial dim (kernel 3, stride 2, padding 1,
// output padding 1), followed by batch norm.
struct DeconvBn3d {
  Parameter* weight = nullptr;
  BatchNorm bn;

  DeconvBn3d() = default;
  DeconvBn3d(ParameterStore& store, const std::string& prefix, int64_t in_ch,
             int64_t out_ch, std::mt19937_64& rng);
  Tensor forward(const Tensor& x, Mode mode) const;
};

// Two 3x3 convs with BN; ReLU between them but, following the architecture,
// none after the residual summation. Projects the skip when shape changes.
struct ResidualBlock2d {
  ConvBn2d conv1;
  ConvBn2d conv2;
  bool has_projection = false;
  ConvBn2d projection;

  ResidualBlock2d() = default;
  ResidualBlock2d(ParameterStore& store, const std::string& prefix, int64_t in_ch,
                  int64_t out_ch, int stride, int dilation, std::mt19937_64& rng);
  Tensor forward(const Tensor& x, Mode mode) const;
};

}  // namespace psmnet
