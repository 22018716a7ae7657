#include "psmnet/nn.hpp"

#include <cmath>

#include "psmnet/errors.hpp"

namespace psmnet {

Parameter* ParameterStore::add_parameter(const std::string& name, Tensor value) {
  if (find_parameter(name)) {
    throw ConfigError("duplicate parameter name: " + name);
  }
  auto param = std::make_unique<Parameter>();
  param->name = name;
  param->value = std::move(value);
  param->value.set_requires_grad(true);
  param->adam_m.assign(static_cast<size_t>(param->value.numel()), Scalar(0));
  param->adam_v.assign(static_cast<size_t>(param->value.numel()), Scalar(0));
  params_.push_back(std::move(param));
  return params_.back().get();
}

Buffer* ParameterStore::add_buffer(const std::string& name, std::vector<Scalar> data) {
  if (find_buffer(name)) {
    throw ConfigError("duplicate buffer name: " + name);
  }
  auto buffer = std::make_unique<Buffer>();
  buffer->name = name;
  buffer->data = std::move(data);
  buffers_.push_back(std::move(buffer));
  return buffers_.back().get();
}

Parameter* ParameterStore::find_parameter(const std::string& name) {
  for (auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

Buffer* ParameterStore::find_buffer(const std::string& name) {
  for (auto& b : buffers_) {
    if (b->name == name) return b.get();
  }
  return nullptr;
}

int64_t ParameterStore::parameter_count() const {
  int64_t total = 0;
  for (const auto& p : params_) total += p->value.numel();
  return total;
}

void ParameterStore::zero_grads() {
  for (auto& p : params_) p->value.zero_grad();
}

void adam_step(std::vector<std::unique_ptr<Parameter>>& params, Scalar learning_rate,
               Scalar beta1, Scalar beta2, Scalar epsilon) {
  for (auto& p : params) {
    if (!p->value.has_grad()) {
      throw NumericError("adam_step: parameter '" + p->name + "' has no gradient");
    }
  }
  for (auto& p : params) {
    const auto& g = p->value.grad();
    auto& v = p->value.values();
    p->adam_t += 1;
    const Scalar bc1 = Scalar(1) - std::pow(beta1, Scalar(p->adam_t));
    const Scalar bc2 = Scalar(1) - std::pow(beta2, Scalar(p->adam_t));
    for (size_t i = 0; i < v.size(); ++i) {
      p->adam_m[i] = beta1 * p->adam_m[i] + (Scalar(1) - beta1) * g[i];
      p->adam_v[i] = beta2 * p->adam_v[i] + (Scalar(1) - beta2) * g[i] * g[i];
      const Scalar m_hat = p->adam_m[i] / bc1;
      const Scalar v_hat = p->adam_v[i] / bc2;
      v[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + epsilon);
    }
  }
}

Tensor he_normal(Shape shape, int64_t fan_in, std::mt19937_64& rng) {
  Tensor t = Tensor::zeros(std::move(shape));
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / double(fan_in)));
  for (Scalar& v : t.values()) v = Scalar(dist(rng));
  return t;
}

Conv2dLayer::Conv2dLayer(ParameterStore& store, const std::string& prefix,
                         int64_t in_ch, int64_t out_ch, int kernel, int stride,
                         int padding, int dilation, std::mt19937_64& rng)
    : stride(stride), padding(padding), dilation(dilation) {
  weight = store.add_parameter(
      prefix + ".weight",
      he_normal({out_ch, in_ch, kernel, kernel}, in_ch * kernel * kernel, rng));
}

Tensor Conv2dLayer::forward(const Tensor& x) const {
  return conv2d(x, weight->value, Tensor{}, stride, padding, dilation);
}

BatchNorm::BatchNorm(ParameterStore& store, const std::string& prefix,
                     int64_t channels) {
  gamma = store.add_parameter(prefix + ".gamma",
                              Tensor::full({channels}, Scalar(1)));
  beta = store.add_parameter(prefix + ".beta", Tensor::zeros({channels}));
  running_mean = store.add_buffer(prefix + ".running_mean",
                                  std::vector<Scalar>(static_cast<size_t>(channels), 0));
  running_var = store.add_buffer(prefix + ".running_var",
                                 std::vector<Scalar>(static_cast<size_t>(channels), 1));
}

Tensor BatchNorm::forward(const Tensor& x, Mode mode) const {
  BatchNormStats stats{running_mean->data, running_var->data};
  Tensor y = batch_norm(x, gamma->value, beta->value, &stats, mode, momentum, epsilon);
  if (mode == Mode::kTrain) {
    running_mean->data = std::move(stats.mean);
    running_var->data = std::move(stats.var);
  }
  return y;
}

ConvBn2d::ConvBn2d(ParameterStore& store, const std::string& prefix, int64_t in_ch,
                   int64_t out_ch, int kernel, int stride, int padding, int dilation,
                   std::mt19937_64& rng)
    : conv(store, prefix + ".conv", in_ch, out_ch, kernel, stride, padding, dilation,
           rng),
      bn(store, prefix + ".bn", out_ch) {}

Tensor ConvBn2d::forward(const Tensor& x, Mode mode) const {
  return bn.forward(conv.forward(x), mode);
}

Conv3dLayer::Conv3dLayer(ParameterStore& store, const std::string& prefix,
                         int64_t in_ch, int64_t out_ch, int kernel, int stride,
                         int padding, std::mt19937_64& rng)
    : stride(stride), padding(padding) {
  weight = store.add_parameter(
      prefix + ".weight",
      he_normal({out_ch, in_ch, kernel, kernel, kernel},
                in_ch * kernel * kernel * kernel, rng));
}

Tensor Conv3dLayer::forward(const Tensor& x) const {
  return conv3d(x, weight->value, Tensor{}, stride, padding);
}

ConvBn3d::ConvBn3d(ParameterStore& store, const std::string& prefix, int64_t in_ch,
                   int64_t out_ch, int kernel, int stride, int padding,
                   std::mt19937_64& rng)
    : conv(store, prefix + ".conv", in_ch, out_ch, kernel, stride, padding, rng),
      bn(store, prefix + ".bn", out_ch) {}

Tensor ConvBn3d::forward(const Tensor& x, Mode mode) const {
  return bn.forward(conv.forward(x), mode);
}

DeconvBn3d::DeconvBn3d(ParameterStore& store, const std::string& prefix,
                       int64_t in_ch, int64_t out_ch, std::mt19937_64& rng)
    : bn(store, prefix + ".bn", out_ch) {
  weight = store.add_parameter(
      prefix + ".weight",
      he_normal({in_ch, out_ch, 3, 3, 3}, in_ch * 27, rng));
}

Tensor DeconvBn3d::forward(const Tensor& x, Mode mode) const {
  return bn.forward(conv_transpose3d(x, weight->value, Tensor{}, /*stride=*/2,
                                     /*padding=*/1, /*output_padding=*/1),
                    mode);
}

ResidualBlock2d::ResidualBlock2d(ParameterStore& store, const std::string& prefix,
                                 int64_t in_ch, int64_t out_ch, int stride,
                                 int dilation, std::mt19937_64& rng)
    : conv1(store, prefix + ".conv1", in_ch, out_ch, 3, stride, dilation, dilation,
            rng),
      conv2(store, prefix + ".conv2", out_ch, out_ch, 3, 1, dilation, dilation, rng) {
  if (stride != 1 || in_ch != out_ch) {
    has_projection = true;
    projection = ConvBn2d(store, prefix + ".proj", in_ch, out_ch, 1, stride, 0, 1, rng);
  }
}

Tensor ResidualBlock2d::forward(const Tensor& x, Mode mode) const {
  Tensor y = relu(conv1.forward(x, mode));
  y = conv2.forward(y, mode);
  Tensor skip = has_projection ? projection.forward(x, mode) : x;
  return add(y, skip);  // no ReLU after summation
}

}  // namespace psmnet
