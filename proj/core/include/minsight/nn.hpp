#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "minsight/rng.hpp"

namespace minsight::nn {

// Single-sample tensor, channel-major (c, then rows, then cols). Vectors
// are {d, 1, 1}. Double precision throughout: gradient checks run at
// tolerances float cannot reach.
struct Tensor {
  int c = 0, h = 1, w = 1;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int c_, int h_, int w_)
      : c(c_), h(h_), w(w_),
        data(static_cast<std::size_t>(c_) * h_ * w_, 0.0) {}

  int size() const { return c * h * w; }
  double& at(int ch, int r, int col) {
    return data[(static_cast<std::size_t>(ch) * h + r) * w + col];
  }
  double at(int ch, int r, int col) const {
    return data[(static_cast<std::size_t>(ch) * h + r) * w + col];
  }
};

struct LayerCache {
  Eigen::MatrixXd cols;  // conv scratch
  Tensor input;
  Tensor output;
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string kind() const = 0;
  virtual long param_count() const { return 0; }
  // Called once during finalize, in layer order.
  virtual void set_input_shape(std::array<int, 3> chw) = 0;
  virtual std::array<int, 3> output_shape() const = 0;
  virtual void init_params(std::span<double> params, Rng& rng) const;
  virtual Tensor forward(const Tensor& x, std::span<const double> params,
                         LayerCache& cache) const = 0;
  // Returns grad wrt input; accumulates parameter grads into grad.
  virtual Tensor backward(const Tensor& gout, std::span<const double> params,
                          const LayerCache& cache,
                          std::span<double> grad) const = 0;
};

// params: weight[out_ch][in_ch*k*k] row-major, then bias[out_ch].
class Conv2d : public Layer {
 public:
  Conv2d(int out_ch, int ksize, int stride, int pad);
  std::string kind() const override { return "conv2d"; }
  long param_count() const override;
  void set_input_shape(std::array<int, 3> chw) override;
  std::array<int, 3> output_shape() const override;
  void init_params(std::span<double> params, Rng& rng) const override;
  Tensor forward(const Tensor& x, std::span<const double> params,
                 LayerCache& cache) const override;
  Tensor backward(const Tensor& gout, std::span<const double> params,
                  const LayerCache& cache,
                  std::span<double> grad) const override;

 private:
  int out_ch_, ksize_, stride_, pad_;
  int in_c_ = 0, in_h_ = 0, in_w_ = 0, out_h_ = 0, out_w_ = 0;
};

// ELU (alpha = 1): C1-smooth, so finite-difference gradient checks are not
// poisoned by kinks and no unit ever has exactly zero gradient.
class Elu : public Layer {
 public:
  std::string kind() const override { return "elu"; }
  void set_input_shape(std::array<int, 3> chw) override { shape_ = chw; }
  std::array<int, 3> output_shape() const override { return shape_; }
  Tensor forward(const Tensor& x, std::span<const double> params,
                 LayerCache& cache) const override;
  Tensor backward(const Tensor& gout, std::span<const double> params,
                  const LayerCache& cache,
                  std::span<double> grad) const override;

 private:
  std::array<int, 3> shape_{};
};

class GlobalAvgPool : public Layer {
 public:
  std::string kind() const override { return "gap"; }
  void set_input_shape(std::array<int, 3> chw) override { shape_ = chw; }
  std::array<int, 3> output_shape() const override {
    return {shape_[0], 1, 1};
  }
  Tensor forward(const Tensor& x, std::span<const double> params,
                 LayerCache& cache) const override;
  Tensor backward(const Tensor& gout, std::span<const double> params,
                  const LayerCache& cache,
                  std::span<double> grad) const override;

 private:
  std::array<int, 3> shape_{};
};

// Flattens its input. params: weight[out][in] row-major, then bias[out].
class Dense : public Layer {
 public:
  explicit Dense(int out_dim) : out_dim_(out_dim) {}
  std::string kind() const override { return "dense"; }
  long param_count() const override {
    return static_cast<long>(out_dim_) * (in_dim_ + 1);
  }
  void set_input_shape(std::array<int, 3> chw) override {
    in_dim_ = chw[0] * chw[1] * chw[2];
  }
  std::array<int, 3> output_shape() const override { return {out_dim_, 1, 1}; }
  void init_params(std::span<double> params, Rng& rng) const override;
  Tensor forward(const Tensor& x, std::span<const double> params,
                 LayerCache& cache) const override;
  Tensor backward(const Tensor& gout, std::span<const double> params,
                  const LayerCache& cache,
                  std::span<double> grad) const override;

 private:
  int out_dim_, in_dim_ = 0;
};

// Sequential net over a flat parameter vector. Layer order is the
// serialization order of the weight blobs.
class Net {
 public:
  Net() = default;
  Net(const Net& other);
  Net& operator=(const Net& other);
  Net(Net&&) = default;
  Net& operator=(Net&&) = default;

  Net& conv(int out_ch, int k, int stride, int pad);
  Net& elu();
  Net& gap();
  Net& dense(int out_dim);

  // Computes shapes, allocates parameters, seeds He-style init.
  void finalize(std::array<int, 3> input_chw, std::uint64_t init_seed);
  bool finalized() const { return finalized_; }

  std::array<int, 3> input_shape() const { return input_shape_; }
  std::array<int, 3> output_shape() const;
  long param_count() const {
    return static_cast<long>(params_.size());
  }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  const std::vector<std::unique_ptr<Layer>>& layers() const { return layers_; }

  Tensor forward(const Tensor& x) const;
  Tensor forward(const Tensor& x, std::vector<LayerCache>& caches) const;
  // grad must have param_count() entries; accumulates.
  Tensor backward(const Tensor& gout, const std::vector<LayerCache>& caches,
                  std::span<double> grad) const;

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
  std::array<int, 3> input_shape_{};
  bool finalized_ = false;

  std::unique_ptr<Layer> clone_layer(const Layer& l) const;
};

struct LossGrad {
  double value = 0.0;
  Tensor grad;
};

// Mean squared error over all output elements.
LossGrad mse_loss(const Tensor& pred, const Eigen::VectorXd& target);
// Softmax cross entropy against an integer class label.
LossGrad cross_entropy_loss(const Tensor& logits, int label);

struct Adam {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void step(std::vector<double>& params, const std::vector<double>& grad);
  void reset();

 private:
  std::vector<double> m_, v_;
  long t_ = 0;
};

// Mean loss over the batch; accumulates d(mean loss)/d(params) into grad.
// Work splits into contiguous per-worker chunks whose partial gradients
// are reduced in worker order, so results are deterministic under any
// thread count.
double batch_gradient_mse(const Net& net, std::span<const Tensor> xs,
                          std::span<const Eigen::VectorXd> targets,
                          std::span<const std::size_t> indices,
                          std::vector<double>& grad, int threads = 0);
double batch_gradient_ce(const Net& net, std::span<const Tensor> xs,
                         std::span<const int> labels,
                         std::span<const std::size_t> indices,
                         std::vector<double>& grad, int threads = 0);

// Central-difference check on >= n_checks randomly chosen parameters.
// Returns the maximum relative error max|g_fd - g|/max(|g_fd|,|g|,1e-8).
double grad_check_mse(Net& net, const Tensor& x, const Eigen::VectorXd& target,
                      double epsilon, int n_checks, std::uint64_t seed);
double grad_check_ce(Net& net, const Tensor& x, int label, double epsilon,
                     int n_checks, std::uint64_t seed);

}  // namespace minsight::nn
