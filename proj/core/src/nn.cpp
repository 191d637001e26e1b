#include "minsight/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "minsight/errors.hpp"
#include "minsight/threads.hpp"

namespace minsight::nn {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRow = Eigen::Map<RowMat>;
using MapRowC = Eigen::Map<const RowMat>;
using MapVec = Eigen::Map<Eigen::VectorXd>;
using MapVecC = Eigen::Map<const Eigen::VectorXd>;

void Layer::init_params(std::span<double> params, Rng&) const {
  std::fill(params.begin(), params.end(), 0.0);
}

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(int out_ch, int ksize, int stride, int pad)
    : out_ch_(out_ch), ksize_(ksize), stride_(stride), pad_(pad) {
  if (out_ch < 1 || ksize < 1 || stride < 1 || pad < 0) {
    throw std::invalid_argument("conv2d: bad configuration");
  }
}

long Conv2d::param_count() const {
  return static_cast<long>(out_ch_) * (in_c_ * ksize_ * ksize_ + 1);
}

void Conv2d::set_input_shape(std::array<int, 3> chw) {
  in_c_ = chw[0];
  in_h_ = chw[1];
  in_w_ = chw[2];
  out_h_ = (in_h_ + 2 * pad_ - ksize_) / stride_ + 1;
  out_w_ = (in_w_ + 2 * pad_ - ksize_) / stride_ + 1;
  if (out_h_ < 1 || out_w_ < 1) {
    throw std::invalid_argument("conv2d: input too small for kernel");
  }
}

std::array<int, 3> Conv2d::output_shape() const {
  return {out_ch_, out_h_, out_w_};
}

void Conv2d::init_params(std::span<double> params, Rng& rng) const {
  const int fan_in = in_c_ * ksize_ * ksize_;
  const double stddev = std::sqrt(2.0 / fan_in);
  const long wn = static_cast<long>(out_ch_) * fan_in;
  for (long i = 0; i < wn; ++i) params[i] = rng.normal(0.0, stddev);
  for (int i = 0; i < out_ch_; ++i) params[wn + i] = 0.0;
}

Tensor Conv2d::forward(const Tensor& x, std::span<const double> params,
                       LayerCache& cache) const {
  if (x.c != in_c_ || x.h != in_h_ || x.w != in_w_) {
    throw std::invalid_argument("conv2d: input shape mismatch");
  }
  const int patch = in_c_ * ksize_ * ksize_;
  const int cells = out_h_ * out_w_;
  cache.cols.resize(patch, cells);
  for (int oy = 0; oy < out_h_; ++oy) {
    for (int ox = 0; ox < out_w_; ++ox) {
      const int q = oy * out_w_ + ox;
      double* col = cache.cols.col(q).data();
      int r = 0;
      for (int c = 0; c < in_c_; ++c) {
        for (int ky = 0; ky < ksize_; ++ky) {
          const int iy = oy * stride_ + ky - pad_;
          for (int kx = 0; kx < ksize_; ++kx, ++r) {
            const int ix = ox * stride_ + kx - pad_;
            col[r] = (iy >= 0 && iy < in_h_ && ix >= 0 && ix < in_w_)
                         ? x.at(c, iy, ix)
                         : 0.0;
          }
        }
      }
    }
  }
  MapRowC weight(params.data(), out_ch_, patch);
  MapVecC bias(params.data() + static_cast<std::size_t>(out_ch_) * patch,
               out_ch_);
  Tensor out(out_ch_, out_h_, out_w_);
  MapRow out_mat(out.data.data(), out_ch_, cells);
  out_mat.noalias() = weight * cache.cols;
  out_mat.colwise() += bias;
  return out;
}

Tensor Conv2d::backward(const Tensor& gout, std::span<const double> params,
                        const LayerCache& cache,
                        std::span<double> grad) const {
  const int patch = in_c_ * ksize_ * ksize_;
  const int cells = out_h_ * out_w_;
  MapRowC gout_mat(gout.data.data(), out_ch_, cells);
  MapRow dweight(grad.data(), out_ch_, patch);
  MapVec dbias(grad.data() + static_cast<std::size_t>(out_ch_) * patch,
               out_ch_);
  dweight.noalias() += gout_mat * cache.cols.transpose();
  dbias.noalias() += gout_mat.rowwise().sum();

  MapRowC weight(params.data(), out_ch_, patch);
  Eigen::MatrixXd dcols = weight.transpose() * gout_mat;

  Tensor dx(in_c_, in_h_, in_w_);
  for (int oy = 0; oy < out_h_; ++oy) {
    for (int ox = 0; ox < out_w_; ++ox) {
      const int q = oy * out_w_ + ox;
      const double* col = dcols.col(q).data();
      int r = 0;
      for (int c = 0; c < in_c_; ++c) {
        for (int ky = 0; ky < ksize_; ++ky) {
          const int iy = oy * stride_ + ky - pad_;
          for (int kx = 0; kx < ksize_; ++kx, ++r) {
            const int ix = ox * stride_ + kx - pad_;
            if (iy >= 0 && iy < in_h_ && ix >= 0 && ix < in_w_) {
              dx.at(c, iy, ix) += col[r];
            }
          }
        }
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Elu

Tensor Elu::forward(const Tensor& x, std::span<const double>,
                    LayerCache& cache) const {
  Tensor out = x;
  for (double& v : out.data) {
    if (v <= 0.0) v = std::expm1(v);
  }
  cache.output = out;
  return out;
}

Tensor Elu::backward(const Tensor& gout, std::span<const double>,
                     const LayerCache& cache, std::span<double>) const {
  Tensor dx = gout;
  for (std::size_t i = 0; i < dx.data.size(); ++i) {
    const double y = cache.output.data[i];
    if (y <= 0.0) dx.data[i] *= y + 1.0;
  }
  return dx;
}

// ---------------------------------------------------------------------------
// GlobalAvgPool

Tensor GlobalAvgPool::forward(const Tensor& x, std::span<const double>,
                              LayerCache&) const {
  Tensor out(x.c, 1, 1);
  const int cells = x.h * x.w;
  for (int c = 0; c < x.c; ++c) {
    double acc = 0.0;
    const double* p = &x.data[static_cast<std::size_t>(c) * cells];
    for (int i = 0; i < cells; ++i) acc += p[i];
    out.data[c] = acc / cells;
  }
  return out;
}

Tensor GlobalAvgPool::backward(const Tensor& gout, std::span<const double>,
                               const LayerCache&, std::span<double>) const {
  Tensor dx(shape_[0], shape_[1], shape_[2]);
  const int cells = shape_[1] * shape_[2];
  for (int c = 0; c < shape_[0]; ++c) {
    const double g = gout.data[c] / cells;
    double* p = &dx.data[static_cast<std::size_t>(c) * cells];
    for (int i = 0; i < cells; ++i) p[i] = g;
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Dense

void Dense::init_params(std::span<double> params, Rng& rng) const {
  const double stddev = std::sqrt(2.0 / in_dim_);
  const long wn = static_cast<long>(out_dim_) * in_dim_;
  for (long i = 0; i < wn; ++i) params[i] = rng.normal(0.0, stddev);
  for (int i = 0; i < out_dim_; ++i) params[wn + i] = 0.0;
}

Tensor Dense::forward(const Tensor& x, std::span<const double> params,
                      LayerCache& cache) const {
  if (x.size() != in_dim_) {
    throw std::invalid_argument("dense: input size mismatch");
  }
  cache.input = x;
  MapRowC weight(params.data(), out_dim_, in_dim_);
  MapVecC bias(params.data() + static_cast<std::size_t>(out_dim_) * in_dim_,
               out_dim_);
  MapVecC xv(x.data.data(), in_dim_);
  Tensor out(out_dim_, 1, 1);
  MapVec(out.data.data(), out_dim_).noalias() = weight * xv + bias;
  return out;
}

Tensor Dense::backward(const Tensor& gout, std::span<const double> params,
                       const LayerCache& cache, std::span<double> grad) const {
  MapVecC g(gout.data.data(), out_dim_);
  MapVecC xv(cache.input.data.data(), in_dim_);
  MapRow dweight(grad.data(), out_dim_, in_dim_);
  MapVec dbias(grad.data() + static_cast<std::size_t>(out_dim_) * in_dim_,
               out_dim_);
  dweight.noalias() += g * xv.transpose();
  dbias.noalias() += g;

  MapRowC weight(params.data(), out_dim_, in_dim_);
  Tensor dx(cache.input.c, cache.input.h, cache.input.w);
  MapVec(dx.data.data(), in_dim_).noalias() = weight.transpose() * g;
  return dx;
}

// ---------------------------------------------------------------------------
// Net

std::unique_ptr<Layer> Net::clone_layer(const Layer& l) const {
  if (auto* p = dynamic_cast<const Conv2d*>(&l)) {
    return std::make_unique<Conv2d>(*p);
  }
  if (auto* p = dynamic_cast<const Elu*>(&l)) {
    return std::make_unique<Elu>(*p);
  }
  if (auto* p = dynamic_cast<const GlobalAvgPool*>(&l)) {
    return std::make_unique<GlobalAvgPool>(*p);
  }
  if (auto* p = dynamic_cast<const Dense*>(&l)) {
    return std::make_unique<Dense>(*p);
  }
  throw std::logic_error("unknown layer kind");
}

Net::Net(const Net& other)
    : offsets_(other.offsets_),
      params_(other.params_),
      input_shape_(other.input_shape_),
      finalized_(other.finalized_) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(clone_layer(*l));
}

Net& Net::operator=(const Net& other) {
  if (this == &other) return *this;
  Net tmp(other);
  *this = std::move(tmp);
  return *this;
}

Net& Net::conv(int out_ch, int k, int stride, int pad) {
  layers_.push_back(std::make_unique<Conv2d>(out_ch, k, stride, pad));
  return *this;
}
Net& Net::elu() {
  layers_.push_back(std::make_unique<Elu>());
  return *this;
}
Net& Net::gap() {
  layers_.push_back(std::make_unique<GlobalAvgPool>());
  return *this;
}
Net& Net::dense(int out_dim) {
  layers_.push_back(std::make_unique<Dense>(out_dim));
  return *this;
}

void Net::finalize(std::array<int, 3> input_chw, std::uint64_t init_seed) {
  input_shape_ = input_chw;
  offsets_.clear();
  std::array<int, 3> shape = input_chw;
  std::size_t total = 0;
  for (auto& layer : layers_) {
    layer->set_input_shape(shape);
    shape = layer->output_shape();
    offsets_.push_back(total);
    total += static_cast<std::size_t>(layer->param_count());
  }
  params_.assign(total, 0.0);
  Rng rng(init_seed);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const long n = layers_[i]->param_count();
    if (n > 0) {
      layers_[i]->init_params(
          std::span<double>(params_.data() + offsets_[i],
                            static_cast<std::size_t>(n)),
          rng);
    }
  }
  finalized_ = true;
}

std::array<int, 3> Net::output_shape() const {
  if (layers_.empty()) return input_shape_;
  return layers_.back()->output_shape();
}

Tensor Net::forward(const Tensor& x) const {
  std::vector<LayerCache> caches;
  return forward(x, caches);
}

Tensor Net::forward(const Tensor& x, std::vector<LayerCache>& caches) const {
  if (!finalized_) throw std::logic_error("net not finalized");
  caches.resize(layers_.size());
  Tensor cur = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const long n = layers_[i]->param_count();
    cur = layers_[i]->forward(
        cur,
        std::span<const double>(params_.data() + offsets_[i],
                                static_cast<std::size_t>(n)),
        caches[i]);
  }
  return cur;
}

Tensor Net::backward(const Tensor& gout, const std::vector<LayerCache>& caches,
                     std::span<double> grad) const {
  if (grad.size() != params_.size()) {
    throw std::invalid_argument("backward: gradient buffer size mismatch");
  }
  Tensor cur = gout;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const long n = layers_[i]->param_count();
    cur = layers_[i]->backward(
        cur,
        std::span<const double>(params_.data() + offsets_[i],
                                static_cast<std::size_t>(n)),
        caches[i],
        grad.subspan(offsets_[i], static_cast<std::size_t>(n)));
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Losses

LossGrad mse_loss(const Tensor& pred, const Eigen::VectorXd& target) {
  if (pred.size() != target.size()) {
    throw std::invalid_argument("mse_loss: size mismatch");
  }
  const int d = pred.size();
  LossGrad out;
  out.grad = Tensor(pred.c, pred.h, pred.w);
  for (int i = 0; i < d; ++i) {
    const double e = pred.data[i] - target[i];
    out.value += e * e;
    out.grad.data[i] = 2.0 * e / d;
  }
  out.value /= d;
  return out;
}

LossGrad cross_entropy_loss(const Tensor& logits, int label) {
  const int k = logits.size();
  if (label < 0 || label >= k) {
    throw std::invalid_argument("cross_entropy: label out of range");
  }
  double mx = logits.data[0];
  for (double v : logits.data) mx = std::max(mx, v);
  double sum = 0.0;
  for (double v : logits.data) sum += std::exp(v - mx);
  const double lse = mx + std::log(sum);

  LossGrad out;
  out.value = lse - logits.data[label];
  out.grad = Tensor(logits.c, logits.h, logits.w);
  for (int i = 0; i < k; ++i) {
    out.grad.data[i] = std::exp(logits.data[i] - lse);
  }
  out.grad.data[label] -= 1.0;
  return out;
}

// ---------------------------------------------------------------------------
// Adam

void Adam::step(std::vector<double>& params, const std::vector<double>& grad) {
  if (m_.size() != params.size()) {
    m_.assign(params.size(), 0.0);
    v_.assign(params.size(), 0.0);
    t_ = 0;
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1, t_);
  const double c2 = 1.0 - std::pow(beta2, t_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1 * m_[i] + (1.0 - beta1) * grad[i];
    v_[i] = beta2 * v_[i] + (1.0 - beta2) * grad[i] * grad[i];
    params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
  }
}

void Adam::reset() {
  m_.clear();
  v_.clear();
  t_ = 0;
}

// ---------------------------------------------------------------------------
// Batched gradients

namespace {

template <typename PerSample>
double batch_gradient(const Net& net, std::size_t count,
                      std::vector<double>& grad, int threads,
                      PerSample&& per_sample) {
  if (grad.size() != net.params().size()) {
    grad.assign(net.params().size(), 0.0);
  }
  const int workers = std::max(
      1, std::min(threads > 0 ? threads : thread_count(),
                  static_cast<int>(count)));
  std::vector<std::vector<double>> partial(
      workers, std::vector<double>(net.params().size(), 0.0));
  std::vector<double> losses(workers, 0.0);
  const std::size_t chunk = (count + workers - 1) / workers;

  parallel_for(
      static_cast<std::size_t>(workers),
      [&](std::size_t w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        std::vector<LayerCache> caches;
        for (std::size_t i = lo; i < hi; ++i) {
          losses[w] += per_sample(i, caches, partial[w]);
        }
      },
      workers);

  double total = 0.0;
  for (int w = 0; w < workers; ++w) {
    total += losses[w];
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += partial[w][i];
  }
  return total / static_cast<double>(count);
}

}  // namespace

double batch_gradient_mse(const Net& net, std::span<const Tensor> xs,
                          std::span<const Eigen::VectorXd> targets,
                          std::span<const std::size_t> indices,
                          std::vector<double>& grad, int threads) {
  const double inv_b = 1.0 / static_cast<double>(indices.size());
  return batch_gradient(
      net, indices.size(), grad, threads,
      [&](std::size_t i, std::vector<LayerCache>& caches,
          std::vector<double>& g) {
        const std::size_t s = indices[i];
        const Tensor pred = net.forward(xs[s], caches);
        LossGrad lg = mse_loss(pred, targets[s]);
        for (double& v : lg.grad.data) v *= inv_b;
        net.backward(lg.grad, caches, g);
        return lg.value;
      });
}

double batch_gradient_ce(const Net& net, std::span<const Tensor> xs,
                         std::span<const int> labels,
                         std::span<const std::size_t> indices,
                         std::vector<double>& grad, int threads) {
  const double inv_b = 1.0 / static_cast<double>(indices.size());
  return batch_gradient(
      net, indices.size(), grad, threads,
      [&](std::size_t i, std::vector<LayerCache>& caches,
          std::vector<double>& g) {
        const std::size_t s = indices[i];
        const Tensor pred = net.forward(xs[s], caches);
        LossGrad lg = cross_entropy_loss(pred, labels[s]);
        for (double& v : lg.grad.data) v *= inv_b;
        net.backward(lg.grad, caches, g);
        return lg.value;
      });
}

// ---------------------------------------------------------------------------
// Gradient checks

namespace {

template <typename LossFn>
double grad_check_impl(Net& net, const Tensor& x, double epsilon, int n_checks,
                       std::uint64_t seed, LossFn&& loss_of_output) {
  if (!(epsilon >= 1e-6 && epsilon <= 1e-3)) {
    throw std::invalid_argument("grad_check: epsilon outside [1e-6, 1e-3]");
  }
  std::vector<LayerCache> caches;
  const Tensor pred = net.forward(x, caches);
  LossGrad lg = loss_of_output(pred);
  std::vector<double> grad(net.params().size(), 0.0);
  net.backward(lg.grad, caches, grad);

  const long total = net.param_count();
  std::vector<std::size_t> order(static_cast<std::size_t>(total));
  for (long i = 0; i < total; ++i) order[i] = static_cast<std::size_t>(i);
  Rng rng(seed);
  rng.shuffle(order);
  const long checks = std::min<long>(n_checks, total);

  double worst = 0.0;
  auto& params = net.params();
  for (long k = 0; k < checks; ++k) {
    const std::size_t idx = order[static_cast<std::size_t>(k)];
    const double saved = params[idx];
    params[idx] = saved + epsilon;
    const double up = loss_of_output(net.forward(x)).value;
    params[idx] = saved - epsilon;
    const double down = loss_of_output(net.forward(x)).value;
    params[idx] = saved;
    const double fd = (up - down) / (2.0 * epsilon);
    const double denom = std::max({std::abs(fd), std::abs(grad[idx]), 1e-8});
    worst = std::max(worst, std::abs(fd - grad[idx]) / denom);
  }
  return worst;
}

}  // namespace

double grad_check_mse(Net& net, const Tensor& x, const Eigen::VectorXd& target,
                      double epsilon, int n_checks, std::uint64_t seed) {
  return grad_check_impl(net, x, epsilon, n_checks, seed,
                         [&](const Tensor& pred) {
                           return mse_loss(pred, target);
                         });
}

double grad_check_ce(Net& net, const Tensor& x, int label, double epsilon,
                     int n_checks, std::uint64_t seed) {
  return grad_check_impl(net, x, epsilon, n_checks, seed,
                         [&](const Tensor& pred) {
                           return cross_entropy_loss(pred, label);
                         });
}

}  // namespace minsight::nn
