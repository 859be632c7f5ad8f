#include "mpe/mlp.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mpe/rng.hpp"

namespace mpe {

namespace {

constexpr std::uint64_t kInitPurpose = 21;
constexpr std::uint64_t kShufflePurpose = 22;

struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  // max(sd, tiny) so constant columns stay finite

  static Standardizer fit(const Eigen::MatrixXd& X) {
    Standardizer s;
    const double n = static_cast<double>(X.rows());
    s.mean = X.colwise().mean();
    Eigen::VectorXd var =
        (X.rowwise() - s.mean.transpose()).array().square().colwise().sum() / n;
    s.scale = var.array().sqrt().max(1e-12);
    return s;
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const {
    return (X.rowwise() - mean.transpose()).array().rowwise() /
           scale.transpose().array();
  }
};

// Folds input standardization into the first layer and an affine output map
// into the last, so the net consumes raw inputs and emits raw outputs.
void reparameterize(Mlp& net, const Standardizer& in, double y_scale,
                    double y_mean) {
  auto& layers = net.layers();
  Eigen::ArrayXd inv_scale = in.scale.array().inverse();
  Eigen::VectorXd shifted = (in.mean.array() * inv_scale).matrix();
  layers.front().b -= layers.front().W * shifted;
  layers.front().W = layers.front().W.array().rowwise() *
                     inv_scale.transpose().array();
  layers.back().W *= y_scale;
  layers.back().b = y_scale * layers.back().b.array() + y_mean;
}

// Forward pass caching activations; activations[0] is the input batch.
void forward_cached(const Mlp& net, const Eigen::MatrixXd& X,
                    std::vector<Eigen::MatrixXd>& activations) {
  const auto& layers = net.layers();
  activations.resize(layers.size() + 1);
  activations[0] = X;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Eigen::MatrixXd z =
        (activations[l] * layers[l].W.transpose()).rowwise() +
        layers[l].b.transpose();
    activations[l + 1] =
        (l + 1 < layers.size()) ? z.array().tanh().matrix() : std::move(z);
  }
}

// Backprop of per-sample output gradients g into flat parameter grads.
void backward(const Mlp& net, const std::vector<Eigen::MatrixXd>& activations,
              const Eigen::VectorXd& g, Eigen::VectorXd& grad) {
  const auto& layers = net.layers();
  Eigen::MatrixXd delta = g;  // (B, 1)
  // Offsets of each layer's parameters in the flat vector.
  std::vector<int> offsets(layers.size());
  int off = 0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    offsets[l] = off;
    off += static_cast<int>(layers[l].W.size() + layers[l].b.size());
  }
  for (std::size_t li = layers.size(); li-- > 0;) {
    const auto& layer = layers[li];
    Eigen::MatrixXd dW = delta.transpose() * activations[li];
    Eigen::VectorXd db = delta.colwise().sum();
    Eigen::Map<Eigen::VectorXd>(grad.data() + offsets[li], dW.size()) +=
        Eigen::Map<Eigen::VectorXd>(dW.data(), dW.size());
    grad.segment(offsets[li] + dW.size(), db.size()) += db;
    if (li > 0) {
      delta = ((delta * layer.W).array() *
               (1.0 - activations[li].array().square()))
                  .matrix();
    }
  }
}

Eigen::VectorXd output_grad_mse(const Eigen::VectorXd& pred,
                                const Eigen::VectorXd& y) {
  return 2.0 * (pred - y) / static_cast<double>(pred.size());
}

std::vector<int> shuffled_indices(int n, std::uint64_t seed,
                                  std::uint64_t epoch) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  KeyedStream rng(seed, epoch, 0, kShufflePurpose);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.next_u64() %
                                   static_cast<std::uint64_t>(i + 1));
    std::swap(idx[static_cast<std::size_t>(i)],
              idx[static_cast<std::size_t>(j)]);
  }
  return idx;
}

}  // namespace

Mlp::Mlp(int input_dim, const std::vector<int>& hidden, std::uint64_t seed)
    : input_dim_(input_dim) {
  if (input_dim < 1) throw std::invalid_argument("Mlp: input_dim must be >= 1");
  std::vector<int> sizes;
  sizes.push_back(input_dim);
  for (int h : hidden) {
    if (h < 1) throw std::invalid_argument("Mlp: hidden width must be >= 1");
    sizes.push_back(h);
  }
  sizes.push_back(1);
  layers_.resize(sizes.size() - 1);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l];
    const int out = sizes[l + 1];
    KeyedStream rng(seed, static_cast<std::uint64_t>(l), 0, kInitPurpose);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    layers_[l].W.resize(out, in);
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) {
        layers_[l].W(r, c) = bound * (2.0 * rng.uniform01() - 1.0);
      }
    }
    layers_[l].b = Eigen::VectorXd::Zero(out);
  }
}

double Mlp::forward(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != input_dim_) {
    throw std::invalid_argument("Mlp::forward: input dimension mismatch");
  }
  Eigen::VectorXd a =
      Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<int>(x.size()));
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::VectorXd z = layers_[l].W * a + layers_[l].b;
    a = (l + 1 < layers_.size()) ? z.array().tanh().matrix() : std::move(z);
  }
  return a(0);
}

Eigen::VectorXd Mlp::forward_batch(const Eigen::MatrixXd& X) const {
  if (static_cast<int>(X.cols()) != input_dim_) {
    throw std::invalid_argument("Mlp::forward_batch: input dimension mismatch");
  }
  std::vector<Eigen::MatrixXd> acts;
  forward_cached(*this, X, acts);
  return acts.back().col(0);
}

int Mlp::num_parameters() const {
  int n = 0;
  for (const auto& layer : layers_) {
    n += static_cast<int>(layer.W.size() + layer.b.size());
  }
  return n;
}

Eigen::VectorXd Mlp::parameters() const {
  Eigen::VectorXd theta(num_parameters());
  int off = 0;
  for (const auto& layer : layers_) {
    theta.segment(off, layer.W.size()) =
        Eigen::Map<const Eigen::VectorXd>(layer.W.data(), layer.W.size());
    off += static_cast<int>(layer.W.size());
    theta.segment(off, layer.b.size()) = layer.b;
    off += static_cast<int>(layer.b.size());
  }
  return theta;
}

void Mlp::set_parameters(const Eigen::VectorXd& theta) {
  if (theta.size() != num_parameters()) {
    throw std::invalid_argument("Mlp::set_parameters: size mismatch");
  }
  int off = 0;
  for (auto& layer : layers_) {
    Eigen::Map<Eigen::VectorXd>(layer.W.data(), layer.W.size()) =
        theta.segment(off, layer.W.size());
    off += static_cast<int>(layer.W.size());
    layer.b = theta.segment(off, layer.b.size());
    off += static_cast<int>(layer.b.size());
  }
}

std::string Mlp::to_json() const {
  nlohmann::json j;
  j["input_dim"] = input_dim_;
  std::vector<int> hidden;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    hidden.push_back(static_cast<int>(layers_[l].W.rows()));
  }
  j["hidden"] = hidden;
  const Eigen::VectorXd theta = parameters();
  j["parameters"] = std::vector<double>(theta.data(), theta.data() + theta.size());
  return j.dump();
}

Mlp Mlp::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Mlp net(j.at("input_dim").get<int>(), j.at("hidden").get<std::vector<int>>(),
          0);
  const auto params = j.at("parameters").get<std::vector<double>>();
  net.set_parameters(Eigen::Map<const Eigen::VectorXd>(
      params.data(), static_cast<int>(params.size())));
  return net;
}

double mse_loss(const Mlp& net, const Eigen::MatrixXd& X,
                const Eigen::VectorXd& y) {
  return (net.forward_batch(X) - y).squaredNorm() /
         static_cast<double>(X.rows());
}

double riesz_objective(const Mlp& net, const Eigen::MatrixXd& X,
                       int action_index, double delta) {
  const Eigen::VectorXd h = net.forward_batch(X);
  Eigen::MatrixXd Xp = X;
  Eigen::MatrixXd Xm = X;
  Xp.col(action_index).array() += delta;
  Xm.col(action_index).array() -= delta;
  const Eigen::VectorXd dh =
      (net.forward_batch(Xp) - net.forward_batch(Xm)) / (2.0 * delta);
  const double n = static_cast<double>(X.rows());
  return h.squaredNorm() / n - 2.0 * dh.sum() / n;
}

double regression_loss_grad(const Mlp& net, const Eigen::MatrixXd& X,
                            const Eigen::VectorXd& y, Eigen::VectorXd* grad) {
  std::vector<Eigen::MatrixXd> acts;
  forward_cached(net, X, acts);
  const Eigen::VectorXd pred = acts.back().col(0);
  if (grad != nullptr) {
    grad->setZero(net.num_parameters());
    backward(net, acts, output_grad_mse(pred, y), *grad);
  }
  return (pred - y).squaredNorm() / static_cast<double>(X.rows());
}

double riesz_loss_grad(const Mlp& net, const Eigen::MatrixXd& X,
                       int action_index, double delta, Eigen::VectorXd* grad) {
  const int b = static_cast<int>(X.rows());
  Eigen::MatrixXd stacked(3 * b, X.cols());
  stacked.topRows(b) = X;
  stacked.middleRows(b, b) = X;
  stacked.middleRows(b, b).col(action_index).array() += delta;
  stacked.bottomRows(b) = X;
  stacked.bottomRows(b).col(action_index).array() -= delta;

  std::vector<Eigen::MatrixXd> acts;
  forward_cached(net, stacked, acts);
  const Eigen::VectorXd out = acts.back().col(0);
  const Eigen::VectorXd h = out.head(b);
  const Eigen::VectorXd hp = out.segment(b, b);
  const Eigen::VectorXd hm = out.tail(b);

  const double n = static_cast<double>(b);
  const double loss =
      h.squaredNorm() / n - (hp - hm).sum() / (delta * n);

  if (grad != nullptr) {
    Eigen::VectorXd g(3 * b);
    g.head(b) = 2.0 * h / n;
    g.segment(b, b).setConstant(-1.0 / (delta * n));
    g.tail(b).setConstant(1.0 / (delta * n));
    grad->setZero(net.num_parameters());
    backward(net, acts, g, *grad);
  }
  return loss;
}

namespace {

// Shared SGD loop; step(batch_rows, grad_out) returns the batch loss.
template <typename StepFn>
void sgd_loop(Mlp& net, int n, const TrainConfig& cfg, StepFn step) {
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(net.num_parameters());
  Eigen::VectorXd grad(net.num_parameters());
  const int batch = std::min(cfg.batch_size, n);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order =
        shuffled_indices(n, cfg.seed, static_cast<std::uint64_t>(epoch));
    double epoch_loss = 0.0;
    int batches = 0;
    for (int start = 0; start + batch <= n; start += batch) {
      epoch_loss += step(std::span<const int>(order.data() + start,
                                              static_cast<std::size_t>(batch)),
                         grad);
      ++batches;
      velocity = cfg.momentum * velocity - cfg.learning_rate * grad;
      Eigen::VectorXd theta = net.parameters() + velocity;
      net.set_parameters(theta);
    }
    if (batches > 0 && !std::isfinite(epoch_loss)) {
      std::ostringstream msg;
      msg << "training diverged: non-finite loss at epoch " << epoch;
      throw std::runtime_error(msg.str());
    }
  }
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& X, std::span<const int> idx) {
  Eigen::MatrixXd out(static_cast<int>(idx.size()), X.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.row(static_cast<int>(r)) = X.row(idx[r]);
  }
  return out;
}

}  // namespace

Mlp train_regression(Mlp net, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const TrainConfig& cfg) {
  if (X.rows() != y.size()) {
    throw std::invalid_argument("train_regression: inputs/targets mismatch");
  }
  if (X.rows() < cfg.batch_size && cfg.epochs > 0 && X.rows() < 1) {
    throw std::invalid_argument("train_regression: empty training set");
  }
  if (cfg.epochs == 0) return net;

  Standardizer in = Standardizer::fit(X);
  Eigen::MatrixXd Xs = cfg.standardize_inputs
                           ? in.apply(X)
                           : X;
  const double y_mean = y.mean();
  const double y_sd = std::max(
      std::sqrt((y.array() - y_mean).square().sum() /
                static_cast<double>(y.size())),
      1e-12);
  Eigen::VectorXd ys = (y.array() - y_mean) / y_sd;

  sgd_loop(net, static_cast<int>(Xs.rows()), cfg,
           [&](std::span<const int> idx, Eigen::VectorXd& grad) {
             Eigen::MatrixXd xb = gather_rows(Xs, idx);
             Eigen::VectorXd yb(static_cast<int>(idx.size()));
             for (std::size_t r = 0; r < idx.size(); ++r) {
               yb(static_cast<int>(r)) = ys(idx[r]);
             }
             return regression_loss_grad(net, xb, yb, &grad);
           });

  if (cfg.standardize_inputs) {
    reparameterize(net, in, y_sd, y_mean);
  } else {
    Standardizer id;
    id.mean = Eigen::VectorXd::Zero(X.cols());
    id.scale = Eigen::VectorXd::Ones(X.cols());
    reparameterize(net, id, y_sd, y_mean);
  }
  return net;
}

Mlp train_riesz(Mlp net, const Eigen::MatrixXd& X, int action_index,
                const TrainConfig& cfg) {
  if (action_index < 0 || action_index >= X.cols()) {
    throw std::invalid_argument("train_riesz: action index out of range");
  }
  if (!(cfg.fd_step_riesz > 0.0)) {
    throw std::invalid_argument("train_riesz: fd_step_riesz must be positive");
  }
  if (cfg.epochs == 0) return net;

  Standardizer in = Standardizer::fit(X);
  Eigen::MatrixXd Xs = cfg.standardize_inputs ? in.apply(X) : X;
  // The finite-difference step is declared in raw action units; in
  // standardized coordinates it shrinks by the action column scale.
  const double delta_std = cfg.standardize_inputs
                               ? cfg.fd_step_riesz / in.scale(action_index)
                               : cfg.fd_step_riesz;

  sgd_loop(net, static_cast<int>(Xs.rows()), cfg,
           [&](std::span<const int> idx, Eigen::VectorXd& grad) {
             Eigen::MatrixXd xb = gather_rows(Xs, idx);
             return riesz_loss_grad(net, xb, action_index, delta_std, &grad);
           });

  if (cfg.standardize_inputs) {
    reparameterize(net, in, 1.0, 0.0);
  }
  return net;
}

double fd_partial_action(const std::function<double(std::span<const double>)>& f,
                         std::span<const double> x, int action_index,
                         double delta, std::optional<ActionBounds> bounds) {
  if (!(delta > 0.0)) {
    throw std::invalid_argument("fd_partial_action: delta must be positive");
  }
  std::vector<double> buf(x.begin(), x.end());
  const double a = buf[static_cast<std::size_t>(action_index)];
  bool up_ok = true;
  bool down_ok = true;
  if (bounds) {
    up_ok = a + delta <= bounds->hi;
    down_ok = a - delta >= bounds->lo;
    if (!up_ok && !down_ok) {
      throw std::invalid_argument(
          "fd_partial_action: bounds narrower than the step");
    }
  }
  auto eval_at = [&](double v) {
    buf[static_cast<std::size_t>(action_index)] = v;
    return f(buf);
  };
  if (up_ok && down_ok) {
    return (eval_at(a + delta) - eval_at(a - delta)) / (2.0 * delta);
  }
  if (up_ok) {
    return (eval_at(a + delta) - eval_at(a)) / delta;
  }
  return (eval_at(a) - eval_at(a - delta)) / delta;
}

}  // namespace mpe
