#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mpe/policy_paths.hpp"

namespace mpe {

// ---------------------------------------------------------------------------
// Small feedforward network: tanh hidden layers, linear scalar output,
// mini-batch SGD with momentum. Supports squared-error regression and the
// Riesz variational objective
//   E_n[h(S,A)^2] - 2 E_n[d/da h(S,A)]
// with the action derivative taken by symmetric finite differences.
// ---------------------------------------------------------------------------

struct TrainConfig {
  int epochs = 200;
  int batch_size = 128;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  std::uint64_t seed = 1;
  bool standardize_inputs = true;
  double fd_step_riesz = 0.05;  // raw action units
  std::vector<int> hidden = {64, 64};
};

class Mlp {
 public:
  struct Layer {
    Eigen::MatrixXd W;  // (out, in)
    Eigen::VectorXd b;  // (out)
  };

  Mlp() = default;
  // Fan-in scaled uniform init, deterministic in seed.
  Mlp(int input_dim, const std::vector<int>& hidden, std::uint64_t seed);

  int input_dim() const { return input_dim_; }

  double forward(std::span<const double> x) const;

  // Rows of X are samples; returns one output per row.
  Eigen::VectorXd forward_batch(const Eigen::MatrixXd& X) const;

  int num_parameters() const;
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& theta);

  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  // Flat checkpoint: layer sizes header plus parameter array (JSON).
  std::string to_json() const;
  static Mlp from_json(const std::string& text);

 private:
  int input_dim_ = 0;
  std::vector<Layer> layers_;
};

// Mean squared error over the sample.
double mse_loss(const Mlp& net, const Eigen::MatrixXd& X,
                const Eigen::VectorXd& y);

// Riesz objective E_n[h^2] - 2 E_n[fd_a h] with symmetric differences of step
// delta in the action coordinate.
double riesz_objective(const Mlp& net, const Eigen::MatrixXd& X,
                       int action_index, double delta);

// Loss value plus gradient w.r.t. the flattened parameters; exposed so tests
// can check backpropagation against finite differences.
double regression_loss_grad(const Mlp& net, const Eigen::MatrixXd& X,
                            const Eigen::VectorXd& y, Eigen::VectorXd* grad);
double riesz_loss_grad(const Mlp& net, const Eigen::MatrixXd& X,
                       int action_index, double delta, Eigen::VectorXd* grad);

// SGD training. Inputs (and regression targets) are standardized internally
// on the given sample when cfg.standardize_inputs is set; the returned net is
// reparameterized back to raw coordinates, so callers always evaluate it on
// raw inputs. epochs == 0 returns the net unchanged. Throws std::runtime_error
// on a non-finite loss.
Mlp train_regression(Mlp net, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const TrainConfig& cfg);
Mlp train_riesz(Mlp net, const Eigen::MatrixXd& X, int action_index,
                const TrainConfig& cfg);

// Central finite-difference partial derivative in the action coordinate,
// falling back to a one-sided difference of the same step next to a declared
// action bound.
double fd_partial_action(const std::function<double(std::span<const double>)>& f,
                         std::span<const double> x, int action_index,
                         double delta,
                         std::optional<ActionBounds> bounds = std::nullopt);

}  // namespace mpe
