#ifndef HOMOG_SURROGATE_HPP
#define HOMOG_SURROGATE_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "homog/dataset.hpp"
#include "homog/tensor.hpp"

namespace homog {

/// One component function: a linear reduction y = A x + b feeding a single
/// tanh hidden layer, f(y) = sum_n c_n tanh(w_n . y + v_n) + v0.
struct ComponentNet {
  Eigen::MatrixXd A;  // d x D
  Eigen::VectorXd b;  // d
  Eigen::MatrixXd W;  // N x d, row n holds w_n
  Eigen::VectorXd v;  // N
  Eigen::VectorXd c;  // N
  double v0 = 0.0;

  int reduced_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(A.cols()); }
  int neurons() const { return static_cast<int>(c.size()); }
};

/// Input/output extrema of the training data; both are mapped affinely to
/// [-1,1] before the networks see them.
struct Normalization {
  Eigen::VectorXd x_min;
  Eigen::VectorXd x_max;
  double f_min = 0.0;
  double f_max = 1.0;
};

/// Sum of L component networks approximating the macro-energy density.
struct HdmrModel {
  int D = 4;
  int d = 4;
  int L = 0;
  std::vector<ComponentNet> components;
  Normalization norm;

  bool finite() const;
};

struct HdmrArch {
  int L;
  int d;
  int N;
};

struct TrainOptions {
  int lm_max_iter = 120;
  int lm_restarts = 3;
  int finetune_epochs = 1500;
  double val_fraction = 0.15;
  /// Early-stop threshold on validation RMSE in normalized units (0 = off).
  double val_rmse_tol = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainResult {
  HdmrModel model;
  double train_rmse = 0.0;  // normalized units
  double val_rmse = 0.0;    // normalized units
};

/// Energy value at a physical input (any dimension D).
double evaluate(const HdmrModel& model, const Eigen::VectorXd& x);
/// Exact first derivative with respect to the physical input.
Eigen::VectorXd gradient(const HdmrModel& model, const Eigen::VectorXd& x);
/// Exact, symmetric second derivative with respect to the physical input.
Eigen::MatrixXd hessian(const HdmrModel& model, const Eigen::VectorXd& x);

/// Convenience overloads for the plane-strain case D = 4 (row-major
/// flattening F11, F12, F21, F22).
double evaluate(const HdmrModel& model, const FlatVec4& x);
FlatVec4 gradient4(const HdmrModel& model, const FlatVec4& x);
Tensor4 hessian4(const HdmrModel& model, const FlatVec4& x);

/// Largest componentwise overshoot outside the training extrema, as a
/// fraction of the box width (0 when inside); the macro solver's
/// extrapolation warnings key off this.
double extrapolation_excess(const HdmrModel& model, const Eigen::VectorXd& x);

/// Greedy component-wise least squares (Levenberg-Marquardt per component
/// on the running residual), then a joint first-order fine-tune over all
/// weights. Deterministic for a fixed seed and dataset.
TrainResult train(const Dataset& data, const HdmrArch& arch,
                  const TrainOptions& opts);

/// JSON model files at full double precision; round-trips bit-exactly.
void save_model(const HdmrModel& model, const std::string& path);
HdmrModel load_model(const std::string& path);

}  // namespace homog

#endif
