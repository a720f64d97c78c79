#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "homog/errors.hpp"
#include "homog/rng.hpp"
#include "homog/surrogate.hpp"

namespace homog {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

int component_param_count(int D, int d, int N) {
  return d * D + d + N * d + 2 * N + 1;
}

// Parameter vector layout per component:
// [A row-major (d*D) | b (d) | W row-major (N*d) | v (N) | c (N) | v0]
void pack_component(const ComponentNet& cn, double* out) {
  const int d = cn.reduced_dim(), D = cn.input_dim(), N = cn.neurons();
  int k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < D; ++j) out[k++] = cn.A(i, j);
  for (int i = 0; i < d; ++i) out[k++] = cn.b[i];
  for (int n = 0; n < N; ++n)
    for (int j = 0; j < d; ++j) out[k++] = cn.W(n, j);
  for (int n = 0; n < N; ++n) out[k++] = cn.v[n];
  for (int n = 0; n < N; ++n) out[k++] = cn.c[n];
  out[k++] = cn.v0;
}

void unpack_component(const double* in, ComponentNet& cn) {
  const int d = cn.reduced_dim(), D = cn.input_dim(), N = cn.neurons();
  int k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < D; ++j) cn.A(i, j) = in[k++];
  for (int i = 0; i < d; ++i) cn.b[i] = in[k++];
  for (int n = 0; n < N; ++n)
    for (int j = 0; j < d; ++j) cn.W(n, j) = in[k++];
  for (int n = 0; n < N; ++n) cn.v[n] = in[k++];
  for (int n = 0; n < N; ++n) cn.c[n] = in[k++];
  cn.v0 = in[k++];
}

struct CompForward {
  MatrixXd Y;      // n x d
  MatrixXd T;      // n x N, tanh(q)
  VectorXd pred;   // n
};

CompForward comp_forward(const ComponentNet& cn, const MatrixXd& Xi) {
  CompForward f;
  f.Y.noalias() = Xi * cn.A.transpose();
  f.Y.rowwise() += cn.b.transpose();
  f.T.noalias() = f.Y * cn.W.transpose();
  f.T.rowwise() += cn.v.transpose();
  f.T = f.T.array().tanh();
  f.pred.noalias() = f.T * cn.c;
  f.pred.array() += cn.v0;
  return f;
}

// Dense Jacobian of the component prediction for rows [row0, row0+rows).
void comp_jacobian_rows(const ComponentNet& cn, const MatrixXd& Xi,
                        const CompForward& f, int row0, int rows,
                        MatrixXd& J) {
  const int d = cn.reduced_dim(), D = cn.input_dim(), N = cn.neurons();
  J.resize(rows, component_param_count(D, d, N));
  for (int r = 0; r < rows; ++r) {
    const int j = row0 + r;
    int k = 0;
    // G_n = c_n (1 - T^2), B = G^T W (length d)
    VectorXd G(N);
    for (int n = 0; n < N; ++n)
      G[n] = cn.c[n] * (1.0 - f.T(j, n) * f.T(j, n));
    const VectorXd B = cn.W.transpose() * G;
    for (int i = 0; i < d; ++i)
      for (int q = 0; q < D; ++q) J(r, k++) = B[i] * Xi(j, q);
    for (int i = 0; i < d; ++i) J(r, k++) = B[i];
    for (int n = 0; n < N; ++n)
      for (int i = 0; i < d; ++i) J(r, k++) = G[n] * f.Y(j, i);
    for (int n = 0; n < N; ++n) J(r, k++) = G[n];
    for (int n = 0; n < N; ++n) J(r, k++) = f.T(j, n);
    J(r, k++) = 1.0;
  }
}

ComponentNet init_component(int D, int d, int N, Rng& rng) {
  ComponentNet cn;
  MatrixXd G(D, d);
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < d; ++j) G(i, j) = rng.normal();
  Eigen::HouseholderQR<MatrixXd> qr(G);
  const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(D, d);
  cn.A = Q.transpose();
  cn.b = VectorXd::Zero(d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  cn.W.resize(N, d);
  for (int n = 0; n < N; ++n)
    for (int j = 0; j < d; ++j) cn.W(n, j) = rng.uniform(-1.0, 1.0) * scale;
  cn.v.resize(N);
  for (int n = 0; n < N; ++n) cn.v[n] = rng.uniform(-1.0, 1.0) * scale;
  cn.c = VectorXd::Zero(N);
  cn.v0 = 0.0;
  return cn;
}

// Linear least squares for the output layer (c, v0) at fixed hidden
// weights; gives every restart a reasonable starting loss.
void lsq_output_layer(ComponentNet& cn, const MatrixXd& Xi,
                      const VectorXd& target) {
  const CompForward f = comp_forward(cn, Xi);
  const int n = static_cast<int>(Xi.rows()), N = cn.neurons();
  MatrixXd M(n, N + 1);
  M.leftCols(N) = f.T;
  M.col(N).setOnes();
  const VectorXd z = M.colPivHouseholderQr().solve(target);
  cn.c = z.head(N);
  cn.v0 = z[N];
}

double component_sse(const ComponentNet& cn, const MatrixXd& Xi,
                     const VectorXd& target) {
  const CompForward f = comp_forward(cn, Xi);
  return (f.pred - target).squaredNorm();
}

// Levenberg-Marquardt on one component against the running residual.
double lm_fit(ComponentNet& cn, const MatrixXd& Xi, const VectorXd& target,
              int max_iter) {
  const int n = static_cast<int>(Xi.rows());
  const int P = component_param_count(cn.input_dim(), cn.reduced_dim(),
                                      cn.neurons());
  VectorXd theta(P);
  pack_component(cn, theta.data());

  double sse = component_sse(cn, Xi, target);
  if (!std::isfinite(sse))
    throw TrainingDiverged("lm_fit: non-finite initial loss");

  double lambda = 1e-3;
  int stagnant = 0;
  constexpr int kChunk = 512;
  MatrixXd JtJ(P, P), Jchunk;
  VectorXd Jte(P);

  for (int it = 0; it < max_iter; ++it) {
    const CompForward f = comp_forward(cn, Xi);
    const VectorXd e = f.pred - target;
    JtJ.setZero();
    Jte.setZero();
    for (int row0 = 0; row0 < n; row0 += kChunk) {
      const int rows = std::min(kChunk, n - row0);
      comp_jacobian_rows(cn, Xi, f, row0, rows, Jchunk);
      JtJ.selfadjointView<Eigen::Lower>().rankUpdate(Jchunk.transpose());
      Jte.noalias() += Jchunk.transpose() * e.segment(row0, rows);
    }
    JtJ = JtJ.selfadjointView<Eigen::Lower>();

    bool accepted = false;
    for (int attempt = 0; attempt < 10; ++attempt) {
      MatrixXd Alm = JtJ;
      for (int i = 0; i < P; ++i)
        Alm(i, i) += lambda * std::max(JtJ(i, i), 1e-12);
      const VectorXd step = Alm.ldlt().solve(-Jte);
      ComponentNet trial = cn;
      VectorXd theta_trial = theta + step;
      unpack_component(theta_trial.data(), trial);
      const double sse_trial = component_sse(trial, Xi, target);
      if (std::isfinite(sse_trial) && sse_trial < sse) {
        const double gain = (sse - sse_trial) / std::max(sse, 1e-300);
        cn = std::move(trial);
        theta = std::move(theta_trial);
        sse = sse_trial;
        lambda = std::max(lambda / 3.0, 1e-12);
        stagnant = gain < 1e-12 ? stagnant + 1 : 0;
        accepted = true;
        break;
      }
      lambda *= 4.0;
      if (lambda > 1e12) break;
    }
    if (!accepted || stagnant >= 4 || lambda > 1e12) break;
  }
  return sse;
}

struct Normalized {
  MatrixXd Xi;     // n x D in [-1,1]
  VectorXd g;      // n in [-1,1]
};

Normalized normalize_records(const std::vector<EnergyRecord>& records,
                             const Normalization& norm, int D) {
  Normalized out;
  const int n = static_cast<int>(records.size());
  out.Xi.resize(n, D);
  out.g.resize(n);
  const double df = norm.f_max - norm.f_min;
  for (int j = 0; j < n; ++j) {
    for (int r = 0; r < D; ++r) {
      const double dx = norm.x_max[r] - norm.x_min[r];
      out.Xi(j, r) = 2.0 * (records[j].input[r] - norm.x_min[r]) / dx - 1.0;
    }
    out.g[j] = 2.0 * (records[j].psi - norm.f_min) / df - 1.0;
  }
  return out;
}

VectorXd model_predict(const HdmrModel& m, const MatrixXd& Xi) {
  VectorXd pred = VectorXd::Zero(Xi.rows());
  for (const auto& cn : m.components) pred += comp_forward(cn, Xi).pred;
  return pred;
}

double rmse(const VectorXd& a, const VectorXd& b) {
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

// Joint full-batch Adam pass over all component weights.
void finetune(HdmrModel& m, const MatrixXd& Xi, const VectorXd& target,
              const Normalized& val, const TrainOptions& opts) {
  if (opts.finetune_epochs == 0) return;
  const int n = static_cast<int>(Xi.rows());
  std::vector<int> offsets;
  int P = 0;
  for (const auto& cn : m.components) {
    offsets.push_back(P);
    P += component_param_count(cn.input_dim(), cn.reduced_dim(), cn.neurons());
  }
  VectorXd theta(P);
  for (std::size_t i = 0; i < m.components.size(); ++i)
    pack_component(m.components[i], theta.data() + offsets[i]);

  VectorXd mom = VectorXd::Zero(P), vel = VectorXd::Zero(P), grad(P);
  VectorXd best_theta = theta;
  double best_rmse = rmse(model_predict(m, Xi), target);

  const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  double lr = 2e-3;
  const int quarter = std::max(1, opts.finetune_epochs / 4);

  for (int epoch = 1; epoch <= opts.finetune_epochs; ++epoch) {
    if (epoch % quarter == 0) lr *= 0.5;

    std::vector<CompForward> fwd;
    fwd.reserve(m.components.size());
    VectorXd pred = VectorXd::Zero(n);
    for (const auto& cn : m.components) {
      fwd.push_back(comp_forward(cn, Xi));
      pred += fwd.back().pred;
    }
    const VectorXd e = pred - target;
    const double loss = e.squaredNorm() / n;
    if (!std::isfinite(loss))
      throw TrainingDiverged("finetune: non-finite loss at epoch " +
                             std::to_string(epoch));

    grad.setZero();
    const double w = 2.0 / n;
    for (std::size_t ci = 0; ci < m.components.size(); ++ci) {
      const ComponentNet& cn = m.components[ci];
      const CompForward& f = fwd[ci];
      const int d = cn.reduced_dim(), D = cn.input_dim(), N = cn.neurons();
      // G = (1 - T^2) * c, columnwise; B = G W
      MatrixXd G = (1.0 - f.T.array().square()).matrix();
      for (int nn = 0; nn < N; ++nn) G.col(nn) *= cn.c[nn];
      const MatrixXd B = G * cn.W;                       // n x d
      const MatrixXd Be = B.transpose() * e.asDiagonal();  // d x n
      double* gp = grad.data() + offsets[ci];
      int k = 0;
      const MatrixXd gA = Be * Xi;                       // d x D
      for (int i = 0; i < d; ++i)
        for (int q = 0; q < D; ++q) gp[k++] = w * gA(i, q);
      const VectorXd gb = B.transpose() * e;
      for (int i = 0; i < d; ++i) gp[k++] = w * gb[i];
      const MatrixXd gW = (G.transpose() * e.asDiagonal()) * f.Y;  // N x d
      for (int nn = 0; nn < N; ++nn)
        for (int i = 0; i < d; ++i) gp[k++] = w * gW(nn, i);
      const VectorXd gv = G.transpose() * e;
      for (int nn = 0; nn < N; ++nn) gp[k++] = w * gv[nn];
      const VectorXd gc = f.T.transpose() * e;
      for (int nn = 0; nn < N; ++nn) gp[k++] = w * gc[nn];
      gp[k++] = w * e.sum();
    }

    const double bc1 = 1.0 - std::pow(beta1, epoch);
    const double bc2 = 1.0 - std::pow(beta2, epoch);
    for (int i = 0; i < P; ++i) {
      mom[i] = beta1 * mom[i] + (1.0 - beta1) * grad[i];
      vel[i] = beta2 * vel[i] + (1.0 - beta2) * grad[i] * grad[i];
      theta[i] -= lr * (mom[i] / bc1) / (std::sqrt(vel[i] / bc2) + adam_eps);
    }
    for (std::size_t i = 0; i < m.components.size(); ++i)
      unpack_component(theta.data() + offsets[i], m.components[i]);

    const double train_rmse = rmse(model_predict(m, Xi), target);
    if (train_rmse < best_rmse) {
      best_rmse = train_rmse;
      best_theta = theta;
    }
    if (opts.val_rmse_tol > 0.0 && val.g.size() > 0 && epoch % 25 == 0) {
      if (rmse(model_predict(m, val.Xi), val.g) < opts.val_rmse_tol) break;
    }
  }

  for (std::size_t i = 0; i < m.components.size(); ++i)
    unpack_component(best_theta.data() + offsets[i], m.components[i]);
}

}  // namespace

TrainResult train(const Dataset& data, const HdmrArch& arch,
                  const TrainOptions& opts) {
  opts.validate();
  const int D = data.input_dim;
  if (arch.L < 1 || arch.N < 1 || arch.d < 1 || arch.d > D)
    throw std::invalid_argument("train: need L, N >= 1 and 1 <= d <= D");
  if (data.records.empty()) throw InsufficientData("train: empty dataset");
  for (const auto& rec : data.records) {
    if (static_cast<int>(rec.input.size()) != D)
      throw std::invalid_argument("train: record dimension mismatch");
    bool finite = std::isfinite(rec.psi);
    for (double x : rec.input) finite = finite && std::isfinite(x);
    if (!finite) throw std::invalid_argument("train: non-finite record");
  }
  const long total_weights =
      static_cast<long>(arch.L) * component_param_count(D, arch.d, arch.N);
  if (static_cast<long>(data.records.size()) < total_weights / 2)
    throw InsufficientData("train: " + std::to_string(data.records.size()) +
                           " records for " + std::to_string(total_weights) +
                           " weights");

  const auto [train_set, val_set] =
      split(data, 1.0 - opts.val_fraction, derive_seed(opts.seed, "val"));

  HdmrModel model;
  model.D = D;
  model.d = arch.d;
  model.L = arch.L;

  // Normalization from training-data extrema. Zero-width ranges (constant
  // inputs or outputs) fall back to unit width so the maps stay affine.
  model.norm.x_min.resize(D);
  model.norm.x_max.resize(D);
  for (int r = 0; r < D; ++r) {
    double lo = 1e300, hi = -1e300;
    for (const auto& rec : train_set.records) {
      lo = std::min(lo, rec.input[r]);
      hi = std::max(hi, rec.input[r]);
    }
    if (!(hi > lo)) hi = lo + 1.0;
    model.norm.x_min[r] = lo;
    model.norm.x_max[r] = hi;
  }
  {
    double lo = 1e300, hi = -1e300;
    for (const auto& rec : train_set.records) {
      lo = std::min(lo, rec.psi);
      hi = std::max(hi, rec.psi);
    }
    if (!(hi > lo)) hi = lo + 1.0;
    model.norm.f_min = lo;
    model.norm.f_max = hi;
  }

  const Normalized tr = normalize_records(train_set.records, model.norm, D);
  const Normalized va = val_set.records.empty()
                            ? Normalized{}
                            : normalize_records(val_set.records, model.norm, D);

  // Greedy stage: each component chases the residual left by its
  // predecessors; the best of a few seeded restarts wins.
  VectorXd residual = tr.g;
  for (int ci = 0; ci < arch.L; ++ci) {
    ComponentNet best;
    double best_sse = std::numeric_limits<double>::infinity();
    for (int ri = 0; ri < opts.lm_restarts; ++ri) {
      Rng rng(derive_seed(opts.seed, "component." + std::to_string(ci) +
                                         ".restart." + std::to_string(ri)));
      ComponentNet cn = init_component(D, arch.d, arch.N, rng);
      lsq_output_layer(cn, tr.Xi, residual);
      const double sse = lm_fit(cn, tr.Xi, residual, opts.lm_max_iter);
      if (sse < best_sse) {
        best_sse = sse;
        best = std::move(cn);
      }
    }
    residual -= comp_forward(best, tr.Xi).pred;
    model.components.push_back(std::move(best));
  }

  finetune(model, tr.Xi, tr.g, va, opts);

  if (!model.finite()) throw TrainingDiverged("train: non-finite weights");

  TrainResult result;
  result.train_rmse = rmse(model_predict(model, tr.Xi), tr.g);
  result.val_rmse = va.g.size() > 0
                        ? rmse(model_predict(model, va.Xi), va.g)
                        : result.train_rmse;
  result.model = std::move(model);
  return result;
}

}  // namespace homog
