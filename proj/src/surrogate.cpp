#include "homog/surrogate.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "homog/errors.hpp"

namespace homog {

using nlohmann::json;

bool HdmrModel::finite() const {
  auto ok = [](const Eigen::MatrixXd& m) { return m.allFinite(); };
  if (!std::isfinite(norm.f_min) || !std::isfinite(norm.f_max)) return false;
  if (!ok(norm.x_min) || !ok(norm.x_max)) return false;
  for (const auto& cn : components) {
    if (!ok(cn.A) || !ok(cn.b) || !ok(cn.W) || !ok(cn.v) || !ok(cn.c) ||
        !std::isfinite(cn.v0))
      return false;
  }
  return true;
}

void TrainOptions::validate() const {
  if (lm_max_iter < 1 || lm_restarts < 1 || finetune_epochs < 0 ||
      !(val_fraction > 0.0) || !(val_fraction < 1.0) || val_rmse_tol < 0.0)
    throw std::invalid_argument("TrainOptions: invalid settings");
}

namespace detail_surrogate {

Eigen::VectorXd normalize_input(const Normalization& n,
                                const Eigen::VectorXd& x) {
  Eigen::VectorXd xi(x.size());
  for (Eigen::Index r = 0; r < x.size(); ++r) {
    const double dx = n.x_max[r] - n.x_min[r];
    xi[r] = 2.0 * (x[r] - n.x_min[r]) / dx - 1.0;
  }
  return xi;
}

double g_value(const HdmrModel& m, const Eigen::VectorXd& xi) {
  double g = 0.0;
  for (const auto& cn : m.components) {
    const Eigen::VectorXd y = cn.A * xi + cn.b;
    const Eigen::VectorXd q = cn.W * y + cn.v;
    g += cn.v0;
    for (Eigen::Index n = 0; n < q.size(); ++n)
      g += cn.c[n] * std::tanh(q[n]);
  }
  return g;
}

Eigen::VectorXd g_gradient(const HdmrModel& m, const Eigen::VectorXd& xi) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(m.D);
  for (const auto& cn : m.components) {
    const Eigen::VectorXd y = cn.A * xi + cn.b;
    const Eigen::VectorXd q = cn.W * y + cn.v;
    // dg/dxi = sum_n c_n (1 - tanh^2 q_n) A^T w_n
    Eigen::VectorXd s(q.size());
    for (Eigen::Index n = 0; n < q.size(); ++n) {
      const double t = std::tanh(q[n]);
      s[n] = cn.c[n] * (1.0 - t * t);
    }
    grad.noalias() += cn.A.transpose() * (cn.W.transpose() * s);
  }
  return grad;
}

Eigen::MatrixXd g_hessian(const HdmrModel& m, const Eigen::VectorXd& xi) {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m.D, m.D);
  for (const auto& cn : m.components) {
    const Eigen::VectorXd y = cn.A * xi + cn.b;
    const Eigen::VectorXd q = cn.W * y + cn.v;
    const Eigen::MatrixXd U = cn.W * cn.A;  // N x D, row n = w_n^T A
    for (Eigen::Index n = 0; n < q.size(); ++n) {
      const double t = std::tanh(q[n]);
      const double w = 2.0 * cn.c[n] * t * (t * t - 1.0);  // c sigma''(q)
      H.noalias() += w * (U.row(n).transpose() * U.row(n));
    }
  }
  return H;
}

}  // namespace detail_surrogate

using namespace detail_surrogate;

double evaluate(const HdmrModel& model, const Eigen::VectorXd& x) {
  const Eigen::VectorXd xi = normalize_input(model.norm, x);
  const double df = model.norm.f_max - model.norm.f_min;
  return 0.5 * df * (g_value(model, xi) + 1.0) + model.norm.f_min;
}

Eigen::VectorXd gradient(const HdmrModel& model, const Eigen::VectorXd& x) {
  const Eigen::VectorXd xi = normalize_input(model.norm, x);
  const double df = model.norm.f_max - model.norm.f_min;
  Eigen::VectorXd grad = g_gradient(model, xi);
  for (Eigen::Index r = 0; r < grad.size(); ++r)
    grad[r] *= df / (model.norm.x_max[r] - model.norm.x_min[r]);
  return grad;
}

Eigen::MatrixXd hessian(const HdmrModel& model, const Eigen::VectorXd& x) {
  const Eigen::VectorXd xi = normalize_input(model.norm, x);
  const double df = model.norm.f_max - model.norm.f_min;
  Eigen::MatrixXd H = g_hessian(model, xi);
  for (Eigen::Index r = 0; r < H.rows(); ++r)
    for (Eigen::Index s = 0; s < H.cols(); ++s)
      H(r, s) *= 2.0 * df /
                 ((model.norm.x_max[r] - model.norm.x_min[r]) *
                  (model.norm.x_max[s] - model.norm.x_min[s]));
  return H;
}

double evaluate(const HdmrModel& model, const FlatVec4& x) {
  return evaluate(model, Eigen::Map<const Eigen::Vector4d>(x.data()));
}

FlatVec4 gradient4(const HdmrModel& model, const FlatVec4& x) {
  const Eigen::VectorXd g =
      gradient(model, Eigen::Map<const Eigen::Vector4d>(x.data()));
  return {g[0], g[1], g[2], g[3]};
}

Tensor4 hessian4(const HdmrModel& model, const FlatVec4& x) {
  const Eigen::MatrixXd H =
      hessian(model, Eigen::Map<const Eigen::Vector4d>(x.data()));
  Tensor4 C;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) C.v[i][j][k][l] = H(2 * i + j, 2 * k + l);
  return C;
}

double extrapolation_excess(const HdmrModel& model, const Eigen::VectorXd& x) {
  double excess = 0.0;
  for (Eigen::Index r = 0; r < x.size(); ++r) {
    const double width = model.norm.x_max[r] - model.norm.x_min[r];
    if (x[r] < model.norm.x_min[r])
      excess = std::max(excess, (model.norm.x_min[r] - x[r]) / width);
    else if (x[r] > model.norm.x_max[r])
      excess = std::max(excess, (x[r] - model.norm.x_max[r]) / width);
  }
  return excess;
}

namespace {

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat_to_json(const Eigen::MatrixXd& m) {  // row-major
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) a.push_back(m(i, j));
  return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = a.at(i).get<double>();
  return v;
}

Eigen::MatrixXd mat_from_json(const json& a, Eigen::Index rows,
                              Eigen::Index cols) {
  if (a.size() != static_cast<std::size_t>(rows * cols))
    throw ParseError("model file: matrix size mismatch");
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = a.at(k++).get<double>();
  return m;
}

}  // namespace

void save_model(const HdmrModel& model, const std::string& path) {
  if (!model.finite())
    throw std::invalid_argument("save_model: non-finite weights");
  json root = {
      {"format_version", 1},
      {"D", model.D},
      {"d", model.d},
      {"L", model.L},
      {"normalization",
       {{"x_min", vec_to_json(model.norm.x_min)},
        {"x_max", vec_to_json(model.norm.x_max)},
        {"f_min", model.norm.f_min},
        {"f_max", model.norm.f_max}}},
  };
  json comps = json::array();
  for (const auto& cn : model.components) {
    comps.push_back({{"A", mat_to_json(cn.A)},
                     {"b", vec_to_json(cn.b)},
                     {"W", mat_to_json(cn.W)},
                     {"v", vec_to_json(cn.v)},
                     {"c", vec_to_json(cn.c)},
                     {"v0", cn.v0}});
  }
  root["components"] = std::move(comps);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_model: cannot open " + path);
  out << root.dump(2) << '\n';
}

HdmrModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_model: cannot open " + path);
  HdmrModel model;
  try {
    const json root = json::parse(in);
    if (root.at("format_version").get<int>() != 1)
      throw ParseError("load_model: unsupported format version");
    model.D = root.at("D").get<int>();
    model.d = root.at("d").get<int>();
    model.L = root.at("L").get<int>();
    const json& nj = root.at("normalization");
    model.norm.x_min = vec_from_json(nj.at("x_min"));
    model.norm.x_max = vec_from_json(nj.at("x_max"));
    model.norm.f_min = nj.at("f_min").get<double>();
    model.norm.f_max = nj.at("f_max").get<double>();
    const json& comps = root.at("components");
    if (static_cast<int>(comps.size()) != model.L)
      throw ParseError("load_model: component count != L");
    for (const auto& cj : comps) {
      ComponentNet cn;
      cn.b = vec_from_json(cj.at("b"));
      cn.v = vec_from_json(cj.at("v"));
      cn.c = vec_from_json(cj.at("c"));
      cn.v0 = cj.at("v0").get<double>();
      const Eigen::Index d = cn.b.size(), N = cn.c.size();
      cn.A = mat_from_json(cj.at("A"), d, model.D);
      cn.W = mat_from_json(cj.at("W"), N, d);
      if (cn.v.size() != N) throw ParseError("load_model: bias size mismatch");
      model.components.push_back(std::move(cn));
    }
  } catch (const json::exception& e) {
    throw ParseError("load_model: " + path + ": " + e.what());
  }
  if (model.norm.x_min.size() != model.D ||
      model.norm.x_max.size() != model.D)
    throw ParseError("load_model: normalization dimension mismatch");
  if (!model.finite()) throw ParseError("load_model: non-finite weights");
  return model;
}

}  // namespace homog
