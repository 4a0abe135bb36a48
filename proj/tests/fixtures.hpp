#pragma once

#include <cmath>
#include <random>
#include <string>

#include "smpc/mpc.hpp"

namespace fixtures {

using smpc::Matrix;
using smpc::Vector;

inline std::string scenario_path(const std::string& name) {
  return std::string(SMPC_SCENARIO_DIR) + "/" + name;
}

inline Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

/// Scalar plant with unit weights; callers overwrite what they need.
inline smpc::Scenario scalar_scenario(double a, double b, double c) {
  smpc::Scenario s;
  s.model.A = scalar(a);
  s.model.B = scalar(b);
  s.model.C = scalar(c);
  s.model.D = scalar(1.0);
  s.model.sigma_w = scalar(1.0);
  s.model.sigma_v = scalar(1.0);
  s.model.lambda = 1.0;
  s.spec.Q = scalar(1.0);
  s.spec.R = scalar(1.0);
  s.spec.H = scalar(1.0);
  s.spec.epsilon = 100.0;
  s.spec.beta1 = 0.8;
  s.spec.beta2 = 0.8;
  s.spec.N = 1;
  s.init.x0 = Vector::Zero(1);
  s.init.xhat0 = Vector::Zero(1);
  s.init.sigma0 = scalar(1.0);
  return s;
}

/// Small unstable 2-state plant with one input and one intermittent output.
inline smpc::Scenario two_state_scenario(int N = 3) {
  smpc::Scenario s;
  s.model.A.resize(2, 2);
  s.model.A << 1.05, 0.1, 0.0, 0.95;
  s.model.B.resize(2, 1);
  s.model.B << 0.0, 1.0;
  s.model.C.resize(1, 2);
  s.model.C << 1.0, 0.0;
  s.model.D = Matrix::Identity(2, 2);
  s.model.sigma_w = Matrix::Zero(2, 2);
  s.model.sigma_w.diagonal() << 0.1, 0.05;
  s.model.sigma_v = scalar(0.2);
  s.model.lambda = 0.7;
  s.spec.Q = Matrix::Identity(2, 2);
  s.spec.R = scalar(0.5);
  s.spec.H.resize(1, 2);
  s.spec.H << 1.0, 0.0;
  s.spec.epsilon = 5.8;
  s.spec.beta1 = 0.8;
  s.spec.beta2 = 0.8;
  s.spec.N = N;
  s.init.xhat0.resize(2);
  s.init.xhat0 << 1.0, -0.5;
  s.init.x0 = s.init.xhat0;
  s.init.sigma0.resize(2, 2);
  s.init.sigma0 << 0.3, 0.05, 0.05, 0.2;
  return s;
}

inline Vector gaussian(std::mt19937_64& gen, const Matrix& sqrt_cov) {
  std::normal_distribution<double> nd;
  Vector n(sqrt_cov.cols());
  for (Eigen::Index i = 0; i < n.size(); ++i) n(i) = nd(gen);
  return sqrt_cov * n;
}

/// One sampled rollout of the predicted closed loop over the horizon, driven
/// by the policy u_i = K xhat_i + c_i + sum_{j<=i} L_ij zeta_j.
struct Rollout {
  std::vector<Vector> x, xhat, u, e, zeta;
  Vector x_N, xhat_N;
};

inline Rollout rollout(const smpc::Scenario& s, const smpc::GainPair& g,
                       const smpc::DecisionVars& theta, const Vector& xhat_k,
                       const Matrix& sigma_k, std::mt19937_64& gen) {
  const auto& m = s.model;
  const int N = s.spec.N, nu = m.nu(), ny = m.ny();
  const Matrix sq0 = smpc::linalg::psd_sqrt(sigma_k);
  const Matrix sqw = smpc::linalg::psd_sqrt(m.sigma_w);
  const Matrix sqv = smpc::linalg::psd_sqrt(m.sigma_v);
  std::bernoulli_distribution arrival(m.lambda);
  Rollout r;
  Vector xhat = xhat_k;
  Vector x = xhat_k + gaussian(gen, sq0);
  for (int i = 0; i < N; ++i) {
    const Vector v = gaussian(gen, sqv);
    const Vector w = gaussian(gen, sqw);
    const int gamma = arrival(gen) ? 1 : 0;
    const Vector zeta = static_cast<double>(gamma) * (m.C * x + v - m.C * xhat);
    r.zeta.push_back(zeta);
    Vector u = g.K * xhat + theta.c.segment(i * nu, nu);
    for (int j = 0; j <= i; ++j) u += theta.L.block(i * nu, j * ny, nu, ny) * r.zeta[j];
    r.x.push_back(x);
    r.xhat.push_back(xhat);
    r.e.push_back(x - xhat);
    r.u.push_back(u);
    x = m.A * x + m.B * u + m.D * w;
    xhat = m.A * xhat + m.B * u + m.A * g.M * zeta;
  }
  r.x_N = x;
  r.xhat_N = xhat;
  return r;
}

/// Running mean and standard error of a scalar.
struct Moments {
  double sum = 0.0, sum2 = 0.0;
  long n = 0;
  void add(double v) {
    sum += v;
    sum2 += v * v;
    ++n;
  }
  double mean() const { return sum / n; }
  double stderr_() const {
    const double m = mean();
    return std::sqrt(std::max(0.0, sum2 / n - m * m) / (n - 1));
  }
};

}  // namespace fixtures
