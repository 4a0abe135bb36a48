#include "smpc/model.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "smpc/errors.hpp"

namespace smpc {

namespace {

using nlohmann::json;

bool same(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.size() == 0 || a == b);
}

void require_dims(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                  const char* field, const char* against) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << "dimension mismatch between " << field << " and " << against << ": "
       << field << " is " << m.rows() << "x" << m.cols() << ", expected "
       << rows << "x" << cols;
    throw DimensionError(os.str());
  }
}

void require_len(const Vector& v, Eigen::Index n, const char* field,
                 const char* against) {
  if (v.size() != n) {
    std::ostringstream os;
    os << "dimension mismatch between " << field << " and " << against << ": "
       << field << " has length " << v.size() << ", expected " << n;
    throw DimensionError(os.str());
  }
}

double scale_of(const Matrix& m) {
  return m.size() == 0 ? 1.0 : std::max(1.0, m.cwiseAbs().maxCoeff());
}

ValidationCheck psd_check(const std::string& name, const Matrix& m, bool strict) {
  ValidationCheck c{name, false, 0.0, ""};
  if (!linalg::is_symmetric(m, 1e-12)) {
    c.measured = (m - m.transpose()).cwiseAbs().maxCoeff();
    c.message = name + " not symmetric";
    return c;
  }
  c.measured = linalg::min_eigenvalue(m);
  if (strict) {
    c.passed = c.measured > 0.0;
    if (!c.passed) c.message = name + " not positive definite";
  } else {
    c.passed = c.measured >= -1e-12 * scale_of(m);
    if (!c.passed) c.message = name + " not positive semidefinite";
  }
  return c;
}

// Smallest singular value of [A - mu I, B] (or its dual) over the eigenvalues
// of A outside the open unit disc. +inf when A is Schur stable.
double pbh_margin(const Matrix& A, const Matrix& other, bool columns) {
  using CMatrix = Eigen::MatrixXcd;
  const Eigen::Index n = A.rows();
  Eigen::EigenSolver<Matrix> es(A, false);
  double margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::complex<double> mu = es.eigenvalues()(i);
    if (std::abs(mu) < 1.0 - 1e-12) continue;
    const CMatrix shifted =
        A.cast<std::complex<double>>() - mu * CMatrix::Identity(n, n);
    CMatrix stacked;
    if (columns) {
      stacked.resize(n, n + other.cols());
      stacked << shifted, other.cast<std::complex<double>>();
    } else {
      stacked.resize(n + other.rows(), n);
      stacked << shifted, other.cast<std::complex<double>>();
    }
    Eigen::JacobiSVD<CMatrix> svd(stacked);
    margin = std::min(margin, svd.singularValues().minCoeff());
  }
  return margin;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Matrix matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) {
    throw ParseError("field '" + field + "': expected a non-empty array of rows");
  }
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array()) {
      throw ParseError("field '" + field + "': row " + std::to_string(r) +
                       " is not an array");
    }
    if (r == 0) cols = j[r].size();
    if (j[r].size() != cols) {
      throw ParseError("field '" + field + "': ragged rows");
    }
  }
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) {
        throw ParseError("field '" + field + "': non-numeric entry at [" +
                         std::to_string(r) + "][" + std::to_string(c) + "]");
      }
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

Vector vector_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) {
    throw ParseError("field '" + field + "': expected an array");
  }
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw ParseError("field '" + field + "': non-numeric entry at [" +
                       std::to_string(i) + "]");
    }
    v(i) = j[i].get<double>();
  }
  return v;
}

const json& require(const json& root, const char* key) {
  auto it = root.find(key);
  if (it == root.end()) {
    throw ParseError(std::string("missing required field '") + key + "'");
  }
  return *it;
}

double number(const json& root, const char* key) {
  const json& j = require(root, key);
  if (!j.is_number()) {
    throw ParseError(std::string("field '") + key + "': expected a number");
  }
  return j.get<double>();
}

Mu0Policy parse_policy(const json& j) {
  if (!j.is_string()) throw ParseError("field 'mu0_policy': expected a string");
  const auto s = j.get<std::string>();
  if (s == "epsilon" || s == "Epsilon") return Mu0Policy::Epsilon;
  if (s == "minfeasible" || s == "MinimalFeasible") {
    return Mu0Policy::MinimalFeasible;
  }
  throw ParseError("field 'mu0_policy': unknown policy '" + s + "'");
}

}  // namespace

bool operator==(const SystemModel& a, const SystemModel& b) {
  return same(a.A, b.A) && same(a.B, b.B) && same(a.C, b.C) &&
         same(a.D, b.D) && same(a.sigma_w, b.sigma_w) &&
         same(a.sigma_v, b.sigma_v) && a.lambda == b.lambda;
}

bool operator==(const ProblemSpec& a, const ProblemSpec& b) {
  return same(a.Q, b.Q) && same(a.R, b.R) && same(a.H, b.H) &&
         a.epsilon == b.epsilon && a.beta1 == b.beta1 && a.beta2 == b.beta2 &&
         a.N == b.N;
}

bool operator==(const InitialCondition& a, const InitialCondition& b) {
  return same(a.x0, b.x0) && same(a.xhat0, b.xhat0) && same(a.sigma0, b.sigma0);
}

bool operator==(const GainPair& a, const GainPair& b) {
  return same(a.K, b.K) && same(a.M, b.M);
}

bool operator==(const Scenario& a, const Scenario& b) {
  return a.model == b.model && a.spec == b.spec && a.init == b.init &&
         a.gains == b.gains && a.mu0_policy == b.mu0_policy;
}

bool ValidationReport::ok() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

std::string ValidationReport::failures() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    if (!c.passed) os << c.name << ": " << c.message << " (measured " << c.measured << ")\n";
  }
  return os.str();
}

std::string_view to_string(Mu0Policy policy) {
  return policy == Mu0Policy::Epsilon ? "epsilon" : "minfeasible";
}

ValidationReport validate(const Scenario& s) {
  const auto& m = s.model;
  const auto& p = s.spec;
  const Eigen::Index nx = m.A.rows();

  require_dims(m.A, nx, nx, "A", "A");
  require_dims(m.B, nx, m.B.cols(), "B", "A");
  require_dims(m.C, m.C.rows(), nx, "C", "A");
  require_dims(m.D, nx, m.D.cols(), "D", "A");
  require_dims(m.sigma_w, m.D.cols(), m.D.cols(), "sigma_w", "D");
  require_dims(m.sigma_v, m.C.rows(), m.C.rows(), "sigma_v", "C");
  require_dims(p.Q, nx, nx, "Q", "A");
  require_dims(p.R, m.B.cols(), m.B.cols(), "R", "B");
  require_dims(p.H, p.H.rows(), nx, "H", "A");
  require_len(s.init.x0, nx, "x0", "A");
  require_len(s.init.xhat0, nx, "xhat0", "A");
  require_dims(s.init.sigma0, nx, nx, "sigma0", "A");
  if (s.gains) {
    require_dims(s.gains->K, m.B.cols(), nx, "gains.K", "B");
    require_dims(s.gains->M, nx, m.C.rows(), "gains.M", "C");
  }

  ValidationReport r;
  auto add = [&r](std::string name, bool ok, double measured, std::string msg) {
    r.checks.push_back({std::move(name), ok, measured, ok ? "" : std::move(msg)});
  };

  add("lambda", m.lambda >= 0.0 && m.lambda <= 1.0, m.lambda,
      "lambda must lie in [0, 1]");
  {
    auto c = psd_check("sigma_w", m.sigma_w, false);
    if (!c.passed) c.message = "Σ_w not positive semidefinite";
    r.checks.push_back(c);
  }
  {
    auto c = psd_check("sigma_v", m.sigma_v, true);
    if (!c.passed) c.message = "Σ_v not positive definite";
    r.checks.push_back(c);
  }
  r.checks.push_back(psd_check("Q", p.Q, false));
  r.checks.push_back(psd_check("R", p.R, true));
  r.checks.push_back(psd_check("sigma0", s.init.sigma0, false));
  add("beta1", p.beta1 > 0.0 && p.beta1 < 1.0, p.beta1, "beta1 must lie in (0, 1)");
  add("beta2", p.beta2 > 0.0 && p.beta2 < 1.0, p.beta2, "beta2 must lie in (0, 1)");
  add("epsilon", p.epsilon >= 0.0, p.epsilon, "epsilon must be nonnegative");
  add("N", p.N >= 1, p.N, "N ≥ 1 required");
  add("N_capacity", p.N <= 20, p.N, "N ≤ 20 required (2^N drop patterns)");

  const double norm_a = nx > 0 ? m.A.operatorNorm() : 0.0;
  const double tol = 1e-8 * std::max(norm_a, std::numeric_limits<double>::min());
  const double stab = pbh_margin(m.A, m.B, true);
  add("stabilizable", stab > tol, stab, "(A, B) not stabilisable (PBH test)");
  const double det = pbh_margin(m.A, m.C, false);
  add("detectable", det > tol, det, "(A, C) not detectable (PBH test)");
  return r;
}

Scenario parse_scenario(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario JSON: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("scenario JSON: top level must be an object");

  Scenario s;
  auto& m = s.model;
  auto& p = s.spec;
  m.A = matrix_from_json(require(root, "A"), "A");
  m.B = matrix_from_json(require(root, "B"), "B");
  m.C = matrix_from_json(require(root, "C"), "C");
  m.D = root.contains("D") ? matrix_from_json(root["D"], "D")
                           : Matrix::Identity(m.A.rows(), m.A.rows());
  m.sigma_w = matrix_from_json(require(root, "sigma_w"), "sigma_w");
  m.sigma_v = matrix_from_json(require(root, "sigma_v"), "sigma_v");
  m.lambda = number(root, "lambda");

  p.Q = matrix_from_json(require(root, "Q"), "Q");
  p.R = matrix_from_json(require(root, "R"), "R");
  p.H = matrix_from_json(require(root, "H"), "H");
  p.epsilon = number(root, "epsilon");
  p.beta1 = number(root, "beta1");
  p.beta2 = root.contains("beta2") ? number(root, "beta2") : p.beta1;
  {
    const json& n = require(root, "N");
    if (!n.is_number_integer()) throw ParseError("field 'N': expected an integer");
    p.N = n.get<int>();
  }

  s.init.xhat0 = vector_from_json(require(root, "xhat0"), "xhat0");
  s.init.x0 = root.contains("x0") ? vector_from_json(root["x0"], "x0") : s.init.xhat0;
  s.init.sigma0 = matrix_from_json(require(root, "sigma0"), "sigma0");

  if (root.contains("mu0_policy")) s.mu0_policy = parse_policy(root["mu0_policy"]);
  if (root.contains("gains") && !root["gains"].is_null()) {
    const json& g = root["gains"];
    s.gains = GainPair{matrix_from_json(require(g, "K"), "gains.K"),
                       matrix_from_json(require(g, "M"), "gains.M")};
  }

  const auto report = validate(s);
  if (!report.ok()) throw ValidationError("scenario failed validation:\n" + report.failures());
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
  json root;
  root["A"] = matrix_to_json(s.model.A);
  root["B"] = matrix_to_json(s.model.B);
  root["C"] = matrix_to_json(s.model.C);
  root["D"] = matrix_to_json(s.model.D);
  root["sigma_w"] = matrix_to_json(s.model.sigma_w);
  root["sigma_v"] = matrix_to_json(s.model.sigma_v);
  root["lambda"] = s.model.lambda;
  root["Q"] = matrix_to_json(s.spec.Q);
  root["R"] = matrix_to_json(s.spec.R);
  root["H"] = matrix_to_json(s.spec.H);
  root["epsilon"] = s.spec.epsilon;
  root["beta1"] = s.spec.beta1;
  root["beta2"] = s.spec.beta2;
  root["N"] = s.spec.N;
  root["x0"] = vector_to_json(s.init.x0);
  root["xhat0"] = vector_to_json(s.init.xhat0);
  root["sigma0"] = matrix_to_json(s.init.sigma0);
  root["mu0_policy"] = std::string(to_string(s.mu0_policy));
  if (s.gains) {
    root["gains"] = {{"K", matrix_to_json(s.gains->K)},
                     {"M", matrix_to_json(s.gains->M)}};
  }
  return root.dump(2);
}

}  // namespace smpc
