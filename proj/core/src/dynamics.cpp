#include "rep/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

namespace rep {

EigenGroups EigenGroups::from_sorted(std::span<const double> sorted) {
  EigenGroups g;
  for (double v : sorted) {
    if (!g.value.empty() && v == g.value.back()) {
      ++g.mult.back();
    } else {
      g.value.push_back(v);
      g.mult.push_back(1);
    }
  }
  return g;
}

int EigenGroups::total() const {
  int n = 0;
  for (int m : mult) n += m;
  return n;
}

std::vector<double> EigenGroups::expand() const {
  std::vector<double> out;
  out.reserve(total());
  for (std::size_t a = 0; a < value.size(); ++a)
    out.insert(out.end(), mult[a], value[a]);
  return out;
}

LambdaDeriv lambda_rhs(const LambdaState& state, const REPParams& params) {
  if (!(state.rho > 0.0)) throw Error(ErrorCode::NonPositiveDensity, "rho must be > 0");
  const double coupling = params.k / params.n * (state.rho - params.c_b);
  LambdaDeriv d;
  d.dlambda.resize(state.lambda.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < state.lambda.size(); ++i) {
    const double li = state.lambda[i];
    d.dlambda[i] = -li * li + coupling;
    sum += li;
  }
  d.drho = -state.rho * sum;
  return d;
}

double rho_from_u(std::span<const double> u, double rho0) {
  double prod = 1.0;
  for (double ui : u) {
    if (!(ui > 0.0)) throw Error(ErrorCode::NonPositiveU, "u_i must be > 0");
    prod *= ui;
  }
  return rho0 / prod;
}

UDeriv u_rhs(const UState& state, const REPParams& params, double rho0) {
  const double rho = rho_from_u(state.u, rho0);
  const double w2 = params.omega * params.omega;
  const double kn_rho = params.k / params.n * rho;
  UDeriv d;
  d.du = state.v;
  d.dv.resize(state.u.size());
  for (std::size_t i = 0; i < state.u.size(); ++i)
    d.dv[i] = (kn_rho - w2) * state.u[i];
  return d;
}

AbelResidual abel_residual(const UState& state, const SpectralInitialData& init) {
  const auto n = state.u.size();
  AbelResidual res;
  res.r = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double wronskian = state.v[i] * state.u[j] - state.u[i] * state.v[j];
      const double r = wronskian - (init.lambda0[i] - init.lambda0[j]);
      res.r(i, j) = r;
      res.max_abs = std::max(res.max_abs, std::abs(r));
    }
  }
  return res;
}

ReductionCoeffs reduce_to_two(const SpectralInitialData& init) {
  const double l1 = init.lambda0.front();
  const double ln = init.lambda0.back();
  if (l1 == ln)
    throw Error(ErrorCode::DegenerateSpectrum, "all lambda0 equal; use the scalar reduction");
  const double gap = ln - l1;
  ReductionCoeffs c;
  c.a.reserve(init.lambda0.size());
  c.b.reserve(init.lambda0.size());
  for (double lj : init.lambda0) {
    c.a.push_back((ln - lj) / gap);
    c.b.push_back((lj - l1) / gap);
  }
  return c;
}

MatrixDeriv matrix_rhs(const MatrixState& state, const REPParams& params) {
  if (!(state.rho > 0.0)) throw Error(ErrorCode::NonPositiveDensity, "rho must be > 0");
  const double coupling = params.k / params.n * (state.rho - params.c_b);
  MatrixDeriv d;
  d.dM = -(state.M * state.M);
  d.dM.diagonal().array() += coupling;
  d.drho = -state.rho * state.M.trace();
  return d;
}

std::vector<double> matrix_eigenvalues(const Eigen::MatrixXd& M, double imag_tol) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(M);
  std::vector<double> ev;
  ev.reserve(M.rows());
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    const auto z = solver.eigenvalues()[i];
    if (std::abs(z.imag()) > imag_tol * scale)
      throw Error(ErrorCode::NonFiniteState, "matrix spectrum is not real");
    ev.push_back(z.real());
  }
  std::sort(ev.begin(), ev.end());
  return ev;
}

// --------------------------------------------------------------------------
// LambdaSystem

LambdaSystem::LambdaSystem(const REPParams& params, const SpectralInitialData& init)
    : params_(params),
      groups_(EigenGroups::from_sorted(init.lambda0)),
      rho0_(init.rho0),
      G_(groups_.groups()) {}

std::vector<double> LambdaSystem::initial_state() const {
  std::vector<double> y(dim(), 0.0);
  for (int a = 0; a < G_; ++a) y[a] = groups_.value[a];
  y[G_] = rho0_;
  return y;
}

bool LambdaSystem::rhs(double t, std::span<const double> y, std::span<double> dy) const noexcept {
  (void)t;
  const double rho = y[G_];
  if (!(rho > 0.0) || !std::isfinite(rho)) return false;
  const double coupling = params_.k / params_.n * (rho - params_.c_b);
  double sum = 0.0;
  for (int a = 0; a < G_; ++a) {
    const double mu = y[a];
    if (!std::isfinite(mu)) return false;
    dy[a] = -mu * mu + coupling;
    sum += groups_.mult[a] * mu;
  }
  dy[G_] = -rho * sum;
  dy[G_ + 1] = rho;
  for (int a = 0; a < G_; ++a) dy[G_ + 2 + a] = y[a];
  return true;
}

double LambdaSystem::max_abs_mu(std::span<const double> y) const {
  double m = 0.0;
  for (int a = 0; a < G_; ++a) m = std::max(m, std::abs(y[a]));
  return m;
}

std::vector<double> LambdaSystem::expand_lambda(std::span<const double> y) const {
  std::vector<double> out;
  out.reserve(params_.n);
  for (int a = 0; a < G_; ++a) out.insert(out.end(), groups_.mult[a], y[a]);
  return out;
}

std::vector<double> LambdaSystem::expand_u(std::span<const double> y) const {
  std::vector<double> out;
  out.reserve(params_.n);
  for (int a = 0; a < G_; ++a) out.insert(out.end(), groups_.mult[a], std::exp(log_u(y, a)));
  return out;
}

double LambdaSystem::abel_diagnostic(std::span<const double> y) const {
  if (G_ < 2) return 0.0;
  const double gap0 = groups_.value.front() - groups_.value.back();  // < 0
  const double gap = mu_min(y) - mu_max(y);
  if (!(gap < 0.0)) return std::numeric_limits<double>::infinity();  // order violated
  // u1*un*(mu_1 - mu_n) - gap0, evaluated as gap0*expm1(z) so that secular
  // drift of the log-u quadratures on long bounded orbits cannot overflow.
  const double z = log_u(y, 0) + log_u(y, G_ - 1) + std::log(gap / gap0);
  return gap0 * std::expm1(z);
}

// --------------------------------------------------------------------------
// USystem

USystem::USystem(const REPParams& params, const SpectralInitialData& init, Variant variant)
    : params_(params),
      groups_(EigenGroups::from_sorted(init.lambda0)),
      rho0_(init.rho0),
      G_(groups_.groups()),
      variant_(variant) {
  if (variant_ == Variant::Reduced) {
    if (G_ < 2)
      throw Error(ErrorCode::DegenerateSpectrum,
                  "reduced u-system requires distinct extreme eigenvalues");
    const double l1 = groups_.value.front();
    const double ln = groups_.value.back();
    reduction_.a.resize(G_);
    reduction_.b.resize(G_);
    for (int a = 0; a < G_; ++a) {
      reduction_.a[a] = (ln - groups_.value[a]) / (ln - l1);
      reduction_.b[a] = (groups_.value[a] - l1) / (ln - l1);
    }
  }
}

std::size_t USystem::dim() const {
  return variant_ == Variant::Reduced ? 4 : 2 * static_cast<std::size_t>(G_);
}

std::vector<double> USystem::initial_state() const {
  if (variant_ == Variant::Reduced)
    return {1.0, groups_.value.front(), 1.0, groups_.value.back()};
  std::vector<double> y(dim());
  for (int a = 0; a < G_; ++a) {
    y[a] = 1.0;
    y[G_ + a] = groups_.value[a];
  }
  return y;
}

double USystem::v_first(std::span<const double> y) const {
  return variant_ == Variant::Reduced ? y[1] : y[G_];
}

double USystem::u_last(std::span<const double> y) const {
  return variant_ == Variant::Reduced ? y[2] : y[G_ - 1];
}

double USystem::v_last(std::span<const double> y) const {
  return variant_ == Variant::Reduced ? y[3] : y[2 * G_ - 1];
}

double USystem::u_group(std::span<const double> y, int group) const {
  if (variant_ == Variant::Full) return y[group];
  return reduction_.a[group] * y[0] + reduction_.b[group] * y[2];
}

double USystem::v_group(std::span<const double> y, int group) const {
  if (variant_ == Variant::Full) return y[G_ + group];
  return reduction_.a[group] * y[1] + reduction_.b[group] * y[3];
}

double USystem::max_u(std::span<const double> y) const {
  double m = 0.0;
  for (int a = 0; a < G_; ++a) m = std::max(m, u_group(y, a));
  return m;
}

double USystem::rho(std::span<const double> y) const {
  double prod = 1.0;
  for (int a = 0; a < G_; ++a) {
    const double ua = u_group(y, a);
    for (int r = 0; r < groups_.mult[a]; ++r) prod *= ua;
  }
  return rho0_ / prod;
}

bool USystem::rhs(double t, std::span<const double> y, std::span<double> dy) const noexcept {
  (void)t;
  // One shared product across i keeps g_i = (k/n) rho u_i at O(G) per step
  // and gives identical rounding across components.
  double prod = 1.0;
  for (int a = 0; a < G_; ++a) {
    const double ua = u_group(y, a);
    if (!(ua > 0.0) || !std::isfinite(ua)) return false;
    for (int r = 0; r < groups_.mult[a]; ++r) prod *= ua;
  }
  if (!(prod > 0.0) || !std::isfinite(prod)) return false;
  const double rho = rho0_ / prod;
  const double gain = params_.k / params_.n * rho - params_.omega * params_.omega;
  if (variant_ == Variant::Reduced) {
    dy[0] = y[1];
    dy[1] = gain * y[0];
    dy[2] = y[3];
    dy[3] = gain * y[2];
  } else {
    for (int a = 0; a < G_; ++a) {
      dy[a] = y[G_ + a];
      dy[G_ + a] = gain * y[a];
    }
  }
  return true;
}

std::vector<double> USystem::expand_u(std::span<const double> y) const {
  std::vector<double> out;
  out.reserve(params_.n);
  for (int a = 0; a < G_; ++a) out.insert(out.end(), groups_.mult[a], u_group(y, a));
  return out;
}

std::vector<double> USystem::expand_v(std::span<const double> y) const {
  std::vector<double> out;
  out.reserve(params_.n);
  for (int a = 0; a < G_; ++a) out.insert(out.end(), groups_.mult[a], v_group(y, a));
  return out;
}

std::vector<double> USystem::lambda(std::span<const double> y) const {
  std::vector<double> out;
  out.reserve(params_.n);
  for (int a = 0; a < G_; ++a)
    out.insert(out.end(), groups_.mult[a], v_group(y, a) / u_group(y, a));
  return out;
}

double USystem::abel_diagnostic(std::span<const double> y) const {
  if (G_ < 2) return 0.0;
  const double w = v_first(y) * u_last(y) - u_first(y) * v_last(y);
  return w - (groups_.value.front() - groups_.value.back());
}

double USystem::step_cap(double t, std::span<const double> y) const {
  (void)t;
  const double u1 = u_first(y);
  const double v1 = v_first(y);
  if (u1 < 1e-6 && v1 < 0.0) return 0.1 * (u1 / -v1);
  return std::numeric_limits<double>::infinity();
}

// --------------------------------------------------------------------------
// MatrixSystem

MatrixSystem::MatrixSystem(const REPParams& params, Eigen::MatrixXd M0, double rho0)
    : params_(params), M0_(std::move(M0)), rho0_(rho0), n_(params.n) {
  if (M0_.rows() != n_ || M0_.cols() != n_)
    throw Error(ErrorCode::DimensionMismatch, "matrix seed must be n x n");
}

MatrixSystem MatrixSystem::from_similarity(const REPParams& params, const Eigen::MatrixXd& S,
                                           const SpectralInitialData& init) {
  if (S.rows() != params.n || S.cols() != params.n)
    throw Error(ErrorCode::DimensionMismatch, "similarity matrix must be n x n");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
  if (!lu.isInvertible())
    throw Error(ErrorCode::DegenerateSpectrum, "similarity matrix is singular");
  Eigen::VectorXd d(params.n);
  for (int i = 0; i < params.n; ++i) d[i] = init.lambda0[i];
  const Eigen::MatrixXd M0 = S * d.asDiagonal() * lu.inverse();
  return MatrixSystem(params, M0, init.rho0);
}

std::vector<double> MatrixSystem::initial_state() const {
  std::vector<double> y(dim());
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) y[i * n_ + j] = M0_(i, j);
  y[dim() - 1] = rho0_;
  return y;
}

Eigen::MatrixXd MatrixSystem::matrix(std::span<const double> y) const {
  Eigen::MatrixXd M(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) M(i, j) = y[i * n_ + j];
  return M;
}

bool MatrixSystem::rhs(double t, std::span<const double> y, std::span<double> dy) const noexcept {
  (void)t;
  const double rho = y[dim() - 1];
  if (!(rho > 0.0) || !std::isfinite(rho)) return false;
  const double coupling = params_.k / params_.n * (rho - params_.c_b);
  double trace = 0.0;
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      double acc = 0.0;
      for (int l = 0; l < n_; ++l) acc += y[i * n_ + l] * y[l * n_ + j];
      dy[i * n_ + j] = -acc;
    }
    dy[i * n_ + i] += coupling;
    trace += y[i * n_ + i];
  }
  dy[dim() - 1] = -rho * trace;
  return true;
}

}  // namespace rep
