#ifndef REP_DYNAMICS_HPP
#define REP_DYNAMICS_HPP

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "rep/core.hpp"

namespace rep {

// Distinct eigenvalues with multiplicities. Entries equal at t=0 stay equal
// for all time, so the grouped values are the true degrees of freedom; a
// grouped integration keeps lambda_i == lambda_1 for i <= J exact instead of
// approximate.
struct EigenGroups {
  std::vector<double> value;  // strictly increasing
  std::vector<int> mult;

  static EigenGroups from_sorted(std::span<const double> sorted);
  int total() const;
  int groups() const { return static_cast<int>(value.size()); }
  std::vector<double> expand() const;
};

struct LambdaState {
  double t = 0.0;
  std::vector<double> lambda;  // sorted ascending
  double rho = 0.0;
};

struct LambdaDeriv {
  std::vector<double> dlambda;
  double drho = 0.0;
};

struct UState {
  double t = 0.0;
  std::vector<double> u;
  std::vector<double> v;  // v_i = u_i'
};

struct UDeriv {
  std::vector<double> du;
  std::vector<double> dv;
};

struct MatrixState {
  double t = 0.0;
  Eigen::MatrixXd M;
  double rho = 0.0;
};

struct MatrixDeriv {
  Eigen::MatrixXd dM;
  double drho = 0.0;
};

// lambda_i' = -lambda_i^2 + (k/n)(rho - c_b), rho' = -rho * sum(lambda).
LambdaDeriv lambda_rhs(const LambdaState& state, const REPParams& params);

// u_i' = v_i, v_i' = -omega^2 u_i + (k/n) rho u_i with rho = rho0/prod(u).
UDeriv u_rhs(const UState& state, const REPParams& params, double rho0);

// rho = rho0 / prod(u_i). Throws NonPositiveU if any u_i <= 0.
double rho_from_u(std::span<const double> u, double rho0);

// Abel pairing residuals r_ij = (v_i u_j - u_i v_j) - (lambda_{i,0} - lambda_{j,0}).
struct AbelResidual {
  Eigen::MatrixXd r;
  double max_abs = 0.0;
};
AbelResidual abel_residual(const UState& state, const SpectralInitialData& init);

// Coefficients of the exact two-solution representation
// u_j = a_j u_1 + b_j u_n. Throws DegenerateSpectrum when all lambda0 equal.
struct ReductionCoeffs {
  std::vector<double> a;
  std::vector<double> b;
};
ReductionCoeffs reduce_to_two(const SpectralInitialData& init);

// M' = -M^2 + (k/n)(rho - c_b) I, rho' = -rho tr M.
MatrixDeriv matrix_rhs(const MatrixState& state, const REPParams& params);

// Real eigenvalues of M sorted ascending; throws if the spectrum has a
// non-negligible imaginary part.
std::vector<double> matrix_eigenvalues(const Eigen::MatrixXd& M, double imag_tol = 1e-7);

// ---------------------------------------------------------------------------
// Flat ODE systems for the integrator. Layouts are documented per system;
// rhs() returns false when the state leaves the admissible region (the step
// is then rejected).

// y = [mu_1..mu_G, rho, Irho, L_1..L_G] with Irho = int rho dt and
// L_a = int mu_a dt (so u_a = exp(L_a)).
class LambdaSystem {
 public:
  LambdaSystem(const REPParams& params, const SpectralInitialData& init);

  std::size_t dim() const { return 2 * static_cast<std::size_t>(G_) + 2; }
  std::vector<double> initial_state() const;
  bool rhs(double t, std::span<const double> y, std::span<double> dy) const noexcept;

  const EigenGroups& groups() const { return groups_; }
  int n() const { return params_.n; }

  double mu(std::span<const double> y, int group) const { return y[group]; }
  double mu_min(std::span<const double> y) const { return y[0]; }
  double mu_max(std::span<const double> y) const { return y[G_ - 1]; }
  double max_abs_mu(std::span<const double> y) const;
  double rho(std::span<const double> y) const { return y[G_]; }
  double rho_integral(std::span<const double> y) const { return y[G_ + 1]; }
  double log_u(std::span<const double> y, int group) const { return y[G_ + 2 + group]; }

  std::vector<double> expand_lambda(std::span<const double> y) const;
  std::vector<double> expand_u(std::span<const double> y) const;

  // e^{L_1+L_G} (mu_1 - mu_G) - (lambda_{1,0} - lambda_{n,0}); identically
  // zero for the exact flow.
  double abel_diagnostic(std::span<const double> y) const;

 private:
  REPParams params_;
  EigenGroups groups_;
  double rho0_;
  int G_;
};

// Full u-system on groups: y = [u_1..u_G, v_1..v_G].
// Reduced variant: y = [u_first, v_first, u_last, v_last] with interior
// groups reconstructed through the two-solution representation.
class USystem {
 public:
  enum class Variant { Full, Reduced };

  USystem(const REPParams& params, const SpectralInitialData& init, Variant variant);

  std::size_t dim() const;
  std::vector<double> initial_state() const;
  bool rhs(double t, std::span<const double> y, std::span<double> dy) const noexcept;

  Variant variant() const { return variant_; }
  const EigenGroups& groups() const { return groups_; }

  double u_first(std::span<const double> y) const { return y[0]; }
  double v_first(std::span<const double> y) const;
  double u_last(std::span<const double> y) const;
  double v_last(std::span<const double> y) const;
  double max_u(std::span<const double> y) const;

  // Group values (reconstructed for the reduced variant).
  double u_group(std::span<const double> y, int group) const;
  double v_group(std::span<const double> y, int group) const;

  double rho(std::span<const double> y) const;
  std::vector<double> expand_u(std::span<const double> y) const;
  std::vector<double> expand_v(std::span<const double> y) const;
  std::vector<double> lambda(std::span<const double> y) const;

  double abel_diagnostic(std::span<const double> y) const;

  // Step cap near the u_1 root: once u_1 < 1e-6 and v_1 < 0, limits h to
  // (u_1/|v_1|)/10 so the crossing is not overshot.
  double step_cap(double t, std::span<const double> y) const;

 private:
  REPParams params_;
  EigenGroups groups_;
  ReductionCoeffs reduction_;  // per group, for Reduced
  double rho0_;
  int G_;
  Variant variant_;
};

// y = [M row-major (n^2), rho].
class MatrixSystem {
 public:
  MatrixSystem(const REPParams& params, Eigen::MatrixXd M0, double rho0);

  // Spectral dynamics assumes a real diagonalizable seed: build it as an
  // explicit similarity S diag(lambda0) S^-1. Throws on singular S.
  static MatrixSystem from_similarity(const REPParams& params, const Eigen::MatrixXd& S,
                                      const SpectralInitialData& init);

  std::size_t dim() const { return static_cast<std::size_t>(n_) * n_ + 1; }
  std::vector<double> initial_state() const;
  bool rhs(double t, std::span<const double> y, std::span<double> dy) const noexcept;

  Eigen::MatrixXd matrix(std::span<const double> y) const;
  double rho(std::span<const double> y) const { return y[dim() - 1]; }

 private:
  REPParams params_;
  Eigen::MatrixXd M0_;
  double rho0_;
  int n_;
};

}  // namespace rep

#endif
