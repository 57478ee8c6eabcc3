#ifndef REP_ORACLE_HPP
#define REP_ORACLE_HPP

#include "rep/core.hpp"

namespace rep::oracle {

// Pointwise closed-form values of the n=4, J=2 family with repeated upper
// eigenvalue pair.
struct ExampleValues {
  double lambda1 = 0.0;  // = lambda2
  double lambda3 = 0.0;  // = lambda4
  double lambda4 = 0.0;
  double rho = 0.0;
  double u1u4 = 0.0;
};

struct ExampleUValues {
  double u1 = 0.0, v1 = 0.0;
  double u4 = 0.0, v4 = 0.0;
};

// Explicitly solvable n=4 family with lambda0 = (l1, l1, l4, l4), l1 < l4.
// rho0 is derived from the constraint A0 = k*rho0 rather than taken as input,
// because that surface is measure-zero and near-miss inputs are not
// reproducible.
class ExampleFamily {
 public:
  // Throws on k <= 0, c_b <= 0 or l1 >= l4.
  ExampleFamily(double k, double c_b, double lambda10, double lambda40);

  const REPParams& params() const { return params_; }
  double lambda10() const { return lambda10_; }
  double lambda40() const { return lambda40_; }
  double rho0() const { return rho0_; }
  double p() const { return p_; }
  double phase() const { return phi_; }
  double tB() const { return tB_; }

  // Second-order pole coefficient of lambda1: (tB-t)^2 lambda1 -> -C.
  double pole_coefficient() const { return p_ / ((s_ * s_ + 1.0) * params_.omega * params_.omega); }

  SpectralInitialData initial_data() const;

  // Closed forms at time t in [0, tB). Throws OutOfDomain for t >= tB.
  ExampleValues eval(double t) const;

  // Individual transformed variables u1, u4 and their derivatives.
  ExampleUValues eval_u(double t) const;

 private:
  REPParams params_;
  double lambda10_, lambda40_;
  double p_, s_, phi_, rho0_, tB_;
};

double example_tB(double k, double c_b, double lambda10, double lambda40);

}  // namespace rep::oracle

#endif
