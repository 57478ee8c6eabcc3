#include "rep/oracle.hpp"

#include <cmath>

namespace rep::oracle {

ExampleFamily::ExampleFamily(double k, double c_b, double lambda10, double lambda40)
    : params_(REPParams::make(4, k, c_b)), lambda10_(lambda10), lambda40_(lambda40) {
  if (!(lambda10 < lambda40))
    throw Error(ErrorCode::DegenerateSpectrum, "family requires lambda10 < lambda40");
  p_ = 0.5 * (lambda40_ - lambda10_);
  s_ = 0.5 * (lambda10_ + lambda40_) / params_.omega;
  phi_ = std::atan(s_);
  rho0_ = (lambda40_ - lambda10_) * (lambda40_ - lambda10_) / k;
  tB_ = (0.5 * M_PI + phi_) / params_.omega;
}

SpectralInitialData ExampleFamily::initial_data() const {
  return SpectralInitialData::make(rho0_, {lambda10_, lambda10_, lambda40_, lambda40_});
}

ExampleValues ExampleFamily::eval(double t) const {
  if (!(t >= 0.0 && t < tB_)) throw Error(ErrorCode::OutOfDomain, "t outside [0, tB)");
  const double w = params_.omega;
  const double theta = w * t - phi_;
  const double sec2 = 1.0 / (std::cos(theta) * std::cos(theta));
  const double tan_t = std::tan(theta);
  const double s2p1 = s_ * s_ + 1.0;
  ExampleValues v;
  v.lambda1 = -(p_ / s2p1) * sec2 - w * tan_t;
  v.lambda3 = (p_ / s2p1) * sec2 - w * tan_t;
  v.lambda4 = v.lambda3;
  v.rho = rho0_ * sec2 * sec2 / (s2p1 * s2p1);
  v.u1u4 = s2p1 * std::cos(theta) * std::cos(theta);
  return v;
}

ExampleUValues ExampleFamily::eval_u(double t) const {
  const ExampleValues v = eval(t);
  const double w = params_.omega;
  const double theta = w * t - phi_;
  const double s2p1 = s_ * s_ + 1.0;
  // u1 = exp(int lambda1) integrates the sec^2 and tan terms in closed form.
  const double expo = (p_ / (s2p1 * w)) * (std::tan(theta) + s_);
  const double cos_ratio = std::cos(theta) / std::cos(-phi_);
  ExampleUValues u;
  u.u1 = std::exp(-expo) * cos_ratio;
  u.u4 = std::exp(expo) * cos_ratio;
  u.v1 = v.lambda1 * u.u1;
  u.v4 = v.lambda4 * u.u4;
  return u;
}

double example_tB(double k, double c_b, double lambda10, double lambda40) {
  return ExampleFamily(k, c_b, lambda10, lambda40).tB();
}

}  // namespace rep::oracle
