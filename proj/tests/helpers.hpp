#ifndef REP_TESTS_HELPERS_HPP
#define REP_TESTS_HELPERS_HPP

#include <random>
#include <vector>

#include "rep/core.hpp"

namespace rep::testutil {

struct DataPoint {
  int n = 0;
  double k = 1.0, c_b = 1.0, rho0 = 1.0;
  std::vector<double> lambda0;
};

inline double uni(std::mt19937_64& rng, double a, double b) {
  return a + (b - a) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// Blow-up candidates per case; the strongly negative minimal eigenvalue makes
// finite-time breakdown near-certain in these ranges.
inline DataPoint gen_blowup_candidate(int which_case, std::mt19937_64& rng) {
  DataPoint g;
  g.k = uni(rng, 0.5, 3.0);
  g.c_b = uni(rng, 0.5, 3.0);
  g.rho0 = uni(rng, 0.5, 3.0);
  switch (which_case % 5) {
    case 0: {  // J=1
      g.n = 2 + static_cast<int>(uni(rng, 0.0, 4.999));
      double cur = uni(rng, -6.0, -2.0);
      g.lambda0 = {cur};
      for (int i = 1; i < g.n; ++i) {
        cur += uni(rng, 0.3, 1.8);
        g.lambda0.push_back(cur);
      }
      break;
    }
    case 1: {  // J=2, n>=5
      g.n = 5 + static_cast<int>(uni(rng, 0.0, 3.999));
      double cur = uni(rng, -6.0, -2.5);
      g.lambda0 = {cur, cur};
      for (int i = 2; i < g.n; ++i) {
        cur += uni(rng, 0.3, 1.5);
        g.lambda0.push_back(cur);
      }
      break;
    }
    case 2: {  // J=2, n=4, A0 > k rho0
      g.n = 4;
      const double l1 = uni(rng, -5.0, -2.0);
      const double l3 = l1 + uni(rng, 0.5, 2.5);
      const double l4 = l3 + uni(rng, 0.0, 2.0);
      g.lambda0 = {l1, l1, l3, l4};
      g.rho0 = (l1 - l3) * (l1 - l4) / (g.k * uni(rng, 1.3, 4.0));
      break;
    }
    case 3: {  // J=2, n=4, A0 = k rho0 (second-order poles)
      g.n = 4;
      const double l1 = uni(rng, -4.0, -1.5);
      const double l3 = l1 + uni(rng, 0.5, 2.5);
      const double l4 = uni(rng, 0.0, 1.0) < 0.5 ? l3 : l3 + uni(rng, 0.0, 1.5);
      g.lambda0 = {l1, l1, l3, l4};
      g.rho0 = (l1 - l3) * (l1 - l4) / g.k;
      break;
    }
    default: {  // J>=3, n>2J
      const int choices[4][2] = {{3, 7}, {3, 8}, {4, 9}, {3, 9}};
      const auto& c = choices[static_cast<int>(uni(rng, 0.0, 3.999))];
      g.n = c[1];
      double cur = uni(rng, -6.0, -2.5);
      g.lambda0.assign(c[0], cur);
      for (int i = c[0]; i < g.n; ++i) {
        cur += uni(rng, 0.3, 1.2);
        g.lambda0.push_back(cur);
      }
      break;
    }
  }
  return g;
}

// Global-existence data: J > n/2, or J = n/2 with J >= 3.
inline DataPoint gen_global(bool half_case, std::mt19937_64& rng) {
  DataPoint g;
  g.k = uni(rng, 0.5, 2.5);
  g.c_b = uni(rng, 0.5, 2.5);
  g.rho0 = uni(rng, 0.5, 2.5);
  int n = 0, J = 0;
  if (half_case) {
    n = uni(rng, 0.0, 1.0) < 0.5 ? 6 : 8;
    J = n / 2;
  } else {
    n = 3 + static_cast<int>(uni(rng, 0.0, 2.999));
    J = n / 2 + 1 + static_cast<int>(uni(rng, 0.0, n - n / 2 - 0.001));
    J = std::min(J, n);
  }
  g.n = n;
  double cur = uni(rng, -2.0, -0.3);
  g.lambda0.assign(J, cur);
  for (int i = J; i < n; ++i) {
    cur += uni(rng, 0.2, 1.5);
    g.lambda0.push_back(cur);
  }
  return g;
}

}  // namespace rep::testutil

#endif
