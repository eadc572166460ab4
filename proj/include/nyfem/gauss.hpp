#pragma once

#include <vector>

namespace nyfem {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule, computed once per n and cached.
const GaussRule& gauss_legendre(int n);

/// Legendre polynomials P_0..P_k at t (normalized so P_j(1) = 1).
std::vector<double> legendre_values(int k, double t);

}  // namespace nyfem
