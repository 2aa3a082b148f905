#pragma once

#include <vector>

#include "cumlog/network.hpp"

namespace cumlog {

// Logit choice per OD block: p_k = exp(-r s_k) / Σ_{k' in same OD} exp(-r s_k').
// The per-OD minimum of s is subtracted before exponentiation; this is exact
// (logit depends only on valuation differences) and keeps the map finite for
// arbitrarily large valuations. +infinity entries receive probability 0.
std::vector<double> logit(const std::vector<double>& s, double r, const Incidence& inc);

// Σ_w Σ_k p_k (ln p_k - ln q_k) with 0·ln0 = 0; +infinity when the support of
// p is not contained in the support of q.
double kl_divergence(const std::vector<double>& p, const std::vector<double>& q,
                     const Incidence& inc);

// Demand-weighted entropy: -Σ_w d_w Σ_{k in w} p_k ln p_k (natural log).
double entropy(const std::vector<double>& p, const Incidence& inc);

// Verifies that the logit map coincides with the closed-form KL projection of
// exp(-r s - 1) onto the simplex, per OD, to the given tolerance.
bool kl_projection_identity_check(const std::vector<double>& s, double r, const Incidence& inc,
                                  double tol = 1e-12);

}  // namespace cumlog
