#pragma once

#include <string>
#include <vector>

#include "cumlog/cost.hpp"
#include "cumlog/network.hpp"

namespace cumlog {

struct GapReport {
    double delta = 0.0;               // relative gap
    std::vector<double> aon_flow;     // x'
    double total_cost = 0.0;          // <u, x>
    std::string to_json() const;
};

// Loads all demand of every OD on its shortest path under fixed link costs u.
// Ties are broken toward the lexicographically smallest node sequence, then
// the smallest link-id sequence, so the loading is deterministic.
std::vector<double> all_or_nothing(const Network& net, const std::vector<double>& u);

// delta = -<u, x'-x> / <u, x>; tiny negatives in [-1e-12, 0) clamp to 0.
double relative_gap(const std::vector<double>& u, const std::vector<double>& x,
                    const std::vector<double>& xprime);

GapReport gap_report(const Network& net, const std::vector<double>& x);

struct WeCertificate {
    std::vector<double> min_cost_per_od;  // b_w
    std::vector<double> excess;           // c_k - b_w per route
    double max_violated_mass = 0.0;       // Σ p_k over used routes with excess > eps
    std::string to_json() const;
};

WeCertificate check_wardrop(const std::vector<double>& p, const std::vector<double>& c,
                            const Incidence& inc, double eps);

struct UsedRouteReport {
    int count = 0;
    std::vector<std::vector<int>> per_od;  // route indices with p_k >= threshold
};

// Routes with p_k >= threshold count as actively used (inclusive bound).
UsedRouteReport used_routes(const std::vector<double>& p, const Incidence& inc,
                            double threshold = 1e-6);

// Frank–Wolfe on the Beckmann objective with exact (bisection) line search.
// Independent of the day-to-day engines; serves as the WE ground-truth oracle.
// Throws if tol is not reached within max_iters.
std::vector<double> beckmann_oracle(const Network& net, double tol, int max_iters = 20000);

std::string oracle_flows_to_csv(const Network& net, const std::vector<double>& x);

struct FamilyProbeReport {
    int family_dimension = 0;       // dimension of {p >= 0: Λ̄p = x*, Σp = 1}
    std::vector<double> max_entropy_member;
    double max_entropy = 0.0;
    double min_sampled_entropy = 0.0;
    double max_sampled_entropy = 0.0;
    bool feasible = true;
};

// Explores the WE strategy polyhedron {p in P: Λ̄p = x*}. For one-dimensional
// families (the 3N4L case) the segment is parameterized exactly and the
// entropy-maximizing member located by ternary search; zero-dimensional
// families return the unique point.
FamilyProbeReport we_strategy_family_probe(const Network& net, const Incidence& inc,
                                           const std::vector<double>& xstar, int samples = 64);

}  // namespace cumlog
