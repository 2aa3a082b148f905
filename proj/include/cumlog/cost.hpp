#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cumlog/network.hpp"

namespace cumlog {

// Snapshot of the flow/cost quantities induced by a strategy:
// x = Λ̄ p (link flows), u = u(x) (link costs), c = Λᵀ u (route costs).
struct FlowState {
    std::vector<double> x;
    std::vector<double> u;
    std::vector<double> c;
};

double link_cost(const CostParams& params, double x);
double link_cost_derivative(const CostParams& params, double x);

std::vector<double> link_flows(const Incidence& inc, const std::vector<double>& p);
std::vector<double> link_costs(const Network& net, const std::vector<double>& x);
std::vector<double> route_costs(const Incidence& inc, const std::vector<double>& u);

// Convenience: evaluate the full p -> (x, u, c) chain.
FlowState evaluate_flow(const Network& net, const Incidence& inc, const std::vector<double>& p);

struct LipschitzOptions {
    enum class Sampling { Grid, Random };
    Sampling sampling = Sampling::Grid;
    int samples = 200;       // random samples added on top of the grid
    std::uint64_t seed = 1;  // RNG seed for reproducibility
};

// Sample-based estimate of L = max_p ||Λᵀ diag(u'(x)) Λ̄||₂, times a 1.1
// safety factor. Upper-bounds the true constant only over the sampled set;
// for polynomial costs the per-OD simplex vertices (included in the grid when
// small enough) contain the maximizer.
double estimate_lipschitz(const Network& net, const Incidence& inc, const LipschitzOptions& opts = {});

struct CocoercivityReport {
    int trials = 0;
    double max_violation = 0.0;  // expected <= 0 up to float noise
    double lipschitz = 0.0;
    std::string to_json() const;
};

// Checks <c(p')-c(p), p'-p> >= 1/(4L) ||c(p')-c(p)||² on random simplex pairs.
// Pass lipschitz_override > 0 to reuse a precomputed constant (useful on
// networks where the sampling estimate is expensive).
CocoercivityReport cocoercivity_probe(const Network& net, const Incidence& inc, int trials,
                                      std::uint64_t seed = 1, double lipschitz_override = 0.0);

}  // namespace cumlog
