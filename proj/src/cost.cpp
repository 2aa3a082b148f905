#include "cumlog/cost.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace cumlog {

double link_cost(const CostParams& c, double x) {
    if (x < 0) throw std::runtime_error("negative link flow");
    switch (c.kind) {
        case CostParams::Kind::Polynomial:
            return c.h + c.w * std::pow(x, c.power);
        case CostParams::Kind::Bpr:
            return c.fft * (1.0 + c.b * std::pow(x / c.cap, c.power));
    }
    return 0.0;
}

double link_cost_derivative(const CostParams& c, double x) {
    if (x < 0) throw std::runtime_error("negative link flow");
    switch (c.kind) {
        case CostParams::Kind::Polynomial:
            if (c.power == 1.0) return c.w;
            return c.w * c.power * std::pow(x, c.power - 1.0);
        case CostParams::Kind::Bpr:
            if (c.power == 1.0) return c.fft * c.b / c.cap;
            return c.fft * c.b * c.power * std::pow(x / c.cap, c.power - 1.0) / c.cap;
    }
    return 0.0;
}

std::vector<double> link_flows(const Incidence& inc, const std::vector<double>& p) {
    if (static_cast<int>(p.size()) != inc.num_routes)
        throw std::runtime_error("strategy dimension mismatch");
    std::vector<double> x(inc.num_links, 0.0);
    for (int k = 0; k < inc.num_routes; ++k) {
        double f = inc.route_demand[k] * p[k];
        if (f == 0.0) continue;
        for (int e : inc.route_links[k]) x[e] += f;
    }
    return x;
}

std::vector<double> link_costs(const Network& net, const std::vector<double>& x) {
    if (x.size() != net.links.size()) throw std::runtime_error("flow dimension mismatch");
    std::vector<double> u(x.size());
    for (const Link& l : net.links) u[l.id] = link_cost(l.cost, x[l.id]);
    return u;
}

std::vector<double> route_costs(const Incidence& inc, const std::vector<double>& u) {
    if (static_cast<int>(u.size()) != inc.num_links)
        throw std::runtime_error("cost dimension mismatch");
    std::vector<double> c(inc.num_routes, 0.0);
    for (int k = 0; k < inc.num_routes; ++k)
        for (int e : inc.route_links[k]) c[k] += u[e];
    return c;
}

FlowState evaluate_flow(const Network& net, const Incidence& inc, const std::vector<double>& p) {
    FlowState f;
    f.x = link_flows(inc, p);
    f.u = link_costs(net, f.x);
    f.c = route_costs(inc, f.u);
    return f;
}

namespace {

// Spectral norm via power iteration on JᵀJ; deterministic start vector.
double spectral_norm(const Eigen::MatrixXd& J) {
    const int n = static_cast<int>(J.cols());
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n).normalized();
    double sigma = 0.0;
    for (int it = 0; it < 200; ++it) {
        Eigen::VectorXd w = J.transpose() * (J * v);
        double nrm = w.norm();
        if (nrm == 0.0) return 0.0;
        v = w / nrm;
        double next = std::sqrt(nrm);
        if (std::abs(next - sigma) <= 1e-12 * std::max(1.0, next)) return next;
        sigma = next;
    }
    return sigma;
}

// ||Λᵀ diag(u'(x)) Λ̄||₂ at the flows induced by p.
double jacobian_norm_at(const Network& net, const Incidence& inc, const std::vector<double>& p) {
    std::vector<double> x = link_flows(inc, p);
    std::vector<double> du(x.size());
    for (const Link& l : net.links) du[l.id] = link_cost_derivative(l.cost, x[l.id]);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(inc.num_routes, inc.num_routes);
    // J[k][k2] = Σ_e Λ[e,k] u'_e Λ̄[e,k2]; accumulate link by link.
    std::vector<std::vector<int>> routes_on_link(inc.num_links);
    for (int k = 0; k < inc.num_routes; ++k)
        for (int e : inc.route_links[k]) routes_on_link[e].push_back(k);
    for (int e = 0; e < inc.num_links; ++e) {
        if (du[e] == 0.0) continue;
        for (int k : routes_on_link[e])
            for (int k2 : routes_on_link[e]) J(k, k2) += du[e] * inc.route_demand[k2];
    }
    return spectral_norm(J);
}

std::vector<double> random_simplex(const Incidence& inc, std::mt19937_64& rng) {
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> p(inc.num_routes);
    for (auto [b, e] : inc.od_ranges) {
        double sum = 0.0;
        for (int k = b; k < e; ++k) {
            p[k] = expo(rng);
            sum += p[k];
        }
        for (int k = b; k < e; ++k) p[k] /= sum;
    }
    return p;
}

}  // namespace

double estimate_lipschitz(const Network& net, const Incidence& inc, const LipschitzOptions& opts) {
    for (const Link& l : net.links)
        if (l.cost.power < 1.0) throw std::runtime_error("cost model not differentiable enough");

    double best = 0.0;
    // Grid part: per-OD simplex vertices, full cartesian product when small.
    if (opts.sampling == LipschitzOptions::Sampling::Grid) {
        long combos = 1;
        bool small = true;
        for (auto [b, e] : inc.od_ranges) {
            int m = e - b;
            if (m > 6 || combos * m > 4096) {
                small = false;
                break;
            }
            combos *= m;
        }
        if (small) {
            std::vector<int> pick(inc.od_ranges.size(), 0);
            while (true) {
                std::vector<double> p(inc.num_routes, 0.0);
                for (size_t w = 0; w < inc.od_ranges.size(); ++w)
                    p[inc.od_ranges[w].first + pick[w]] = 1.0;
                best = std::max(best, jacobian_norm_at(net, inc, p));
                size_t w = 0;
                for (; w < pick.size(); ++w) {
                    int m = inc.od_ranges[w].second - inc.od_ranges[w].first;
                    if (++pick[w] < m) break;
                    pick[w] = 0;
                }
                if (w == pick.size()) break;
            }
        }
    }
    std::mt19937_64 rng(opts.seed);
    for (int i = 0; i < opts.samples; ++i)
        best = std::max(best, jacobian_norm_at(net, inc, random_simplex(inc, rng)));
    return best * 1.1;
}

CocoercivityReport cocoercivity_probe(const Network& net, const Incidence& inc, int trials,
                                      std::uint64_t seed, double lipschitz_override) {
    CocoercivityReport rep;
    rep.trials = trials;
    rep.lipschitz =
        lipschitz_override > 0 ? lipschitz_override : estimate_lipschitz(net, inc);
    rep.max_violation = -std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(seed);
    for (int i = 0; i < trials; ++i) {
        std::vector<double> p = random_simplex(inc, rng);
        std::vector<double> q = random_simplex(inc, rng);
        std::vector<double> cp = evaluate_flow(net, inc, p).c;
        std::vector<double> cq = evaluate_flow(net, inc, q).c;
        double lhs = 0.0, nrm2 = 0.0;
        for (int k = 0; k < inc.num_routes; ++k) {
            double dc = cq[k] - cp[k];
            lhs += dc * (q[k] - p[k]);
            nrm2 += dc * dc;
        }
        // violation = RHS - LHS; positive would break the inequality
        double rhs = rep.lipschitz > 0 ? nrm2 / (4.0 * rep.lipschitz) : 0.0;
        double viol = rhs - lhs;
        rep.max_violation = std::max(rep.max_violation, viol);
    }
    return rep;
}

std::string CocoercivityReport::to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"trials\":" << trials << ",\"max_violation\":" << max_violation
       << ",\"L\":" << lipschitz << "}";
    return os.str();
}

}  // namespace cumlog
