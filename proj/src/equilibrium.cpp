#include "cumlog/equilibrium.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "cumlog/choice.hpp"
#include "shortest_path.hpp"

namespace cumlog {

std::vector<double> all_or_nothing(const Network& net, const std::vector<double>& u) {
    for (double v : u)
        if (v < 0) throw std::runtime_error("all-or-nothing requires nonnegative costs");
    detail::Adjacency adj(net);
    std::vector<double> x(net.links.size(), 0.0);
    // group ODs by origin so each origin needs one shortest-path tree
    std::vector<std::vector<const OdPair*>> by_origin(net.num_nodes);
    for (const OdPair& od : net.od_pairs) by_origin[od.origin].push_back(&od);
    for (int o = 0; o < net.num_nodes; ++o) {
        if (by_origin[o].empty()) continue;
        std::vector<double> dist;
        std::vector<std::vector<int>> paths;
        detail::lexicographic_shortest_paths(net, adj, o, u, dist, paths);
        for (const OdPair* od : by_origin[o]) {
            if (dist[od->destination] == detail::kInf)
                throw std::runtime_error("destination unreachable in all-or-nothing loading");
            for (int e : paths[od->destination]) x[e] += od->demand;
        }
    }
    return x;
}

double relative_gap(const std::vector<double>& u, const std::vector<double>& x,
                    const std::vector<double>& xprime) {
    double total = 0.0, best = 0.0;
    for (size_t e = 0; e < u.size(); ++e) {
        total += u[e] * x[e];
        best += u[e] * xprime[e];
    }
    if (total <= 0.0) throw std::runtime_error("relative gap undefined for zero total cost");
    double delta = -(best - total) / total;
    if (delta < 0.0) {
        if (delta >= -1e-12) return 0.0;
        throw std::runtime_error("negative relative gap: x' does not minimize <u, .>");
    }
    return delta;
}

GapReport gap_report(const Network& net, const std::vector<double>& x) {
    GapReport rep;
    std::vector<double> u = link_costs(net, x);
    rep.aon_flow = all_or_nothing(net, u);
    rep.total_cost = 0.0;
    for (size_t e = 0; e < u.size(); ++e) rep.total_cost += u[e] * x[e];
    rep.delta = relative_gap(u, x, rep.aon_flow);
    return rep;
}

std::string GapReport::to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"delta\":" << delta << ",\"total_cost\":" << total_cost << ",\"aon_flow\":[";
    for (size_t i = 0; i < aon_flow.size(); ++i) {
        if (i) os << ",";
        os << aon_flow[i];
    }
    os << "]}";
    return os.str();
}

WeCertificate check_wardrop(const std::vector<double>& p, const std::vector<double>& c,
                            const Incidence& inc, double eps) {
    WeCertificate cert;
    cert.min_cost_per_od.resize(inc.num_ods);
    cert.excess.assign(inc.num_routes, 0.0);
    cert.max_violated_mass = 0.0;
    const double support_threshold = 1e-6;
    for (int w = 0; w < inc.num_ods; ++w) {
        auto [b, e] = inc.od_ranges[w];
        double bw = detail::kInf;
        for (int k = b; k < e; ++k) bw = std::min(bw, c[k]);
        cert.min_cost_per_od[w] = bw;
        double violated = 0.0;
        for (int k = b; k < e; ++k) {
            cert.excess[k] = c[k] - bw;
            if (p[k] > support_threshold && cert.excess[k] > eps) violated += p[k];
        }
        cert.max_violated_mass = std::max(cert.max_violated_mass, violated);
    }
    return cert;
}

std::string WeCertificate::to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"max_violated_mass\":" << max_violated_mass << ",\"min_cost_per_od\":[";
    for (size_t i = 0; i < min_cost_per_od.size(); ++i) {
        if (i) os << ",";
        os << min_cost_per_od[i];
    }
    os << "],\"excess\":[";
    for (size_t i = 0; i < excess.size(); ++i) {
        if (i) os << ",";
        os << excess[i];
    }
    os << "]}";
    return os.str();
}

UsedRouteReport used_routes(const std::vector<double>& p, const Incidence& inc,
                            double threshold) {
    UsedRouteReport rep;
    rep.per_od.resize(inc.num_ods);
    for (int w = 0; w < inc.num_ods; ++w) {
        auto [b, e] = inc.od_ranges[w];
        for (int k = b; k < e; ++k) {
            if (p[k] >= threshold) {
                rep.per_od[w].push_back(k);
                ++rep.count;
            }
        }
    }
    return rep;
}

namespace {

// ∫0^x u(s) ds for the supported separable models (Beckmann term).
double beckmann_term(const CostParams& c, double x) {
    switch (c.kind) {
        case CostParams::Kind::Polynomial:
            return c.h * x + c.w * std::pow(x, c.power + 1.0) / (c.power + 1.0);
        case CostParams::Kind::Bpr:
            return c.fft * (x + c.b * c.cap * std::pow(x / c.cap, c.power + 1.0) / (c.power + 1.0));
    }
    return 0.0;
}

}  // namespace

std::vector<double> beckmann_oracle(const Network& net, double tol, int max_iters) {
    for (const Link& l : net.links) {
        const CostParams& c = l.cost;
        bool nondecreasing = (c.kind == CostParams::Kind::Polynomial ? c.w >= 0 : c.b >= 0);
        if (!nondecreasing || c.power < 0)
            throw std::runtime_error("Beckmann oracle needs separable nondecreasing costs");
    }
    double total_demand = 0.0;
    for (const OdPair& od : net.od_pairs) total_demand += od.demand;
    if (total_demand == 0.0) return std::vector<double>(net.links.size(), 0.0);

    std::vector<double> x = all_or_nothing(net, free_flow_costs(net));
    double gap = detail::kInf;
    for (int it = 0; it < max_iters; ++it) {
        std::vector<double> u = link_costs(net, x);
        std::vector<double> y = all_or_nothing(net, u);
        gap = relative_gap(u, x, y);
        if (gap < tol) return x;
        // exact line search: the Beckmann objective is convex in the step, so
        // bisect on the sign of its derivative g(m) = <u(x + m(y-x)), y-x>
        double lo = 0.0, hi = 1.0;
        for (int b = 0; b < 60; ++b) {
            double m = 0.5 * (lo + hi);
            std::vector<double> xm(x.size());
            for (size_t e = 0; e < x.size(); ++e) xm[e] = x[e] + m * (y[e] - x[e]);
            std::vector<double> um = link_costs(net, xm);
            double g = 0.0;
            for (size_t e = 0; e < x.size(); ++e) g += um[e] * (y[e] - x[e]);
            if (g > 0)
                hi = m;
            else
                lo = m;
        }
        double m = 0.5 * (lo + hi);
        for (size_t e = 0; e < x.size(); ++e) x[e] += m * (y[e] - x[e]);
    }
    throw std::runtime_error("Beckmann oracle: tolerance " + std::to_string(tol) +
                             " not reached in " + std::to_string(max_iters) +
                             " iterations (gap " + std::to_string(gap) + ")");
}

std::string oracle_flows_to_csv(const Network& net, const std::vector<double>& x) {
    std::ostringstream os;
    os.precision(17);
    os << "link,flow,cost\n";
    std::vector<double> u = link_costs(net, x);
    for (const Link& l : net.links) os << l.id << "," << x[l.id] << "," << u[l.id] << "\n";
    return os.str();
}

FamilyProbeReport we_strategy_family_probe(const Network& net, const Incidence& inc,
                                           const std::vector<double>& xstar, int samples) {
    FamilyProbeReport rep;
    const int K = inc.num_routes;
    const int E = inc.num_links;
    const int W = inc.num_ods;
    // Feasibility system: Λ̄ p = x*, Σ p = 1 per OD, p >= 0.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(E + W, K);
    Eigen::VectorXd b(E + W);
    for (int k = 0; k < K; ++k)
        for (int e : inc.route_links[k]) A(e, k) = inc.route_demand[k];
    for (int e = 0; e < E; ++e) b(e) = xstar[e];
    for (int w = 0; w < W; ++w) {
        auto [rb, re] = inc.od_ranges[w];
        for (int k = rb; k < re; ++k) A(E + w, k) = 1.0;
        b(E + w) = 1.0;
    }
    // particular solution by least squares; feasibility requires a residual
    // near zero and nonnegativity after nullspace adjustment
    Eigen::VectorXd p0 = A.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
    if ((A * p0 - b).norm() > 1e-6 * std::max(1.0, b.norm())) {
        rep.feasible = false;
        return rep;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    lu.setThreshold(1e-9);
    Eigen::MatrixXd N = lu.kernel();
    int dim = (N.cols() == 1 && N.col(0).norm() < 1e-12) ? 0 : static_cast<int>(N.cols());
    rep.family_dimension = dim;

    auto entropy_of = [&](const Eigen::VectorXd& pv) {
        std::vector<double> p(pv.data(), pv.data() + K);
        for (double& v : p) v = std::max(v, 0.0);
        return entropy(p, inc);
    };

    if (dim == 0) {
        for (int k = 0; k < K; ++k)
            if (p0(k) < -1e-8) {
                rep.feasible = false;
                return rep;
            }
        rep.max_entropy_member.assign(p0.data(), p0.data() + K);
        rep.max_entropy = rep.min_sampled_entropy = rep.max_sampled_entropy = entropy_of(p0);
        return rep;
    }
    if (dim == 1) {
        Eigen::VectorXd dir = N.col(0).normalized();
        // admissible segment p0 + t*dir with all entries >= 0
        double lo = -detail::kInf, hi = detail::kInf;
        for (int k = 0; k < K; ++k) {
            if (std::abs(dir(k)) < 1e-14) {
                if (p0(k) < -1e-8) rep.feasible = false;
                continue;
            }
            double bound = -p0(k) / dir(k);
            if (dir(k) > 0)
                lo = std::max(lo, bound);
            else
                hi = std::min(hi, bound);
        }
        if (!rep.feasible || lo > hi) {
            rep.feasible = false;
            return rep;
        }
        auto member_entropy = [&](double t) { return entropy_of(p0 + t * dir); };
        rep.min_sampled_entropy = detail::kInf;
        rep.max_sampled_entropy = -detail::kInf;
        for (int i = 0; i < samples; ++i) {
            double t = lo + (hi - lo) * i / std::max(1, samples - 1);
            double h = member_entropy(t);
            rep.min_sampled_entropy = std::min(rep.min_sampled_entropy, h);
            rep.max_sampled_entropy = std::max(rep.max_sampled_entropy, h);
        }
        // entropy is strictly concave on the segment: ternary search
        double a = lo, c = hi;
        for (int it = 0; it < 200; ++it) {
            double m1 = a + (c - a) / 3.0, m2 = c - (c - a) / 3.0;
            if (member_entropy(m1) < member_entropy(m2))
                a = m1;
            else
                c = m2;
        }
        double tstar = 0.5 * (a + c);
        Eigen::VectorXd pstar = p0 + tstar * dir;
        rep.max_entropy_member.assign(pstar.data(), pstar.data() + K);
        for (double& v : rep.max_entropy_member) v = std::max(v, 0.0);
        rep.max_entropy = member_entropy(tstar);
        rep.max_sampled_entropy = std::max(rep.max_sampled_entropy, rep.max_entropy);
        return rep;
    }
    // higher-dimensional families: random interior sampling around p0
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal(0.0, 1.0);
    rep.min_sampled_entropy = detail::kInf;
    rep.max_sampled_entropy = -detail::kInf;
    Eigen::VectorXd best = p0;
    double best_h = -detail::kInf;
    for (int i = 0; i < samples; ++i) {
        Eigen::VectorXd z(N.cols());
        for (int j = 0; j < N.cols(); ++j) z(j) = normal(rng);
        Eigen::VectorXd cand = p0 + N * z;
        // shrink toward p0 until nonnegative
        double t = 1.0;
        for (int shrink = 0; shrink < 60 && cand.minCoeff() < 0; ++shrink) {
            t *= 0.5;
            cand = p0 + t * (N * z);
        }
        if (cand.minCoeff() < -1e-10) continue;
        double h = entropy_of(cand);
        rep.min_sampled_entropy = std::min(rep.min_sampled_entropy, h);
        rep.max_sampled_entropy = std::max(rep.max_sampled_entropy, h);
        if (h > best_h) {
            best_h = h;
            best = cand;
        }
    }
    rep.max_entropy_member.assign(best.data(), best.data() + K);
    rep.max_entropy = best_h;
    return rep;
}

}  // namespace cumlog
