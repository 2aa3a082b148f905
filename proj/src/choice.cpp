#include "cumlog/choice.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cumlog {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::vector<double> logit(const std::vector<double>& s, double r, const Incidence& inc) {
    if (!(r > 0)) throw std::runtime_error("logit requires r > 0");
    if (static_cast<int>(s.size()) != inc.num_routes)
        throw std::runtime_error("valuation dimension mismatch");
    for (double v : s) {
        if (std::isnan(v) || v == -kInf)
            throw std::runtime_error("valuations must be finite or +infinity");
    }
    std::vector<double> p(s.size(), 0.0);
    for (auto [b, e] : inc.od_ranges) {
        double mn = kInf;
        for (int k = b; k < e; ++k) mn = std::min(mn, s[k]);
        if (mn == kInf) throw std::runtime_error("all routes of an OD are unacceptable");
        double sum = 0.0;
        for (int k = b; k < e; ++k) {
            p[k] = s[k] == kInf ? 0.0 : std::exp(-r * (s[k] - mn));
            sum += p[k];
        }
        for (int k = b; k < e; ++k) {
            p[k] /= sum;
            if (p[k] < 1e-300) p[k] = 0.0;  // underflow image of an unacceptable route
        }
    }
    return p;
}

double kl_divergence(const std::vector<double>& p, const std::vector<double>& q,
                     const Incidence& inc) {
    double total = 0.0;
    for (int k = 0; k < inc.num_routes; ++k) {
        if (p[k] == 0.0) continue;
        if (q[k] == 0.0) return kInf;  // support(p) not contained in support(q)
        total += p[k] * (std::log(p[k]) - std::log(q[k]));
    }
    return total;
}

double entropy(const std::vector<double>& p, const Incidence& inc) {
    // each OD block weighted by its demand
    double weighted = 0.0;
    for (size_t w = 0; w < inc.od_ranges.size(); ++w) {
        auto [b, e] = inc.od_ranges[w];
        double h = 0.0;
        for (int k = b; k < e; ++k)
            if (p[k] > 0.0) h -= p[k] * std::log(p[k]);
        weighted += inc.od_demand[w] * h;
    }
    return weighted;
}

bool kl_projection_identity_check(const std::vector<double>& s, double r, const Incidence& inc,
                                  double tol) {
    std::vector<double> via_logit = logit(s, r, inc);
    for (auto [b, e] : inc.od_ranges) {
        // closed-form projection: normalize exp(-r s - 1) per OD
        double mn = kInf;
        for (int k = b; k < e; ++k) mn = std::min(mn, s[k]);
        double sum = 0.0;
        std::vector<double> g(e - b, 0.0);
        for (int k = b; k < e; ++k) {
            g[k - b] = s[k] == kInf ? 0.0 : std::exp(-r * (s[k] - mn) - 1.0);
            sum += g[k - b];
        }
        for (int k = b; k < e; ++k) {
            double proj = g[k - b] / sum;
            if (std::abs(proj - via_logit[k]) > tol) return false;
        }
    }
    return true;
}

}  // namespace cumlog
