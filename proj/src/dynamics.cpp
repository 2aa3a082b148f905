#include "cumlog/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "cumlog/choice.hpp"
#include "cumlog/equilibrium.hpp"

namespace cumlog {

double Schedule::eta(int t) const {
    switch (kind) {
        case Kind::Constant:
            return value;
        case Kind::Power:
            return std::pow(t + 1.0, alpha);
        case Kind::Harmonic:
            return 1.0 / (t + 1.0);
        case Kind::Table:
            if (t < 1 || t > static_cast<int>(table.size()))
                throw std::runtime_error("schedule table exhausted at day " + std::to_string(t));
            return table[t - 1];
    }
    return 1.0;
}

bool Schedule::step_condition_compliant() const {
    switch (kind) {
        case Kind::Constant:
            return true;  // constant-step regime (small-η condition applies)
        case Kind::Power:
            return alpha >= -1.0 && alpha <= 0.0;
        case Kind::Harmonic:
            return true;
        case Kind::Table:
            return false;  // unknown asymptotics
    }
    return false;
}

double RSchedule::at(int t) const {
    switch (kind) {
        case Kind::Constant:
            return r;
        case Kind::Power:
            return std::pow(t + 1.0, beta);
    }
    return r;
}

DynamicsState make_initial_state(const Network& net, const Incidence& inc,
                                 const std::vector<double>& s0, double r) {
    DynamicsState st;
    st.day = 0;
    st.s = s0.empty() ? std::vector<double>(inc.num_routes, 0.0) : s0;
    st.p = logit(st.s, r, inc);
    st.flow = evaluate_flow(net, inc, st.p);
    return st;
}

namespace {

void apply_variant(std::vector<double>& s, const Incidence& inc, UpdateVariant variant) {
    if (variant != UpdateVariant::RecenterMin) return;
    for (auto [b, e] : inc.od_ranges) {
        double mn = s[b];
        for (int k = b; k < e; ++k) mn = std::min(mn, s[k]);
        for (int k = b; k < e; ++k) s[k] -= mn;
    }
}

}  // namespace

DynamicsState cumlog_step(const Network& net, const Incidence& inc, const DynamicsState& state,
                          double eta, double r, UpdateVariant variant) {
    if (!(eta > 0)) throw std::runtime_error("cumlog_step requires eta > 0");
    for (double ck : state.flow.c)
        if (!std::isfinite(ck)) throw std::runtime_error("non-finite route cost");
    DynamicsState next;
    next.day = state.day + 1;
    next.s = state.s;
    if (variant == UpdateVariant::ExcessUpdate) {
        for (auto [b, e] : inc.od_ranges) {
            double mn = state.flow.c[b];
            for (int k = b; k < e; ++k) mn = std::min(mn, state.flow.c[k]);
            for (int k = b; k < e; ++k) next.s[k] += eta * (state.flow.c[k] - mn);
        }
    } else {
        for (int k = 0; k < inc.num_routes; ++k) next.s[k] += eta * state.flow.c[k];
        apply_variant(next.s, inc, variant);
    }
    next.p = logit(next.s, r, inc);
    next.flow = evaluate_flow(net, inc, next.p);
    return next;
}

DynamicsState sa_step(const Network& net, const Incidence& inc, const DynamicsState& state,
                      double eta, double r) {
    if (!(eta > 0) || eta > 1.0) throw std::runtime_error("sa_step requires eta in (0, 1]");
    DynamicsState next;
    next.day = state.day + 1;
    next.s.resize(state.s.size());
    for (size_t k = 0; k < state.s.size(); ++k)
        next.s[k] = (1.0 - eta) * state.s[k] + eta * state.flow.c[k];
    next.p = logit(next.s, r, inc);
    next.flow = evaluate_flow(net, inc, next.p);
    return next;
}

std::vector<double> weighted_average_step(const std::vector<std::vector<double>>& costs,
                                          const std::vector<double>& weights) {
    if (costs.size() != weights.size())
        throw std::runtime_error("weighted_average_step: history/weight length mismatch");
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0) throw std::runtime_error("weights must be nonnegative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::runtime_error("weights must sum to 1");
    std::vector<double> s(costs.empty() ? 0 : costs[0].size(), 0.0);
    for (size_t i = 0; i < costs.size(); ++i)
        for (size_t k = 0; k < s.size(); ++k) s[k] += weights[i] * costs[i][k];
    return s;
}

namespace {

// prefix_min[i] = min(gaps[0..i]); kept incrementally by run() so the check
// stays O(window) per day on very long runs.
bool detect_divergence_impl(const std::vector<double>& gaps,
                            const std::vector<double>& prefix_min) {
    const size_t n = gaps.size();
    if (n < 10) return false;
    double g0 = gaps.front();
    double last = gaps.back();
    if (g0 > 0.0 && last > 10.0 * g0) return true;
    if (last > 1e3) return true;
    // monotone growth over the last 10 entries, by a material amount: a slow
    // sub-percent drift across a transient bump is not divergence.
    bool monotone = last > 1.2 * gaps[n - 10];
    for (size_t i = n - 9; monotone && i < n; ++i)
        if (gaps[i] <= gaps[i - 1]) monotone = false;
    if (monotone) return true;
    // stall: no new global minimum over the last 30 entries while the gap
    // swings by more than 1.5x within the window. A flat plateau, or a plateau
    // with only small numerical ripple (the gap floor of a finite route set),
    // is not divergence.
    const size_t window = 30;
    if (n >= window + 1) {
        double prior_min = prefix_min[n - window - 1];
        double wmin = gaps[n - window], wmax = gaps[n - window];
        for (size_t i = n - window; i < n; ++i) {
            wmin = std::min(wmin, gaps[i]);
            wmax = std::max(wmax, gaps[i]);
        }
        // wmax > 1e-12 keeps float-noise ripple at an essentially-zero gap
        // (a fully converged run with no gap stop) from counting as a swing.
        if (wmin >= prior_min && wmin > 0.0 && wmax > 1e-12 && wmax > 1.5 * wmin) return true;
    }
    return false;
}

std::vector<double> prefix_mins(const std::vector<double>& gaps) {
    std::vector<double> pm(gaps.size());
    double cur = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < gaps.size(); ++i) {
        cur = std::min(cur, gaps[i]);
        pm[i] = cur;
    }
    return pm;
}

}  // namespace

bool detect_divergence(const std::vector<double>& gaps) {
    return detect_divergence_impl(gaps, prefix_mins(gaps));
}

namespace {

DayRecord make_record(const Network& net, const Incidence& inc, const DynamicsState& st,
                      const std::optional<std::vector<double>>& ref_p) {
    DayRecord rec;
    rec.t = st.day;
    GapReport gr = gap_report(net, st.flow.x);
    rec.gap = gr.delta;
    rec.entropy = entropy(st.p, inc);
    rec.kl_to_ref = ref_p ? kl_divergence(*ref_p, st.p, inc) : 0.0;
    rec.used_routes = used_routes(st.p, inc).count;
    rec.p = st.p;
    rec.s = st.s;
    rec.x = st.flow.x;
    rec.u = st.flow.u;
    rec.c = st.flow.c;
    return rec;
}

}  // namespace

Trajectory run(const Network& net, const Incidence& inc, const RunConfig& config,
               const StopRule& stop) {
    Trajectory traj;
    DynamicsState st = make_initial_state(net, inc, config.s0, config.r_schedule.at(0));
    std::vector<double> gaps, pmins;
    auto push_gap = [&](double g) {
        gaps.push_back(g);
        pmins.push_back(pmins.empty() ? g : std::min(pmins.back(), g));
    };
    traj.days.push_back(make_record(net, inc, st, config.ref_p));
    push_gap(traj.days.back().gap);
    traj.status = Termination::MaxDays;
    traj.final_day = 0;
    traj.final_gap = gaps.back();
    for (int t = 1; t <= stop.max_days; ++t) {
        double eta = config.schedule.eta(t);
        double r = config.r_schedule.at(t);
        if (config.engine == RunConfig::Engine::CumLog)
            st = cumlog_step(net, inc, st, eta, r, config.variant);
        else
            st = sa_step(net, inc, st, eta, r);
        DayRecord rec = make_record(net, inc, st, config.ref_p);
        push_gap(rec.gap);
        traj.final_day = t;
        traj.final_gap = gaps.back();
        bool stopping = t == stop.max_days;
        if (stop.gap_tol > 0 && gaps.back() < stop.gap_tol) {
            traj.status = Termination::Converged;
            stopping = true;
        } else if (stop.divergence_check && detect_divergence_impl(gaps, pmins)) {
            traj.status = Termination::Diverged;
            stopping = true;
        }
        // thin long runs: past 1e5 days keep every 10th record
        if (t <= 100000 || t % 10 == 0 || stopping) traj.days.push_back(std::move(rec));
        if (stopping) break;
    }
    return traj;
}

MulticlassResult run_multiclass(const Network& net, const Incidence& inc,
                                const std::vector<ClassSpec>& classes, const Schedule& schedule,
                                const StopRule& stop) {
    double share_sum = 0.0;
    for (const ClassSpec& c : classes) share_sum += c.share;
    if (std::abs(share_sum - 1.0) > 1e-9)
        throw std::runtime_error("class demand shares must sum to 1");

    MulticlassResult res;
    const int C = static_cast<int>(classes.size());
    std::vector<DynamicsState> st(C);
    for (int c = 0; c < C; ++c)
        st[c] = make_initial_state(net, inc, classes[c].s0, classes[c].r);
    res.per_class.resize(C);

    auto aggregate_flow = [&]() {
        std::vector<double> x(inc.num_links, 0.0);
        for (int c = 0; c < C; ++c) {
            std::vector<double> xc = link_flows(inc, st[c].p);
            for (int e = 0; e < inc.num_links; ++e) x[e] += classes[c].share * xc[e];
        }
        return x;
    };

    std::vector<double> gaps;
    std::vector<double> x = aggregate_flow();
    std::vector<double> u = link_costs(net, x);
    gaps.push_back(gap_report(net, x).delta);
    for (int c = 0; c < C; ++c) {
        DayRecord rec;
        rec.t = 0;
        rec.gap = gaps.back();
        rec.entropy = entropy(st[c].p, inc);
        rec.used_routes = used_routes(st[c].p, inc).count;
        rec.p = st[c].p;
        rec.s = st[c].s;
        res.per_class[c].days.push_back(std::move(rec));
    }

    Termination status = Termination::MaxDays;
    int final_day = 0;
    for (int t = 1; t <= stop.max_days; ++t) {
        double eta = schedule.eta(t);
        // all classes experience the same aggregate costs
        std::vector<double> c_route = route_costs(inc, u);
        for (int c = 0; c < C; ++c) {
            DynamicsState next;
            next.day = t;
            next.s = st[c].s;
            for (int k = 0; k < inc.num_routes; ++k) next.s[k] += eta * c_route[k];
            next.p = logit(next.s, classes[c].r, inc);
            st[c] = std::move(next);
        }
        x = aggregate_flow();
        u = link_costs(net, x);
        double gap = gap_report(net, x).delta;
        gaps.push_back(gap);
        for (int c = 0; c < C; ++c) {
            DayRecord rec;
            rec.t = t;
            rec.gap = gap;
            rec.entropy = entropy(st[c].p, inc);
            rec.used_routes = used_routes(st[c].p, inc).count;
            rec.p = st[c].p;
            rec.s = st[c].s;
            if (t <= 100000 || t % 10 == 0 || t == stop.max_days)
                res.per_class[c].days.push_back(std::move(rec));
        }
        final_day = t;
        if (stop.gap_tol > 0 && gap < stop.gap_tol) {
            status = Termination::Converged;
            break;
        }
        if (stop.divergence_check && detect_divergence(gaps)) {
            status = Termination::Diverged;
            break;
        }
    }
    for (int c = 0; c < C; ++c) {
        res.per_class[c].status = status;
        res.per_class[c].final_day = final_day;
        res.per_class[c].final_gap = gaps.back();
    }
    res.aggregate.x = x;
    res.aggregate.u = u;
    res.aggregate.c = route_costs(inc, u);
    res.aggregate_gap = gaps.back();
    return res;
}

std::vector<double> normal_s0(int n, std::uint64_t seed, double sigma) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    std::vector<double> s(n);
    for (double& v : s) v = normal(rng);
    return s;
}

std::string Trajectory::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    bool with_p = !days.empty() && days.front().p.size() <= 16;
    os << "t,gap,entropy,used_routes";
    if (with_p)
        for (size_t k = 0; k < days.front().p.size(); ++k) os << ",p" << k;
    os << "\n";
    for (const DayRecord& d : days) {
        os << d.t << "," << d.gap << "," << d.entropy << "," << d.used_routes;
        if (with_p)
            for (double v : d.p) os << "," << v;
        os << "\n";
    }
    return os.str();
}

std::string Trajectory::to_json() const {
    std::ostringstream os;
    os.precision(17);
    auto vec = [&](const std::vector<double>& v) {
        std::ostringstream o;
        o.precision(17);
        o << "[";
        for (size_t i = 0; i < v.size(); ++i) {
            if (i) o << ",";
            o << v[i];
        }
        o << "]";
        return o.str();
    };
    const char* st = status == Termination::Converged ? "converged"
                     : status == Termination::Diverged ? "diverged"
                                                        : "max_days";
    os << "{\"status\":\"" << st << "\",\"final_day\":" << final_day
       << ",\"final_gap\":" << final_gap << ",\"days\":[";
    for (size_t i = 0; i < days.size(); ++i) {
        const DayRecord& d = days[i];
        if (i) os << ",";
        os << "{\"t\":" << d.t << ",\"gap\":" << d.gap << ",\"entropy\":" << d.entropy
           << ",\"kl_to_ref\":";
        if (std::isfinite(d.kl_to_ref))
            os << d.kl_to_ref;
        else
            os << "null";  // support mismatch renders the divergence infinite
        os << ",\"used_routes\":" << d.used_routes
           << ",\"p\":" << vec(d.p) << ",\"s\":" << vec(d.s) << ",\"x\":" << vec(d.x)
           << ",\"u\":" << vec(d.u) << ",\"c\":" << vec(d.c) << "}";
    }
    os << "]}";
    return os.str();
}

}  // namespace cumlog
