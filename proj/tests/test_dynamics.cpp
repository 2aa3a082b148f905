#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cumlog/choice.hpp"
#include "cumlog/dynamics.hpp"
#include "cumlog/equilibrium.hpp"
#include "cumlog/network.hpp"

using namespace cumlog;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("schedules") {
    Schedule c = Schedule::constant(0.5);
    CHECK(c.eta(1) == 0.5);
    CHECK(c.eta(999) == 0.5);
    CHECK(c.step_condition_compliant());

    Schedule h = Schedule::harmonic();
    CHECK(h.eta(1) == doctest::Approx(0.5));
    CHECK(h.eta(9) == doctest::Approx(0.1));
    CHECK(h.step_condition_compliant());

    Schedule p = Schedule::power(-0.5);
    CHECK(p.eta(3) == doctest::Approx(0.5));
    CHECK(p.step_condition_compliant());
    CHECK(Schedule::power(0.0).step_condition_compliant());
    CHECK_FALSE(Schedule::power(0.25).step_condition_compliant());
    CHECK_FALSE(Schedule::power(-1.5).step_condition_compliant());

    RSchedule rc = RSchedule::constant(2.5);
    CHECK(rc.at(100) == 2.5);
    RSchedule rp = RSchedule::power(1.0);
    CHECK(rp.at(0) == doctest::Approx(1.0));
    CHECK(rp.at(9) == doctest::Approx(10.0));
}

TEST_CASE("cumlog_step: one hand-computed day on three-parallel") {
    auto [net, routes] = builtin("three-parallel");
    Incidence inc = make_incidence(net, routes);
    DynamicsState st = make_initial_state(net, inc, {}, 0.25);
    for (double v : st.p) CHECK(v == doctest::Approx(1.0 / 3.0));
    CHECK(st.flow.c[0] == doctest::Approx(1.0));
    CHECK(st.flow.c[1] == doctest::Approx(2.0));
    CHECK(st.flow.c[2] == doctest::Approx(3.25));

    DynamicsState next = cumlog_step(net, inc, st, 1.0, 0.25);
    CHECK(next.day == 1);
    CHECK(next.s[0] == doctest::Approx(1.0));
    CHECK(next.s[1] == doctest::Approx(2.0));
    CHECK(next.s[2] == doctest::Approx(3.25));
    auto expect = logit(next.s, 0.25, inc);
    CHECK(next.p == expect);

    CHECK_THROWS_AS(cumlog_step(net, inc, st, 0.0, 0.25), std::runtime_error);
    CHECK_THROWS_AS(cumlog_step(net, inc, st, -1.0, 0.25), std::runtime_error);
}

TEST_CASE("cumlog_step: converged states are fixed points") {
    auto [net, routes] = builtin("3n4l");
    Incidence inc = make_incidence(net, routes);
    RunConfig cfg;
    cfg.r_schedule = RSchedule::constant(1.0);
    StopRule stop;
    stop.max_days = 200;
    stop.gap_tol = 1e-13;
    Trajectory traj = run(net, inc, cfg, stop);
    REQUIRE(traj.status == Termination::Converged);
    DynamicsState st;
    st.day = traj.final_day;
    st.s = traj.days.back().s;
    st.p = traj.days.back().p;
    st.flow = evaluate_flow(net, inc, st.p);
    DynamicsState next = cumlog_step(net, inc, st, 1.0, 1.0);
    CHECK(max_abs_diff(next.p, st.p) < 1e-6);
}

TEST_CASE("sa_step: eta=1 is memoryless; guards on eta") {
    auto [net, routes] = builtin("three-parallel");
    Incidence inc = make_incidence(net, routes);
    DynamicsState st = make_initial_state(net, inc, {5.0, 5.0, 5.0}, 1.0);
    DynamicsState next = sa_step(net, inc, st, 1.0, 1.0);
    CHECK(next.s == st.flow.c);
    CHECK_THROWS_AS(sa_step(net, inc, st, 0.0, 1.0), std::runtime_error);
    CHECK_THROWS_AS(sa_step(net, inc, st, 1.5, 1.0), std::runtime_error);
}

TEST_CASE("sa fixed point: constant eta and r settle at the logit equilibrium") {
    auto [net, routes] = builtin("3n4l");
    Incidence inc = make_incidence(net, routes);
    DynamicsState st = make_initial_state(net, inc, {}, 2.0);
    for (int t = 1; t <= 5000; ++t) st = sa_step(net, inc, st, 0.5, 2.0);
    // residual of p = q_r(c(p))
    auto fixed = logit(st.flow.c, 2.0, inc);
    CHECK(max_abs_diff(st.p, fixed) < 1e-9);
}

TEST_CASE("sa model with unit-start schedules reproduces the cumulative process") {
    auto [net, routes] = builtin("3n4l");
    Incidence inc = make_incidence(net, routes);
    // eta^t = 1/(t+1), r^t = t+1 versus the cumulative process with r=1, eta=1
    DynamicsState sa = make_initial_state(net, inc, {}, 1.0);
    DynamicsState cl = make_initial_state(net, inc, {}, 1.0);
    for (int t = 1; t <= 100; ++t) {
        sa = sa_step(net, inc, sa, 1.0 / (t + 1.0), t + 1.0);
        cl = cumlog_step(net, inc, cl, 1.0, 1.0);
        CHECK(max_abs_diff(sa.p, cl.p) <= 1e-9);
    }
}

TEST_CASE("weighted_average_step") {
    std::vector<std::vector<double>> costs = {{1.0, 2.0}, {3.0, 4.0}, {5.0, 0.0}};
    auto s = weighted_average_step({costs[0]}, {1.0});
    CHECK(s == costs[0]);
    s = weighted_average_step(costs, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    CHECK(s[0] == doctest::Approx(3.0));
    CHECK(s[1] == doctest::Approx(2.0));
    CHECK_THROWS_AS(weighted_average_step(costs, {0.5, 0.5, 0.5}), std::runtime_error);
    CHECK_THROWS_AS(weighted_average_step(costs, {1.5, -0.5, 0.0}), std::runtime_error);

    // the eta^t = 1/t recursion averages the experienced costs uniformly, so
    // three steps of it match the explicit weighted average with weights 1/3
    auto [net, routes] = builtin("3n4l");
    Incidence inc = make_incidence(net, routes);
    DynamicsState cur = make_initial_state(net, inc, {}, 1.0);
    std::vector<std::vector<double>> history;
    for (int t = 1; t <= 3; ++t) {
        history.push_back(cur.flow.c);
        cur = sa_step(net, inc, cur, 1.0 / t, 1.0);
    }
    auto direct = weighted_average_step(history, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    CHECK(max_abs_diff(cur.s, direct) < 1e-12);
}

TEST_CASE("variant equivalence: raw, recentered, and excess updates agree") {
    auto [net, routes] = builtin("3n4l");
    Incidence inc = make_incidence(net, routes);
    StopRule stop;
    stop.max_days = 100;
    stop.divergence_check = false;
    Trajectory raw, recentered, excess;
    for (auto [variant, traj] :
         {std::pair{UpdateVariant::Raw, &raw}, {UpdateVariant::RecenterMin, &recentered},
          {UpdateVariant::ExcessUpdate, &excess}}) {
        RunConfig cfg;
        cfg.r_schedule = RSchedule::constant(1.0);
        cfg.variant = variant;
        *traj = run(net, inc, cfg, stop);
    }
    REQUIRE(raw.days.size() == recentered.days.size());
    REQUIRE(raw.days.size() == excess.days.size());
    for (size_t i = 0; i < raw.days.size(); ++i) {
        CHECK(max_abs_diff(raw.days[i].p, recentered.days[i].p) <= 1e-9);
        CHECK(max_abs_diff(raw.days[i].p, excess.days[i].p) <= 1e-9);
    }
}

TEST_CASE("run: three-parallel reaches the equilibrium region quickly") {
    auto [net, routes] = builtin("three-parallel");
    Incidence inc = make_incidence(net, routes);
    RunConfig cfg;
    cfg.r_schedule = RSchedule::constant(0.25);
    StopRule stop;
    stop.max_days = 45;
    Trajectory traj = run(net, inc, cfg, stop);
    // the gap decays steadily: below 1e-2 by day 15 and 1e-3 by day 45
    CHECK(traj.days.at(15).gap < 1e-2);
    CHECK(traj.final_gap < 1e-3);
    // strategy heads toward [2/3, 1/3, 0]
    const DayRecord& last = traj.days.back();
    CHECK(last.p[0] == doctest::Approx(2.0 / 3.0).epsilon(0.01));
    CHECK(last.p[1] == doctest::Approx(1.0 / 3.0).epsilon(0.01));
    CHECK(last.p[2] < 0.005);
}

TEST_CASE("run: 3n4l converges fast at r=1 and diverges at r=2.5") {
    auto [net, routes] = builtin("3n4l");
    Incidence inc = make_incidence(net, routes);
    StopRule stop;
    stop.max_days = 120;
    stop.gap_tol = 1e-9;

    RunConfig ok;
    ok.r_schedule = RSchedule::constant(1.0);
    Trajectory traj = run(net, inc, ok, stop);
    CHECK(traj.status == Termination::Converged);
    CHECK(traj.final_day < 30);

    RunConfig hot;
    hot.r_schedule = RSchedule::constant(2.5);
    traj = run(net, inc, hot, stop);
    CHECK(traj.status == Termination::Diverged);
}

TEST_CASE("run: growing step schedule diverges") {
    auto [net, routes] = builtin("3n4l");
    Incidence inc = make_incidence(net, routes);
    RunConfig cfg;
    cfg.schedule = Schedule::power(0.25);
    cfg.r_schedule = RSchedule::constant(1.0);
    StopRule stop;
    stop.max_days = 120;
    stop.gap_tol = 1e-6;
    Trajectory traj = run(net, inc, cfg, stop);
    CHECK(traj.status == Termination::Diverged);
}

TEST_CASE("detect_divergence: rules and non-rules") {
    // needs at least 10 entries
    CHECK_FALSE(detect_divergence({1, 2, 3}));
    // 10x the initial value
    CHECK(detect_divergence({1, 1, 1, 1, 5, 1, 1, 1, 1, 1, 11}));
    // absolute blowup
    CHECK(detect_divergence({0, 1, 0.5, 0.1, 0.2, 0.1, 0.1, 0.1, 0.1, 2000}));
    // material monotone growth over the last 10 entries
    std::vector<double> grow = {5, 4, 3, 2, 1};
    for (int i = 0; i < 10; ++i) grow.push_back(1.1 + 0.05 * i);
    CHECK(detect_divergence(grow));
    // a slow sub-percent monotone drift is not divergence
    std::vector<double> drift = {5, 4, 3, 2, 1};
    for (int i = 0; i < 10; ++i) drift.push_back(1.01 + 0.0001 * i);
    CHECK_FALSE(detect_divergence(drift));
    // flat plateau is not divergence
    CHECK_FALSE(detect_divergence(std::vector<double>(50, 0.25)));
    // float noise around an essentially-zero gap is not divergence
    std::vector<double> noise;
    for (int i = 0; i < 60; ++i) noise.push_back((i % 2 ? 4.5e-15 : 1.2e-15));
    CHECK_FALSE(detect_divergence(noise));
    // steadily decreasing series is not divergence
    std::vector<double> shrink;
    for (int i = 0; i < 60; ++i) shrink.push_back(1.0 / (i + 1));
    CHECK_FALSE(detect_divergence(shrink));
    // large oscillation with no new minimum over 30+ entries is a stall
    std::vector<double> stall = {1.0, 0.5, 0.05};
    for (int i = 0; i < 40; ++i) stall.push_back(i % 2 ? 0.1 : 0.4);
    CHECK(detect_divergence(stall));
    // a plateau with small numerical ripple is not divergence
    std::vector<double> ripple = {1.0, 0.5, 1e-5};
    for (int i = 0; i < 40; ++i) ripple.push_back(i % 2 ? 1.01e-5 : 1.02e-5);
    CHECK_FALSE(detect_divergence(ripple));
}

TEST_CASE("run: converging trajectory never trips the detector") {
    auto [net, routes] = builtin("3n4l");
    Incidence inc = make_incidence(net, routes);
    RunConfig cfg;
    cfg.r_schedule = RSchedule::constant(1.0);
    StopRule stop;
    stop.max_days = 200;
    stop.gap_tol = 1e-13;
    Trajectory traj = run(net, inc, cfg, stop);
    CHECK(traj.status == Termination::Converged);
}

TEST_CASE("step contraction along a converging run") {
    auto [net, routes] = builtin("3n4l");
    Incidence inc = make_incidence(net, routes);
    RunConfig cfg;
    cfg.r_schedule = RSchedule::constant(1.0);
    StopRule stop;
    stop.max_days = 40;
    Trajectory traj = run(net, inc, cfg, stop);
    auto step_norm = [&](size_t i) {
        double sum = 0.0;
        for (size_t k = 0; k < traj.days[i].p.size(); ++k) {
            double d = traj.days[i].p[k] - traj.days[i - 1].p[k];
            sum += d * d;
        }
        return std::sqrt(sum);
    };
    double first = 0.0, last = 0.0;
    for (size_t i = 1; i <= 10; ++i) first = std::max(first, step_norm(i));
    for (size_t i = traj.days.size() - 10; i < traj.days.size(); ++i)
        last = std::max(last, step_norm(i));
    CHECK(last < first);
}

TEST_CASE("support shrinkage: the dominated route is abandoned") {
    auto [net, routes] = builtin("three-parallel");
    Incidence inc = make_incidence(net, routes);
    RunConfig cfg;
    cfg.r_schedule = RSchedule::constant(0.25);
    StopRule stop;
    stop.max_days = 400;
    stop.divergence_check = false;
    Trajectory traj = run(net, inc, cfg, stop);
    // route 2 (the 2.25-offset link) leaves the support; its probability is
    // monotone decreasing over the tail of the run
    for (size_t i = traj.days.size() - 100; i < traj.days.size(); ++i)
        CHECK(traj.days[i].p[2] <= traj.days[i - 1].p[2] + 1e-15);
    CHECK(traj.days.back().p[2] < 1e-6);
}

TEST_CASE("kl to a reference equilibrium decreases under a small step") {
    auto [net, routes] = builtin("3n4l");
    Incidence inc = make_incidence(net, routes);
    double L = estimate_lipschitz(net, inc);
    double eta = 0.9 / (2.0 * L);  // r * eta below the 1/(2L) threshold
    auto xstar = beckmann_oracle(net, 1e-10);
    FamilyProbeReport family = we_strategy_family_probe(net, inc, xstar);
    REQUIRE(family.feasible);
    RunConfig cfg;
    cfg.schedule = Schedule::constant(eta);
    cfg.r_schedule = RSchedule::constant(1.0);
    cfg.ref_p = family.max_entropy_member;
    StopRule stop;
    stop.max_days = 2000;
    stop.divergence_check = false;
    Trajectory traj = run(net, inc, cfg, stop);
    for (size_t i = 1; i < traj.days.size(); ++i)
        CHECK(traj.days[i].kl_to_ref <= traj.days[i - 1].kl_to_ref + 1e-10);
}

TEST_CASE("multiclass: single class reduces to the plain run") {
    auto [net, routes] = builtin("3n4l");
    Incidence inc = make_incidence(net, routes);
    StopRule stop;
    stop.max_days = 50;
    ClassSpec only;
    only.label = "all";
    only.r = 1.0;
    only.share = 1.0;
    MulticlassResult mc = run_multiclass(net, inc, {only}, Schedule::constant(1.0), stop);
    RunConfig cfg;
    cfg.r_schedule = RSchedule::constant(1.0);
    Trajectory solo = run(net, inc, cfg, stop);
    REQUIRE(mc.per_class.size() == 1);
    for (size_t i = 0; i < solo.days.size(); ++i) {
        CHECK(mc.per_class[0].days[i].p == solo.days[i].p);
        CHECK(mc.per_class[0].days[i].s == solo.days[i].s);
    }
    CHECK_THROWS_AS(run_multiclass(net, inc, {only, only}, Schedule::constant(1.0), stop),
                    std::runtime_error);
}

TEST_CASE("normal_s0 is deterministic per seed") {
    auto a = normal_s0(6, 42);
    auto b = normal_s0(6, 42);
    auto c = normal_s0(6, 43);
    CHECK(a == b);
    CHECK(a != c);
    double mean = 0.0;
    for (double v : a) mean += v;
    CHECK(std::abs(mean / 6.0) < 1.0);
}

TEST_CASE("runs are deterministic: identical config gives identical bytes") {
    auto [net, routes] = builtin("3n4l");
    Incidence inc = make_incidence(net, routes);
    RunConfig cfg;
    cfg.r_schedule = RSchedule::constant(1.0);
    cfg.s0 = normal_s0(4, 7);
    StopRule stop;
    stop.max_days = 200;
    stop.gap_tol = 1e-9;
    Trajectory a = run(net, inc, cfg, stop);
    Trajectory b = run(net, inc, cfg, stop);
    CHECK(a.to_csv() == b.to_csv());
    CHECK(a.to_json() == b.to_json());
}

TEST_CASE("trajectory serialization shape") {
    auto [net, routes] = builtin("three-parallel");
    Incidence inc = make_incidence(net, routes);
    RunConfig cfg;
    cfg.r_schedule = RSchedule::constant(0.25);
    StopRule stop;
    stop.max_days = 5;
    Trajectory traj = run(net, inc, cfg, stop);
    std::string csv = traj.to_csv();
    CHECK(csv.rfind("t,gap,entropy,used_routes,p0,p1,p2\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);  // header + 6 days
    std::string js = traj.to_json();
    CHECK(js.find("\"status\":\"max_days\"") != std::string::npos);
    CHECK(js.find("\"final_day\":5") != std::string::npos);
}
