#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "cumlog/choice.hpp"
#include "cumlog/network.hpp"

using namespace cumlog;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// Minimal incidence with one OD over n parallel routes (unit demand).
Incidence parallel_inc(int n, double demand = 1.0) {
    Incidence inc;
    inc.num_links = n;
    inc.num_routes = n;
    inc.num_ods = 1;
    inc.od_ranges = {{0, n}};
    inc.od_demand = {demand};
    for (int k = 0; k < n; ++k) {
        inc.route_od.push_back(0);
        inc.route_links.push_back({k});
        inc.route_demand.push_back(demand);
    }
    return inc;
}

}  // namespace

TEST_CASE("logit: equal valuations give the uniform strategy") {
    Incidence inc = parallel_inc(3);
    auto p = logit({0.0, 0.0, 0.0}, 2.5, inc);
    for (double v : p) CHECK(v == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("logit: infinite valuations get zero probability") {
    Incidence inc = parallel_inc(3);
    auto p = logit({0.0, inf, inf}, 1.0, inc);
    CHECK(p[0] == 1.0);
    CHECK(p[1] == 0.0);
    CHECK(p[2] == 0.0);
    CHECK_THROWS_AS(logit({inf, inf, inf}, 1.0, inc), std::runtime_error);
}

TEST_CASE("logit: hand-computed ratio") {
    Incidence inc = parallel_inc(3);
    for (double r : {0.5, 1.0, 2.5}) {
        double g = std::log(2.0) / r;
        auto p = logit({0.0, g, g}, r, inc);
        CHECK(p[0] == doctest::Approx(0.5));
        CHECK(p[1] == doctest::Approx(0.25));
        CHECK(p[2] == doctest::Approx(0.25));
    }
}

TEST_CASE("logit: shift invariance is exact") {
    Incidence inc = parallel_inc(4);
    std::vector<double> s = {0.25, 1.5, -2.75, 0.0};
    auto base = logit(s, 2.0, inc);
    for (double a : {0.5, -4.0, 1024.0}) {
        std::vector<double> shifted = s;
        for (double& v : shifted) v += a;
        CHECK(logit(shifted, 2.0, inc) == base);
    }
}

TEST_CASE("logit: shift invariance holds per OD independently") {
    Incidence inc;
    inc.num_links = 4;
    inc.num_routes = 4;
    inc.num_ods = 2;
    inc.od_ranges = {{0, 2}, {2, 4}};
    inc.od_demand = {1.0, 1.0};
    inc.route_od = {0, 0, 1, 1};
    inc.route_links = {{0}, {1}, {2}, {3}};
    inc.route_demand = {1.0, 1.0, 1.0, 1.0};
    auto base = logit({0.5, 1.0, 2.0, 0.25}, 1.5, inc);
    auto shifted = logit({0.5 + 8.0, 1.0 + 8.0, 2.0 - 2.0, 0.25 - 2.0}, 1.5, inc);
    CHECK(shifted == base);
    // per-OD sums are 1
    CHECK(base[0] + base[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(base[2] + base[3] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("logit: monotone ranking and r-limit concentration") {
    Incidence inc = parallel_inc(3);
    std::vector<double> s = {0.1, 0.7, 1.3};
    auto p = logit(s, 1.0, inc);
    CHECK(p[0] > p[1]);
    CHECK(p[1] > p[2]);
    double prev = 0.0;
    for (double r : {0.5, 1.0, 2.0, 4.0, 8.0, 64.0}) {
        double pm = logit(s, r, inc)[0];
        CHECK(pm > prev);
        prev = pm;
    }
    CHECK(prev > 1.0 - 1e-12);
}

TEST_CASE("logit: stable for huge valuations") {
    Incidence inc = parallel_inc(3);
    auto p = logit({1e300, 1e300, 1e300}, 1.0, inc);
    for (double v : p) CHECK(v == doctest::Approx(1.0 / 3.0));
    p = logit({0.0, 1e300, 1e300}, 1.0, inc);
    CHECK(p[0] == 1.0);
    CHECK(p[1] == 0.0);
}

TEST_CASE("logit: guards") {
    Incidence inc = parallel_inc(2);
    CHECK_THROWS_AS(logit({0.0, 0.0}, 0.0, inc), std::runtime_error);
    CHECK_THROWS_AS(logit({0.0, 0.0}, -1.0, inc), std::runtime_error);
    CHECK_THROWS_AS(logit({0.0, std::nan("")}, 1.0, inc), std::runtime_error);
    CHECK_THROWS_AS(logit({0.0, -inf}, 1.0, inc), std::runtime_error);
}

TEST_CASE("kl_divergence: examples") {
    Incidence inc = parallel_inc(2);
    CHECK(kl_divergence({0.3, 0.7}, {0.3, 0.7}, inc) == doctest::Approx(0.0));
    CHECK(kl_divergence({1.0, 0.0}, {0.5, 0.5}, inc) == doctest::Approx(std::log(2.0)));
    CHECK(kl_divergence({0.5, 0.5}, {1.0, 0.0}, inc) == inf);
}

TEST_CASE("kl_divergence: lower bound by the squared l1 distance") {
    Incidence inc = parallel_inc(5);
    std::mt19937_64 rng(21);
    std::exponential_distribution<double> expo(1.0);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> p(5), q(5);
        double sp = 0.0, sq = 0.0;
        for (int k = 0; k < 5; ++k) {
            sp += (p[k] = expo(rng));
            sq += (q[k] = expo(rng));
        }
        double l1 = 0.0;
        for (int k = 0; k < 5; ++k) {
            p[k] /= sp;
            q[k] /= sq;
            l1 += std::abs(p[k] - q[k]);
        }
        CHECK(kl_divergence(p, q, inc) >= 0.5 * l1 * l1 - 1e-12);
    }
}

TEST_CASE("entropy: degenerate, uniform, and the 3n4l maximizer") {
    Incidence one = parallel_inc(3);
    CHECK(entropy({1.0, 0.0, 0.0}, one) == doctest::Approx(0.0));

    Incidence four = parallel_inc(4, 10.0);
    CHECK(entropy({0.25, 0.25, 0.25, 0.25}, four) == doctest::Approx(10.0 * std::log(4.0)));
    CHECK(entropy({0.18, 0.28, 0.42, 0.12}, four) == doctest::Approx(12.84).epsilon(1e-3));
}

TEST_CASE("entropy: weighted by each OD's demand") {
    Incidence inc;
    inc.num_links = 4;
    inc.num_routes = 4;
    inc.num_ods = 2;
    inc.od_ranges = {{0, 2}, {2, 4}};
    inc.od_demand = {2.0, 6.0};
    inc.route_od = {0, 0, 1, 1};
    inc.route_links = {{0}, {1}, {2}, {3}};
    inc.route_demand = {2.0, 2.0, 6.0, 6.0};
    CHECK(entropy({0.5, 0.5, 0.5, 0.5}, inc) == doctest::Approx(8.0 * std::log(2.0)));
}

TEST_CASE("kl projection identity: logit equals the closed-form projection") {
    Incidence inc = parallel_inc(4);
    CHECK(kl_projection_identity_check({0.0, 0.0, 0.0, 0.0}, 1.0, inc));
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uni(-5.0, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> s(4);
        for (double& v : s) v = uni(rng);
        CHECK(kl_projection_identity_check(s, 2.5, inc));
    }
    CHECK(kl_projection_identity_check({0.0, 1.0, inf, 2.0}, 1.5, inc));
}
