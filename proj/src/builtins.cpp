#include <stdexcept>

#include "cumlog/equilibrium.hpp"
#include "cumlog/network.hpp"
#include "sioux_falls_fixture.hpp"

namespace cumlog {

namespace {

// Three parallel links, one OD with demand 3. Cost functions x, x+1, x+2.25.
std::pair<Network, RouteSet> make_three_parallel() {
    Network net;
    net.num_nodes = 2;
    net.links = {
        {0, 0, 1, CostParams::polynomial(0.0, 1.0, 1.0)},
        {1, 0, 1, CostParams::polynomial(1.0, 1.0, 1.0)},
        {2, 0, 1, CostParams::polynomial(2.25, 1.0, 1.0)},
    };
    net.od_pairs = {{0, 1, 3.0}};
    RouteSet rs = enumerate_routes(net, {RoutePolicy::Kind::AllSimplePaths, 1, {}});
    return {net, rs};
}

// 3-node/4-link network, one OD with demand 10, quartic link costs
// u_a = h_a + w_a x^4. Coefficients are normalized by 1e-4 so daily route
// costs are O(1) in the valuation units the logit operates on; equilibrium
// flows and the relative gap are invariant to this normalization.
std::pair<Network, RouteSet> make_3n4l() {
    const double scale = 1e-4;
    const double h[4] = {4.0, 20.0, 1.0, 30.0};
    const double w[4] = {1.0, 5.0, 30.0, 1.0};
    Network net;
    net.num_nodes = 3;
    for (int a = 0; a < 4; ++a) {
        Link l;
        l.id = a;
        l.tail = a < 2 ? 0 : 1;
        l.head = a < 2 ? 1 : 2;
        l.cost = CostParams::polynomial(h[a] * scale, w[a] * scale, 4.0);
        net.links.push_back(l);
    }
    net.od_pairs = {{0, 2, 10.0}};
    RouteSet rs = enumerate_routes(net, {RoutePolicy::Kind::AllSimplePaths, 1, {}});
    return {net, rs};
}

// Bundled Sioux Falls fixture. Free-flow times are normalized by 1/30 so that
// daily route costs are O(1) in valuation units (same rationale as 3n4l).
// The route set is 3-shortest per OD under congested equilibrium costs from
// the Beckmann oracle: this covers the equilibrium support with few routes
// per OD, which keeps the day-1 uniform strategy from overloading links.
std::pair<Network, RouteSet> make_sioux_falls() {
    Network net = parse_tntp(fixture::sioux_falls_net, fixture::sioux_falls_trips);
    const double scale = 1.0 / 30.0;
    for (Link& l : net.links) l.cost.fft *= scale;
    std::vector<double> xstar = beckmann_oracle(net, 1e-4);
    std::vector<double> ustar = link_costs(net, xstar);
    RoutePolicy policy;
    policy.kind = RoutePolicy::Kind::KShortest;
    policy.k = 3;
    policy.cost_basis = ustar;
    RouteSet rs = enumerate_routes(net, policy);
    return {net, rs};
}

}  // namespace

std::pair<Network, RouteSet> builtin(const std::string& name) {
    if (name == "three-parallel") return make_three_parallel();
    if (name == "3n4l") return make_3n4l();
    if (name == "sioux-falls") return make_sioux_falls();
    throw std::runtime_error("unknown builtin network '" + name + "'");
}

}  // namespace cumlog
