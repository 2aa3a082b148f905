#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cumlog {

// Separable link cost model: either a polynomial u(x) = h + w*x^power or a
// BPR curve u(x) = fft*(1 + b*(x/cap)^power).
struct CostParams {
    enum class Kind { Polynomial, Bpr };
    Kind kind = Kind::Polynomial;
    // polynomial
    double h = 0.0;
    double w = 0.0;
    // bpr
    double fft = 0.0;
    double cap = 1.0;
    double b = 0.0;
    // shared exponent
    double power = 1.0;

    static CostParams polynomial(double h, double w, double power) {
        CostParams c;
        c.kind = Kind::Polynomial;
        c.h = h;
        c.w = w;
        c.power = power;
        return c;
    }
    static CostParams bpr(double fft, double cap, double b, double power) {
        CostParams c;
        c.kind = Kind::Bpr;
        c.fft = fft;
        c.cap = cap;
        c.b = b;
        c.power = power;
        return c;
    }
};

struct Link {
    int id = 0;
    int tail = 0;
    int head = 0;
    CostParams cost;
};

struct OdPair {
    int origin = 0;
    int destination = 0;
    double demand = 0.0;  // travelers/day
};

struct Network {
    int num_nodes = 0;
    std::vector<Link> links;
    std::vector<OdPair> od_pairs;

    void validate() const;  // throws std::runtime_error on invariant violation
};

// Routes are ordered link-id lists grouped per OD pair, in a canonical
// (lexicographic by link-id sequence) order within each OD.
struct RouteSet {
    std::vector<int> route_od;                   // od index per route
    std::vector<std::vector<int>> route_links;   // link ids per route
    std::vector<std::pair<int, int>> od_ranges;  // [begin, end) route indices per OD

    int size() const { return static_cast<int>(route_links.size()); }
    std::string to_json(const Network& net) const;
};

// Incidence data derived from (Network, RouteSet): the link-route matrix,
// the OD-route partition, and the demand-scaled link-route map. Stored in
// route-list form; the cost module provides the matrix-vector products.
struct Incidence {
    int num_links = 0;
    int num_routes = 0;
    int num_ods = 0;
    std::vector<int> route_od;                   // od index per route
    std::vector<std::vector<int>> route_links;   // Λ columns
    std::vector<std::pair<int, int>> od_ranges;  // Σ row partition
    std::vector<double> od_demand;               // d
    std::vector<double> route_demand;            // demand of each route's OD (Λ̄ scaling)
};

Incidence make_incidence(const Network& net, const RouteSet& routes);

// TNTP text parsing; errors carry 1-based line numbers.
Network parse_tntp(const std::string& net_text, const std::string& trips_text);
std::string serialize_tntp_net(const Network& net);
std::string serialize_tntp_trips(const Network& net);

struct RoutePolicy {
    enum class Kind { AllSimplePaths, KShortest };
    Kind kind = Kind::AllSimplePaths;
    int k = 1;
    // Link costs used to rank k-shortest candidates. Empty means free-flow
    // (cost at zero flow).
    std::vector<double> cost_basis;
};

RouteSet enumerate_routes(const Network& net, const RoutePolicy& policy);

// Builtin fixtures: "three-parallel", "3n4l", "sioux-falls".
std::pair<Network, RouteSet> builtin(const std::string& name);

// Free-flow link costs (u at x = 0), used as the default enumeration basis.
std::vector<double> free_flow_costs(const Network& net);

}  // namespace cumlog
