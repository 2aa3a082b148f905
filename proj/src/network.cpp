#include "cumlog/network.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cumlog/cost.hpp"
#include "shortest_path.hpp"

namespace cumlog {

namespace {

[[noreturn]] void fail(const std::string& what, int line) {
    throw std::runtime_error(what + " (line " + std::to_string(line) + ")");
}

double to_number(const std::string& tok, int line) {
    try {
        size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        if (!std::isfinite(v)) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        fail("non-numeric field '" + tok + "'", line);
    }
}

// Reads "<TAG> value" metadata lines; returns map and the first line after
// <END OF METADATA>.
std::map<std::string, double> read_metadata(const std::vector<std::string>& lines, size_t& i) {
    std::map<std::string, double> meta;
    for (; i < lines.size(); ++i) {
        const std::string& s = lines[i];
        size_t lt = s.find('<');
        if (lt == std::string::npos) {
            if (s.find_first_not_of(" \t\r") != std::string::npos) break;
            continue;
        }
        size_t gt = s.find('>', lt);
        if (gt == std::string::npos) fail("malformed header tag", static_cast<int>(i + 1));
        std::string tag = s.substr(lt + 1, gt - lt - 1);
        if (tag == "END OF METADATA") {
            ++i;
            return meta;
        }
        std::string rest = s.substr(gt + 1);
        std::istringstream is(rest);
        double v = 0.0;
        if (is >> v) meta[tag] = v;
        else meta[tag] = 0.0;
    }
    return meta;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char ch : text) {
        if (ch == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    return lines;
}

}  // namespace

void Network::validate() const {
    for (const Link& l : links) {
        if (l.tail < 0 || l.tail >= num_nodes || l.head < 0 || l.head >= num_nodes)
            throw std::runtime_error("link " + std::to_string(l.id) +
                                     " references a nonexistent node");
    }
    for (size_t i = 0; i < links.size(); ++i)
        if (links[i].id != static_cast<int>(i))
            throw std::runtime_error("link ids must be dense [0, |E|)");
    for (const OdPair& od : od_pairs) {
        if (!(od.demand >= 0.0) || !std::isfinite(od.demand))
            throw std::runtime_error("OD demand must be finite and nonnegative");
        if (od.origin < 0 || od.origin >= num_nodes || od.destination < 0 ||
            od.destination >= num_nodes)
            throw std::runtime_error("OD pair references a nonexistent node");
    }
}

Network parse_tntp(const std::string& net_text, const std::string& trips_text) {
    Network net;
    {
        std::vector<std::string> lines = split_lines(net_text);
        size_t i = 0;
        auto meta = read_metadata(lines, i);
        if (!meta.count("NUMBER OF NODES")) fail("missing <NUMBER OF NODES>", 1);
        if (!meta.count("NUMBER OF LINKS")) fail("missing <NUMBER OF LINKS>", 1);
        net.num_nodes = static_cast<int>(meta["NUMBER OF NODES"]);
        int declared_links = static_cast<int>(meta["NUMBER OF LINKS"]);
        for (; i < lines.size(); ++i) {
            std::string s = lines[i];
            int lineno = static_cast<int>(i + 1);
            size_t tilde = s.find('~');
            if (tilde != std::string::npos) s = s.substr(0, tilde);
            // strip the record terminator
            size_t semi = s.find(';');
            if (semi != std::string::npos) s = s.substr(0, semi);
            std::istringstream is(s);
            std::vector<std::string> toks;
            std::string tok;
            while (is >> tok) toks.push_back(tok);
            if (toks.empty()) continue;
            if (toks.size() < 7) fail("short link record", lineno);
            int tail = static_cast<int>(to_number(toks[0], lineno));
            int head = static_cast<int>(to_number(toks[1], lineno));
            double cap = to_number(toks[2], lineno);
            double fft = to_number(toks[4], lineno);
            double b = to_number(toks[5], lineno);
            double power = to_number(toks[6], lineno);
            if (tail < 1 || tail > net.num_nodes || head < 1 || head > net.num_nodes)
                fail("dangling node reference", lineno);
            Link l;
            l.id = static_cast<int>(net.links.size());
            l.tail = tail - 1;  // files are 1-based, internal ids 0-based
            l.head = head - 1;
            l.cost = CostParams::bpr(fft, cap, b, power);
            net.links.push_back(l);
        }
        if (static_cast<int>(net.links.size()) != declared_links)
            throw std::runtime_error("<NUMBER OF LINKS> declares " +
                                     std::to_string(declared_links) + " but " +
                                     std::to_string(net.links.size()) + " records found");
    }
    {
        std::vector<std::string> lines = split_lines(trips_text);
        size_t i = 0;
        (void)read_metadata(lines, i);
        int origin = -1;
        for (; i < lines.size(); ++i) {
            std::string s = lines[i];
            int lineno = static_cast<int>(i + 1);
            if (s.find_first_not_of(" \t\r") == std::string::npos) continue;
            std::istringstream probe(s);
            std::string head;
            probe >> head;
            if (head == "Origin") {
                std::string otok;
                probe >> otok;
                origin = static_cast<int>(to_number(otok, lineno));
                if (origin < 1 || origin > net.num_nodes) fail("dangling node reference", lineno);
                continue;
            }
            if (origin < 0) fail("trip record before any Origin block", lineno);
            // "j : flow;" entries separated by ';'
            std::istringstream is(s);
            std::string entry;
            while (std::getline(is, entry, ';')) {
                if (entry.find_first_not_of(" \t\r") == std::string::npos) continue;
                size_t colon = entry.find(':');
                if (colon == std::string::npos) fail("malformed trip entry", lineno);
                std::string jtok = entry.substr(0, colon);
                std::string vtok = entry.substr(colon + 1);
                auto strip = [](std::string t) {
                    size_t a = t.find_first_not_of(" \t\r");
                    size_t b = t.find_last_not_of(" \t\r");
                    return a == std::string::npos ? std::string() : t.substr(a, b - a + 1);
                };
                int dest = static_cast<int>(to_number(strip(jtok), lineno));
                double flow = to_number(strip(vtok), lineno);
                if (dest < 1 || dest > net.num_nodes) fail("dangling node reference", lineno);
                if (flow < 0) fail("negative demand", lineno);
                if (flow > 0 && dest != origin)
                    net.od_pairs.push_back({origin - 1, dest - 1, flow});
            }
        }
    }
    net.validate();
    return net;
}

std::string serialize_tntp_net(const Network& net) {
    std::ostringstream os;
    os.precision(12);
    os << "<NUMBER OF ZONES> " << net.num_nodes << "\n";
    os << "<NUMBER OF NODES> " << net.num_nodes << "\n";
    os << "<FIRST THRU NODE> 1\n";
    os << "<NUMBER OF LINKS> " << net.links.size() << "\n";
    os << "<END OF METADATA>\n\n";
    os << "~ tail head capacity length fft b power speed toll type ;\n";
    for (const Link& l : net.links) {
        const CostParams& c = l.cost;
        os << "\t" << (l.tail + 1) << "\t" << (l.head + 1) << "\t" << c.cap << "\t" << c.fft
           << "\t" << c.fft << "\t" << c.b << "\t" << c.power << "\t0\t0\t1\t;\n";
    }
    return os.str();
}

std::string serialize_tntp_trips(const Network& net) {
    std::ostringstream os;
    os.precision(12);
    double total = 0.0;
    for (const OdPair& od : net.od_pairs) total += od.demand;
    os << "<NUMBER OF ZONES> " << net.num_nodes << "\n";
    os << "<TOTAL OD FLOW> " << total << "\n";
    os << "<END OF METADATA>\n\n";
    std::map<int, std::vector<std::pair<int, double>>> by_origin;
    for (const OdPair& od : net.od_pairs)
        by_origin[od.origin].push_back({od.destination, od.demand});
    for (auto& [o, dests] : by_origin) {
        std::sort(dests.begin(), dests.end());
        os << "Origin  " << (o + 1) << "\n";
        for (auto [d, f] : dests) os << "    " << (d + 1) << " :    " << f << ";\n";
        os << "\n";
    }
    return os.str();
}

Incidence make_incidence(const Network& net, const RouteSet& routes) {
    Incidence inc;
    inc.num_links = static_cast<int>(net.links.size());
    inc.num_routes = routes.size();
    inc.num_ods = static_cast<int>(net.od_pairs.size());
    inc.route_od = routes.route_od;
    inc.route_links = routes.route_links;
    inc.od_ranges = routes.od_ranges;
    inc.od_demand.resize(net.od_pairs.size());
    for (size_t w = 0; w < net.od_pairs.size(); ++w) inc.od_demand[w] = net.od_pairs[w].demand;
    inc.route_demand.resize(routes.size());
    for (int k = 0; k < routes.size(); ++k)
        inc.route_demand[k] = inc.od_demand[routes.route_od[k]];
    return inc;
}

std::vector<double> free_flow_costs(const Network& net) {
    std::vector<double> u(net.links.size());
    for (const Link& l : net.links) u[l.id] = link_cost(l.cost, 0.0);
    return u;
}

namespace {

// Depth-first enumeration of all simple paths from o to d.
void all_simple_paths(const Network& net, const detail::Adjacency& adj, int o, int d,
                      std::vector<std::vector<int>>& out) {
    std::vector<int> stack_links;
    std::vector<bool> visited(net.num_nodes, false);
    std::function<void(int)> dfs = [&](int v) {
        if (v == d) {
            out.push_back(stack_links);
            return;
        }
        visited[v] = true;
        for (auto [h, e] : adj.out[v]) {
            if (visited[h]) continue;
            stack_links.push_back(e);
            dfs(h);
            stack_links.pop_back();
        }
        visited[v] = false;
    };
    dfs(o);
}

}  // namespace

RouteSet enumerate_routes(const Network& net, const RoutePolicy& policy) {
    net.validate();
    if (policy.kind == RoutePolicy::Kind::AllSimplePaths && net.links.size() > 32)
        throw std::runtime_error("all-simple-paths enumeration only allowed for |E| <= 32");
    if (policy.kind == RoutePolicy::Kind::KShortest && policy.k < 1)
        throw std::runtime_error("k-shortest requires k >= 1");

    std::vector<double> basis =
        policy.cost_basis.empty() ? free_flow_costs(net) : policy.cost_basis;
    if (basis.size() != net.links.size())
        throw std::runtime_error("cost basis dimension mismatch");

    detail::Adjacency adj(net);
    RouteSet rs;
    for (size_t w = 0; w < net.od_pairs.size(); ++w) {
        const OdPair& od = net.od_pairs[w];
        std::vector<std::vector<int>> paths;
        if (policy.kind == RoutePolicy::Kind::AllSimplePaths) {
            all_simple_paths(net, adj, od.origin, od.destination, paths);
        } else {
            paths = detail::yen_k_shortest(net, adj, od.origin, od.destination, policy.k, basis);
        }
        if (paths.empty())
            throw std::runtime_error("OD pair " + std::to_string(w) + " is unreachable");
        std::sort(paths.begin(), paths.end());  // canonical per-OD ordering
        paths.erase(std::unique(paths.begin(), paths.end()), paths.end());
        int begin = rs.size();
        for (auto& p : paths) {
            rs.route_od.push_back(static_cast<int>(w));
            rs.route_links.push_back(std::move(p));
        }
        rs.od_ranges.push_back({begin, rs.size()});
    }
    return rs;
}

std::string RouteSet::to_json(const Network& net) const {
    std::ostringstream os;
    os << "[";
    for (int k = 0; k < size(); ++k) {
        const OdPair& od = net.od_pairs[route_od[k]];
        if (k) os << ",";
        os << "{\"od\":[" << od.origin << "," << od.destination << "],\"links\":[";
        for (size_t i = 0; i < route_links[k].size(); ++i) {
            if (i) os << ",";
            os << route_links[k][i];
        }
        os << "]}";
    }
    os << "]";
    return os.str();
}

}  // namespace cumlog
