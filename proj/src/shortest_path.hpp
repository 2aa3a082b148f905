// Internal shortest-path helpers shared by route enumeration and the
// equilibrium diagnostics.
#pragma once

#include <algorithm>
#include <limits>
#include <queue>
#include <set>
#include <vector>

#include "cumlog/network.hpp"

namespace cumlog::detail {

struct Adjacency {
    // out[v] = list of (head, link id)
    std::vector<std::vector<std::pair<int, int>>> out;

    explicit Adjacency(const Network& net) : out(net.num_nodes) {
        for (const Link& l : net.links) out[l.tail].push_back({l.head, l.id});
        // deterministic neighbor order: by head node, then link id
        for (auto& lst : out) std::sort(lst.begin(), lst.end());
    }
};

constexpr double kInf = std::numeric_limits<double>::infinity();

// Plain label-setting Dijkstra from src; supports banned nodes/links (for
// Yen spur computations). prev_link[v] = incoming link on the shortest path.
inline void dijkstra(const Network& net, const Adjacency& adj, int src,
                     const std::vector<double>& w, std::vector<double>& dist,
                     std::vector<int>& prev_link, const std::set<int>& banned_nodes = {},
                     const std::set<int>& banned_links = {}) {
    const int n = net.num_nodes;
    dist.assign(n, kInf);
    prev_link.assign(n, -1);
    if (banned_nodes.count(src)) return;
    dist[src] = 0.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    pq.push({0.0, src});
    while (!pq.empty()) {
        auto [d, v] = pq.top();
        pq.pop();
        if (d > dist[v]) continue;
        for (auto [h, e] : adj.out[v]) {
            if (banned_nodes.count(h) || banned_links.count(e)) continue;
            double nd = d + w[e];
            if (nd < dist[h]) {
                dist[h] = nd;
                prev_link[h] = e;
                pq.push({nd, h});
            }
        }
    }
}

inline std::vector<int> extract_path(const Network& net, const std::vector<int>& prev_link,
                                     int dst) {
    std::vector<int> links;
    int v = dst;
    while (prev_link[v] >= 0) {
        int e = prev_link[v];
        links.push_back(e);
        v = net.links[e].tail;
    }
    std::reverse(links.begin(), links.end());
    return links;
}

// Yen's k-shortest simple paths from o to d under link costs w.
// Returns at most k paths as link-id lists, sorted by total cost.
std::vector<std::vector<int>> yen_k_shortest(const Network& net, const Adjacency& adj, int o,
                                             int d, int k, const std::vector<double>& w);

// Lexicographic shortest-path tree: among all minimum-cost paths from src,
// picks for each node the one with the lexicographically smallest node
// sequence (then smallest link-id sequence). Used by all-or-nothing loading
// so that ties are deterministic.
void lexicographic_shortest_paths(const Network& net, const Adjacency& adj, int src,
                                  const std::vector<double>& w, std::vector<double>& dist,
                                  std::vector<std::vector<int>>& path_links);

}  // namespace cumlog::detail
