#include "shortest_path.hpp"

#include <map>

namespace cumlog::detail {

std::vector<std::vector<int>> yen_k_shortest(const Network& net, const Adjacency& adj, int o,
                                             int d, int k, const std::vector<double>& w) {
    std::vector<double> dist;
    std::vector<int> prev;
    dijkstra(net, adj, o, w, dist, prev);
    std::vector<std::vector<int>> found;
    if (dist[d] == kInf) return found;
    found.push_back(extract_path(net, prev, d));

    auto path_cost = [&](const std::vector<int>& p) {
        double c = 0.0;
        for (int e : p) c += w[e];
        return c;
    };
    // candidate pool keyed by (cost, links) to keep determinism and dedupe
    std::map<std::pair<double, std::vector<int>>, bool> candidates;

    while (static_cast<int>(found.size()) < k) {
        const std::vector<int>& last = found.back();
        std::vector<int> nodes{o};
        for (int e : last) nodes.push_back(net.links[e].head);

        for (size_t i = 0; i < last.size(); ++i) {
            std::vector<int> root(last.begin(), last.begin() + i);
            int spur = nodes[i];
            std::set<int> banned_links;
            for (const auto& p : found) {
                if (p.size() > i && std::equal(root.begin(), root.end(), p.begin()))
                    banned_links.insert(p[i]);
            }
            std::set<int> banned_nodes(nodes.begin(), nodes.begin() + i);
            std::vector<double> d2;
            std::vector<int> prev2;
            dijkstra(net, adj, spur, w, d2, prev2, banned_nodes, banned_links);
            if (d2[d] == kInf) continue;
            std::vector<int> cand = root;
            std::vector<int> tail = extract_path(net, prev2, d);
            cand.insert(cand.end(), tail.begin(), tail.end());
            bool known = false;
            for (const auto& p : found)
                if (p == cand) {
                    known = true;
                    break;
                }
            if (!known) candidates[{path_cost(cand), cand}] = true;
        }
        if (candidates.empty()) break;
        auto best = candidates.begin();
        found.push_back(best->first.second);
        candidates.erase(best);
    }
    return found;
}

void lexicographic_shortest_paths(const Network& net, const Adjacency& adj, int src,
                                  const std::vector<double>& w, std::vector<double>& dist,
                                  std::vector<std::vector<int>>& path_links) {
    const int n = net.num_nodes;
    std::vector<int> prev;
    dijkstra(net, adj, src, w, dist, prev);
    path_links.assign(n, {});

    // Node sequence of the stored path to v (prefix comparison helper).
    auto node_seq = [&](int v) {
        std::vector<int> seq;
        for (int e : path_links[v]) seq.push_back(net.links[e].tail);
        seq.push_back(v);
        return seq;
    };

    // Process nodes in increasing distance order; every tight predecessor
    // candidate is final by then, so the lexicographic choice is well-defined.
    std::vector<int> order;
    for (int v = 0; v < n; ++v)
        if (dist[v] < kInf) order.push_back(v);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (dist[a] != dist[b]) return dist[a] < dist[b];
        return a < b;
    });
    // incoming adjacency built on demand
    std::vector<std::vector<std::pair<int, int>>> in(n);  // (tail, link)
    for (const Link& l : net.links) in[l.head].push_back({l.tail, l.id});
    for (auto& lst : in) std::sort(lst.begin(), lst.end());

    const double eps = 1e-12;
    for (int v : order) {
        if (v == src) continue;
        std::vector<int> best_nodes, best_links;
        bool have = false;
        for (auto [t, e] : in[v]) {
            if (dist[t] == kInf) continue;
            if (dist[t] + w[e] > dist[v] + eps) continue;  // not tight
            // exclude cycles introduced by zero-cost ties
            if (t != src && path_links[t].empty()) continue;
            std::vector<int> nseq = node_seq(t);
            nseq.push_back(v);
            std::vector<int> lseq = path_links[t];
            lseq.push_back(e);
            if (!have || nseq < best_nodes || (nseq == best_nodes && lseq < best_links)) {
                best_nodes = std::move(nseq);
                best_links = std::move(lseq);
                have = true;
            }
        }
        if (have) path_links[v] = best_links;
    }
}

}  // namespace cumlog::detail
