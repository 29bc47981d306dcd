#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "mms/instance.hpp"

namespace mms {

// Directed envy edges among a working agent set over a partial allocation:
// edge (i -> j) iff v_i(A_i) < v_i(A_j).
struct EnvyGraph {
    std::vector<int> agents;
    std::vector<std::vector<bool>> edge;  // indexed by position in `agents`

    static EnvyGraph build(const Instance& inst, const Allocation& alloc, const std::vector<int>& agents) {
        EnvyGraph g;
        g.agents = agents;
        const int p = static_cast<int>(agents.size());
        g.edge.assign(p, std::vector<bool>(p, false));
        std::vector<Rational> own(p);
        for (int a = 0; a < p; ++a) own[a] = inst.value_of(agents[a], alloc.bundles[agents[a]]);
        for (int a = 0; a < p; ++a)
            for (int b = 0; b < p; ++b) {
                if (a == b) continue;
                if (own[a] < inst.value_of(agents[a], alloc.bundles[agents[b]])) g.edge[a][b] = true;
            }
        return g;
    }

    bool envied(int pos) const {
        for (size_t a = 0; a < agents.size(); ++a)
            if (edge[a][pos]) return true;
        return false;
    }

    // lowest-position agent nobody envies, or -1
    int unenvied() const {
        for (size_t pos = 0; pos < agents.size(); ++pos)
            if (!envied(static_cast<int>(pos))) return static_cast<int>(pos);
        return -1;
    }

    // A directed cycle, returned so that each agent envies the next
    // (cyclically). When every agent is envied, walking enviers backwards
    // from node 0 must revisit; the reversed segment is the forward cycle.
    std::vector<int> find_cycle() const {
        const int p = static_cast<int>(agents.size());
        if (p == 0) return {};
        std::vector<int> at(p, -1);
        std::vector<int> path;
        int cur = 0;
        while (at[cur] == -1) {
            at[cur] = static_cast<int>(path.size());
            path.push_back(cur);
            int envier = -1;
            for (int a = 0; a < p; ++a)
                if (edge[a][cur]) {
                    envier = a;
                    break;
                }
            if (envier == -1) return {};  // cur is unenvied after all
            cur = envier;
        }
        std::vector<int> seg(path.begin() + at[cur], path.end());
        std::reverse(seg.begin(), seg.end());
        return seg;
    }
};

// Agents repeatedly pick their favorite remaining good (ties by lowest good
// index) in the given order. EF1 among participants.
inline Allocation round_robin(const Instance& inst, const std::vector<int>& order) {
    Allocation alloc(inst.n);
    if (order.empty()) return alloc;
    std::vector<bool> taken(inst.m, false);
    int assigned = 0;
    size_t turn = 0;
    while (assigned < inst.m) {
        int who = order[turn % order.size()];
        int best = -1;
        for (int g = 0; g < inst.m; ++g) {
            if (taken[g]) continue;
            if (best == -1 || inst.values[who][g] > inst.values[who][best]) best = g;
        }
        taken[best] = true;
        alloc.add(who, best);
        ++assigned;
        ++turn;
    }
    return alloc;
}

// Modified envy-graph algorithm: goods in descending order, each assigned to
// an unenvied participant; when everyone is envied, bundles rotate along an
// envy cycle. EFX among participants on ordered instances.
inline Allocation envy_graph_efx(const Instance& inst, const std::vector<int>& participants) {
    if (!is_ordered(inst)) throw std::invalid_argument("envy_graph_efx needs an ordered instance");
    if (participants.empty()) throw std::invalid_argument("envy_graph_efx needs at least one participant");

    Allocation alloc(inst.n);
    for (int g = 0; g < inst.m; ++g) {
        while (true) {
            EnvyGraph graph = EnvyGraph::build(inst, alloc, participants);
            int pos = graph.unenvied();
            if (pos != -1) {
                alloc.bundles[participants[pos]].push_back(g);  // g exceeds all present ids
                break;
            }
            std::vector<int> cycle = graph.find_cycle();
            if (cycle.empty()) throw std::logic_error("all agents envied but no envy cycle");
            // each agent takes the bundle of the agent she envies
            GoodSet first = alloc.bundles[participants[cycle.front()]];
            for (size_t i = 0; i + 1 < cycle.size(); ++i)
                alloc.bundles[participants[cycle[i]]] = alloc.bundles[participants[cycle[i + 1]]];
            alloc.bundles[participants[cycle.back()]] = std::move(first);
        }
    }
    for (auto& b : alloc.bundles) std::sort(b.begin(), b.end());
    return alloc;
}

}  // namespace mms
