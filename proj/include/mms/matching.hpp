#pragma once

#include <vector>

#include "mms/instance.hpp"

namespace mms {

// Envy-free matching of agents to bundles: no unmatched agent may be adjacent
// to any matched bundle. Built as a maximum bipartite matching (augmenting
// paths) followed by discarding every matched pair reachable by an
// alternating path from an unmatched agent. Non-empty whenever
// |N(agents)| >= |agents|.
struct Matching {
    std::vector<std::pair<int, int>> pairs;  // (agent position, bundle index)
};

inline Matching envy_free_matching(const std::vector<std::vector<bool>>& accepts) {
    const int na = static_cast<int>(accepts.size());
    const int nb = na == 0 ? 0 : static_cast<int>(accepts[0].size());

    std::vector<int> match_agent(na, -1);   // agent -> bundle
    std::vector<int> match_bundle(nb, -1);  // bundle -> agent

    // maximum matching via augmenting paths
    std::vector<bool> visited;
    auto augment = [&](auto&& self, int a) -> bool {
        for (int b = 0; b < nb; ++b) {
            if (!accepts[a][b] || visited[b]) continue;
            visited[b] = true;
            if (match_bundle[b] == -1 || self(self, match_bundle[b])) {
                match_agent[a] = b;
                match_bundle[b] = a;
                return true;
            }
        }
        return false;
    };
    for (int a = 0; a < na; ++a) {
        visited.assign(nb, false);
        augment(augment, a);
    }

    // alternating-path reachability from unmatched agents
    std::vector<bool> agent_reached(na, false), bundle_reached(nb, false);
    std::vector<int> stack;
    for (int a = 0; a < na; ++a)
        if (match_agent[a] == -1 && !agent_reached[a]) {
            agent_reached[a] = true;
            stack.push_back(a);
        }
    while (!stack.empty()) {
        int a = stack.back();
        stack.pop_back();
        for (int b = 0; b < nb; ++b) {
            if (!accepts[a][b] || bundle_reached[b]) continue;
            bundle_reached[b] = true;
            int owner = match_bundle[b];
            if (owner != -1 && !agent_reached[owner]) {
                agent_reached[owner] = true;
                stack.push_back(owner);
            }
        }
    }

    Matching out;
    for (int a = 0; a < na; ++a) {
        int b = match_agent[a];
        if (b != -1 && !bundle_reached[b]) out.pairs.emplace_back(a, b);
    }
    return out;
}

// Convenience wrapper with the v_i(D_k) >= 1 acceptance predicate.
inline Matching envy_free_matching(const Instance& inst, const std::vector<int>& agents,
                                   const std::vector<GoodSet>& bundles, const Rational& threshold) {
    std::vector<std::vector<bool>> accepts(agents.size(), std::vector<bool>(bundles.size(), false));
    for (size_t a = 0; a < agents.size(); ++a)
        for (size_t b = 0; b < bundles.size(); ++b)
            accepts[a][b] = inst.value_of(agents[a], bundles[b]) >= threshold;
    return envy_free_matching(accepts);
}

}  // namespace mms
