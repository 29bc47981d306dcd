#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mms/instance.hpp"

namespace mms {

// perm[i][j] = the original good holding agent i's j-th largest value. The
// ordered instance's good j is a fresh identity, not a shared relabeling.
struct OrderMap {
    std::vector<std::vector<int>> perm;

    bool identity() const {
        for (const auto& p : perm)
            for (int j = 0; j < static_cast<int>(p.size()); ++j)
                if (p[j] != j) return false;
        return true;
    }
};

struct OrderedInstance {
    Instance instance;
    OrderMap order_map;
};

// Sorts each agent's values descending (ties by lower original index).
inline OrderedInstance order_instance(const Instance& inst) {
    OrderedInstance out;
    out.instance = Instance(inst.n, inst.m);
    out.order_map.perm.assign(inst.n, std::vector<int>(inst.m));
    for (int i = 0; i < inst.n; ++i) {
        auto& p = out.order_map.perm[i];
        std::iota(p.begin(), p.end(), 0);
        std::stable_sort(p.begin(), p.end(), [&](int a, int b) { return inst.values[i][a] > inst.values[i][b]; });
        for (int j = 0; j < inst.m; ++j) out.instance.values[i][j] = inst.values[i][p[j]];
    }
    return out;
}

// Picking procedure: walk ordered goods g_1..g_m in index order; the agent
// holding g_j picks her highest-valued unassigned original good (ties by
// lowest index). Unowned ordered goods are skipped, so partial allocations
// lift to partial allocations. Guarantees v_i(A_i) >= v'_i(A'_i).
inline Allocation unorder_allocation(const Instance& original, const OrderMap& order_map,
                                     const Allocation& ordered_alloc) {
    const int n = original.n;
    const int m = original.m;
    if (ordered_alloc.agents() != n) throw std::invalid_argument("allocation/agent count mismatch");
    for (const auto& b : ordered_alloc.bundles)
        for (int g : b)
            if (g < 0 || g >= m) throw std::invalid_argument("ordered allocation references unknown good");

    std::vector<int> owner(m, -1);
    for (int i = 0; i < n; ++i)
        for (int g : ordered_alloc.bundles[i]) {
            if (owner[g] != -1) throw std::invalid_argument("ordered allocation bundles overlap");
            owner[g] = i;
        }

    std::vector<bool> taken(m, false);
    Allocation out(n);
    for (int j = 0; j < m; ++j) {
        int who = owner[j];
        if (who == -1) continue;
        int best = -1;
        for (int g = 0; g < m; ++g) {
            if (taken[g]) continue;
            if (best == -1 || original.values[who][g] > original.values[who][best]) best = g;
        }
        taken[best] = true;
        out.add(who, best);
    }
    return out;
}

// Per-agent scaling so that v'_i(M) = k exactly.
inline Instance scale(const Instance& inst, const Rational& k) {
    if (k <= 0) throw std::invalid_argument("scale target must be positive");
    Instance out(inst.n, inst.m);
    for (int i = 0; i < inst.n; ++i) {
        Rational tot = inst.total(i);
        if (tot == 0) throw std::invalid_argument("cannot scale an agent with zero total value");
        Rational f = k / tot;
        for (int g = 0; g < inst.m; ++g) out.values[i][g] = inst.values[i][g] * f;
    }
    return out;
}

// The factors k/v_i(M) used by scale(); trace bookkeeping wants them.
inline std::vector<Rational> scale_factors(const Instance& inst, const Rational& k) {
    std::vector<Rational> f;
    f.reserve(inst.n);
    for (int i = 0; i < inst.n; ++i) {
        Rational tot = inst.total(i);
        if (tot == 0) throw std::invalid_argument("cannot scale an agent with zero total value");
        f.push_back(k / tot);
    }
    return f;
}

}  // namespace mms
