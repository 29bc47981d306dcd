#pragma once

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "mms/rational.hpp"

namespace mms {

using GoodSet = std::vector<int>;  // sorted good indices

// Agents 0..n-1, goods 0..m-1, non-negative additive valuations.
struct Instance {
    int n = 0;
    int m = 0;
    std::vector<std::vector<Rational>> values;  // n rows of m entries

    Instance() = default;
    Instance(int n_, int m_) : n(n_), m(m_), values(n_, std::vector<Rational>(m_, Rational(0))) {}

    static Instance from_rows(std::vector<std::vector<Rational>> rows) {
        Instance inst;
        inst.n = static_cast<int>(rows.size());
        inst.m = inst.n == 0 ? 0 : static_cast<int>(rows[0].size());
        for (const auto& row : rows) {
            if (static_cast<int>(row.size()) != inst.m)
                throw std::invalid_argument("ragged valuation matrix");
            for (const auto& v : row)
                if (v < 0) throw std::invalid_argument("negative valuation");
        }
        inst.values = std::move(rows);
        return inst;
    }

    const Rational& at(int agent, int good) const {
        if (agent < 0 || agent >= n || good < 0 || good >= m)
            throw std::out_of_range("agent/good index out of range");
        return values[agent][good];
    }

    Rational value_of(int agent, const GoodSet& goods) const {
        Rational sum(0);
        for (int g : goods) sum += at(agent, g);
        return sum;
    }

    Rational total(int agent) const {
        Rational sum(0);
        for (int g = 0; g < m; ++g) sum += values[agent][g];
        return sum;
    }
};

// v_i(S): exact rational bundle value.
inline Rational value(const Instance& inst, int agent, const GoodSet& goods) {
    return inst.value_of(agent, goods);
}

// True iff every agent's values are non-increasing in good index.
inline bool is_ordered(const Instance& inst) {
    for (int i = 0; i < inst.n; ++i)
        for (int g = 0; g + 1 < inst.m; ++g)
            if (inst.values[i][g] < inst.values[i][g + 1]) return false;
    return true;
}

// MMS_i^n <= v_i(M)/n; proportionality bound.
inline Rational proportionality_bound(const Instance& inst, int agent) {
    if (agent < 0 || agent >= inst.n) throw std::out_of_range("agent index out of range");
    return inst.total(agent) / Rational(inst.n);
}

// Disjoint bundles of good indices, one per agent. May be partial.
struct Allocation {
    std::vector<GoodSet> bundles;

    Allocation() = default;
    explicit Allocation(int n) : bundles(n) {}

    int agents() const { return static_cast<int>(bundles.size()); }

    GoodSet assigned() const {
        GoodSet all;
        for (const auto& b : bundles) all.insert(all.end(), b.begin(), b.end());
        std::sort(all.begin(), all.end());
        return all;
    }

    bool disjoint() const {
        GoodSet all = assigned();
        return std::adjacent_find(all.begin(), all.end()) == all.end();
    }

    bool complete(int m) const {
        GoodSet all = assigned();
        if (static_cast<int>(all.size()) != m) return false;
        for (int g = 0; g < m; ++g)
            if (all[static_cast<size_t>(g)] != g) return false;
        return true;
    }

    void add(int agent, int good) {
        auto& b = bundles[agent];
        b.insert(std::upper_bound(b.begin(), b.end(), good), good);
    }

    void add_bundle(int agent, const GoodSet& goods) {
        for (int g : goods) add(agent, g);
    }

    void validate(int m) const {
        for (const auto& b : bundles)
            for (int g : b)
                if (g < 0 || g >= m) throw std::invalid_argument("allocation references unknown good");
        if (!disjoint()) throw std::invalid_argument("allocation bundles overlap");
    }
};

inline std::vector<Rational> bundle_values(const Instance& inst, const Allocation& alloc) {
    std::vector<Rational> vals;
    vals.reserve(alloc.bundles.size());
    for (int i = 0; i < alloc.agents(); ++i) vals.push_back(inst.value_of(i, alloc.bundles[i]));
    return vals;
}

}  // namespace mms
