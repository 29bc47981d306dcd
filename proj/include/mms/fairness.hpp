#pragma once

#include <stdexcept>
#include <vector>

#include "mms/instance.hpp"

namespace mms {

// Pairwise envy flags for EF / EF1 / EFX plus per-agent bundle values.
// envy_xxx[i][j] == true means the (i, j) pair violates the notion.
struct FairnessReport {
    std::vector<std::vector<bool>> envy_ef;
    std::vector<std::vector<bool>> envy_ef1;
    std::vector<std::vector<bool>> envy_efx;
    std::vector<Rational> values;
    bool ef = true, ef1 = true, efx = true;
};

inline FairnessReport fairness_report(const Instance& inst, const Allocation& alloc) {
    if (alloc.agents() != inst.n) throw std::invalid_argument("allocation/agent count mismatch");
    if (!alloc.complete(inst.m)) throw std::invalid_argument("fairness checks need a complete allocation");

    const int n = inst.n;
    FairnessReport rep;
    rep.values = bundle_values(inst, alloc);
    rep.envy_ef.assign(n, std::vector<bool>(n, false));
    rep.envy_ef1 = rep.envy_ef;
    rep.envy_efx = rep.envy_ef;

    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const auto& bj = alloc.bundles[j];
            Rational vj = inst.value_of(i, bj);
            if (rep.values[i] < vj) {
                rep.envy_ef[i][j] = true;
                rep.ef = false;
            }
            if (bj.empty()) continue;  // EF1/EFX quantify over non-empty bundles
            Rational max_g(0), min_g;
            bool first = true;
            for (int g : bj) {
                const Rational& v = inst.at(i, g);
                if (first || v > max_g) max_g = v;
                if (first || v < min_g) min_g = v;
                first = false;
            }
            if (rep.values[i] < vj - max_g) {
                rep.envy_ef1[i][j] = true;
                rep.ef1 = false;
            }
            if (rep.values[i] < vj - min_g) {
                rep.envy_efx[i][j] = true;
                rep.efx = false;
            }
        }
    }
    return rep;
}

inline bool check_EF(const Instance& inst, const Allocation& alloc) {
    return fairness_report(inst, alloc).ef;
}
inline bool check_EF1(const Instance& inst, const Allocation& alloc) {
    return fairness_report(inst, alloc).ef1;
}
inline bool check_EFX(const Instance& inst, const Allocation& alloc) {
    return fairness_report(inst, alloc).efx;
}

}  // namespace mms
