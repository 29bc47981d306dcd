#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "mms/envy_graph.hpp"
#include "mms/instance.hpp"
#include "mms/lone_divider.hpp"
#include "mms/reduce.hpp"

namespace mms {

// beta(n) = (1/2) (n+2)/(n-1) claimed by the n-1 pipeline.
inline Rational n_minus_one_beta(int n) {
    if (n < 2) throw std::invalid_argument("beta(n) needs n >= 2");
    return rat(n + 2, 2L * (n - 1));
}

// Scale to v_i(M) = 3; hand a >= 1 good to its (lowest-index) fan, the rest
// to the other agent; otherwise round-robin. Both agents end at MMS^3 or
// better.
inline Allocation two_agent_mms3(const Instance& inst) {
    if (inst.n != 2) throw std::invalid_argument("two_agent_mms3 needs exactly 2 agents");

    Allocation alloc(2);
    Rational t0 = inst.total(0), t1 = inst.total(1);
    if (t0 == 0 || t1 == 0) {
        // a zero-total agent is satisfied by anything
        int keeper = t0 == 0 ? 1 : 0;
        for (int g = 0; g < inst.m; ++g) alloc.add(keeper, g);
        return alloc;
    }

    Instance scaled = scale(inst, Rational(3));
    for (int i = 0; i < 2; ++i) {
        for (int g = 0; g < inst.m; ++g) {
            if (scaled.values[i][g] >= 1) {
                alloc.add(i, g);
                for (int rest = 0; rest < inst.m; ++rest)
                    if (rest != g) alloc.add(1 - i, rest);
                return alloc;
            }
        }
    }
    return round_robin(inst, {0, 1});
}

// Normalize, drop one agent (highest index among the survivors), run the
// modified envy-graph on the rest, lift. n-1 agents at beta(n) of their MMS.
inline PipelineResult n_minus_one_pipeline(const Instance& inst) {
    if (inst.n < 2) throw std::invalid_argument("n_minus_one_pipeline needs n >= 2");

    NormalizeResult norm = normalize(inst);
    const Instance& work = norm.instance;

    PipelineResult res;
    res.beta = n_minus_one_beta(inst.n);

    std::vector<int> participants;
    if (work.n == 1) {
        participants = {0};  // nobody left to drop against
    } else {
        for (int pos = 0; pos + 1 < work.n; ++pos) participants.push_back(pos);
    }

    Allocation work_alloc(work.n);
    if (work.n > 0) work_alloc = envy_graph_efx(work, participants);

    res.allocation = lift_allocation(inst, norm.trace, work_alloc);
    for (int orig : norm.trace.reduced_agents())
        res.certificates.push_back({orig, CertKind::Reduction, Rational(1)});
    for (int pos : participants)
        res.certificates.push_back(
            {norm.trace.surviving_agents[pos], CertKind::Claimed, work.value_of(pos, work_alloc.bundles[pos])});
    for (const auto& c : res.certificates) res.satisfied.push_back(c.agent);
    std::sort(res.satisfied.begin(), res.satisfied.end());
    return res;
}

enum class HalfVariant { Ef1, BetaHalf };

// floor(n/2) selected agents each reach their full MMS: EF1 (round-robin) or
// the envy-graph half-approximation, both after selected-set normalization.
inline PipelineResult half_agents_pipeline(const Instance& inst, HalfVariant variant) {
    const int count = inst.n / 2;
    std::vector<int> selected = default_selection(inst.n, count);

    PipelineResult res;
    if (count == 0) {
        res.allocation = Allocation(inst.n);
        return res;
    }

    NormalizeResult norm = normalize(inst, &selected);
    const Instance& work = norm.instance;

    std::vector<int> participants;
    for (int pos = 0; pos < work.n; ++pos) {
        int orig = norm.trace.surviving_agents[pos];
        if (std::find(selected.begin(), selected.end(), orig) != selected.end()) participants.push_back(pos);
    }

    Allocation work_alloc(work.n);
    if (!participants.empty()) {
        work_alloc = variant == HalfVariant::Ef1 ? round_robin(work, participants)
                                                 : envy_graph_efx(work, participants);
    }

    res.allocation = lift_allocation(inst, norm.trace, work_alloc);
    for (int orig : norm.trace.reduced_agents())
        res.certificates.push_back({orig, CertKind::Reduction, Rational(1)});
    for (int pos : participants) {
        Rational v = work.value_of(pos, work_alloc.bundles[pos]);
        CertKind kind = v >= 1 ? CertKind::ValueAtLeastOne
                               : (work.m < work.n ? CertKind::PigeonholeZero : CertKind::Claimed);
        res.certificates.push_back({norm.trace.surviving_agents[pos], kind, v});
    }
    for (const auto& c : res.certificates) res.satisfied.push_back(c.agent);
    std::sort(res.satisfied.begin(), res.satisfied.end());
    return res;
}

// ---------------------------------------------------------------------------
// MMS^k via dummy agents (valuations copied from agent 0).

enum class MmsKPath { Auto, NMinusOne, TwoThirds, TwoThirdsExistence };

struct MmsKResult {
    Allocation allocation;  // bundles for the n original agents only
    bool in_proven_range = true;
    std::string note;
};

inline MmsKResult mms_k_via_dummies(const Instance& inst, int k, MmsKPath path = MmsKPath::Auto,
                                    uint64_t budget = kDefaultNodeBudget) {
    if (k < inst.n) throw std::invalid_argument("mms_k_via_dummies needs k >= n");

    if (path == MmsKPath::Auto)
        path = (k > inst.n && k <= 4) ? MmsKPath::NMinusOne : MmsKPath::TwoThirds;

    if (k == inst.n) {
        // no dummies to add: degrade to the base pipeline and its own claim
        MmsKResult out;
        out.in_proven_range = false;
        out.note = "k = n wraps the base pipeline; only its own guarantee applies";
        PipelineResult pr = path == MmsKPath::NMinusOne ? n_minus_one_pipeline(inst)
                            : path == MmsKPath::TwoThirdsExistence
                                ? two_thirds_existence_engine(inst, budget)
                                : two_thirds_poly(inst);
        out.allocation = pr.allocation;
        return out;
    }

    Instance inflated(k, inst.m);
    for (int i = 0; i < inst.n; ++i) inflated.values[i] = inst.values[i];
    for (int i = inst.n; i < k; ++i) inflated.values[i] = inst.values[0];

    MmsKResult out;
    std::vector<int> originals = default_selection(k, inst.n);

    if (path == MmsKPath::NMinusOne) {
        out.in_proven_range = k > inst.n && k <= 4;
        if (!out.in_proven_range) out.note = "n-minus-one path proven only for n < k <= 4";

        NormalizeResult norm = normalize(inflated, &originals);
        const Instance& work = norm.instance;
        // drop the highest-index dummy; dummies are never reduced
        int drop = -1;
        for (int pos = work.n - 1; pos >= 0; --pos)
            if (norm.trace.surviving_agents[pos] >= inst.n) {
                drop = pos;
                break;
            }
        std::vector<int> participants;
        for (int pos = 0; pos < work.n; ++pos)
            if (pos != drop) participants.push_back(pos);

        Allocation work_alloc(work.n);
        if (!participants.empty()) work_alloc = envy_graph_efx(work, participants);
        Allocation lifted = lift_allocation(inflated, norm.trace, work_alloc);
        out.allocation = Allocation(inst.n);
        for (int i = 0; i < inst.n; ++i) out.allocation.bundles[i] = lifted.bundles[i];
        return out;
    }

    const int want = (2 * k) / 3;
    if (want < inst.n) throw std::invalid_argument("floor(2k/3) below the original agent count");
    std::vector<int> selected = originals;
    for (int d = inst.n; static_cast<int>(selected.size()) < want; ++d) selected.push_back(d);

    PipelineResult pr;
    if (path == MmsKPath::TwoThirdsExistence) {
        pr = two_thirds_existence_engine(inflated, selected, budget);
        out.in_proven_range = true;
    } else {
        pr = two_thirds_poly(inflated, selected);
        out.in_proven_range = k < 9;
        if (!out.in_proven_range) out.note = "two-thirds path proven only for inflated sizes below 9";
        if (pr.shortfall) out.note += (out.note.empty() ? "" : "; ") + std::string("divider shortfall");
    }
    out.allocation = Allocation(inst.n);
    for (int i = 0; i < inst.n; ++i) out.allocation.bundles[i] = pr.allocation.bundles[i];
    return out;
}

}  // namespace mms
