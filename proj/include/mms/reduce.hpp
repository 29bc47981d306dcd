#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mms/instance.hpp"
#include "mms/oracle.hpp"
#include "mms/ordering.hpp"

namespace mms {

// ---------------------------------------------------------------------------
// Normalization: order -> scale to v_i(M) = n -> valid reductions to fixpoint.

enum class StepKind { Order, Scale, Reduce };

struct TraceStep {
    StepKind kind = StepKind::Order;
    OrderMap order_map;             // Order
    std::vector<Rational> factors;  // Scale: per agent of the then-current instance
    int agent_current = -1;         // Reduce: index in the then-current instance
    int agent_original = -1;        // Reduce: original agent id
    GoodSet bundle;                 // Reduce: good ids in the then-current space
};

struct NormalizationTrace {
    int original_n = 0;
    int original_m = 0;
    std::vector<TraceStep> steps;
    std::vector<int> surviving_agents;  // original ids, in final instance order

    int reductions() const {
        int k = 0;
        for (const auto& s : steps)
            if (s.kind == StepKind::Reduce) ++k;
        return k;
    }

    std::vector<int> reduced_agents() const {
        std::vector<int> out;
        for (const auto& s : steps)
            if (s.kind == StepKind::Reduce) out.push_back(s.agent_original);
        return out;
    }
};

struct NormalizeResult {
    Instance instance;
    NormalizationTrace trace;
};

namespace detail {

struct ReductionPick {
    int agent = -1;
    GoodSet bundle;
};

// Reduction triggers on an ordered instance scaled to v_i(M) = n: the {g_1} rule
// first, then {g_n, g_{n+1}}, lowest qualifying agent each. Only agents in
// `eligible` are considered.
inline std::optional<ReductionPick> find_reduction(const Instance& inst, const std::vector<bool>& eligible) {
    const int n = inst.n;
    if (n < 2 || inst.m < 1) return std::nullopt;
    for (int i = 0; i < n; ++i)
        if (eligible[i] && inst.values[i][0] >= 1) return ReductionPick{i, {0}};
    if (inst.m >= n + 1) {
        for (int i = 0; i < n; ++i)
            if (eligible[i] && inst.values[i][n - 1] + inst.values[i][n] >= 1)
                return ReductionPick{i, {n - 1, n}};
    }
    return std::nullopt;
}

inline Instance remove_agent_and_goods(const Instance& inst, int agent, const GoodSet& goods) {
    std::vector<bool> drop(inst.m, false);
    for (int g : goods) drop[g] = true;
    Instance out(inst.n - 1, inst.m - static_cast<int>(goods.size()));
    int row = 0;
    for (int i = 0; i < inst.n; ++i) {
        if (i == agent) continue;
        int col = 0;
        for (int g = 0; g < inst.m; ++g) {
            if (drop[g]) continue;
            out.values[row][col++] = inst.values[i][g];
        }
        ++row;
    }
    return out;
}

// Zero-total agents keep factor 1: their MMS is 0 and any bundle satisfies
// them, so scaling must not divide by zero on degenerate residuals.
inline std::vector<Rational> safe_scale_factors(const Instance& inst, const Rational& target) {
    std::vector<Rational> f(inst.n, Rational(1));
    for (int i = 0; i < inst.n; ++i) {
        Rational tot = inst.total(i);
        if (tot > 0) f[i] = target / tot;
    }
    return f;
}

inline void apply_factors(Instance& inst, const std::vector<Rational>& f) {
    for (int i = 0; i < inst.n; ++i)
        for (int g = 0; g < inst.m; ++g) inst.values[i][g] *= f[i];
}

}  // namespace detail

// One valid reduction on an ordered, scaled instance; returns the agent, her
// bundle, and the compacted residual instance.
struct ValidReductionStep {
    int agent = -1;
    GoodSet bundle;
    Instance residual;
};

inline std::optional<ValidReductionStep> valid_reduction_step(const Instance& inst) {
    if (!is_ordered(inst)) throw std::invalid_argument("valid_reduction_step needs an ordered instance");
    auto pick = detail::find_reduction(inst, std::vector<bool>(inst.n, true));
    if (!pick) return std::nullopt;
    return ValidReductionStep{pick->agent, pick->bundle,
                              detail::remove_agent_and_goods(inst, pick->agent, pick->bundle)};
}

// Order, scale to v_i(M) = n', and reduce until no trigger fires (n' >= 2).
// When `eligible` is given, only those original agents may be reduced; the
// preselected-subset pipelines need reductions to land on selected agents.
inline NormalizeResult normalize(const Instance& inst, const std::vector<int>* eligible_agents = nullptr) {
    for (int i = 0; i < inst.n; ++i)
        if (inst.total(i) == 0) throw std::invalid_argument("normalize: agent with zero total value");

    NormalizeResult out;
    out.trace.original_n = inst.n;
    out.trace.original_m = inst.m;

    OrderedInstance ord = order_instance(inst);
    TraceStep ostep;
    ostep.kind = StepKind::Order;
    ostep.order_map = ord.order_map;
    out.trace.steps.push_back(std::move(ostep));

    Instance cur = std::move(ord.instance);
    std::vector<int> agent_ids(inst.n);
    for (int i = 0; i < inst.n; ++i) agent_ids[i] = i;
    std::vector<bool> elig(inst.n, true);
    if (eligible_agents) {
        elig.assign(inst.n, false);
        for (int a : *eligible_agents) elig.at(a) = true;
    }

    auto push_scale = [&]() {
        TraceStep s;
        s.kind = StepKind::Scale;
        s.factors = detail::safe_scale_factors(cur, Rational(cur.n));
        detail::apply_factors(cur, s.factors);
        out.trace.steps.push_back(std::move(s));
    };

    if (cur.n > 0) push_scale();
    while (cur.n >= 2) {
        std::vector<bool> cur_elig(cur.n);
        for (int i = 0; i < cur.n; ++i) cur_elig[i] = elig[agent_ids[i]];
        auto pick = detail::find_reduction(cur, cur_elig);
        if (!pick) break;
        TraceStep r;
        r.kind = StepKind::Reduce;
        r.agent_current = pick->agent;
        r.agent_original = agent_ids[pick->agent];
        r.bundle = pick->bundle;
        out.trace.steps.push_back(r);
        cur = detail::remove_agent_and_goods(cur, pick->agent, pick->bundle);
        agent_ids.erase(agent_ids.begin() + pick->agent);
        if (cur.n > 0) push_scale();
    }

    out.trace.surviving_agents = agent_ids;
    out.instance = std::move(cur);
    return out;
}

// Replays the trace forward; the result must equal the normalized instance
// entrywise (tested invariant).
inline Instance replay_trace(const Instance& original, const NormalizationTrace& trace) {
    Instance cur;
    bool started = false;
    for (const auto& s : trace.steps) {
        switch (s.kind) {
            case StepKind::Order: {
                cur = Instance(original.n, original.m);
                for (int i = 0; i < original.n; ++i)
                    for (int j = 0; j < original.m; ++j)
                        cur.values[i][j] = original.values[i][s.order_map.perm[i][j]];
                started = true;
                break;
            }
            case StepKind::Scale:
                if (!started) throw std::invalid_argument("trace must start with an Order step");
                detail::apply_factors(cur, s.factors);
                break;
            case StepKind::Reduce:
                cur = detail::remove_agent_and_goods(cur, s.agent_current, s.bundle);
                break;
        }
    }
    return cur;
}

// Replays the trace backwards: reinserts reduced bundles, undoes relabelings,
// and applies the picking procedure at the Order step. A' may be partial.
inline Allocation lift_allocation(const Instance& original, const NormalizationTrace& trace,
                                  const Allocation& normalized_alloc) {
    if (normalized_alloc.agents() != static_cast<int>(trace.surviving_agents.size()))
        throw std::invalid_argument("allocation does not match the trace's surviving agents");

    // bundles in the current (walking backwards: progressively earlier) space
    std::vector<std::pair<int, GoodSet>> bundles;  // (original agent id, goods)
    for (int i = 0; i < normalized_alloc.agents(); ++i)
        bundles.emplace_back(trace.surviving_agents[i], normalized_alloc.bundles[i]);

    for (auto it = trace.steps.rbegin(); it != trace.steps.rend(); ++it) {
        const TraceStep& s = *it;
        if (s.kind == StepKind::Reduce) {
            // expand good ids from the compacted space back to pre-removal ids
            std::vector<int> removed = s.bundle;  // sorted
            auto expand = [&](int g) {
                int out = g;
                for (int r : removed) {
                    if (r <= out)
                        ++out;
                    else
                        break;
                }
                return out;
            };
            for (auto& [agent, goods] : bundles)
                for (auto& g : goods) g = expand(g);
            bundles.emplace_back(s.agent_original, s.bundle);
        } else if (s.kind == StepKind::Order) {
            Allocation ordered_alloc(original.n);
            for (const auto& [agent, goods] : bundles)
                for (int g : goods) ordered_alloc.add(agent, g);
            return unorder_allocation(original, s.order_map, ordered_alloc);
        }
        // Scale: goods unchanged
    }
    throw std::invalid_argument("trace has no Order step");
}

// Product of the Scale factors each original agent saw while present.
inline std::vector<Rational> accumulated_scale(const NormalizationTrace& trace) {
    std::vector<Rational> acc(trace.original_n, Rational(1));
    std::vector<int> agent_ids(trace.original_n);
    for (int i = 0; i < trace.original_n; ++i) agent_ids[i] = i;
    for (const auto& s : trace.steps) {
        if (s.kind == StepKind::Scale) {
            for (size_t i = 0; i < s.factors.size(); ++i) acc[agent_ids[i]] *= s.factors[i];
        } else if (s.kind == StepKind::Reduce) {
            agent_ids.erase(agent_ids.begin() + s.agent_current);
        }
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Strong normalization: per-agent scale to MMS_i^n = 1, trim every MMS bundle
// to value exactly 1, then re-order. No agents are removed.

struct StrongTrace {
    std::vector<Rational> factors;  // per original agent
    OrderMap order_map;
};

struct StrongNormalizeResult {
    Instance instance;     // strongly normalized, ordered
    StrongTrace trace;
    std::vector<std::vector<GoodSet>> partitions;  // per agent, final good space, bundles worth exactly 1
    Instance scaled;       // after scaling only (pre-trim, pre-order); test hook
    Instance pre_order;    // after trimming (pre-order); test hook
};

inline StrongNormalizeResult strong_normalize(const Instance& inst, uint64_t budget = kDefaultNodeBudget) {
    StrongNormalizeResult out;
    out.trace.factors.assign(inst.n, Rational(1));

    Instance cur = inst;
    std::vector<std::vector<GoodSet>> parts(inst.n);
    for (int i = 0; i < inst.n; ++i) {
        auto r = mms(inst, i, inst.n, budget);
        if (!r.ok()) throw std::runtime_error("strong_normalize: oracle budget exceeded");
        if (r->value == 0) throw std::invalid_argument("strong_normalize: agent with zero MMS");
        Rational f = Rational(1) / r->value;
        out.trace.factors[i] = f;
        for (int g = 0; g < inst.m; ++g) cur.values[i][g] *= f;
        parts[i] = r->partition;
    }
    out.scaled = cur;

    // trim each over-1 bundle, highest-valued good first, never below zero
    for (int i = 0; i < inst.n; ++i) {
        for (const auto& bundle : parts[i]) {
            Rational surplus = cur.value_of(i, bundle) - 1;
            if (surplus <= 0) continue;  // min bundle is exactly 1 already
            GoodSet order = bundle;
            std::stable_sort(order.begin(), order.end(),
                             [&](int a, int b) { return cur.values[i][a] > cur.values[i][b]; });
            for (int g : order) {
                if (surplus == 0) break;
                Rational cut = std::min(surplus, cur.values[i][g]);
                cur.values[i][g] -= cut;
                surplus -= cut;
            }
        }
    }
    out.pre_order = cur;

    OrderedInstance ord = order_instance(cur);
    out.trace.order_map = ord.order_map;
    out.instance = std::move(ord.instance);

    // remap each agent's partition through her own permutation
    out.partitions.assign(inst.n, {});
    for (int i = 0; i < inst.n; ++i) {
        std::vector<int> inv(inst.m);
        for (int j = 0; j < inst.m; ++j) inv[out.trace.order_map.perm[i][j]] = j;
        for (const auto& bundle : parts[i]) {
            GoodSet mapped;
            mapped.reserve(bundle.size());
            for (int g : bundle) mapped.push_back(inv[g]);
            std::sort(mapped.begin(), mapped.end());
            out.partitions[i].push_back(std::move(mapped));
        }
    }
    return out;
}

inline Allocation lift_strong_allocation(const Instance& original, const StrongTrace& trace,
                                         const Allocation& alloc) {
    return unorder_allocation(original, trace.order_map, alloc);
}

}  // namespace mms
