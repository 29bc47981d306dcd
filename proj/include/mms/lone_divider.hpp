#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mms/instance.hpp"
#include "mms/matching.hpp"
#include "mms/reduce.hpp"

namespace mms {

// ---------------------------------------------------------------------------
// Divider-side bundle construction. All good ids live in the normalized
// (ordered) instance; heads are the reserved top goods, one per bundle.

struct DividerState {
    std::vector<int> remaining_goods;     // ascending ids
    std::vector<int> remaining_selected;  // agent indices of the working instance
    std::vector<int> reserved_heads;      // ascending ids, |heads| == |remaining_selected|
    int head_budget = 0;                  // initial head count
    int matched_rounds = 0;               // bundles allocated so far (k)

    bool consistent() const {
        return static_cast<int>(reserved_heads.size()) == head_budget - matched_rounds &&
               reserved_heads.size() == remaining_selected.size();
    }
};

struct DividerBundles {
    std::vector<GoodSet> bundles;
    bool shortfall = false;
    // instrumentation for the case-table conformance checks
    int high_count = 0;        // h: remaining high-value goods for the divider
    int stray_count = 0;       // w: remaining non-head high-value goods
    int pairs_formed = 0;
    int restricted_filled = 0; // bundles completed by restricted bag-filling
    int plain_filled = 0;      // t: bundles completed by plain bag-filling
};

namespace detail {

inline bool contains(const std::vector<int>& sorted, int x) {
    return std::binary_search(sorted.begin(), sorted.end(), x);
}

// Seeds a bag with each head in descending value (ascending id) and fills
// with the remaining low-value goods in decreasing value until the bag is in
// [1, 3/2). Stops at the first bag that cannot reach 1.
inline void plain_bag_fill(const Instance& inst, int divider, std::vector<int>& heads,
                           std::vector<int>& pool, const std::vector<bool>& is_low, int needed,
                           std::vector<GoodSet>& out, int& filled) {
    filled = 0;
    while (filled < needed && !heads.empty()) {
        int seed = heads.front();
        GoodSet bag{seed};
        Rational v = inst.values[divider][seed];
        std::vector<int> used;
        for (size_t idx = 0; idx < pool.size() && v < 1; ++idx) {
            int g = pool[idx];
            if (!is_low[g]) continue;
            bag.push_back(g);
            used.push_back(g);
            v += inst.values[divider][g];
        }
        if (v < 1) return;  // out of low-value goods
        heads.erase(heads.begin());
        for (int g : used) pool.erase(std::find(pool.begin(), pool.end(), g));
        std::sort(bag.begin(), bag.end());
        out.push_back(std::move(bag));
        ++filled;
    }
}

// Pairs the lowest-valued remaining heads with the stray (non-head)
// high-value goods, highest stray first. Two > 1/2 goods always clear 1.
inline int pair_strays(std::vector<int>& heads, std::vector<int>& pool, const std::vector<int>& strays,
                       int limit, std::vector<GoodSet>& out) {
    int p = std::min<int>(limit, static_cast<int>(strays.size()));
    for (int j = 0; j < p; ++j) {
        int head = heads.back();  // highest id = lowest value among heads
        heads.pop_back();
        int stray = strays[j];    // ascending id = descending value
        pool.erase(std::find(pool.begin(), pool.end(), stray));
        GoodSet bag{std::min(head, stray), std::max(head, stray)};
        out.push_back(std::move(bag));
    }
    return p;
}

}  // namespace detail

// Polynomial divider: pairing plus plain bag-filling (high-value iff
// v >= 1/2). Shortfall is a result, not an exception.
inline DividerBundles divider_partition_poly(const Instance& inst, const DividerState& state, int divider) {
    DividerBundles out;
    const int needed_total = static_cast<int>(state.remaining_selected.size());

    std::vector<int> heads = state.reserved_heads;
    std::vector<int> pool;
    for (int g : state.remaining_goods)
        if (!detail::contains(state.reserved_heads, g)) pool.push_back(g);

    const Rational half(1, 2);
    std::vector<bool> is_low(inst.m, false);
    std::vector<int> strays;
    for (int g : state.remaining_goods) {
        bool high = inst.values[divider][g] >= half;
        if (high) ++out.high_count;
        if (!detail::contains(state.reserved_heads, g)) {
            if (high)
                strays.push_back(g);
            else
                is_low[g] = true;
        }
    }
    out.stray_count = static_cast<int>(strays.size());

    out.pairs_formed = detail::pair_strays(heads, pool, strays, needed_total, out.bundles);
    int needed = needed_total - out.pairs_formed;
    detail::plain_bag_fill(inst, divider, heads, pool, is_low, needed, out.bundles, out.plain_filled);
    out.shortfall = static_cast<int>(out.bundles.size()) < needed_total;
    return out;
}

// Plain bag-filling alone, with no pairing step: the unrestricted procedure
// the worked examples trace. Runs out of low-value goods where the full
// dividers succeed.
inline DividerBundles divider_bag_filling_only(const Instance& inst, const DividerState& state, int divider) {
    DividerBundles out;
    const int needed_total = static_cast<int>(state.remaining_selected.size());
    std::vector<int> heads = state.reserved_heads;
    std::vector<int> pool;
    const Rational half(1, 2);
    std::vector<bool> is_low(inst.m, false);
    for (int g : state.remaining_goods) {
        bool high = inst.values[divider][g] >= half;
        if (high) ++out.high_count;
        if (!detail::contains(state.reserved_heads, g)) {
            pool.push_back(g);
            if (!high) is_low[g] = true;
        }
    }
    detail::plain_bag_fill(inst, divider, heads, pool, is_low, needed_total, out.bundles, out.plain_filled);
    out.shortfall = static_cast<int>(out.bundles.size()) < needed_total;
    return out;
}

// Existence divider: pairing, restricted bag-filling over the remainder sets
// of spent high-value goods (glued units), then plain bag-filling. Needs the
// divider's exact MMS partition of a strongly normalized instance (every
// bundle worth exactly 1). High-value iff v > 1/2.
inline DividerBundles divider_partition_existence(const Instance& inst, const DividerState& state,
                                                  int divider, const std::vector<GoodSet>& mms_partition) {
    DividerBundles out;
    const int needed_total = static_cast<int>(state.remaining_selected.size());

    std::vector<int> heads = state.reserved_heads;
    std::vector<int> pool;
    for (int g : state.remaining_goods)
        if (!detail::contains(state.reserved_heads, g)) pool.push_back(g);

    const Rational half(1, 2);
    auto is_high = [&](int g) { return inst.values[divider][g] > half; };
    std::vector<bool> is_low(inst.m, false);
    std::vector<int> strays;
    for (int g : state.remaining_goods) {
        if (is_high(g)) ++out.high_count;
        if (!detail::contains(state.reserved_heads, g)) {
            if (is_high(g))
                strays.push_back(g);
            else
                is_low[g] = true;
        }
    }
    out.stray_count = static_cast<int>(strays.size());

    out.pairs_formed = detail::pair_strays(heads, pool, strays, needed_total, out.bundles);
    int needed = needed_total - out.pairs_formed;

    // restricted bag-filling builds at most min(needed, pairs) bundles, then
    // plain bag-filling takes over
    int restricted_target = std::min(needed, out.pairs_formed);
    if (restricted_target > 0) {
        // remainder sets of high-value goods that are no longer available
        std::vector<bool> available(inst.m, false);
        for (int g : pool) available[g] = true;
        for (int g : heads) available[g] = true;

        struct Unit {
            GoodSet goods;
            Rational value;
        };
        std::vector<Unit> units;
        for (const auto& bundle : mms_partition) {
            int high_good = -1;
            for (int g : bundle)
                if (is_high(g)) high_good = g;  // at most one per bundle under strong normalization
            if (high_good == -1 || available[high_good]) continue;
            Unit u;
            for (int g : bundle) {
                if (g == high_good) continue;
                if (available[g] && !detail::contains(heads, g)) u.goods.push_back(g);
            }
            if (u.goods.empty()) continue;
            u.value = inst.value_of(divider, u.goods);
            units.push_back(std::move(u));
        }
        std::stable_sort(units.begin(), units.end(), [](const Unit& a, const Unit& b) { return a.value > b.value; });

        std::vector<bool> unit_used(units.size(), false);
        while (out.restricted_filled < restricted_target && !heads.empty()) {
            int seed = heads.front();
            GoodSet bag{seed};
            Rational v = inst.values[divider][seed];
            std::vector<size_t> taken;
            for (size_t u = 0; u < units.size() && v < 1; ++u) {
                if (unit_used[u]) continue;
                taken.push_back(u);
                v += units[u].value;
                for (int g : units[u].goods) bag.push_back(g);
            }
            if (v < 1) break;  // no more remainder sets; fall through to plain filling
            for (size_t u : taken) unit_used[u] = true;
            heads.erase(heads.begin());
            for (int g : bag)
                if (g != seed) pool.erase(std::find(pool.begin(), pool.end(), g));
            std::sort(bag.begin(), bag.end());
            out.bundles.push_back(std::move(bag));
            ++out.restricted_filled;
            --needed;
        }
    }

    if (needed > 0)
        detail::plain_bag_fill(inst, divider, heads, pool, is_low, needed, out.bundles, out.plain_filled);
    out.shortfall = static_cast<int>(out.bundles.size()) < needed_total;
    return out;
}

// ---------------------------------------------------------------------------
// Lone divider loop and the pipelines built on it.

enum class CertKind { Reduction, ValueAtLeastOne, PigeonholeZero, Claimed, None };

struct AgentCertificate {
    int agent = -1;  // original instance agent id
    CertKind kind = CertKind::None;
    Rational value;  // bundle value in the space the certificate refers to
};

struct RoundInfo {
    int n_remaining = 0;   // selected agents before the round
    int high_count = 0;
    int stray_count = 0;
    int pairs = 0;
    int plain_filled = 0;
    bool shortfall = false;
};

struct PipelineResult {
    Allocation allocation;  // original good space
    std::vector<int> satisfied;
    Rational beta = Rational(1);
    bool shortfall = false;
    std::vector<AgentCertificate> certificates;
    std::vector<RoundInfo> rounds;
};

namespace detail {

struct LoopOutcome {
    Allocation alloc;            // over the working instance
    std::vector<int> served;     // working-instance agent indices
    std::vector<int> leftovers;  // unallocated goods
    bool shortfall = false;
    std::vector<RoundInfo> rounds;
};

template <class PartitionFn>
LoopOutcome lone_divider_loop(const Instance& inst, std::vector<int> selected, PartitionFn make_bundles) {
    LoopOutcome out;
    out.alloc = Allocation(inst.n);

    DividerState state;
    state.remaining_selected = std::move(selected);
    std::sort(state.remaining_selected.begin(), state.remaining_selected.end());
    state.head_budget = static_cast<int>(state.remaining_selected.size());
    for (int g = 0; g < state.head_budget && g < inst.m; ++g) state.reserved_heads.push_back(g);
    for (int g = 0; g < inst.m; ++g) state.remaining_goods.push_back(g);

    if (static_cast<int>(state.reserved_heads.size()) < state.head_budget) {
        // fewer goods than selected agents: MMS is zero for everyone
        out.leftovers = state.remaining_goods;
        return out;
    }

    while (!state.remaining_selected.empty()) {
        int divider = state.remaining_selected.front();
        DividerBundles db = make_bundles(state, divider);

        RoundInfo info;
        info.n_remaining = static_cast<int>(state.remaining_selected.size());
        info.high_count = db.high_count;
        info.stray_count = db.stray_count;
        info.pairs = db.pairs_formed;
        info.plain_filled = db.plain_filled;
        info.shortfall = db.shortfall;
        out.rounds.push_back(info);

        auto allocate = [&](int agent_idx, const GoodSet& bundle) {
            out.alloc.add_bundle(agent_idx, bundle);
            out.served.push_back(agent_idx);
            state.remaining_selected.erase(
                std::find(state.remaining_selected.begin(), state.remaining_selected.end(), agent_idx));
            for (int g : bundle) {
                state.remaining_goods.erase(std::find(state.remaining_goods.begin(), state.remaining_goods.end(), g));
                auto hit = std::find(state.reserved_heads.begin(), state.reserved_heads.end(), g);
                if (hit != state.reserved_heads.end()) state.reserved_heads.erase(hit);
            }
            ++state.matched_rounds;
        };

        if (!db.shortfall) {
            Matching match = envy_free_matching(inst, state.remaining_selected, db.bundles, Rational(1));
            if (match.pairs.empty()) throw std::logic_error("envy-free matching came back empty on a full round");
            std::vector<int> agents_before = state.remaining_selected;
            for (const auto& [apos, b] : match.pairs) allocate(agents_before[apos], db.bundles[b]);
            // matching contract: nobody left behind values an allocated bundle at 1+
            for (int agent : state.remaining_selected)
                for (const auto& [apos, b] : match.pairs)
                    if (inst.value_of(agent, db.bundles[b]) >= 1)
                        throw std::logic_error("envy-free matching contract violated");
            if (!state.consistent()) throw std::logic_error("divider state invariant broken");
            continue;
        }

        // shortfall: place what exists (matching first, then greedy) and stop
        out.shortfall = true;
        Matching match = envy_free_matching(inst, state.remaining_selected, db.bundles, Rational(1));
        std::vector<bool> bundle_done(db.bundles.size(), false);
        std::vector<int> agents_before = state.remaining_selected;
        for (const auto& [apos, b] : match.pairs) {
            allocate(agents_before[apos], db.bundles[b]);
            bundle_done[b] = true;
        }
        for (size_t b = 0; b < db.bundles.size(); ++b) {
            if (bundle_done[b]) continue;
            for (int agent : std::vector<int>(state.remaining_selected)) {
                if (inst.value_of(agent, db.bundles[b]) >= 1) {
                    allocate(agent, db.bundles[b]);
                    break;
                }
            }
        }
        break;
    }

    out.leftovers = state.remaining_goods;
    return out;
}

}  // namespace detail

// Polynomial 2/3 pipeline: reduce (within the selected set), run the lone
// divider loop with the polynomial divider, lift. For n < 9 every selected
// agent is served; beyond that shortfall is a first-class outcome.
inline PipelineResult two_thirds_poly(const Instance& inst, const std::vector<int>& selected) {
    const int want = (2 * inst.n) / 3;
    if (static_cast<int>(selected.size()) != want)
        throw std::invalid_argument("selected set must have exactly floor(2n/3) agents");

    NormalizeResult norm = normalize(inst, &selected);
    const Instance& work = norm.instance;

    std::vector<int> loop_selected;
    for (int pos = 0; pos < work.n; ++pos) {
        int orig = norm.trace.surviving_agents[pos];
        if (std::find(selected.begin(), selected.end(), orig) != selected.end()) loop_selected.push_back(pos);
    }

    detail::LoopOutcome loop = detail::lone_divider_loop(
        work, loop_selected, [&](const DividerState& st, int d) { return divider_partition_poly(work, st, d); });

    PipelineResult res;
    res.shortfall = loop.shortfall;
    res.rounds = std::move(loop.rounds);
    res.allocation = lift_allocation(inst, norm.trace, loop.alloc);

    for (int orig : norm.trace.reduced_agents())
        res.certificates.push_back({orig, CertKind::Reduction, Rational(1)});
    for (int pos : loop.served)
        res.certificates.push_back(
            {norm.trace.surviving_agents[pos], CertKind::ValueAtLeastOne, work.value_of(pos, loop.alloc.bundles[pos])});
    if (work.m < work.n)
        for (int pos : loop_selected)
            if (std::find(loop.served.begin(), loop.served.end(), pos) == loop.served.end())
                res.certificates.push_back({norm.trace.surviving_agents[pos], CertKind::PigeonholeZero, Rational(0)});
    for (const auto& c : res.certificates) res.satisfied.push_back(c.agent);
    std::sort(res.satisfied.begin(), res.satisfied.end());
    return res;
}

inline std::vector<int> default_selection(int n, int count) {
    std::vector<int> sel;
    for (int i = 0; i < count && i < n; ++i) sel.push_back(i);
    return sel;
}

inline PipelineResult two_thirds_poly(const Instance& inst) {
    return two_thirds_poly(inst, default_selection(inst.n, (2 * inst.n) / 3));
}

// Existence engine: strong normalization (exact MMS partitions from the
// oracle), lone divider with the restricted bag-filling divider. Succeeds for
// every subset of floor(2n/3) agents.
inline PipelineResult two_thirds_existence_engine(const Instance& inst, const std::vector<int>& selected,
                                                  uint64_t budget = kDefaultNodeBudget) {
    const int want = (2 * inst.n) / 3;
    if (static_cast<int>(selected.size()) != want)
        throw std::invalid_argument("selected set must have exactly floor(2n/3) agents");

    StrongNormalizeResult sn = strong_normalize(inst, budget);
    const Instance& work = sn.instance;

    detail::LoopOutcome loop = detail::lone_divider_loop(work, selected, [&](const DividerState& st, int d) {
        return divider_partition_existence(work, st, d, sn.partitions[d]);
    });

    PipelineResult res;
    res.shortfall = loop.shortfall;
    res.rounds = std::move(loop.rounds);
    res.allocation = lift_strong_allocation(inst, sn.trace, loop.alloc);
    for (int pos : loop.served)
        res.certificates.push_back({pos, CertKind::ValueAtLeastOne, work.value_of(pos, loop.alloc.bundles[pos])});
    for (const auto& c : res.certificates) res.satisfied.push_back(c.agent);
    std::sort(res.satisfied.begin(), res.satisfied.end());
    return res;
}

inline PipelineResult two_thirds_existence_engine(const Instance& inst, uint64_t budget = kDefaultNodeBudget) {
    return two_thirds_existence_engine(inst, default_selection(inst.n, (2 * inst.n) / 3), budget);
}

// The experiment variant: unrestricted normalization, the polynomial loop on
// the first floor(2n'/3) survivors, then leftovers go to the unselected
// agents by bag-filling; the bag goes to the first agent whose value reaches
// 1 ("accepts the smallest bundle"), ties by index. No guarantee claimed;
// reports what it certified.
inline PipelineResult extended_experiment_algorithm(const Instance& inst) {
    NormalizeResult norm = normalize(inst);
    const Instance& work = norm.instance;

    std::vector<int> loop_selected;
    for (int pos = 0; pos < (2 * work.n) / 3; ++pos) loop_selected.push_back(pos);

    detail::LoopOutcome loop = detail::lone_divider_loop(
        work, loop_selected, [&](const DividerState& st, int d) { return divider_partition_poly(work, st, d); });

    // leftover phase: serve unselected survivors
    std::vector<bool> served(work.n, false);
    for (int pos : loop.served) served[pos] = true;
    std::vector<int> candidates;
    for (int pos = (2 * work.n) / 3; pos < work.n; ++pos)
        if (!served[pos]) candidates.push_back(pos);

    std::vector<int> pool = loop.leftovers;  // ascending ids = descending common order
    while (!candidates.empty() && !pool.empty()) {
        GoodSet bag;
        int winner = -1;
        std::vector<Rational> bagval(work.n, Rational(0));
        for (size_t idx = 0; idx < pool.size() && winner == -1; ++idx) {
            bag.push_back(pool[idx]);
            for (int pos : candidates) {
                bagval[pos] += work.values[pos][pool[idx]];
                if (bagval[pos] >= 1) {
                    winner = pos;
                    break;
                }
            }
        }
        if (winner == -1) break;  // nobody accepts even the whole pool
        loop.alloc.add_bundle(winner, bag);
        loop.served.push_back(winner);
        candidates.erase(std::find(candidates.begin(), candidates.end(), winner));
        for (int g : bag) pool.erase(std::find(pool.begin(), pool.end(), g));
    }

    PipelineResult res;
    res.shortfall = loop.shortfall;
    res.rounds = std::move(loop.rounds);
    res.allocation = lift_allocation(inst, norm.trace, loop.alloc);
    for (int orig : norm.trace.reduced_agents())
        res.certificates.push_back({orig, CertKind::Reduction, Rational(1)});
    for (int pos : loop.served)
        res.certificates.push_back(
            {norm.trace.surviving_agents[pos], CertKind::ValueAtLeastOne, work.value_of(pos, loop.alloc.bundles[pos])});
    if (work.m < work.n)
        for (int pos = 0; pos < work.n; ++pos)
            if (std::find(loop.served.begin(), loop.served.end(), pos) == loop.served.end())
                res.certificates.push_back({norm.trace.surviving_agents[pos], CertKind::PigeonholeZero, Rational(0)});
    for (const auto& c : res.certificates) res.satisfied.push_back(c.agent);
    std::sort(res.satisfied.begin(), res.satisfied.end());
    return res;
}

}  // namespace mms
