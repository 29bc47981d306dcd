#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mms/instance.hpp"

namespace mms {

inline constexpr uint64_t kDefaultNodeBudget = 50'000'000;

// Search results carry an explicit "unknown" outcome: a hit node budget must
// never be mistaken for ground truth.
template <class T>
struct SearchOutcome {
    std::optional<T> result;
    uint64_t nodes = 0;
    bool budget_exceeded = false;

    bool ok() const { return result.has_value(); }
    const T& operator*() const { return *result; }
    const T* operator->() const { return &*result; }
};

struct MmsResult {
    Rational value;
    std::vector<GoodSet> partition;  // k bundles over the instance's good ids
    int k = 0;
};

namespace detail {

// Max-min k-partition of non-negative integer weights, depth-first over goods
// in descending order. Symmetry breaking: identical weights go to
// non-decreasing bundle indices, and among equal-load bundles only the lowest
// eligible index is tried.
template <class I>
struct PartitionKernel {
    int k = 0;
    uint64_t node_limit = kDefaultNodeBudget;
    std::vector<I> w;       // descending
    std::vector<I> suffix;  // suffix[t] = sum of w[t..]

    std::vector<I> load;
    std::vector<int> choice;
    std::vector<int> best_choice;
    I best = I(0);
    bool have_best = false;
    I total = I(0);
    uint64_t nodes = 0;
    bool exceeded = false;
    bool perfect = false;

    void seed_greedy() {
        load.assign(k, I(0));
        choice.assign(w.size(), 0);
        for (size_t t = 0; t < w.size(); ++t) {
            int arg = 0;
            for (int j = 1; j < k; ++j)
                if (load[j] < load[arg]) arg = j;
            load[arg] += w[t];
            choice[t] = arg;
        }
        best = *std::min_element(load.begin(), load.end());
        have_best = true;
        best_choice = choice;
        if (best * k == total) perfect = true;
        load.assign(k, I(0));
    }

    void run() {
        total = I(0);
        for (const auto& x : w) total += x;
        suffix.assign(w.size() + 1, I(0));
        for (int t = static_cast<int>(w.size()) - 1; t >= 0; --t) suffix[t] = suffix[t + 1] + w[t];
        seed_greedy();
        if (!perfect) dfs(0);
    }

    void dfs(int t) {
        if (exceeded || perfect) return;
        if (++nodes > node_limit) {
            exceeded = true;
            return;
        }
        if (t == static_cast<int>(w.size())) {
            I mn = *std::min_element(load.begin(), load.end());
            if (!have_best || mn > best) {
                best = mn;
                have_best = true;
                best_choice = choice;
                if (best * k == total) perfect = true;
            }
            return;
        }
        const I& rem = suffix[t];
        if (have_best) {
            int empties = 0;
            for (const auto& l : load)
                if (l == I(0)) ++empties;
            if (empties > static_cast<int>(w.size()) - t) return;
            // every bundle at or below best must be lifted past it
            I need(0);
            for (const auto& l : load)
                if (l <= best) need += best + 1 - l;
            if (need > rem) return;
        }
        int lo = (t > 0 && w[t] == w[t - 1]) ? choice[t - 1] : 0;
        std::array<int, 64> cand{};
        int cn = 0;
        for (int j = lo; j < k; ++j) {
            bool dup = false;
            for (int c = 0; c < cn && !dup; ++c) dup = (load[cand[c]] == load[j]);
            if (!dup) cand[cn++] = j;
        }
        std::sort(cand.begin(), cand.begin() + cn, [&](int a, int b) {
            if (load[a] != load[b]) return load[a] < load[b];
            return a < b;
        });
        for (int c = 0; c < cn; ++c) {
            int j = cand[c];
            load[j] += w[t];
            choice[t] = j;
            dfs(t + 1);
            load[j] -= w[t];
            if (exceeded || perfect) return;
        }
    }
};

struct AgentScaled {
    Integer denom;                // common denominator of the agent's values
    std::vector<Integer> numers;  // value numerators over denom
};

inline AgentScaled scale_agent_values(const Instance& inst, int agent) {
    AgentScaled out;
    out.denom = 1;
    for (int g = 0; g < inst.m; ++g) {
        Integer den = inst.values[agent][g].get_den();
        Integer gcd;
        mpz_gcd(gcd.get_mpz_t(), out.denom.get_mpz_t(), den.get_mpz_t());
        out.denom = out.denom / gcd * den;
    }
    out.numers.reserve(inst.m);
    for (int g = 0; g < inst.m; ++g) {
        const Rational& v = inst.values[agent][g];
        out.numers.push_back(Integer(v.get_num()) * (out.denom / v.get_den()));
    }
    return out;
}

template <class I>
SearchOutcome<MmsResult> run_mms_kernel(const std::vector<Integer>& numers, const Integer& denom, int k,
                                        uint64_t budget, const std::vector<int>& ids) {
    PartitionKernel<I> kern;
    kern.k = k;
    kern.node_limit = budget;
    kern.w.reserve(ids.size());
    for (int id : ids) {
        if constexpr (std::is_same_v<I, long>)
            kern.w.push_back(numers[id].get_si());
        else
            kern.w.push_back(numers[id]);
    }
    kern.run();

    SearchOutcome<MmsResult> out;
    out.nodes = kern.nodes;
    out.budget_exceeded = kern.exceeded;
    if (kern.exceeded) return out;

    MmsResult res;
    res.k = k;
    res.partition.assign(k, {});
    for (size_t t = 0; t < ids.size(); ++t) res.partition[kern.best_choice[t]].push_back(ids[t]);
    for (auto& b : res.partition) std::sort(b.begin(), b.end());
    Rational value(Integer(kern.best), denom);
    value.canonicalize();
    res.value = value;
    out.result = std::move(res);
    return out;
}

}  // namespace detail

// Exact MMS_i^k(M) with a witness partition. Depth-first assignment of goods
// in descending value with branch-and-bound; recommended m <= 22.
inline SearchOutcome<MmsResult> mms(const Instance& inst, int agent, int k,
                                    uint64_t budget = kDefaultNodeBudget) {
    if (agent < 0 || agent >= inst.n) throw std::out_of_range("agent index out of range");
    if (k < 1) throw std::invalid_argument("bundle count must be positive");
    if (k > 64) throw std::invalid_argument("bundle count beyond supported range (64)");

    SearchOutcome<MmsResult> out;
    if (k == 1) {
        MmsResult res;
        res.k = 1;
        res.partition.assign(1, {});
        for (int g = 0; g < inst.m; ++g) res.partition[0].push_back(g);
        res.value = inst.total(agent);
        out.result = std::move(res);
        return out;
    }

    detail::AgentScaled sc = detail::scale_agent_values(inst, agent);
    std::vector<int> pos;  // positive-value goods, descending
    std::vector<int> zeros;
    for (int g = 0; g < inst.m; ++g) (sc.numers[g] > 0 ? pos : zeros).push_back(g);
    std::stable_sort(pos.begin(), pos.end(), [&](int a, int b) { return sc.numers[a] > sc.numers[b]; });

    if (static_cast<int>(pos.size()) < k) {
        // pigeonhole: some bundle is worthless
        MmsResult res;
        res.k = k;
        res.partition.assign(k, {});
        for (size_t t = 0; t < pos.size(); ++t) res.partition[t].push_back(pos[t]);
        for (size_t t = 0; t < zeros.size(); ++t) res.partition[t % k].push_back(zeros[t]);
        for (auto& b : res.partition) std::sort(b.begin(), b.end());
        res.value = Rational(0);
        out.result = std::move(res);
        return out;
    }

    Integer headroom = 0;
    for (int id : pos) headroom += sc.numers[id];
    headroom *= (k + 2);
    SearchOutcome<MmsResult> kern_out =
        headroom.fits_slong_p()
            ? detail::run_mms_kernel<long>(sc.numers, sc.denom, k, budget, pos)
            : detail::run_mms_kernel<Integer>(sc.numers, sc.denom, k, budget, pos);
    if (!kern_out.ok()) return kern_out;

    for (size_t t = 0; t < zeros.size(); ++t) kern_out.result->partition[0].push_back(zeros[t]);
    for (auto& b : kern_out.result->partition) std::sort(b.begin(), b.end());
    return kern_out;
}

inline std::vector<Rational> mms_values(const Instance& inst, int k, uint64_t budget = kDefaultNodeBudget) {
    std::vector<Rational> vals;
    vals.reserve(inst.n);
    for (int i = 0; i < inst.n; ++i) {
        auto r = mms(inst, i, k, budget);
        if (!r.ok()) throw std::runtime_error("oracle budget exceeded while computing MMS values");
        vals.push_back(r->value);
    }
    return vals;
}

// |{i : v_i(A_i) >= MMS_i^n}| with exact oracle values. Partial allocations
// are counted as-is (missing goods help nobody).
inline int count_mms_satisfied(const Instance& inst, const Allocation& alloc,
                               const std::vector<Rational>& mms_vals) {
    if (alloc.agents() != inst.n || static_cast<int>(mms_vals.size()) != inst.n)
        throw std::invalid_argument("allocation/agent count mismatch");
    int count = 0;
    for (int i = 0; i < inst.n; ++i)
        if (inst.value_of(i, alloc.bundles[i]) >= mms_vals[i]) ++count;
    return count;
}

inline int count_mms_satisfied(const Instance& inst, const Allocation& alloc,
                               uint64_t budget = kDefaultNodeBudget) {
    return count_mms_satisfied(inst, alloc, mms_values(inst, inst.n, budget));
}

// True iff every agent of the given subset gets at least beta * MMS_i^n.
// The subset must have exactly floor(alpha * n) members.
inline bool alpha_beta_check(const Instance& inst, const Allocation& alloc, const Rational& alpha,
                             const Rational& beta, const std::vector<int>& subset,
                             uint64_t budget = kDefaultNodeBudget) {
    Rational want = alpha * inst.n;
    Integer floor_want;
    mpz_fdiv_q(floor_want.get_mpz_t(), want.get_num().get_mpz_t(), want.get_den().get_mpz_t());
    if (Integer(static_cast<long>(subset.size())) != floor_want)
        throw std::invalid_argument("subset size must be floor(alpha*n)");
    for (int i : subset) {
        auto r = mms(inst, i, inst.n, budget);
        if (!r.ok()) throw std::runtime_error("oracle budget exceeded in alpha_beta_check");
        if (inst.value_of(i, alloc.bundles[i]) < beta * r->value) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Optimal-MMS: lambda* = max over n-partitions of min_i v_i(A_i)/MMS_i^n.

struct OptimalMmsResult {
    Rational lambda;
    Allocation allocation;
    std::vector<Rational> mms;  // per-agent MMS_i^n used
};

namespace detail {

struct OptKernel {
    int n = 0;
    uint64_t node_limit = kDefaultNodeBudget;
    std::vector<std::vector<long>> w;  // per agent, per good (agent-local denominators)
    std::vector<long> mmsnum;          // per agent MMS numerator, same denominator
    std::vector<std::vector<long>> rem;

    std::vector<long> load;
    std::vector<int> choice;
    std::vector<int> best_choice;
    long best_num = -1, best_den = 1;
    uint64_t nodes = 0;
    bool exceeded = false;

    // for witness enumeration
    bool enumerate = false;
    long target_num = 0, target_den = 1;
    std::vector<std::vector<int>> found;
    size_t found_cap = 1 << 14;
    bool found_overflow = false;

    int goods() const { return w.empty() ? 0 : static_cast<int>(w.front().size()); }

    static bool ratio_less(long an, long ad, long bn, long bd) {
        return static_cast<__int128>(an) * bd < static_cast<__int128>(bn) * ad;
    }
    static bool ratio_leq(long an, long ad, long bn, long bd) {
        return static_cast<__int128>(an) * bd <= static_cast<__int128>(bn) * ad;
    }

    void run() {
        const int m = goods();
        rem.assign(n, std::vector<long>(m + 1, 0));
        for (int i = 0; i < n; ++i)
            for (int t = m - 1; t >= 0; --t) rem[i][t] = rem[i][t + 1] + w[i][t];
        load.assign(n, 0);
        choice.assign(m, 0);
        if (!enumerate) {
            // greedy seed: each good to the agent with the lowest current ratio
            for (int t = 0; t < m; ++t) {
                int arg = 0;
                for (int i = 1; i < n; ++i)
                    if (ratio_less(load[i], mmsnum[i], load[arg], mmsnum[arg])) arg = i;
                load[arg] += w[arg][t];
                choice[t] = arg;
            }
            int mn = 0;
            for (int i = 1; i < n; ++i)
                if (ratio_less(load[i], mmsnum[i], load[mn], mmsnum[mn])) mn = i;
            best_num = load[mn];
            best_den = mmsnum[mn];
            best_choice = choice;
            load.assign(n, 0);
        }
        dfs(0);
    }

    void dfs(int t) {
        if (exceeded) return;
        if (++nodes > node_limit) {
            exceeded = true;
            return;
        }
        const int m = goods();
        if (t == m) {
            int mn = 0;
            for (int i = 1; i < n; ++i)
                if (ratio_less(load[i], mmsnum[i], load[mn], mmsnum[mn])) mn = i;
            if (enumerate) {
                if (!ratio_less(load[mn], mmsnum[mn], target_num, target_den)) {
                    if (found.size() < found_cap)
                        found.push_back(choice);
                    else
                        found_overflow = true;
                }
            } else if (best_num < 0 || ratio_less(best_num, best_den, load[mn], mmsnum[mn])) {
                best_num = load[mn];
                best_den = mmsnum[mn];
                best_choice = choice;
            }
            return;
        }
        // bound: min_i (load_i + rem_i)/mms_i must beat the incumbent
        for (int i = 0; i < n; ++i) {
            long ub = load[i] + rem[i][t];
            if (enumerate) {
                if (ratio_less(ub, mmsnum[i], target_num, target_den)) return;
            } else if (best_num >= 0 && ratio_leq(ub, mmsnum[i], best_num, best_den)) {
                return;
            }
        }
        std::array<int, 64> order{};
        for (int i = 0; i < n; ++i) order[i] = i;
        std::sort(order.begin(), order.begin() + n, [&](int a, int b) {
            return ratio_less(load[a], mmsnum[a], load[b], mmsnum[b]);
        });
        for (int c = 0; c < n; ++c) {
            int i = order[c];
            load[i] += w[i][t];
            choice[t] = i;
            dfs(t + 1);
            load[i] -= w[i][t];
            if (exceeded) return;
        }
    }
};

inline bool build_opt_kernel(const Instance& inst, const std::vector<Rational>& mms_vals, OptKernel& kern) {
    kern.n = inst.n;
    kern.w.assign(inst.n, {});
    kern.mmsnum.assign(inst.n, 0);
    for (int i = 0; i < inst.n; ++i) {
        AgentScaled sc = scale_agent_values(inst, i);
        Integer den = mms_vals[i].get_den();
        if (sc.denom % den != 0) {
            // fold the MMS denominator into the agent's common denominator
            Integer gcd;
            mpz_gcd(gcd.get_mpz_t(), sc.denom.get_mpz_t(), den.get_mpz_t());
            Integer mult = den / gcd;
            sc.denom *= mult;
            for (auto& x : sc.numers) x *= mult;
        }
        Integer mms_num = Integer(mms_vals[i].get_num()) * (sc.denom / den);
        Integer headroom = 0;
        for (const auto& x : sc.numers) headroom += x;
        if (headroom < mms_num) headroom = mms_num;
        // cross products (load_i * mms_j) must fit __int128
        if (mpz_sizeinbase(headroom.get_mpz_t(), 2) > 62) return false;
        kern.mmsnum[i] = mms_num.get_si();
        kern.w[i].reserve(inst.m);
        for (const auto& x : sc.numers) kern.w[i].push_back(x.get_si());
    }
    return true;
}

}  // namespace detail

// Exact lambda*(I) with a witness allocation. Agents with MMS_i = 0 are
// always satisfied and excluded from the min; if every agent has MMS_i = 0
// the value is reported as 1 with an arbitrary allocation.
inline SearchOutcome<OptimalMmsResult> optimal_mms(const Instance& inst,
                                                   uint64_t budget = kDefaultNodeBudget) {
    SearchOutcome<OptimalMmsResult> out;
    std::vector<Rational> mms_vals;
    uint64_t used = 0;
    for (int i = 0; i < inst.n; ++i) {
        auto r = mms(inst, i, inst.n, budget);
        used += r.nodes;
        if (!r.ok()) {
            out.budget_exceeded = true;
            out.nodes = used;
            return out;
        }
        mms_vals.push_back(r->value);
    }

    std::vector<int> active;  // agents with positive MMS
    for (int i = 0; i < inst.n; ++i)
        if (mms_vals[i] > 0) active.push_back(i);

    if (active.empty()) {
        OptimalMmsResult res;
        res.lambda = Rational(1);
        res.allocation = Allocation(inst.n);
        for (int g = 0; g < inst.m; ++g) res.allocation.add(0, g);
        res.mms = mms_vals;
        out.result = std::move(res);
        out.nodes = used;
        return out;
    }

    Instance sub(static_cast<int>(active.size()), inst.m);
    std::vector<Rational> sub_mms;
    for (size_t i = 0; i < active.size(); ++i) {
        sub.values[i] = inst.values[active[i]];
        sub_mms.push_back(mms_vals[active[i]]);
    }

    detail::OptKernel kern;
    kern.node_limit = budget;
    if (!detail::build_opt_kernel(sub, sub_mms, kern))
        throw std::runtime_error("optimal_mms: values exceed the integer kernel range");
    kern.run();
    out.nodes = used + kern.nodes;
    out.budget_exceeded = kern.exceeded;
    if (kern.exceeded) return out;

    OptimalMmsResult res;
    res.lambda = Rational(Integer(kern.best_num), Integer(kern.best_den));
    res.lambda.canonicalize();
    res.mms = mms_vals;
    res.allocation = Allocation(inst.n);
    for (int t = 0; t < inst.m; ++t) res.allocation.add(active[kern.best_choice[t]], t);
    out.result = std::move(res);
    return out;
}

// All complete allocations whose min ratio reaches `lambda` (witness
// enumeration for counterexample checks). Agents must all have MMS_i > 0.
inline SearchOutcome<std::vector<Allocation>> optimal_mms_witnesses(const Instance& inst,
                                                                    const std::vector<Rational>& mms_vals,
                                                                    const Rational& lambda, uint64_t budget,
                                                                    size_t max_count = 1 << 14) {
    detail::OptKernel kern;
    kern.node_limit = budget;
    kern.enumerate = true;
    kern.found_cap = max_count;
    if (!detail::build_opt_kernel(inst, mms_vals, kern))
        throw std::runtime_error("optimal_mms_witnesses: values exceed the integer kernel range");
    if (!lambda.get_num().fits_slong_p() || !lambda.get_den().fits_slong_p())
        throw std::runtime_error("optimal_mms_witnesses: lambda exceeds the integer kernel range");
    kern.target_num = lambda.get_num().get_si();
    kern.target_den = lambda.get_den().get_si();
    kern.run();

    SearchOutcome<std::vector<Allocation>> out;
    out.nodes = kern.nodes;
    out.budget_exceeded = kern.exceeded || kern.found_overflow;
    if (out.budget_exceeded) return out;
    std::vector<Allocation> allocs;
    allocs.reserve(kern.found.size());
    for (const auto& ch : kern.found) {
        Allocation a(inst.n);
        for (int g = 0; g < inst.m; ++g) a.add(ch[g], g);
        allocs.push_back(std::move(a));
    }
    out.result = std::move(allocs);
    return out;
}

}  // namespace mms
