#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <vector>

#include "mms/instance.hpp"
#include "mms/rational.hpp"

namespace mms {

// Order-d tensor with n entries per axis, stored sparsely. Indices are
// 1-based d-tuples; unset entries are zero.
struct SparseTensor {
    int order = 0;
    int dim = 0;
    std::map<std::vector<int>, Rational> entries;

    SparseTensor() = default;
    SparseTensor(int d, int n) : order(d), dim(n) {}

    void set(const std::vector<int>& idx, const Rational& v) {
        check(idx);
        if (v == 0)
            entries.erase(idx);
        else
            entries[idx] = v;
    }

    void add(const std::vector<int>& idx, const Rational& v) {
        check(idx);
        auto it = entries.find(idx);
        Rational next = (it == entries.end() ? Rational(0) : it->second) + v;
        if (next == 0) {
            if (it != entries.end()) entries.erase(it);
        } else {
            entries[idx] = next;
        }
    }

    Rational at(const std::vector<int>& idx) const {
        auto it = entries.find(idx);
        return it == entries.end() ? Rational(0) : it->second;
    }

    SparseTensor plus(const SparseTensor& other) const {
        if (order != other.order || dim != other.dim) throw std::invalid_argument("tensor shape mismatch");
        SparseTensor out = *this;
        for (const auto& [idx, v] : other.entries) out.add(idx, v);
        return out;
    }

    // sum over the slice x_axis = index (axis 1-based)
    Rational slice_sum(int axis, int index) const {
        Rational s(0);
        for (const auto& [idx, v] : entries)
            if (idx[axis - 1] == index) s += v;
        return s;
    }

    Rational total() const {
        Rational s(0);
        for (const auto& [idx, v] : entries) s += v;
        return s;
    }

    bool nonnegative() const {
        for (const auto& [idx, v] : entries)
            if (v < 0) return false;
        return true;
    }

  private:
    void check(const std::vector<int>& idx) const {
        if (static_cast<int>(idx.size()) != order) throw std::invalid_argument("tensor index arity mismatch");
        for (int x : idx)
            if (x < 1 || x > dim) throw std::invalid_argument("tensor index out of range");
    }
};

namespace detail {

inline std::vector<int> diag_index(int order, int i) { return std::vector<int>(order, i); }

// all coordinates i except x_axis = k  (1-based axis)
inline std::vector<int> off_index(int order, int i, int axis, int k) {
    std::vector<int> idx(order, i);
    idx[axis - 1] = k;
    return idx;
}

}  // namespace detail

// Diagonal (d^{n-i}-1)/d^{n-i}, off-diagonal mass toward index n, and the
// balancing corner entry; every slice sums to exactly 1.
inline SparseTensor tensor_S(int n, int d) {
    if (n < 4 || d < 2) throw std::invalid_argument("tensor_S needs n >= 4 and d >= 2");
    SparseTensor S(d, n);
    Rational corner(1);
    for (int i = 1; i < n; ++i) {
        Rational pw = rat_pow(Rational(d), n - i);
        S.set(detail::diag_index(d, i), (pw - 1) / pw);
        Rational off = Rational(1, d - 1) / pw;
        for (int j = 1; j <= d; ++j) S.set(detail::off_index(d, i, j, n), off);
        corner -= off;
    }
    S.set(detail::diag_index(d, n), corner);
    return S;
}

// The epsilon-perturbation tensor; every slice sums to exactly 0. Negative
// entries only occur where S is positive.
inline SparseTensor tensor_T(int n, int d, const Rational& eps) {
    if (n < 4 || d < 2) throw std::invalid_argument("tensor_T needs n >= 4 and d >= 2");
    if (eps <= 0) throw std::invalid_argument("tensor_T needs eps > 0");

    auto r = [&](int i, int j) { return rat_pow(eps, static_cast<long>(d) * (n - 1) - static_cast<long>(d) * i - j + 1); };

    // u_{1j} = r_{1j}; u_{ij} = 1/(d-1) sum_{k!=j}(-u_{i-1,k}) + (d-2)/(d-1) u_{i-1,j} + r_{ij}
    std::vector<std::vector<Rational>> u(n, std::vector<Rational>(d + 1, Rational(0)));
    for (int j = 1; j <= d; ++j) u[1][j] = r(1, j);
    for (int i = 2; i <= n - 1; ++i) {
        for (int j = 1; j <= d; ++j) {
            Rational acc(0);
            for (int k = 1; k <= d; ++k)
                if (k != j) acc -= u[i - 1][k];
            u[i][j] = acc / (d - 1) + Rational(d - 2, d - 1) * u[i - 1][j] + r(i, j);
        }
    }

    SparseTensor T(d, n);
    for (int i = 1; i <= n - 2; ++i)
        for (int j = 1; j <= d; ++j) {
            T.set(detail::off_index(d, i, j, n), -r(i, j));
            T.set(detail::off_index(d, i, j, i + 1), u[i][j]);
        }
    std::vector<Rational> x(d + 1);
    for (int j = 1; j <= d; ++j) {
        x[j] = u[n - 1][j] - r(n - 1, j);
        T.set(detail::off_index(d, n - 1, j, n), x[j]);
    }
    Rational z1(0);
    for (int i = 1; i <= n - 2; ++i) z1 += r(i, 1);
    z1 -= x[1];
    T.set(detail::diag_index(d, n), z1);
    return T;
}

// Group-j perturbation: -eps~ along the axis-j face, balanced at the corner.
inline SparseTensor perturbation_P(int n, int d, int group, const Rational& eps_tilde) {
    if (group < 1 || group > d) throw std::invalid_argument("perturbation group out of range");
    SparseTensor P(d, n);
    for (int i = 1; i < n; ++i) P.set(detail::off_index(d, i, group, n), -eps_tilde);
    P.set(detail::diag_index(d, n), Rational(n - 1) * eps_tilde);
    return P;
}

inline Rational default_tensor_eps(int n, int d) {
    return Rational(1) / (Rational(4) * rat_pow(Rational(d), static_cast<long>(d) * (n - 1)));
}

inline Rational default_tensor_eps_tilde(int n, int d, const Rational& eps) {
    return rat_pow(eps, static_cast<long>(d) * (n - 1) + 1);
}

// ---------------------------------------------------------------------------
// Equal-sum partitions of the non-zero entries (constrained backtracking).

using EntryList = std::vector<std::pair<std::vector<int>, Rational>>;
using Partition = std::vector<std::vector<int>>;  // entry indices per part

namespace detail {

struct EquiSearch {
    int parts = 0;
    Rational target;
    std::vector<Rational> values;  // descending
    std::vector<Rational> sums;
    std::vector<int> choice;
    std::vector<Partition>* out = nullptr;
    uint64_t nodes = 0, node_limit = 0;
    bool exceeded = false;

    void dfs(size_t t) {
        if (exceeded) return;
        if (++nodes > node_limit) {
            exceeded = true;
            return;
        }
        if (t == values.size()) {
            Partition p(parts);
            for (size_t e = 0; e < values.size(); ++e) p[choice[e]].push_back(static_cast<int>(e));
            out->push_back(std::move(p));
            return;
        }
        bool tried_empty = false;
        for (int j = 0; j < parts; ++j) {
            if (sums[j] == 0) {
                if (tried_empty) continue;  // empty parts are interchangeable
                tried_empty = true;
            }
            if (sums[j] + values[t] > target) continue;
            sums[j] += values[t];
            choice[t] = j;
            dfs(t + 1);
            sums[j] -= values[t];
            if (exceeded) return;
        }
    }
};

}  // namespace detail

// All partitions of the non-zero entries into `parts` equal-sum sets. Entries
// must be non-negative. Partitions are reported over the tensor's entry list
// in its canonical (lexicographic) order.
struct EquiPartitionResult {
    EntryList entries;
    std::vector<Partition> partitions;
    bool budget_exceeded = false;
};

inline EquiPartitionResult equi_partition_search(const SparseTensor& tensor, int parts,
                                                 uint64_t budget = 200'000'000) {
    if (parts < 1) throw std::invalid_argument("parts must be positive");
    if (!tensor.nonnegative()) throw std::invalid_argument("equi_partition_search needs non-negative entries");

    EquiPartitionResult res;
    for (const auto& [idx, v] : tensor.entries) res.entries.emplace_back(idx, v);

    Rational total = tensor.total();
    detail::EquiSearch search;
    search.parts = parts;
    search.target = total / parts;
    search.node_limit = budget;
    search.values.reserve(res.entries.size());

    // search over entries in descending value; map back afterwards
    std::vector<int> order(res.entries.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return res.entries[a].second > res.entries[b].second; });
    for (int id : order) search.values.push_back(res.entries[id].second);

    search.sums.assign(parts, Rational(0));
    search.choice.assign(res.entries.size(), 0);
    std::vector<Partition> raw;
    search.out = &raw;
    if (!res.entries.empty())
        search.dfs(0);
    else if (total == 0)
        raw.push_back(Partition(parts));
    res.budget_exceeded = search.exceeded;

    for (auto& p : raw) {
        Partition mapped(parts);
        for (int j = 0; j < parts; ++j)
            for (int pos : p[j]) mapped[j].push_back(order[pos]);
        for (auto& part : mapped) std::sort(part.begin(), part.end());
        std::sort(mapped.begin(), mapped.end());
        res.partitions.push_back(std::move(mapped));
    }
    std::sort(res.partitions.begin(), res.partitions.end());
    res.partitions.erase(std::unique(res.partitions.begin(), res.partitions.end()), res.partitions.end());
    return res;
}

// ---------------------------------------------------------------------------
// The generated counterexample instance.

struct CounterexampleInstance {
    Instance instance;
    std::vector<int> group_of_agent;               // 1-based group ids
    std::vector<std::vector<int>> good_to_index;   // tensor index per good
    Rational eps;
    Rational eps_tilde;
};

// One good per non-zero entry of S+T; agents in d groups value goods per
// S+T+P^j. Every agent's MMS is 1 with her group's aligned slices as witness.
inline CounterexampleInstance optimal_mms_counterexample(int n, int d, const Rational& eps_in = Rational(0),
                                                         const Rational& eps_tilde_in = Rational(0),
                                                         bool validate_uniqueness = true) {
    if (n < 4 || d < 2 || d > n / 2) throw std::invalid_argument("need n >= 4 and 2 <= d <= n/2");
    Rational eps = eps_in > 0 ? eps_in : default_tensor_eps(n, d);
    Rational eps_tilde = eps_tilde_in > 0 ? eps_tilde_in : default_tensor_eps_tilde(n, d, eps);

    SparseTensor base = tensor_S(n, d).plus(tensor_T(n, d, eps));
    for (const auto& [idx, v] : base.entries)
        if (v <= 0) throw std::invalid_argument("eps too large: S+T loses an entry");

    std::vector<SparseTensor> per_group;
    for (int j = 1; j <= d; ++j) {
        SparseTensor pg = base.plus(perturbation_P(n, d, j, eps_tilde));
        if (!pg.nonnegative()) throw std::invalid_argument("eps_tilde too large: negative valuation");
        per_group.push_back(std::move(pg));
    }

    if (validate_uniqueness && base.entries.size() <= 16) {
        auto st = equi_partition_search(base, n);
        if (st.budget_exceeded || static_cast<int>(st.partitions.size()) != d)
            throw std::invalid_argument("eps fails the aligned-slice uniqueness check");
        for (int j = 0; j < d; ++j) {
            auto pj = equi_partition_search(per_group[j], n);
            if (pj.budget_exceeded || pj.partitions.size() != 1)
                throw std::invalid_argument("eps_tilde fails the unique-partition check");
        }
    }

    CounterexampleInstance out;
    out.eps = eps;
    out.eps_tilde = eps_tilde;
    for (const auto& [idx, v] : base.entries) out.good_to_index.push_back(idx);

    // first (n mod d) groups take ceil(n/d) agents, the rest floor(n/d)
    out.group_of_agent.assign(n, 0);
    int agent = 0;
    for (int j = 1; j <= d; ++j) {
        int size = n / d + (j <= n % d ? 1 : 0);
        for (int c = 0; c < size; ++c) out.group_of_agent[agent++] = j;
    }

    out.instance = Instance(n, static_cast<int>(out.good_to_index.size()));
    for (int i = 0; i < n; ++i) {
        const SparseTensor& vals = per_group[out.group_of_agent[i] - 1];
        for (int g = 0; g < out.instance.m; ++g) out.instance.values[i][g] = vals.at(out.good_to_index[g]);
    }
    return out;
}

// Is the bundle exactly an aligned slice (axis, index) of the good set?
inline bool allocation_is_aligned_slices(const CounterexampleInstance& ce, const Allocation& alloc, int* axis_out = nullptr) {
    const int d = static_cast<int>(ce.good_to_index.empty() ? 0 : ce.good_to_index[0].size());
    for (int axis = 1; axis <= d; ++axis) {
        bool ok = true;
        for (const auto& bundle : alloc.bundles) {
            if (bundle.empty()) {
                ok = false;
                break;
            }
            int index = ce.good_to_index[bundle.front()][axis - 1];
            // bundle must equal the full slice x_axis = index
            size_t slice_size = 0;
            for (const auto& idx : ce.good_to_index)
                if (idx[axis - 1] == index) ++slice_size;
            if (bundle.size() != slice_size) {
                ok = false;
                break;
            }
            for (int g : bundle)
                if (ce.good_to_index[g][axis - 1] != index) {
                    ok = false;
                    break;
                }
            if (!ok) break;
        }
        if (ok) {
            if (axis_out) *axis_out = axis;
            return true;
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Fixed instances from the worked examples.

// n = 9 identical agents; plain bag-filling runs out of low-value goods after
// five bundles even though MMS = 1.
inline Instance bag_filling_gap_instance() {
    std::vector<Rational> row;
    auto push = [&](const char* v, int times) {
        for (int i = 0; i < times; ++i) row.push_back(parse_rational(v));
    };
    push("0.99", 5);
    push("0.95", 1);
    push("0.55", 3);
    push("0.45", 3);
    push("0.05", 1);
    push("0.01", 5);
    std::vector<std::vector<Rational>> rows(9, row);
    return Instance::from_rows(std::move(rows));
}

// n >= 9 identical agents with MMS = 1 - eps; the polynomial algorithm hands
// out only floor(n/2)+1 bundles.
inline Instance tightness_instance(int n, const Rational& eps = Rational(1, 100),
                                   const Rational& eps_tilde = Rational(1, 1000000)) {
    if (n < 9) throw std::invalid_argument("tightness instance needs n >= 9");
    if (eps <= 0 || eps_tilde <= 0 || Rational(n + 2) * eps >= Rational(1, 2) ||
        Rational(n) * eps_tilde >= eps)
        throw std::invalid_argument("tightness instance needs (n+2)eps < 1/2 and n*eps_tilde < eps");
    std::vector<Rational> row;
    for (int i = 0; i < n - 1; ++i) row.push_back(Rational(1) - eps - eps_tilde);
    row.push_back(Rational(1, 2) - eps);
    row.push_back(Rational(1, 2) - eps);
    row.push_back(Rational(n + 1) * eps);
    for (int i = 0; i < n - 1; ++i) row.push_back(eps_tilde);
    std::vector<std::vector<Rational>> rows(n, row);
    return Instance::from_rows(std::move(rows));
}

// 3 identical agents, 7 goods; EF1 does not imply half-MMS.
inline Instance ef1_not_half_mms_instance() {
    std::vector<Rational> row = {parse_rational("0.99"), parse_rational("0.99"), parse_rational("0.4"),
                                 parse_rational("0.4"),  parse_rational("0.2"),  parse_rational("0.01"),
                                 parse_rational("0.01")};
    std::vector<std::vector<Rational>> rows(3, row);
    return Instance::from_rows(std::move(rows));
}

}  // namespace mms
