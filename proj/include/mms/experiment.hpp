#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mms/lone_divider.hpp"
#include "mms/oracle.hpp"
#include "mms/ordering.hpp"

namespace mms {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline uint64_t trial_seed(uint64_t master, int n, int m, int trial) {
    uint64_t s = splitmix64(master);
    s = splitmix64(s ^ static_cast<uint64_t>(n));
    s = splitmix64(s ^ static_cast<uint64_t>(m));
    s = splitmix64(s ^ static_cast<uint64_t>(trial));
    return s;
}

// Entries i.i.d. uniform on the 1/10^6 grid, then ordered and scaled so
// v_i(M) = n. Deterministic under the seed (no distribution objects, whose
// outputs are implementation-defined).
inline Instance gen_uniform_instance(int n, int m, uint64_t seed) {
    if (n < 2 || m < n) throw std::invalid_argument("gen_uniform_instance needs m >= n >= 2");
    std::mt19937_64 eng(seed);
    constexpr long kGrid = 1'000'000;
    Instance inst(n, m);
    for (int i = 0; i < n; ++i) {
        bool all_zero = true;
        while (all_zero) {
            for (int g = 0; g < m; ++g) {
                long k = static_cast<long>(eng() % static_cast<uint64_t>(kGrid + 1));
                inst.values[i][g] = rat(k, kGrid);
                if (k != 0) all_zero = false;
            }
        }
    }
    Instance ordered = order_instance(inst).instance;
    return scale(ordered, Rational(n));
}

enum class CertifyMode { Conservative, Oracle };

struct ExperimentRecord {
    int n = 0, m = 0, trial = 0;
    uint64_t seed = 0;
    int satisfied = 0;       // conservative certified count
    int cert_reduction = 0;  // served by a valid reduction
    int cert_value = 0;      // bundle worth >= 1 post-normalization (or pigeonhole-zero)
    int cert_oracle = -1;    // exact satisfied count when computed, else -1
    bool oracle_budget_exceeded = false;
    int64_t runtime_ms = 0;
};

struct ExperimentConfig {
    int n_lo = 3, n_hi = 12;
    int m_lo = 3, m_hi = 40;
    int trials = 200;
    uint64_t master_seed = 1;
    CertifyMode certify = CertifyMode::Conservative;
    uint64_t oracle_budget = kDefaultNodeBudget;
    int threads = 0;  // 0 = hardware concurrency
};

inline ExperimentRecord run_trial(int n, int m, int trial, const ExperimentConfig& cfg) {
    ExperimentRecord rec;
    rec.n = n;
    rec.m = m;
    rec.trial = trial;
    rec.seed = trial_seed(cfg.master_seed, n, m, trial);

    auto t0 = std::chrono::steady_clock::now();
    Instance inst = gen_uniform_instance(n, m, rec.seed);
    PipelineResult res = extended_experiment_algorithm(inst);
    for (const auto& c : res.certificates) {
        if (c.kind == CertKind::Reduction)
            ++rec.cert_reduction;
        else if (c.kind == CertKind::ValueAtLeastOne || c.kind == CertKind::PigeonholeZero)
            ++rec.cert_value;
    }
    rec.satisfied = rec.cert_reduction + rec.cert_value;

    if (cfg.certify == CertifyMode::Oracle) {
        try {
            rec.cert_oracle = count_mms_satisfied(inst, res.allocation, cfg.oracle_budget);
        } catch (const std::runtime_error&) {
            rec.oracle_budget_exceeded = true;  // flagged, run continues
        }
    }
    auto t1 = std::chrono::steady_clock::now();
    rec.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    return rec;
}

// Trials execute concurrently over immutable instances; records land in a
// preallocated slot per (n, m, trial), so output order never depends on
// scheduling.
inline std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& cfg) {
    if (cfg.certify == CertifyMode::Oracle && (cfg.n_hi > 6 || cfg.m_hi > 16))
        throw std::invalid_argument("oracle certification is restricted to n <= 6, m <= 16");

    struct Cell {
        int n, m, trial;
    };
    std::vector<Cell> cells;
    for (int n = cfg.n_lo; n <= cfg.n_hi; ++n)
        for (int m = std::max(n, cfg.m_lo); m <= cfg.m_hi; ++m)
            for (int t = 0; t < cfg.trials; ++t) cells.push_back({n, m, t});

    std::vector<ExperimentRecord> records(cells.size());
    int workers = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;

    std::atomic<size_t> next{0};
    auto work = [&]() {
        while (true) {
            size_t idx = next.fetch_add(1);
            if (idx >= cells.size()) return;
            const Cell& c = cells[idx];
            records[idx] = run_trial(c.n, c.m, c.trial, cfg);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    return records;
}

// Stable schema; runtime_ms can be suppressed for byte-reproducible output.
inline std::string records_to_csv(const std::vector<ExperimentRecord>& records, bool include_runtime = true) {
    std::ostringstream out;
    out << "n,m,trial,seed,satisfied,total,cert_reduction,cert_value,cert_oracle,runtime_ms\n";
    for (const auto& r : records) {
        out << r.n << ',' << r.m << ',' << r.trial << ',' << r.seed << ',' << r.satisfied << ',' << r.n << ','
            << r.cert_reduction << ',' << r.cert_value << ',' << r.cert_oracle << ','
            << (include_runtime ? r.runtime_ms : 0) << '\n';
    }
    return out.str();
}

inline void export_csv(const std::vector<ExperimentRecord>& records, const std::string& path,
                       bool include_runtime = true) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << records_to_csv(records, include_runtime);
}

struct CsvRow {
    int n, m, trial;
    uint64_t seed;
    int satisfied, total, cert_reduction, cert_value, cert_oracle;
    int64_t runtime_ms;
};

inline std::vector<CsvRow> parse_csv(const std::string& text) {
    std::vector<CsvRow> rows;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty CSV");
    if (line != "n,m,trial,seed,satisfied,total,cert_reduction,cert_value,cert_oracle,runtime_ms")
        throw std::invalid_argument("unexpected CSV header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        CsvRow r{};
        std::istringstream ls(line);
        char comma;
        ls >> r.n >> comma >> r.m >> comma >> r.trial >> comma >> r.seed >> comma >> r.satisfied >> comma >>
            r.total >> comma >> r.cert_reduction >> comma >> r.cert_value >> comma >> r.cert_oracle >> comma >>
            r.runtime_ms;
        if (!ls) throw std::invalid_argument("bad CSV row: " + line);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace mms
