#pragma once

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mms/experiment.hpp"
#include "mms/fairness.hpp"
#include "mms/io.hpp"
#include "mms/lone_divider.hpp"
#include "mms/oracle.hpp"
#include "mms/pipelines.hpp"
#include "mms/tensors.hpp"
#include "mms/trace_io.hpp"

namespace mms::cli {

// exit statuses: 0 success, 1 usage/"I/O error, 2 guarantee shortfall
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kShortfall = 2;

struct Output {
    bool json = false;
    bool decimal = false;

    std::string num(const Rational& r) const { return decimal ? to_decimal_string(r) : to_string(r); }
};

namespace detail {

inline uint64_t env_budget() {
    const char* env = std::getenv("MMS_BUDGET");
    if (!env) return kDefaultNodeBudget;
    return std::strtoull(env, nullptr, 10);
}

inline std::vector<int> parse_select(const std::string& text) {
    std::vector<int> out;
    std::string cur;
    for (char c : text + ",") {
        if (c == ',') {
            if (!cur.empty()) out.push_back(std::stoi(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    return out;
}

inline std::pair<int, int> parse_range(const std::string& text) {
    auto dots = text.find("..");
    if (dots == std::string::npos) {
        int v = std::stoi(text);
        return {v, v};
    }
    return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
}

inline const char* cert_name(CertKind k) {
    switch (k) {
        case CertKind::Reduction: return "reduction";
        case CertKind::ValueAtLeastOne: return "value>=1";
        case CertKind::PigeonholeZero: return "pigeonhole-zero";
        case CertKind::Claimed: return "claimed";
        default: return "none";
    }
}

inline std::string default_path(const std::string& input, const std::string& suffix) {
    auto dot = input.rfind(".json");
    std::string stem = dot == std::string::npos ? input : input.substr(0, dot);
    return stem + suffix;
}

inline json allocation_report(const Instance& inst, const Allocation& alloc, const Output& out) {
    json agents = json::array();
    for (int i = 0; i < inst.n; ++i)
        agents.push_back(json{{"agent", i},
                              {"bundle", alloc.bundles[i]},
                              {"value", out.num(inst.value_of(i, alloc.bundles[i]))}});
    return agents;
}

}  // namespace detail

inline int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"maximin-share allocation toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    Output out;
    app.add_flag("--json", out.json, "machine-readable JSON on stdout");
    app.add_flag("--decimal", out.decimal, "print values as 6-place decimals instead of fractions");

    uint64_t budget = detail::env_budget();

    // --- oracle ---
    auto* oracle_cmd = app.add_subcommand("oracle", "exact MMS value and witness partition");
    std::string oracle_instance;
    int oracle_agent = 0, oracle_k = 1;
    oracle_cmd->add_option("--instance", oracle_instance)->required();
    oracle_cmd->add_option("--agent", oracle_agent)->required();
    oracle_cmd->add_option("--k", oracle_k)->required();
    oracle_cmd->add_option("--budget", budget);

    // --- normalize ---
    auto* norm_cmd = app.add_subcommand("normalize", "emit normalized instance and trace");
    std::string norm_instance, norm_out_instance, norm_out_trace;
    bool norm_strong = false;
    norm_cmd->add_option("--instance", norm_instance)->required();
    norm_cmd->add_flag("--strong", norm_strong);
    norm_cmd->add_option("--out-instance", norm_out_instance);
    norm_cmd->add_option("--out-trace", norm_out_trace);
    norm_cmd->add_option("--budget", budget);

    // --- lift ---
    auto* lift_cmd = app.add_subcommand("lift", "lift an allocation back through a trace");
    std::string lift_trace, lift_alloc, lift_out;
    lift_cmd->add_option("--trace", lift_trace)->required();
    lift_cmd->add_option("--allocation", lift_alloc)->required();
    lift_cmd->add_option("--out", lift_out);

    // --- check ---
    auto* check_cmd = app.add_subcommand("check", "verify an (alpha, beta)-MMS claim");
    std::string check_instance, check_alloc, check_alpha = "1", check_beta = "1", check_select;
    check_cmd->add_option("--instance", check_instance)->required();
    check_cmd->add_option("--allocation", check_alloc)->required();
    check_cmd->add_option("--alpha", check_alpha);
    check_cmd->add_option("--beta", check_beta);
    check_cmd->add_option("--select", check_select);
    check_cmd->add_option("--budget", budget);

    // --- solve ---
    auto* solve_cmd = app.add_subcommand("solve", "run an allocation pipeline");
    std::string solve_instance, solve_algo, solve_select, solve_out;
    int solve_k = 0;
    bool solve_existence = false;
    solve_cmd->add_option("--instance", solve_instance)->required();
    solve_cmd->add_option("--algo", solve_algo)
        ->required()
        ->check(CLI::IsMember({"two-agent-mms3", "n-minus-one", "half-ef1", "half-beta", "mms-k",
                               "two-thirds", "extended"}));
    solve_cmd->add_option("--k", solve_k);
    solve_cmd->add_option("--select", solve_select);
    solve_cmd->add_flag("--existence", solve_existence);
    solve_cmd->add_option("--out", solve_out);
    solve_cmd->add_option("--budget", budget);

    // --- counterexample ---
    auto* ce_cmd = app.add_subcommand("counterexample", "emit an adversarial instance");
    std::string ce_family, ce_eps, ce_eps_tilde, ce_out;
    int ce_n = 4, ce_d = 2;
    ce_cmd->add_option("--family", ce_family)
        ->required()
        ->check(CLI::IsMember({"tensor", "bag-gap", "tightness", "ef1-gap"}));
    ce_cmd->add_option("--n", ce_n);
    ce_cmd->add_option("--d", ce_d);
    ce_cmd->add_option("--eps", ce_eps);
    ce_cmd->add_option("--eps-tilde", ce_eps_tilde);
    ce_cmd->add_option("--out", ce_out);

    // --- experiment ---
    auto* exp_cmd = app.add_subcommand("experiment", "random-instance grid runner");
    std::string exp_n = "3..12", exp_m = "3..40", exp_certify = "conservative", exp_out = "results.csv";
    int exp_trials = 200, exp_threads = 0;
    uint64_t exp_seed = 1;
    bool exp_deterministic = false;
    exp_cmd->add_option("--n", exp_n);
    exp_cmd->add_option("--m", exp_m);
    exp_cmd->add_option("--trials", exp_trials);
    exp_cmd->add_option("--seed", exp_seed);
    exp_cmd->add_option("--certify", exp_certify)->check(CLI::IsMember({"conservative", "oracle"}));
    exp_cmd->add_option("--out", exp_out);
    exp_cmd->add_option("--threads", exp_threads);
    exp_cmd->add_flag("--deterministic", exp_deterministic, "zero the runtime column for byte-stable output");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            std::cout << app.help() << "\n";
            return kOk;
        }
        std::cerr << e.what() << "\n";
        return kUsage;
    }

    try {
        if (*oracle_cmd) {
            Instance inst = load_instance(oracle_instance);
            auto r = mms(inst, oracle_agent, oracle_k, budget);
            if (!r.ok()) {
                std::cout << (out.json ? json{{"schema", 1}, {"status", "unknown"}, {"nodes", r.nodes}}.dump()
                                       : "unknown (node budget exceeded)")
                          << "\n";
                return kShortfall;
            }
            if (out.json) {
                json parts = json::array();
                for (const auto& b : r->partition) parts.push_back(b);
                std::cout << json{{"schema", 1},
                                  {"value", out.num(r->value)},
                                  {"partition", parts},
                                  {"nodes", r.nodes}}
                                 .dump()
                          << "\n";
            } else {
                std::cout << "MMS_" << oracle_agent << "^" << oracle_k << " = " << out.num(r->value) << "\n";
                for (size_t b = 0; b < r->partition.size(); ++b) {
                    std::cout << "  bundle " << b << ": {";
                    for (size_t i = 0; i < r->partition[b].size(); ++i)
                        std::cout << (i ? "," : "") << r->partition[b][i];
                    std::cout << "} = " << out.num(inst.value_of(oracle_agent, r->partition[b])) << "\n";
                }
            }
            return kOk;
        }

        if (*norm_cmd) {
            Instance inst = load_instance(norm_instance);
            std::string out_inst =
                norm_out_instance.empty() ? detail::default_path(norm_instance, ".normalized.json") : norm_out_instance;
            std::string out_trace =
                norm_out_trace.empty() ? detail::default_path(norm_instance, ".trace.json") : norm_out_trace;
            json report;
            if (norm_strong) {
                StrongNormalizeResult sn = strong_normalize(inst, budget);
                write_json_file(out_inst, instance_to_json(sn.instance));
                write_json_file(out_trace, strong_trace_to_json(inst, sn.trace));
                report = json{{"schema", 1}, {"strong", true}, {"n", sn.instance.n}, {"m", sn.instance.m}};
            } else {
                NormalizeResult nr = normalize(inst);
                write_json_file(out_inst, instance_to_json(nr.instance));
                write_json_file(out_trace, trace_to_json(inst, nr.trace));
                report = json{{"schema", 1},
                              {"strong", false},
                              {"n", nr.instance.n},
                              {"m", nr.instance.m},
                              {"reductions", nr.trace.reductions()}};
            }
            report["instance_file"] = out_inst;
            report["trace_file"] = out_trace;
            if (out.json)
                std::cout << report.dump() << "\n";
            else
                std::cout << "wrote " << out_inst << " and " << out_trace << "\n";
            return kOk;
        }

        if (*lift_cmd) {
            LoadedTrace lt = trace_from_json(load_json_file(lift_trace));
            Allocation alloc = load_allocation(lift_alloc);
            Allocation lifted = lift_loaded(lt, alloc);
            json j = allocation_to_json(lifted);
            if (!lift_out.empty()) write_json_file(lift_out, j);
            std::cout << (out.json ? json{{"schema", 1}, {"allocation", j}}.dump() : j.dump()) << "\n";
            return kOk;
        }

        if (*check_cmd) {
            Instance inst = load_instance(check_instance);
            Allocation alloc = load_allocation(check_alloc);
            alloc.validate(inst.m);
            Rational alpha = parse_rational(check_alpha), beta = parse_rational(check_beta);
            Rational want = alpha * inst.n;
            Integer fl;
            mpz_fdiv_q(fl.get_mpz_t(), want.get_num().get_mpz_t(), want.get_den().get_mpz_t());
            int count = static_cast<int>(fl.get_si());
            std::vector<int> subset =
                check_select.empty() ? default_selection(inst.n, count) : detail::parse_select(check_select);

            bool all_ok = true;
            json verdicts = json::array();
            for (int i : subset) {
                auto r = mms(inst, i, inst.n, budget);
                if (!r.ok()) throw std::runtime_error("oracle budget exceeded");
                Rational v = inst.value_of(i, alloc.bundles[i]);
                bool ok = v >= beta * r->value;
                all_ok &= ok;
                verdicts.push_back(json{{"agent", i},
                                        {"value", out.num(v)},
                                        {"mms", out.num(r->value)},
                                        {"threshold", out.num(beta * r->value)},
                                        {"ok", ok}});
                if (!out.json)
                    std::cout << "agent " << i << ": value " << out.num(v) << (ok ? " >= " : " < ")
                              << out.num(beta * r->value) << (ok ? "  OK" : "  FAIL") << "\n";
            }
            if (out.json)
                std::cout << json{{"schema", 1}, {"ok", all_ok}, {"verdicts", verdicts}}.dump() << "\n";
            else
                std::cout << (all_ok ? "check passed" : "check failed") << "\n";
            return all_ok ? kOk : kShortfall;
        }

        if (*solve_cmd) {
            Instance inst = load_instance(solve_instance);
            PipelineResult res;
            bool shortfall = false;
            std::string note;

            if (solve_algo == "two-agent-mms3") {
                res.allocation = two_agent_mms3(inst);
                for (int i = 0; i < inst.n; ++i) {
                    res.certificates.push_back(
                        {i, CertKind::Claimed, inst.value_of(i, res.allocation.bundles[i])});
                    res.satisfied.push_back(i);
                }
            } else if (solve_algo == "n-minus-one") {
                res = n_minus_one_pipeline(inst);
            } else if (solve_algo == "half-ef1") {
                res = half_agents_pipeline(inst, HalfVariant::Ef1);
            } else if (solve_algo == "half-beta") {
                res = half_agents_pipeline(inst, HalfVariant::BetaHalf);
            } else if (solve_algo == "mms-k") {
                if (solve_k < inst.n) throw std::invalid_argument("mms-k needs --k >= n");
                MmsKPath path = solve_existence ? MmsKPath::TwoThirdsExistence : MmsKPath::Auto;
                MmsKResult kr = mms_k_via_dummies(inst, solve_k, path, budget);
                res.allocation = kr.allocation;
                note = kr.note;
                if (kr.in_proven_range)
                    for (int i = 0; i < inst.n; ++i) {
                        res.certificates.push_back(
                            {i, CertKind::Claimed, inst.value_of(i, res.allocation.bundles[i])});
                        res.satisfied.push_back(i);
                    }
            } else if (solve_algo == "two-thirds") {
                std::vector<int> sel = solve_select.empty()
                                           ? default_selection(inst.n, (2 * inst.n) / 3)
                                           : detail::parse_select(solve_select);
                res = solve_existence ? two_thirds_existence_engine(inst, sel, budget)
                                      : two_thirds_poly(inst, sel);
            } else {  // extended
                res = extended_experiment_algorithm(inst);
            }
            shortfall = res.shortfall;

            if (!solve_out.empty()) write_json_file(solve_out, allocation_to_json(res.allocation));
            json certs = json::array();
            for (const auto& c : res.certificates)
                certs.push_back(json{{"agent", c.agent}, {"kind", detail::cert_name(c.kind)}, {"value", out.num(c.value)}});
            if (out.json) {
                std::cout << json{{"schema", 1},
                                  {"algo", solve_algo},
                                  {"allocation", allocation_to_json(res.allocation)},
                                  {"agents", detail::allocation_report(inst, res.allocation, out)},
                                  {"satisfied", res.satisfied},
                                  {"shortfall", shortfall},
                                  {"note", note},
                                  {"certificates", certs}}
                                 .dump()
                          << "\n";
            } else {
                for (int i = 0; i < inst.n; ++i) {
                    std::cout << "agent " << i << ": {";
                    for (size_t g = 0; g < res.allocation.bundles[i].size(); ++g)
                        std::cout << (g ? "," : "") << res.allocation.bundles[i][g];
                    std::cout << "} value " << out.num(inst.value_of(i, res.allocation.bundles[i])) << "\n";
                }
                std::cout << "satisfied " << res.satisfied.size() << "/" << inst.n
                          << (shortfall ? " (shortfall)" : "") << "\n";
                if (!note.empty()) std::cout << "note: " << note << "\n";
            }
            return shortfall ? kShortfall : kOk;
        }

        if (*ce_cmd) {
            Instance inst;
            json extra;
            if (ce_family == "tensor") {
                Rational eps = ce_eps.empty() ? Rational(0) : parse_rational(ce_eps);
                Rational et = ce_eps_tilde.empty() ? Rational(0) : parse_rational(ce_eps_tilde);
                CounterexampleInstance ce = optimal_mms_counterexample(ce_n, ce_d, eps, et);
                inst = ce.instance;
                extra["groups"] = ce.group_of_agent;
                extra["eps"] = to_string(ce.eps);
                extra["eps_tilde"] = to_string(ce.eps_tilde);
            } else if (ce_family == "bag-gap") {
                inst = bag_filling_gap_instance();
            } else if (ce_family == "tightness") {
                Rational eps = ce_eps.empty() ? Rational(1, 100) : parse_rational(ce_eps);
                Rational et = ce_eps_tilde.empty() ? Rational(1, 1000000) : parse_rational(ce_eps_tilde);
                inst = tightness_instance(ce_n < 9 ? 9 : ce_n, eps, et);
            } else {
                inst = ef1_not_half_mms_instance();
            }
            json j = instance_to_json(inst);
            if (!ce_out.empty()) write_json_file(ce_out, j);
            if (out.json) {
                json rep{{"schema", 1}, {"family", ce_family}, {"n", inst.n}, {"m", inst.m}};
                for (auto& [k, v] : extra.items()) rep[k] = v;
                if (!ce_out.empty()) rep["file"] = ce_out;
                std::cout << rep.dump() << "\n";
            } else if (ce_out.empty()) {
                std::cout << j.dump(2) << "\n";
            } else {
                std::cout << "wrote " << ce_out << "\n";
            }
            return kOk;
        }

        if (*exp_cmd) {
            ExperimentConfig cfg;
            std::tie(cfg.n_lo, cfg.n_hi) = detail::parse_range(exp_n);
            std::tie(cfg.m_lo, cfg.m_hi) = detail::parse_range(exp_m);
            cfg.trials = exp_trials;
            cfg.master_seed = exp_seed;
            cfg.certify = exp_certify == "oracle" ? CertifyMode::Oracle : CertifyMode::Conservative;
            cfg.threads = exp_threads;
            cfg.oracle_budget = budget;
            auto records = run_experiment(cfg);
            export_csv(records, exp_out, !exp_deterministic);
            long total_agents = 0, total_sat = 0;
            for (const auto& r : records) {
                total_agents += r.n;
                total_sat += r.satisfied;
            }
            double frac = total_agents ? static_cast<double>(total_sat) / total_agents : 0.0;
            if (out.json)
                std::cout << json{{"schema", 1},
                                  {"records", records.size()},
                                  {"mean_certified_fraction", frac},
                                  {"file", exp_out}}
                                 .dump()
                          << "\n";
            else
                std::cout << records.size() << " records -> " << exp_out << " (mean certified fraction "
                          << frac << ")\n";
            return kOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}

inline int dispatch_argv(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return dispatch(args);
}

}  // namespace mms::cli
