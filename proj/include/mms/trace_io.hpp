#pragma once

#include <stdexcept>
#include <string>

#include "mms/io.hpp"
#include "mms/reduce.hpp"

namespace mms {

// Trace files embed the original instance so `lift` needs no extra input.

inline json order_map_to_json(const OrderMap& map) {
    json perms = json::array();
    for (const auto& p : map.perm) perms.push_back(p);
    return perms;
}

inline OrderMap order_map_from_json(const json& j) {
    OrderMap map;
    for (const auto& row : j) map.perm.push_back(row.get<std::vector<int>>());
    return map;
}

inline json trace_to_json(const Instance& original, const NormalizationTrace& trace) {
    json steps = json::array();
    for (const auto& s : trace.steps) {
        switch (s.kind) {
            case StepKind::Order:
                steps.push_back(json{{"kind", "order"}, {"perm", order_map_to_json(s.order_map)}});
                break;
            case StepKind::Scale: {
                json f = json::array();
                for (const auto& x : s.factors) f.push_back(to_string(x));
                steps.push_back(json{{"kind", "scale"}, {"factors", std::move(f)}});
                break;
            }
            case StepKind::Reduce:
                steps.push_back(json{{"kind", "reduce"},
                                     {"agent_current", s.agent_current},
                                     {"agent_original", s.agent_original},
                                     {"bundle", s.bundle}});
                break;
        }
    }
    return json{{"type", "normalization"},
                {"original_instance", instance_to_json(original)},
                {"surviving_agents", trace.surviving_agents},
                {"steps", std::move(steps)}};
}

inline json strong_trace_to_json(const Instance& original, const StrongTrace& trace) {
    json f = json::array();
    for (const auto& x : trace.factors) f.push_back(to_string(x));
    return json{{"type", "strong"},
                {"original_instance", instance_to_json(original)},
                {"factors", std::move(f)},
                {"perm", order_map_to_json(trace.order_map)}};
}

struct LoadedTrace {
    Instance original;
    bool strong = false;
    NormalizationTrace trace;
    StrongTrace strong_trace;
};

inline LoadedTrace trace_from_json(const json& j) {
    LoadedTrace out;
    out.original = instance_from_json(j.at("original_instance"));
    std::string type = j.at("type").get<std::string>();
    if (type == "strong") {
        out.strong = true;
        for (const auto& f : j.at("factors")) out.strong_trace.factors.push_back(parse_rational(f.get<std::string>()));
        out.strong_trace.order_map = order_map_from_json(j.at("perm"));
        return out;
    }
    if (type != "normalization") throw std::invalid_argument("unknown trace type: " + type);
    out.trace.original_n = out.original.n;
    out.trace.original_m = out.original.m;
    out.trace.surviving_agents = j.at("surviving_agents").get<std::vector<int>>();
    for (const auto& js : j.at("steps")) {
        TraceStep s;
        std::string kind = js.at("kind").get<std::string>();
        if (kind == "order") {
            s.kind = StepKind::Order;
            s.order_map = order_map_from_json(js.at("perm"));
        } else if (kind == "scale") {
            s.kind = StepKind::Scale;
            for (const auto& f : js.at("factors")) s.factors.push_back(parse_rational(f.get<std::string>()));
        } else if (kind == "reduce") {
            s.kind = StepKind::Reduce;
            s.agent_current = js.at("agent_current").get<int>();
            s.agent_original = js.at("agent_original").get<int>();
            s.bundle = js.at("bundle").get<GoodSet>();
        } else {
            throw std::invalid_argument("unknown trace step kind: " + kind);
        }
        out.trace.steps.push_back(std::move(s));
    }
    return out;
}

inline Allocation lift_loaded(const LoadedTrace& lt, const Allocation& alloc) {
    if (lt.strong) return lift_strong_allocation(lt.original, lt.strong_trace, alloc);
    return lift_allocation(lt.original, lt.trace, alloc);
}

}  // namespace mms
