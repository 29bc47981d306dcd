#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mms/instance.hpp"

namespace mms {

using json = nlohmann::json;

namespace detail {

// DOM builder that keeps float literals as their raw text so "0.99" can be
// parsed as 99/100 instead of the nearest double.
class ExactNumberSax : public nlohmann::json_sax<json> {
  public:
    json root;

    bool null() override { return emplace(nullptr); }
    bool boolean(bool v) override { return emplace(v); }
    bool number_integer(number_integer_t v) override { return emplace(v); }
    bool number_unsigned(number_unsigned_t v) override { return emplace(v); }
    bool number_float(number_float_t, const string_t& raw) override { return emplace(raw); }
    bool string(string_t& v) override { return emplace(v); }
    bool binary(binary_t&) override { throw std::invalid_argument("binary JSON unsupported"); }
    bool start_object(std::size_t) override {
        stack_.push_back(json::object());
        return true;
    }
    bool key(string_t& k) override {
        keys_.push_back(k);
        return true;
    }
    bool end_object() override { return pop(); }
    bool start_array(std::size_t) override {
        stack_.push_back(json::array());
        return true;
    }
    bool end_array() override { return pop(); }
    bool parse_error(std::size_t pos, const std::string&, const nlohmann::detail::exception& ex) override {
        throw std::invalid_argument("JSON parse error at byte " + std::to_string(pos) + ": " + ex.what());
    }

  private:
    std::vector<json> stack_;
    std::vector<std::string> keys_;

    bool emplace(json v) {
        if (stack_.empty()) {
            root = std::move(v);
        } else if (stack_.back().is_array()) {
            stack_.back().push_back(std::move(v));
        } else {
            stack_.back()[keys_.back()] = std::move(v);
            keys_.pop_back();
        }
        return true;
    }

    bool pop() {
        json v = std::move(stack_.back());
        stack_.pop_back();
        return emplace(std::move(v));
    }
};

}  // namespace detail

inline json parse_json_exact(const std::string& text) {
    detail::ExactNumberSax sax;
    json::sax_parse(text, &sax);
    return std::move(sax.root);
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_json_exact(buf.str());
}

inline Rational rational_from_json(const json& v) {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational(static_cast<long>(v.get<int64_t>()));
    if (v.is_number_unsigned()) return Rational(static_cast<unsigned long>(v.get<uint64_t>()));
    throw std::invalid_argument("expected a number or fraction string");
}

// Integers serialize as JSON numbers, everything else as "p/q" strings.
inline json rational_to_json(const Rational& r) {
    if (r.get_den() == 1 && r.get_num().fits_slong_p()) return json(r.get_num().get_si());
    return json(to_string(r));
}

// Instance file format:
//   {"n": int, "m": int, "valuations": [[value ...] ...]}
// where value is a number or a "p/q" string. Fraction strings round-trip
// bit-exactly.
inline Instance instance_from_json(const json& j) {
    if (!j.is_object() || !j.contains("n") || !j.contains("m") || !j.contains("valuations"))
        throw std::invalid_argument("instance JSON needs n, m, valuations");
    int n = j.at("n").get<int>();
    int m = j.at("m").get<int>();
    const json& rows = j.at("valuations");
    if (!rows.is_array() || static_cast<int>(rows.size()) != n)
        throw std::invalid_argument("valuations must have n rows");
    std::vector<std::vector<Rational>> vals(n);
    for (int i = 0; i < n; ++i) {
        const json& row = rows[i];
        if (!row.is_array() || static_cast<int>(row.size()) != m)
            throw std::invalid_argument("valuation row has wrong length");
        vals[i].reserve(m);
        for (const auto& cell : row) vals[i].push_back(rational_from_json(cell));
    }
    return Instance::from_rows(std::move(vals));
}

inline json instance_to_json(const Instance& inst) {
    json rows = json::array();
    for (int i = 0; i < inst.n; ++i) {
        json row = json::array();
        for (int g = 0; g < inst.m; ++g) row.push_back(rational_to_json(inst.values[i][g]));
        rows.push_back(std::move(row));
    }
    return json{{"n", inst.n}, {"m", inst.m}, {"valuations", std::move(rows)}};
}

// Allocation file format: {"bundles": [[good indices] ...]}
inline Allocation allocation_from_json(const json& j) {
    if (!j.is_object() || !j.contains("bundles")) throw std::invalid_argument("allocation JSON needs bundles");
    const json& bs = j.at("bundles");
    Allocation alloc(static_cast<int>(bs.size()));
    for (int i = 0; i < static_cast<int>(bs.size()); ++i)
        for (const auto& g : bs[i]) alloc.add(i, g.get<int>());
    return alloc;
}

inline json allocation_to_json(const Allocation& alloc) {
    json bs = json::array();
    for (const auto& b : alloc.bundles) bs.push_back(b);
    return json{{"bundles", std::move(bs)}};
}

inline void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

inline Instance load_instance(const std::string& path) { return instance_from_json(load_json_file(path)); }
inline Allocation load_allocation(const std::string& path) { return allocation_from_json(load_json_file(path)); }

}  // namespace mms
