#pragma once

#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>

#include "pimc_ho/errors.hpp"
#include "pimc_ho/propagator.hpp"

namespace pimc_ho {

// Plain-text propagator definitions. Two forms:
//
//   [family]            |   [steps]
//   name = bda          |   V 0.5 0
//   t1 = 0.27564        |   T 1
//   alpha = 0.171438    |   V 0.5 0
//
// Comments start with '#'. Step rows are `T a` or `V b [c]`.

namespace detail {

inline std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& s, int line_no, const std::string& field) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line_no) + ": field '" + field +
                          "': expected a decimal number, got '" + s + "'");
    }
}

} // namespace detail

inline ContractedPropagator make_family_propagator(const std::string& name,
                                                   const std::map<std::string, double>& params) {
    auto get = [&](const std::string& key, double fallback,
                   bool required = false) {
        auto it = params.find(key);
        if (it != params.end()) return it->second;
        if (required) throw ConfigError("family '" + name + "' requires parameter '" + key + "'");
        return fallback;
    };
    if (name == "pa") return make_pa();
    if (name == "ti") return make_ti();
    if (name == "pa_ti" || name == "pa-ti") return make_pa_ti(get("alpha", 0.0, true));
    if (name == "4a") return make_4a(get("alpha", 0.0));
    if (name == "4a'" || name == "4a-prime" || name == "4aprime") return make_4a_prime();
    if (name == "bda")
        return make_bda(get("t1", 0.0, true), get("alpha", 0.0));
    if (name == "bd")
        return make_bda(bda_t1_min(), 0.0); // v0 = 0 end form
    if (name == "bd'" || name == "bd-prime" || name == "bdprime") return make_bd_prime();
    if (name == "bd*" || name == "bd-star" || name == "bdstar") return make_bd_star();
    if (name == "acb")
        return make_acb(get("t0", 0.0, true), get("a1", 0.0));
    if (name == "ca1") return make_ca1();
    if (name == "ca2") return make_ca2();
    if (name == "exact") return make_exact();
    throw ConfigError("unknown propagator family '" + name + "'");
}

inline ContractedPropagator parse_propagator_config(std::istream& in,
                                                    const std::string& origin = "<config>") {
    enum class Section { none, family, steps } section = Section::none;
    std::string family_name;
    std::map<std::string, double> params;
    StepSequence seq;
    seq.label = origin;

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string s = detail::strip(line);
        if (s.empty()) continue;

        if (s.front() == '[') {
            if (s == "[family]") section = Section::family;
            else if (s == "[steps]") section = Section::steps;
            else throw ConfigError("line " + std::to_string(line_no) + ": unknown section " + s);
            continue;
        }

        if (section == Section::family) {
            std::size_t eq = s.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
            std::string key = detail::strip(s.substr(0, eq));
            std::string value = detail::strip(s.substr(eq + 1));
            if (key == "name") {
                for (char& c : value) c = char(std::tolower(static_cast<unsigned char>(c)));
                family_name = value;
            } else {
                params[key] = detail::parse_number(value, line_no, key);
            }
        } else if (section == Section::steps) {
            std::istringstream row(s);
            std::string kind;
            row >> kind;
            if (kind == "T" || kind == "t") {
                std::string a;
                if (!(row >> a))
                    throw ConfigError("line " + std::to_string(line_no) + ": T row needs a coefficient");
                seq.steps.push_back(Step::kinetic(detail::parse_number(a, line_no, "a")));
            } else if (kind == "V" || kind == "v") {
                std::string b, c;
                if (!(row >> b))
                    throw ConfigError("line " + std::to_string(line_no) + ": V row needs a coefficient");
                double cv = 0.0;
                if (row >> c) cv = detail::parse_number(c, line_no, "c");
                seq.steps.push_back(Step::potential(detail::parse_number(b, line_no, "b"), cv));
            } else {
                throw ConfigError("line " + std::to_string(line_no) + ": step kind must be T or V");
            }
            std::string extra;
            if (row >> extra)
                throw ConfigError("line " + std::to_string(line_no) + ": unexpected trailing field '" + extra + "'");
        } else {
            throw ConfigError("line " + std::to_string(line_no) +
                              ": content before any [family] or [steps] section");
        }
    }

    if (section == Section::steps || !seq.steps.empty()) {
        if (!family_name.empty())
            throw ConfigError(origin + ": config mixes [family] and [steps]");
        if (seq.steps.empty()) throw ConfigError(origin + ": [steps] section is empty");
        if (!seq.palindromic())
            throw ConfigError(origin + ": custom step sequence must be palindromic");
        return contract(seq);
    }
    if (family_name.empty()) throw ConfigError(origin + ": no propagator defined");
    try {
        return make_family_propagator(family_name, params);
    } catch (const ParameterOutOfRange& e) {
        throw ConfigError(origin + ": " + e.what());
    }
}

inline ContractedPropagator load_propagator_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open propagator config '" + path + "'");
    return parse_propagator_config(in, path);
}

} // namespace pimc_ho
