#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include <nlohmann/json.hpp>

#include "ekramers/linalg.hpp"
#include "ekramers/path.hpp"

namespace ekramers {

using Json = nlohmann::json;

namespace detail {

inline void write_string(std::string& out, const std::string& s) {
    out += Json(s).dump();
}

inline void write_canonical(std::string& out, const Json& j, int indent, int depth) {
    const auto newline = [&](int d) {
        if (indent < 0) return;
        out += '\n';
        out.append(static_cast<std::size_t>(indent * d), ' ');
    };
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += '{';
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {  // std::map: keys already sorted
            if (!first) out += ',';
            first = false;
            newline(depth + 1);
            write_string(out, it.key());
            out += indent < 0 ? ":" : ": ";
            write_canonical(out, it.value(), indent, depth + 1);
        }
        newline(depth);
        out += '}';
        return;
    }
    case Json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        out += '[';
        bool first = true;
        for (const auto& v : j) {
            if (!first) out += ',';
            first = false;
            newline(depth + 1);
            write_canonical(out, v, indent, depth + 1);
        }
        newline(depth);
        out += ']';
        return;
    }
    case Json::value_t::number_float: {
        const double v = j.get<double>();
        if (!std::isfinite(v)) {
            out += "null";
            return;
        }
        std::string s = format_double(v);
        // Keep floats recognisable as floats after a round trip.
        if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
        out += s;
        return;
    }
    default:
        out += j.dump();
    }
}

}  // namespace detail

/// Canonical serialization: sorted keys, doubles with 17 significant digits,
/// non-finite doubles as null. Parsing and re-serializing is byte-identical.
inline std::string to_canonical_json(const Json& j, int indent = 2) {
    std::string out;
    detail::write_canonical(out, j, indent, 0);
    return out;
}

inline Json to_json(const Vec& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline Json to_json(const Mat& m) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Vec(m.row(i).transpose())));
    return a;
}

inline Vec vec_from_json(const Json& j) {
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    return v;
}

}  // namespace ekramers
