#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

namespace wedge::cli {

using Json = nlohmann::ordered_json;

inline std::string fmt17(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Compact-with-indent writer that prints every float with 17 significant
/// digits; nlohmann's own dump uses shortest round-trip form instead.
inline void emit(const Json& j, std::string& out, int indent = 0) {
    const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
    const std::string close(static_cast<std::size_t>(indent), ' ');
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad + Json(it.key()).dump() + ": ";
                emit(it.value(), out, indent + 2);
            }
            out += "\n" + close + "}";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[";
            bool first = true;
            for (const auto& v : j) {
                if (!first) out += ", ";
                first = false;
                emit(v, out, indent + 2);
            }
            out += "]";
            return;
        }
        case Json::value_t::number_float:
            out += fmt17(j.get<double>());
            return;
        default:
            out += j.dump();
    }
}

inline std::string to_text(const Json& j) {
    std::string s;
    emit(j, s);
    s += "\n";
    return s;
}

}  // namespace wedge::cli
