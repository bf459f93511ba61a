#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include "json.hpp"

namespace dimcert {

// Deterministic JSON serialization: keys in sorted order (nlohmann's
// default object is an ordered std::map) and floats printed with 17
// significant digits so reports are byte-identical across runs.
inline void dump_deterministic(const nlohmann::json& j, std::string& out) {
    using nlohmann::json;
    switch (j.type()) {
        case json::value_t::null:
            out += "null";
            break;
        case json::value_t::boolean:
            out += j.get<bool>() ? "true" : "false";
            break;
        case json::value_t::number_integer:
            out += std::to_string(j.get<long long>());
            break;
        case json::value_t::number_unsigned:
            out += std::to_string(j.get<unsigned long long>());
            break;
        case json::value_t::number_float: {
            double v = j.get<double>();
            if (!std::isfinite(v)) {
                out += "null";
                break;
            }
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out += buf;
            break;
        }
        case json::value_t::string: {
            out += '"';
            for (char c : j.get_ref<const std::string&>()) {
                switch (c) {
                    case '"': out += "\\\""; break;
                    case '\\': out += "\\\\"; break;
                    case '\n': out += "\\n"; break;
                    case '\r': out += "\\r"; break;
                    case '\t': out += "\\t"; break;
                    default:
                        if (static_cast<unsigned char>(c) < 0x20) {
                            char buf[8];
                            std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                            out += buf;
                        } else {
                            out += c;
                        }
                }
            }
            out += '"';
            break;
        }
        case json::value_t::array: {
            out += '[';
            bool first = true;
            for (const auto& e : j) {
                if (!first) out += ',';
                first = false;
                dump_deterministic(e, out);
            }
            out += ']';
            break;
        }
        case json::value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                nlohmann::json key(it.key());
                dump_deterministic(key, out);
                out += ':';
                dump_deterministic(it.value(), out);
            }
            out += '}';
            break;
        }
        default:
            out += "null";
    }
}

inline std::string dump_deterministic(const nlohmann::json& j) {
    std::string out;
    dump_deterministic(j, out);
    return out;
}

}  // namespace dimcert
