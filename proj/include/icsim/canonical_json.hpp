#pragma once

// Deterministic JSON rendering shared by snapshots, prompts and trace files.
//
// Object keys are emitted in lexicographic order (nlohmann::json stores
// objects in a std::map), there is no insignificant whitespace, and floating
// point values use one of two fixed renderings so that identical inputs always
// produce identical bytes.

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <string>

namespace icsim {

using json = nlohmann::json;

enum class FloatStyle {
  Significant6,  // %.6g, used for snapshots and prompts
  Fixed6,        // %.6f, used for trace files (times with 6 decimals)
};

namespace detail {

inline void append_escaped(std::string& out, const std::string& s) {
  out += '"';
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
}

inline void append_float(std::string& out, double v, FloatStyle style) {
  if (!std::isfinite(v)) {
    // JSON has no representation for inf/nan.
    out += "null";
    return;
  }
  if (v == 0.0) v = 0.0;  // fold -0
  char buf[64];
  if (style == FloatStyle::Significant6) {
    std::snprintf(buf, sizeof(buf), "%.6g", v);
  } else {
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    if (std::string_view(buf) == "-0.000000") std::snprintf(buf, sizeof(buf), "0.000000");
  }
  out += buf;
}

inline void append_canonical(std::string& out, const json& j, FloatStyle style) {
  switch (j.type()) {
    case json::value_t::null: out += "null"; break;
    case json::value_t::boolean: out += j.get<bool>() ? "true" : "false"; break;
    case json::value_t::number_integer: out += std::to_string(j.get<std::int64_t>()); break;
    case json::value_t::number_unsigned: out += std::to_string(j.get<std::uint64_t>()); break;
    case json::value_t::number_float: append_float(out, j.get<double>(), style); break;
    case json::value_t::string: append_escaped(out, j.get_ref<const std::string&>()); break;
    case json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += ',';
        first = false;
        append_canonical(out, e, style);
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
        append_escaped(out, it.key());
        out += ':';
        append_canonical(out, it.value(), style);
      }
      out += '}';
      break;
    }
    default: out += "null"; break;
  }
}

}  // namespace detail

inline std::string dump_canonical(const json& j, FloatStyle style = FloatStyle::Significant6) {
  std::string out;
  detail::append_canonical(out, j, style);
  return out;
}

// Six-decimal rendering used by the CSV writers.
inline std::string fixed6(double v) {
  std::string out;
  detail::append_float(out, v, FloatStyle::Fixed6);
  return out;
}

}  // namespace icsim
