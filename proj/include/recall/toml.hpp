#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace recall::toml {

// Minimal TOML subset: [tables], key = value, with string / integer /
// float / boolean scalars and flat arrays of them. Enough for config and
// preset files; no nested tables-in-arrays or dates.
struct Value;
using Array = std::vector<Value>;

struct Value {
    std::variant<std::int64_t, double, bool, std::string, Array> data;

    bool is_array() const { return std::holds_alternative<Array>(data); }
    std::int64_t as_int() const;
    double as_double() const;  // accepts integer literals too
    bool as_bool() const;
    const std::string& as_string() const;
    const Array& as_array() const;
};

using Table = std::map<std::string, Value>;
using Document = std::map<std::string, Table>;  // "" = top-level table

Document parse(const std::string& text);
Document parse_file(const std::string& path);

}  // namespace recall::toml
