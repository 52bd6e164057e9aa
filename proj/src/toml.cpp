#include "recall/toml.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace recall::toml {

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
    throw std::runtime_error("toml parse error (line " + std::to_string(line) +
                             "): " + what);
}

std::string strip(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

// cut a trailing comment, respecting quoted strings
std::string strip_comment(const std::string& s) {
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') in_string = !in_string;
        if (s[i] == '#' && !in_string) return s.substr(0, i);
    }
    return s;
}

Value parse_scalar(const std::string& raw, int line) {
    const std::string s = strip(raw);
    if (s.empty()) fail(line, "empty value");
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"') fail(line, "unterminated string");
        return Value{s.substr(1, s.size() - 2)};
    }
    if (s == "true") return Value{true};
    if (s == "false") return Value{false};
    const bool looks_float = s.find_first_of(".eE") != std::string::npos &&
                             s.find_first_not_of("+-0123456789.eE") ==
                                 std::string::npos;
    try {
        std::size_t used = 0;
        if (looks_float) {
            const double d = std::stod(s, &used);
            if (used == s.size()) return Value{d};
        } else {
            const std::int64_t i = std::stoll(s, &used, 10);
            if (used == s.size()) return Value{i};
        }
    } catch (const std::exception&) {
    }
    fail(line, "cannot parse value: " + s);
}

Value parse_value(const std::string& raw, int line) {
    const std::string s = strip(raw);
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']') fail(line, "unterminated array");
        Array items;
        std::string body = s.substr(1, s.size() - 2);
        std::string current;
        bool in_string = false;
        for (char ch : body) {
            if (ch == '"') in_string = !in_string;
            if (ch == ',' && !in_string) {
                if (!strip(current).empty())
                    items.push_back(parse_scalar(current, line));
                current.clear();
            } else {
                current += ch;
            }
        }
        if (!strip(current).empty()) items.push_back(parse_scalar(current, line));
        return Value{std::move(items)};
    }
    return parse_scalar(s, line);
}

}  // namespace

std::int64_t Value::as_int() const {
    if (const auto* i = std::get_if<std::int64_t>(&data)) return *i;
    throw std::runtime_error("toml: expected integer value");
}

double Value::as_double() const {
    if (const auto* d = std::get_if<double>(&data)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&data))
        return static_cast<double>(*i);
    throw std::runtime_error("toml: expected numeric value");
}

bool Value::as_bool() const {
    if (const auto* b = std::get_if<bool>(&data)) return *b;
    throw std::runtime_error("toml: expected boolean value");
}

const std::string& Value::as_string() const {
    if (const auto* s = std::get_if<std::string>(&data)) return *s;
    throw std::runtime_error("toml: expected string value");
}

const Array& Value::as_array() const {
    if (const auto* a = std::get_if<Array>(&data)) return *a;
    throw std::runtime_error("toml: expected array value");
}

Document parse(const std::string& text) {
    Document doc;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = strip(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(line_no, "unterminated table header");
            section = strip(line.substr(1, line.size() - 2));
            if (section.empty()) fail(line_no, "empty table name");
            doc[section];
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected key = value");
        const std::string key = strip(line.substr(0, eq));
        if (key.empty()) fail(line_no, "empty key");
        doc[section][key] = parse_value(line.substr(eq + 1), line_no);
    }
    return doc;
}

Document parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("toml: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

}  // namespace recall::toml
