#pragma once

#include <cstdio>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace webscout::script {

class Value;
using List = std::vector<Value>;
using Map = std::map<std::string, Value>;  // ordered keys keep printing deterministic

// Half-open integer range, step 1. Lazy so loops over large ranges do not
// materialize a list.
struct Range {
    long long begin = 0;
    long long end = 0;

    long long size() const { return end > begin ? end - begin : 0; }
    bool operator==(const Range&) const = default;
};

// Immutable runtime value. Lists and maps are shared, never mutated in place;
// builtins that "modify" a container return a fresh one.
class Value {
public:
    using Data = std::variant<std::monostate, bool, long long, double, std::string,
                              std::shared_ptr<const List>, std::shared_ptr<const Map>, Range>;

    Value() = default;
    Value(bool b) : data_(b) {}
    Value(long long i) : data_(i) {}
    Value(int i) : data_(static_cast<long long>(i)) {}
    Value(double d) : data_(d) {}
    Value(const char* s) : data_(std::string(s)) {}
    Value(std::string s) : data_(std::move(s)) {}
    Value(List items) : data_(std::make_shared<const List>(std::move(items))) {}
    Value(Map entries) : data_(std::make_shared<const Map>(std::move(entries))) {}
    Value(Range r) : data_(r) {}

    bool is_null() const { return std::holds_alternative<std::monostate>(data_); }
    bool is_bool() const { return std::holds_alternative<bool>(data_); }
    bool is_int() const { return std::holds_alternative<long long>(data_); }
    bool is_float() const { return std::holds_alternative<double>(data_); }
    bool is_number() const { return is_int() || is_float(); }
    bool is_string() const { return std::holds_alternative<std::string>(data_); }
    bool is_list() const { return std::holds_alternative<std::shared_ptr<const List>>(data_); }
    bool is_map() const { return std::holds_alternative<std::shared_ptr<const Map>>(data_); }
    bool is_range() const { return std::holds_alternative<Range>(data_); }

    bool as_bool() const { return std::get<bool>(data_); }
    long long as_int() const { return std::get<long long>(data_); }
    double as_float() const { return std::get<double>(data_); }
    double as_number() const { return is_int() ? static_cast<double>(as_int()) : as_float(); }
    const std::string& as_string() const { return std::get<std::string>(data_); }
    const List& as_list() const { return *std::get<std::shared_ptr<const List>>(data_); }
    const Map& as_map() const { return *std::get<std::shared_ptr<const Map>>(data_); }
    Range as_range() const { return std::get<Range>(data_); }

    const char* type_name() const {
        switch (data_.index()) {
            case 0: return "null";
            case 1: return "bool";
            case 2: return "int";
            case 3: return "float";
            case 4: return "string";
            case 5: return "list";
            case 6: return "map";
            case 7: return "range";
        }
        return "unknown";
    }

    bool operator==(const Value& other) const {
        if (is_number() && other.is_number()) {
            if (is_int() && other.is_int()) return as_int() == other.as_int();
            return as_number() == other.as_number();
        }
        if (data_.index() != other.data_.index()) return false;
        switch (data_.index()) {
            case 0: return true;
            case 1: return as_bool() == other.as_bool();
            case 4: return as_string() == other.as_string();
            case 5: return as_list() == other.as_list();
            case 6: return as_map() == other.as_map();
            case 7: return as_range() == other.as_range();
        }
        return false;
    }

private:
    Data data_;
};

namespace detail {

inline std::string format_double(double d) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", d);
    return buf;
}

inline std::string quote_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    out += '"';
    return out;
}

}  // namespace detail

// Canonical rendering. Strings are raw at the top level (what print shows)
// and quoted inside containers.
inline std::string repr(const Value& v, bool quote_strings = false) {
    if (v.is_null()) return "null";
    if (v.is_bool()) return v.as_bool() ? "true" : "false";
    if (v.is_int()) return std::to_string(v.as_int());
    if (v.is_float()) return detail::format_double(v.as_float());
    if (v.is_string()) return quote_strings ? detail::quote_string(v.as_string()) : v.as_string();
    if (v.is_range())
        return "range(" + std::to_string(v.as_range().begin) + ", " +
               std::to_string(v.as_range().end) + ")";
    if (v.is_list()) {
        std::string out = "[";
        const auto& items = v.as_list();
        for (size_t i = 0; i < items.size(); ++i) {
            if (i) out += ", ";
            out += repr(items[i], true);
        }
        return out + "]";
    }
    std::string out = "{";
    bool first = true;
    for (const auto& [k, val] : v.as_map()) {
        if (!first) out += ", ";
        first = false;
        out += detail::quote_string(k) + ": " + repr(val, true);
    }
    return out + "}";
}

}  // namespace webscout::script
