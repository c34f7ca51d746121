#include "magsq/config.hpp"
#include "magsq/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

namespace magsq::config {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

struct Unit {
    const char* name;
    double scale;
};

const std::vector<Unit>& units_for(Dim d) {
    static const double two_pi = 2.0 * std::numbers::pi;
    static const std::vector<Unit> freq = {{"Hz", 1e-9},   {"kHz", 1e-6},          {"MHz", 1e-3},
                                           {"GHz", 1.0},   {"rad/ns", 1.0 / two_pi}, {"rad/us", 1e-3 / two_pi},
                                           {"rad/s", 1e-9 / two_pi}};
    static const std::vector<Unit> time = {{"ps", 1e-3}, {"ns", 1.0}, {"us", 1e3}, {"ms", 1e6}, {"s", 1e9}};
    static const std::vector<Unit> temp = {{"uK", 1e-3}, {"mK", 1.0}, {"K", 1e3}};
    static const std::vector<Unit> angle = {{"rad", 1.0}, {"deg", std::numbers::pi / 180.0}, {"pi", std::numbers::pi}};
    static const std::vector<Unit> length = {{"nm", 1e-3}, {"um", 1.0}, {"mm", 1e3}, {"m", 1e6}};
    static const std::vector<Unit> current = {{"nA", 1e-3}, {"uA", 1.0}, {"mA", 1e3}, {"A", 1e6}};
    static const std::vector<Unit> density = {{"cm^-3", 1.0}, {"m^-3", 1e-6}};
    static const std::vector<Unit> none;
    switch (d) {
    case Dim::frequency: return freq;
    case Dim::time: return time;
    case Dim::temperature: return temp;
    case Dim::angle: return angle;
    case Dim::length: return length;
    case Dim::current: return current;
    case Dim::density: return density;
    default: return none;
    }
}

const char* dim_name(Dim d) {
    switch (d) {
    case Dim::frequency: return "frequency";
    case Dim::time: return "time";
    case Dim::temperature: return "temperature";
    case Dim::angle: return "angle";
    case Dim::length: return "length";
    case Dim::current: return "current";
    case Dim::density: return "spin density";
    case Dim::number: return "dimensionless number";
    case Dim::integer: return "integer";
    case Dim::text: return "text";
    case Dim::boolean: return "boolean";
    }
    return "value";
}

[[noreturn]] void fail(const std::string& key, const std::string& text, const std::string& why) {
    throw ConfigError(key + ": " + why + " (got \"" + text + "\")");
}

} // namespace

double parse_quantity(const std::string& raw, Dim dim, const std::string& key) {
    const std::string text = trim(raw);
    if (text.empty()) fail(key, raw, "empty value");
    if (dim == Dim::angle && text == "pi") return std::numbers::pi;
    const char* begin = text.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail(key, raw, std::string("expected a ") + dim_name(dim));
    if (!std::isfinite(v)) fail(key, raw, "value is not finite");
    const std::string unit = trim(std::string(end));
    if (dim == Dim::number || dim == Dim::integer) {
        if (!unit.empty()) fail(key, raw, "dimensionless value must not carry a unit");
        if (dim == Dim::integer && v != std::floor(v)) fail(key, raw, "expected an integer");
        return v;
    }
    if (unit.empty()) fail(key, raw, std::string("missing unit for ") + dim_name(dim));
    for (const auto& u : units_for(dim))
        if (unit == u.name) return v * u.scale;
    std::string allowed;
    for (const auto& u : units_for(dim)) allowed += std::string(allowed.empty() ? "" : ", ") + u.name;
    fail(key, raw, "unknown unit \"" + unit + "\" for " + dim_name(dim) + "; allowed: " + allowed);
}

std::vector<double> parse_list(const std::string& raw, Dim dim, const std::string& key) {
    const std::string text = trim(raw);
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const auto colon = text.find(':', dots);
        if (colon == std::string::npos) fail(key, raw, "range needs \": n\" point count");
        const double a = parse_quantity(text.substr(0, dots), dim, key);
        const double b = parse_quantity(text.substr(dots + 2, colon - dots - 2), dim, key);
        const double nd = parse_quantity(text.substr(colon + 1), Dim::integer, key);
        const long n = long(nd);
        if (n < 1) fail(key, raw, "range point count must be >= 1");
        std::vector<double> v(static_cast<std::size_t>(n));
        for (long k = 0; k < n; ++k) v[std::size_t(k)] = n == 1 ? a : a + (b - a) * double(k) / double(n - 1);
        return v;
    }
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(parse_quantity(item, dim, key));
    if (v.empty()) fail(key, raw, "empty list");
    return v;
}

RawConfig RawConfig::parse(const std::string& text, const std::string& origin) {
    RawConfig c;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected \"key = value\"");
        const std::string k = trim(line.substr(0, eq));
        const std::string v = trim(line.substr(eq + 1));
        if (k.empty()) throw ConfigError(where + ": empty key");
        const std::string full = section.empty() ? k : section + "." + k;
        if (c.has(full)) throw ConfigError(where + ": duplicate key " + full);
        c.entries_[full] = {v, where};
    }
    return c;
}

RawConfig RawConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path);
}

std::string env_name(const std::string& key, const std::string& prefix) {
    std::string n = prefix;
    for (char ch : key) n += ch == '.' ? '_' : char(std::toupper(static_cast<unsigned char>(ch)));
    return n;
}

void RawConfig::apply_env(const std::vector<std::string>& keys, const std::string& prefix) {
    for (const auto& k : keys) {
        const std::string name = env_name(k, prefix);
        if (const char* v = std::getenv(name.c_str())) entries_[k] = {trim(v), "env:" + name};
    }
}

const Entry& RawConfig::get(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("missing config key " + key);
    return it->second;
}

void RawConfig::set(const std::string& key, const std::string& value, const std::string& source) {
    entries_[key] = {value, source};
}

} // namespace magsq::config
