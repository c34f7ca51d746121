// config.hpp: strict "key = value unit" configuration files with environment overrides
//
// Syntax: "[section]" headers prefix keys with "section."; "#" starts a comment.
// Physical quantities need a unit ("1.513 GHz", "10 mK"); lists are comma separated and
// ranges read "a .. b : n" (n points, both ends included).
// Any key can be overridden by MAGSQ_<KEY> with dots replaced by underscores, e.g.
// MAGSQ_PARAMS_KAPPA="1 MHz".

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace magsq::config {

enum class Dim { frequency, time, temperature, angle, length, current, density, number, integer, text, boolean };

// Canonical units: frequency GHz (linear), time ns, temperature mK, angle rad, length um,
// current uA, density cm^-3.
double parse_quantity(const std::string& text, Dim dim, const std::string& key);
std::vector<double> parse_list(const std::string& text, Dim dim, const std::string& key);

struct Entry {
    std::string value;
    std::string source;   // "file:line" or "env:NAME"
};

class RawConfig {
public:
    static RawConfig parse(const std::string& text, const std::string& origin = "config");
    static RawConfig load(const std::string& path);

    // Applies MAGSQ_* overrides for the given keys.
    void apply_env(const std::vector<std::string>& keys, const std::string& prefix = "MAGSQ_");

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    const Entry& get(const std::string& key) const;
    void set(const std::string& key, const std::string& value, const std::string& source);
    const std::map<std::string, Entry>& entries() const { return entries_; }

private:
    std::map<std::string, Entry> entries_;
};

std::string env_name(const std::string& key, const std::string& prefix = "MAGSQ_");

} // namespace magsq::config
