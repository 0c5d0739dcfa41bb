#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace hj {

/// Value in an experiment config file: number, string, boolean, list or inline table.
struct ConfigValue {
    using List = std::vector<ConfigValue>;
    using Table = std::vector<std::pair<std::string, ConfigValue>>;

    std::variant<double, std::string, bool, List, Table> data;
    int line = 0;

    [[nodiscard]] std::string type_name() const;
};

/// Flat `key = value` document with at most one level of `{ ... }` nesting.
///
///   # comment
///   resolution = 64
///   initial = "cos:1"
///   ladder = [16, 32, 64]
///   model = { family = "discounted", potential = [1.0], lambda = 1.0 }
///   fd.resolution = 512
///
/// Lists and tables may span lines. Every getter marks its key as used;
/// `reject_unused` turns leftovers into a ConfigError so typos do not pass
/// silently. Getters throw ConfigError naming the key on a type mismatch.
class ConfigDocument {
public:
    static ConfigDocument parse(const std::string& text);
    static ConfigDocument load(const std::string& path);

    ConfigDocument() = default;

    [[nodiscard]] bool has(const std::string& key) const;
    [[nodiscard]] double get_double(const std::string& key, double fallback) const;
    [[nodiscard]] long get_int(const std::string& key, long fallback) const;
    [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const;
    [[nodiscard]] std::string get_string(const std::string& key, const std::string& fallback) const;
    [[nodiscard]] std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;
    [[nodiscard]] std::vector<long> get_ints(const std::string& key, std::vector<long> fallback) const;
    [[nodiscard]] std::vector<std::string> get_strings(const std::string& key,
                                                       std::vector<std::string> fallback) const;
    /// Inline table as its own document; its keys report as "key.sub".
    [[nodiscard]] ConfigDocument get_table(const std::string& key) const;

    void reject_unused() const;

private:
    const ConfigValue* find(const std::string& key) const;
    [[nodiscard]] std::string qualified(const std::string& key) const;

    std::string prefix_;
    std::map<std::string, ConfigValue> values_;
    mutable std::set<std::string> used_;
};

}  // namespace hj
