#pragma once

#include <map>
#include <string>

#include "besov/rates.hpp"

namespace besov {

// Plain key = value configuration files ('#' comments, blank lines ignored).
// Unknown keys are rejected so typos fail loudly.
class Config {
public:
    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    bool has(const std::string& key) const { return kv_.count(key) > 0; }
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    std::vector<double> get_double_list(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

// Translate a config into a sweep description; validates names and ranges
// (ConfigError on violation).  Recognized keys are documented in the README.
SweepConfig sweep_config_from(const Config& cfg);

ForwardModel::Kind model_kind_from_name(const std::string& name);
TruthSpec::Kind truth_kind_from_name(const std::string& name);

} // namespace besov
