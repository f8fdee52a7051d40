#include "besov/config.hpp"

#include <fstream>
#include <sstream>

#include "besov/errors.hpp"

namespace besov {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

const char* kKnownKeys[] = {
    "model",         "prior",        "family",       "alpha",          "d",
    "truth",         "truth_amplitude", "truth_a",   "truth_b",        "truth_alpha",
    "eps0",          "eps_ratio",    "eps_count",    "eps_list",       "replicates",
    "seed",          "base_J",       "max_J",        "lambda_scale",   "map_max_iters",
    "map_tol",       "rho_grid",     "darcy_source", "schro_boundary", "link_k_min",
    "threads",       "out_dir",      "noisy_truth_restart"};

bool known_key(const std::string& k) {
    for (const char* s : kKnownKeys)
        if (k == s) return true;
    return false;
}

} // namespace

Config Config::from_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
        if (!known_key(key))
            throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key +
                              "'");
        cfg.kv_[key] = value;
    }
    return cfg;
}

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not a number: " + it->second);
    }
}

int Config::get_int(const std::string& key, int fallback) const {
    const double v = get_double(key, static_cast<double>(fallback));
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) throw ConfigError("config key '" + key + "': not an integer");
    return i;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
        return std::stoull(it->second);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not an unsigned integer");
    }
}

std::vector<double> Config::get_double_list(const std::string& key) const {
    std::vector<double> out;
    const auto it = kv_.find(key);
    if (it == kv_.end()) return out;
    std::istringstream in(it->second);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': bad list entry: " + item);
        }
    }
    return out;
}

ForwardModel::Kind model_kind_from_name(const std::string& name) {
    if (name == "identity") return ForwardModel::Kind::Identity;
    if (name == "smoothing") return ForwardModel::Kind::LinearSmoothing;
    if (name == "darcy") return ForwardModel::Kind::Darcy;
    if (name == "schroedinger" || name == "schrodinger") return ForwardModel::Kind::Schroedinger;
    throw ConfigError("unknown model: " + name);
}

TruthSpec::Kind truth_kind_from_name(const std::string& name) {
    if (name == "smooth_bump") return TruthSpec::Kind::SmoothBump;
    if (name == "blocks") return TruthSpec::Kind::PiecewiseBlocks;
    if (name == "spike_smooth") return TruthSpec::Kind::SpikeSmooth;
    throw ConfigError("unknown truth: " + name);
}

SweepConfig sweep_config_from(const Config& cfg) {
    SweepConfig sc;
    sc.model = model_kind_from_name(cfg.get_string("model", "identity"));
    const std::string prior = cfg.get_string("prior", "laplace");
    if (prior == "laplace")
        sc.prior = PriorSpec::Kind::LaplaceBesov;
    else if (prior == "gaussian")
        sc.prior = PriorSpec::Kind::GaussianSobolev;
    else
        throw ConfigError("unknown prior: " + prior);
    try {
        sc.family = family_from_name(cfg.get_string("family", "haar"));
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
    sc.alpha = cfg.get_int("alpha", 2);
    sc.d = cfg.get_int("d", 1);
    sc.truth.kind = truth_kind_from_name(cfg.get_string("truth", "smooth_bump"));
    sc.truth.amplitude = cfg.get_double("truth_amplitude", 1.0);
    sc.truth.a = cfg.get_double("truth_a", 0.2);
    sc.truth.b = cfg.get_double("truth_b", 0.8);
    sc.truth.declared_alpha = cfg.get_int("truth_alpha", sc.alpha);
    if (cfg.has("eps_list")) {
        sc.eps_grid = cfg.get_double_list("eps_list");
    } else {
        sc.eps_grid = geometric_grid(cfg.get_double("eps0", 0.125),
                                     cfg.get_double("eps_ratio", 0.5), cfg.get_int("eps_count", 7));
    }
    sc.replicates = cfg.get_int("replicates", 20);
    sc.seed = cfg.get_u64("seed", 1);
    sc.base_J = cfg.get_int("base_J", 10);
    sc.max_J = cfg.get_int("max_J", std::max(sc.base_J, 13));
    sc.lambda_scale = cfg.get_double("lambda_scale", 1.0);
    sc.map_max_iters = cfg.get_int("map_max_iters", 4000);
    sc.map_tol = cfg.get_double("map_tol", 1e-10);
    sc.noisy_truth_restart = cfg.get_int("noisy_truth_restart", 1) != 0;
    sc.rho_grid = cfg.get_double_list("rho_grid");
    sc.darcy_source = cfg.get_double("darcy_source", 2.0);
    sc.schro_boundary = cfg.get_double("schro_boundary", 1.0);
    sc.link_k_min = cfg.get_double("link_k_min", 0.1);
    sc.threads = cfg.get_int("threads", 0);
    sc.out_dir = cfg.get_string("out_dir", "");
    return sc;
}

} // namespace besov
