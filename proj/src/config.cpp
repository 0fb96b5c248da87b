#include "hpq/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace hpq {

namespace {

// schema: every known key with its default
const std::vector<std::pair<const char*, const char*>>& schema() {
    static const std::vector<std::pair<const char*, const char*>> s = {
        {"torus.n", "8"},
        {"torus.m", "0"},  // 0 = 2k*N + 1
        {"torus.epsilon", "0.1"},
        {"torus.two_k", "4"},
        {"polynomial.coeffs", "0 0 0 0 0.25"},  // P(x) = x^4/4
        {"dynamics.dt", "0.01"},
        {"dynamics.t_end", "5"},
        {"dynamics.obs_stride", "10"},
        {"dynamics.blowup_threshold", "1e8"},
        {"dynamics.init", "rho0"},  // rho0 | zero | gibbs | snapshot:<path>
        {"dynamics.dump_times", ""},
        {"gibbs.beta0", "0.25"},
        {"gibbs.target_accept", "0.3"},
        {"gibbs.burnin", "10000"},
        {"gibbs.thin", "10"},
        {"gibbs.samples", "100"},
        {"coupling.mode", "contraction"},  // contraction | girsanov
        {"coupling.a0", "1"},
        {"coupling.m_stop", "inf"},
        {"coupling.v0_norm", "0.1"},
        {"coupling.t_end", "10"},
        {"coupling.dt", "0.01"},
        {"coupling.paths", "100"},
        {"coupling.obs_stride", "10"},
        {"coupling.max_doublings", "12"},
        {"coupling.t_eval", "3"},
        {"coupling.eta_grid", "0.05 0.1 0.2 0.3 0.5 0.7 0.9 1.0 1.1 1.3 1.6 2.0"},
        {"experiment.ensemble", "400"},
        {"experiment.sigma_scale", "1"},
        {"experiment.k_threshold", "1"},
        {"experiment.hmc_paths", "4"},
        {"experiment.hmc_t", "4"},
        {"experiment.cov_paths", "100000"},
        {"experiment.cov_dt", "0.1"},
        {"experiment.cov_modes", "0,0 1,0 2,1"},
        {"experiment.cov_times", "0.5 2 20"},
        {"experiment.ediff_samples", "10000"},
        {"experiment.ediff_eta", "0.5"},
        {"run.seed", "1"},
        {"run.threads", "0"},
        {"run.out_dir", "out"},
    };
    return s;
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace

RunConfig::RunConfig() {
    for (const auto& kv : schema()) values_[kv.first] = kv.second;
}

void RunConfig::require_known(const std::string& key) const {
    if (values_.find(key) == values_.end()) throw ConfigError("unknown config key: " + key);
}

void RunConfig::set(const std::string& key, const std::string& value) {
    require_known(key);
    values_[key] = trim(value);
}

void RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(path + ":" + std::to_string(lineno) + ": bad section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (section.empty()) throw ConfigError(path + ":" + std::to_string(lineno) + ": key outside any [section]");
        set(section + "." + key, line.substr(eq + 1));
    }
}

void RunConfig::apply_env(const char* const* envp) {
    for (const char* const* e = envp; e && *e; ++e) {
        const std::string entry(*e);
        if (entry.rfind("HPQ_", 0) != 0) continue;
        const std::size_t eq = entry.find('=');
        if (eq == std::string::npos) continue;
        std::string name = entry.substr(4, eq - 4);
        const std::size_t us = name.find('_');
        if (us == std::string::npos) throw ConfigError("malformed env override: " + entry);
        std::string section = name.substr(0, us);
        std::string key = name.substr(us + 1);
        for (char& c : section) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        for (char& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        set(section + "." + key, entry.substr(eq + 1));
    }
}

bool RunConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::string RunConfig::get_str(const std::string& key) const {
    require_known(key);
    return values_.at(key);
}

long RunConfig::get_int(const std::string& key) const {
    const std::string v = get_str(key);
    std::size_t pos = 0;
    long out = 0;
    try {
        out = std::stol(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError("key " + key + ": expected integer, got '" + v + "'");
    }
    if (pos != v.size()) throw ConfigError("key " + key + ": expected integer, got '" + v + "'");
    return out;
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
    const std::string v = get_str(key);
    std::size_t pos = 0;
    std::uint64_t out = 0;
    try {
        out = std::stoull(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError("key " + key + ": expected unsigned integer, got '" + v + "'");
    }
    if (pos != v.size()) throw ConfigError("key " + key + ": expected unsigned integer, got '" + v + "'");
    return out;
}

double RunConfig::get_double(const std::string& key) const {
    const std::string v = get_str(key);
    if (v == "inf") return std::numeric_limits<double>::infinity();
    std::size_t pos = 0;
    double out = 0;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError("key " + key + ": expected number, got '" + v + "'");
    }
    if (pos != v.size()) throw ConfigError("key " + key + ": expected number, got '" + v + "'");
    return out;
}

TorusSpec RunConfig::torus() const {
    TorusSpec spec;
    spec.N = static_cast<int>(get_int("torus.n"));
    spec.M = static_cast<int>(get_int("torus.m"));
    spec.epsilon = get_double("torus.epsilon");
    spec.two_k = static_cast<int>(get_int("torus.two_k"));
    spec.validate();
    return spec;
}

Polynomial RunConfig::polynomial() const {
    Polynomial P(get_list("polynomial.coeffs"));
    validate_P(P, static_cast<int>(get_int("torus.two_k")));
    return P;
}

std::vector<double> RunConfig::get_list(const std::string& key) const {
    std::istringstream in(get_str(key));
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
        if (tok == "inf")
            out.push_back(std::numeric_limits<double>::infinity());
        else {
            try {
                out.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw ConfigError("key " + key + ": bad list entry '" + tok + "'");
            }
        }
    }
    return out;
}

std::vector<std::pair<int, int>> RunConfig::get_modes(const std::string& key) const {
    std::istringstream in(get_str(key));
    std::vector<std::pair<int, int>> out;
    std::string tok;
    while (in >> tok) {
        const std::size_t comma = tok.find(',');
        if (comma == std::string::npos) throw ConfigError("key " + key + ": mode entries are n1,n2");
        out.emplace_back(std::stoi(tok.substr(0, comma)), std::stoi(tok.substr(comma + 1)));
    }
    return out;
}

std::string RunConfig::resolved() const {
    std::string out;
    for (const auto& kv : values_) {
        out += kv.first;
        out += " = ";
        out += kv.second;
        out += "\n";
    }
    return out;
}

}  // namespace hpq
