#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hpq/torus.hpp"
#include "hpq/wick.hpp"

namespace hpq {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Flat key-value configuration with [sections]; keys are "section.key".
// Unknown keys are rejected against the built-in schema. Values are kept
// as strings and parsed on access. See docs/FORMATS.md.
class RunConfig {
public:
    RunConfig();  // schema defaults

    void load_file(const std::string& path);
    void apply_env(const char* const* envp);      // HPQ_<SECTION>_<KEY>=value
    void set(const std::string& key, const std::string& value);  // "section.key=v" pre-split

    bool has(const std::string& key) const;
    std::string get_str(const std::string& key) const;
    long get_int(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    double get_double(const std::string& key) const;

    TorusSpec torus() const;
    Polynomial polynomial() const;  // P from polynomial.coeffs
    std::vector<double> get_list(const std::string& key) const;
    std::vector<std::pair<int, int>> get_modes(const std::string& key) const;

    // full resolved key set, sorted, as "key = value" lines
    std::string resolved() const;

private:
    std::map<std::string, std::string> values_;
    void require_known(const std::string& key) const;
};

}  // namespace hpq
