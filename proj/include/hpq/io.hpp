#pragma once

#include <string>
#include <vector>

#include "hpq/torus.hpp"

namespace hpq {

// doubles printed with 17 significant digits (CSV schema contract)
std::string fmt_g17(double x);

// Minimal CSV assembly; content is built in memory so byte-identity is
// easy to test, then written in one shot.
class Csv {
public:
    explicit Csv(std::vector<std::string> header);
    void row(const std::vector<std::string>& cells);
    const std::string& text() const { return text_; }
    void save(const std::string& path) const;

private:
    std::string text_;
    std::size_t cols_;
};

class SnapshotError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Binary snapshot: magic "HPQ1", u32 version = 1, u32 N, M, two_k,
// f64 epsilon, then interleaved little-endian (re, im) f64 coefficients of
// u then ut, row-major over (n1, n2) in -N..N.
void write_snapshot(const std::string& path, const TorusSpec& spec, const PairField& x);

struct Snapshot {
    TorusSpec spec;
    PairField field;
};

Snapshot read_snapshot(const std::string& path);

}  // namespace hpq
