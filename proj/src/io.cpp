#include "hpq/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace hpq {

static_assert(sizeof(double) == 8, "snapshot format assumes 8-byte doubles");

std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

Csv::Csv(std::vector<std::string> header) : cols_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) text_ += ',';
        text_ += header[i];
    }
    text_ += '\n';
}

void Csv::row(const std::vector<std::string>& cells) {
    if (cells.size() != cols_) throw std::runtime_error("Csv: column count mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) text_ += ',';
        text_ += cells[i];
    }
    text_ += '\n';
}

void Csv::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text_;
    if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

constexpr char kMagic[4] = {'H', 'P', 'Q', '1'};
constexpr std::uint32_t kVersion = 1;

bool little_endian() {
    const std::uint32_t probe = 1;
    return *reinterpret_cast<const unsigned char*>(&probe) == 1;
}

void put_u32(std::string& buf, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    buf.append(reinterpret_cast<char*>(b), 4);
}

void put_f64(std::string& buf, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    buf.append(reinterpret_cast<char*>(b), 8);
}

std::uint32_t get_u32(const std::string& buf, std::size_t& off) {
    if (off + 4 > buf.size()) throw SnapshotError("snapshot truncated");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(buf[off + static_cast<std::size_t>(i)]);
    off += 4;
    return v;
}

double get_f64(const std::string& buf, std::size_t& off) {
    if (off + 8 > buf.size()) throw SnapshotError("snapshot truncated");
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | static_cast<unsigned char>(buf[off + static_cast<std::size_t>(i)]);
    off += 8;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void put_field(std::string& buf, const SpectralField& f) {
    for (const cplx& c : f.a) {
        put_f64(buf, c.real());
        put_f64(buf, c.imag());
    }
}

}  // namespace

void write_snapshot(const std::string& path, const TorusSpec& spec, const PairField& x) {
    if (x.u.N != spec.N || x.ut.N != spec.N) throw SnapshotError("snapshot: field/spec cutoff mismatch");
    (void)little_endian();  // byte order handled explicitly above
    std::string buf;
    buf.append(kMagic, 4);
    put_u32(buf, kVersion);
    put_u32(buf, static_cast<std::uint32_t>(spec.N));
    put_u32(buf, static_cast<std::uint32_t>(spec.collocation()));
    put_u32(buf, static_cast<std::uint32_t>(spec.two_k));
    put_f64(buf, spec.epsilon);
    put_field(buf, x.u);
    put_field(buf, x.ut);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SnapshotError("cannot open for writing: " + path);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw SnapshotError("write failed: " + path);
}

Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SnapshotError("cannot open snapshot: " + path);
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t off = 0;
    if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0)
        throw SnapshotError("snapshot: bad magic");
    off = 4;
    const std::uint32_t version = get_u32(buf, off);
    if (version != kVersion) throw SnapshotError("snapshot: unsupported version");
    Snapshot snap;
    snap.spec.N = static_cast<int>(get_u32(buf, off));
    snap.spec.M = static_cast<int>(get_u32(buf, off));
    snap.spec.two_k = static_cast<int>(get_u32(buf, off));
    snap.spec.epsilon = get_f64(buf, off);
    snap.field = PairField(snap.spec.N);
    const std::size_t count = snap.field.u.a.size();
    const std::size_t expect = off + 2 * count * 16;
    if (buf.size() != expect) throw SnapshotError("snapshot: size mismatch");
    for (std::size_t i = 0; i < count; ++i) {
        const double re = get_f64(buf, off);
        const double im = get_f64(buf, off);
        snap.field.u.a[i] = cplx(re, im);
    }
    for (std::size_t i = 0; i < count; ++i) {
        const double re = get_f64(buf, off);
        const double im = get_f64(buf, off);
        snap.field.ut.a[i] = cplx(re, im);
    }
    return snap;
}

}  // namespace hpq
