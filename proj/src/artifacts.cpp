#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <openssl/evp.h>

#include "navslip/errors.hpp"
#include "navslip/io.hpp"

namespace navslip {

static_assert(std::endian::native == std::endian::little,
              "snapshot and hash code assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'N', 'S', 'L', 'P', 'S', 'N', 'A', 'P'};
constexpr std::uint32_t kSnapshotVersion = 1;

template <class T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in, const char* what) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
        throw SnapshotError(std::string("snapshot truncated while reading ") + what);
    return v;
}

}  // namespace

FieldSnapshot make_snapshot(double time, const VelocityState& v) {
    return {time, {v.u1, v.u2, v.u3}};
}

FieldSnapshot make_snapshot(double time, const BoussinesqState& s) {
    return {time, {s.vel.u1, s.vel.u2, s.vel.u3, s.rho}};
}

void write_snapshot(const std::filesystem::path& path, const FieldSnapshot& snap) {
    if (snap.fields.empty()) throw SnapshotError("snapshot without fields");
    const Grid& g = snap.fields.front().grid();
    for (const auto& f : snap.fields) require_compatible(g, f.grid());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw SnapshotError("cannot open " + path.string() + " for writing");
    out.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, kSnapshotVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(snap.fields.size()));
    put<std::int32_t>(out, g.nx);
    put<std::int32_t>(out, g.ny);
    put<std::int32_t>(out, g.nz);
    put<std::uint32_t>(out, 0);
    put<double>(out, g.lx);
    put<double>(out, g.ly);
    put<double>(out, g.height);
    put<double>(out, snap.time);
    for (const auto& f : snap.fields) {
        put<std::uint32_t>(out, f.parity() == Parity::Odd ? 1 : 0);
        put<std::uint32_t>(out, 0);
        const auto c = f.coeffs();
        put<std::uint64_t>(out, c.size());
        out.write(reinterpret_cast<const char*>(c.data()),
                  static_cast<std::streamsize>(c.size() * sizeof(Complex)));
    }
    if (!out) throw SnapshotError("write failed for " + path.string());
}

FieldSnapshot read_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SnapshotError("cannot open " + path.string());
    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
        throw SnapshotError(path.string() + ": not a field snapshot (bad magic)");
    const auto version = get<std::uint32_t>(in, "version");
    if (version != kSnapshotVersion)
        throw SnapshotError(path.string() + ": unsupported snapshot version " +
                            std::to_string(version));
    const auto count = get<std::uint32_t>(in, "field count");
    const int nx = get<std::int32_t>(in, "nx");
    const int ny = get<std::int32_t>(in, "ny");
    const int nz = get<std::int32_t>(in, "nz");
    get<std::uint32_t>(in, "reserved");
    Grid g;
    try {
        g = Grid(nx, ny, nz);
    } catch (const std::invalid_argument& e) {
        throw SnapshotError(path.string() + ": " + e.what());
    }
    g.lx = get<double>(in, "lx");
    g.ly = get<double>(in, "ly");
    g.height = get<double>(in, "height");
    FieldSnapshot snap;
    snap.time = get<double>(in, "time");
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto parity = get<std::uint32_t>(in, "parity");
        get<std::uint32_t>(in, "reserved");
        if (parity > 1) throw SnapshotError(path.string() + ": bad parity tag");
        const auto n = get<std::uint64_t>(in, "coefficient count");
        if (n != g.spectral_size())
            throw SnapshotError(path.string() + ": field " + std::to_string(i) + " has " +
                                std::to_string(n) + " coefficients, grid needs " +
                                std::to_string(g.spectral_size()));
        SpectralScalar f(g, parity == 1 ? Parity::Odd : Parity::Even);
        auto c = f.coeffs();
        if (!in.read(reinterpret_cast<char*>(c.data()),
                     static_cast<std::streamsize>(n * sizeof(Complex))))
            throw SnapshotError(path.string() + ": truncated coefficients");
        snap.fields.push_back(std::move(f));
    }
    if (in.peek() != std::char_traits<char>::eof())
        throw SnapshotError(path.string() + ": trailing bytes after the last field");
    return snap;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw std::out_of_range("CSV has no column '" + std::string(name) + "'");
}

std::vector<double> CsvTable::numbers(std::string_view name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    for (const auto& r : rows) {
        if (r[c].empty()) {
            out.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(r[c], &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != r[c].size())
            throw std::runtime_error("CSV column '" + std::string(name) + "': bad number '" +
                                     r[c] + "'");
        out.push_back(v);
    }
    return out;
}

void write_csv(const std::filesystem::path& path, const CsvTable& t) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << '\n';
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ss(s);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!s.empty() && s.back() == ',') cells.emplace_back();
        return cells;
    };
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty CSV");
    t.header = split(line);
    int n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != t.header.size())
            throw std::runtime_error(path.string() + ": line " + std::to_string(n) + " has " +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(t.header.size()));
        t.rows.push_back(std::move(cells));
    }
    return t;
}

namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new()) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1)
            throw std::runtime_error("SHA-256 unavailable");
    }
    ~Sha256() { EVP_MD_CTX_free(ctx_); }
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_, data, n); }
    std::string hex() {
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_, md, &len);
        std::ostringstream s;
        for (unsigned int i = 0; i < len; ++i)
            s << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
        return s.str();
    }

private:
    EVP_MD_CTX* ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view data) {
    Sha256 h;
    h.update(data.data(), data.size());
    return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    Sha256 h;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) h.update(buf, in.gcount());
    return h.hex();
}

}  // namespace navslip
