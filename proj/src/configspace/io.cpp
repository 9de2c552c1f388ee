#include "bohm/configspace/io.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "bohm/detail/text.hpp"
#include "bohm/error.hpp"

namespace bohm::configspace {

using detail::format_double;

void write_csv(std::ostream& out, const Wavefunction& psi, std::optional<std::uint64_t> config_hash) {
    if (config_hash) out << "# config_hash=" << detail::format_hash(*config_hash) << '\n';
    out << "# t=" << format_double(psi.time) << '\n';
    out << (psi.grid.dims() == 1 ? "x,re,im,density\n" : "x,y,re,im,density\n");
    for (std::size_t i = 0; i < psi.grid.size(); ++i) {
        const Point p = psi.grid.point(i);
        const cplx z = psi.amplitudes[i];
        out << format_double(p[0]) << ',';
        if (psi.grid.dims() == 2) out << format_double(p[1]) << ',';
        out << format_double(z.real()) << ',' << format_double(z.imag()) << ','
            << format_double(z.real() * z.real() + z.imag() * z.imag()) << '\n';
    }
}

Wavefunction read_csv(std::istream& in, const Grid& grid) {
    Wavefunction psi{grid, std::vector<cplx>(grid.size()), 0.0};
    std::string line;
    std::size_t row = 0;
    bool header = false;
    const std::size_t cols = grid.dims() + 3;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# t=", 0) == 0) detail::parse_double(std::string_view(line).substr(4), psi.time);
            continue;
        }
        if (!header) {
            header = true;
            continue;
        }
        const auto f = detail::split(line, ',');
        double re = 0.0, im = 0.0;
        if (f.size() != cols || !detail::parse_double(f[grid.dims()], re) ||
            !detail::parse_double(f[grid.dims() + 1], im))
            throw InvalidArgument("malformed wavefunction CSV row " + std::to_string(row + 1));
        if (row >= grid.size()) throw InvalidArgument("wavefunction CSV has more rows than grid points");
        psi.amplitudes[row++] = {re, im};
    }
    if (row != grid.size())
        throw InvalidArgument("wavefunction CSV has " + std::to_string(row) + " rows, expected " +
                              std::to_string(grid.size()));
    return psi;
}

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b, 8);
}
void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b, 4);
}
void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw InvalidArgument("truncated binary snapshot");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}
std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw InvalidArgument("truncated binary snapshot");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

constexpr char kMagic[8] = {'B', 'O', 'H', 'M', 'W', 'F', '0', '1'};

}  // namespace

void write_binary(std::ostream& out, const Wavefunction& psi, std::uint64_t config_hash) {
    out.write(kMagic, 8);
    put_u32(out, static_cast<std::uint32_t>(psi.grid.dims()));
    put_u32(out, 0);
    for (const auto& ax : psi.grid.axes()) {
        put_f64(out, ax.min);
        put_f64(out, ax.max);
        put_u64(out, ax.points);
    }
    put_f64(out, psi.time);
    put_u64(out, config_hash);
    for (const cplx& z : psi.amplitudes) {
        put_f64(out, z.real());
        put_f64(out, z.imag());
    }
}

BinarySnapshot read_binary(std::istream& in) {
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
        throw InvalidArgument("not a binary wavefunction snapshot");
    const std::uint32_t dims = get_u32(in);
    get_u32(in);
    if (dims < 1 || dims > 2) throw InvalidArgument("binary snapshot has invalid dims");
    std::vector<Axis> axes;
    for (std::uint32_t a = 0; a < dims; ++a) {
        Axis ax;
        ax.min = get_f64(in);
        ax.max = get_f64(in);
        ax.points = get_u64(in);
        axes.push_back(ax);
    }
    Grid grid(std::move(axes));
    BinarySnapshot snap{Wavefunction{grid, std::vector<cplx>(grid.size()), get_f64(in)}, 0};
    snap.config_hash = get_u64(in);
    for (auto& z : snap.psi.amplitudes) {
        const double re = get_f64(in);
        z = {re, get_f64(in)};
    }
    return snap;
}

}  // namespace bohm::configspace
