#include "dicebench/grid_io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace dicebench {

namespace {

constexpr char kMagic[4] = {'D', 'G', 'R', 'D'};
constexpr std::uint8_t kVersion = 1;

void put_u32_le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f64_le(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
    }
}

std::uint32_t get_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) |
           (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
}

double get_f64_le(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
        bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    }
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoFailure("cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    if (!in.good() && !in.eof()) {
        throw IoFailure("read error on " + path);
    }
    return std::move(ss).str();
}

} // namespace

Grid read_grid(const std::string& path) {
    std::string data = slurp(path);
    const auto* p = reinterpret_cast<const unsigned char*>(data.data());
    std::size_t len = data.size();
    if (len < 6 || std::memcmp(p, kMagic, 4) != 0) {
        throw MalformedHeader(path + ": not a DGRD file");
    }
    if (p[4] != kVersion) {
        throw MalformedHeader(path + ": unsupported DGRD version");
    }
    std::size_t ndims = p[5];
    if (ndims == 0) {
        throw MalformedHeader(path + ": zero dimensions");
    }
    std::size_t header = 6 + 4 * ndims;
    if (len < header) {
        throw MalformedHeader(path + ": truncated extents");
    }
    std::vector<std::size_t> dims(ndims);
    for (std::size_t i = 0; i < ndims; ++i) {
        dims[i] = get_u32_le(p + 6 + 4 * i);
        if (dims[i] == 0) {
            throw MalformedHeader(path + ": zero extent");
        }
    }
    std::size_t n = cell_count(dims);
    if (len != header + 8 * n) {
        throw MalformedHeader(path + ": payload size does not match extents");
    }
    std::vector<double> cells(n);
    for (std::size_t i = 0; i < n; ++i) {
        cells[i] = get_f64_le(p + header + 8 * i);
    }
    return Grid(std::move(dims), std::move(cells));
}

void write_grid(const Grid& g, const std::string& path) {
    std::string out;
    out.reserve(6 + 4 * g.dims.size() + 8 * g.size());
    out.append(kMagic, 4);
    out.push_back(static_cast<char>(kVersion));
    if (g.dims.size() > 255) {
        throw MalformedHeader("too many dimensions for DGRD header");
    }
    out.push_back(static_cast<char>(g.dims.size()));
    for (std::size_t d : g.dims) {
        if (d > 0xffffffffULL) {
            throw MalformedHeader("extent too large for DGRD header");
        }
        put_u32_le(out, static_cast<std::uint32_t>(d));
    }
    for (double v : g.cells) {
        put_f64_le(out, v);
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw IoFailure("cannot open " + path + " for writing");
    }
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f.good()) {
        throw IoFailure("write error on " + path);
    }
}

MarginalMap read_marginal(const std::string& path) {
    return MarginalMap(read_grid(path));
}

HardSegmentation read_hard_segmentation(const std::string& path) {
    return HardSegmentation(read_grid(path));
}

Grid read_grid_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoFailure("cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw MalformedHeader(path + ": empty file");
    }
    if (line.rfind("dims=", 0) != 0) {
        throw MalformedHeader(path + ": first line must be dims=d1xd2");
    }
    std::vector<std::size_t> dims = parse_dims(line.substr(5));
    if (dims.size() != 2) {
        throw MalformedHeader(path + ": CSV grids must be 2D");
    }
    std::vector<double> cells;
    cells.reserve(cell_count(dims));
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::stringstream row(line);
        std::string field;
        while (std::getline(row, field, ',')) {
            try {
                std::size_t pos = 0;
                double v = std::stod(field, &pos);
                cells.push_back(v);
            } catch (const std::exception&) {
                throw MalformedHeader(path + ": bad cell value '" + field + "'");
            }
        }
    }
    if (cells.size() != cell_count(dims)) {
        throw MalformedHeader(path + ": cell count does not match dims line");
    }
    return Grid(std::move(dims), std::move(cells));
}

void write_grid_csv(const Grid& g, const std::string& path) {
    if (g.dims.size() != 2) {
        throw MalformedHeader("CSV export supports 2D grids only");
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoFailure("cannot open " + path + " for writing");
    }
    out << "dims=" << g.dims[0] << "x" << g.dims[1] << "\n";
    char buf[32];
    for (std::size_t r = 0; r < g.dims[0]; ++r) {
        for (std::size_t c = 0; c < g.dims[1]; ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", g.cells[r * g.dims[1] + c]);
            out << (c ? "," : "") << buf;
        }
        out << "\n";
    }
    if (!out.good()) {
        throw IoFailure("write error on " + path);
    }
}

std::vector<std::size_t> parse_dims(const std::string& text) {
    std::vector<std::size_t> dims;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, 'x')) {
        try {
            std::size_t pos = 0;
            unsigned long long v = std::stoull(part, &pos);
            if (pos != part.size() || v == 0) {
                throw std::invalid_argument(part);
            }
            dims.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw MalformedHeader("bad dims spec '" + text + "'");
        }
    }
    if (dims.empty()) {
        throw MalformedHeader("bad dims spec '" + text + "'");
    }
    return dims;
}

} // namespace dicebench
