#include "vrlab/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace vrlab {

namespace {

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double get_d(const std::map<std::string, std::string>& h, const std::string& key,
             const std::string& path) {
    auto it = h.find(key);
    if (it == h.end())
        throw std::runtime_error(path + ": missing header key '" + key + "'");
    return std::stod(it->second);
}

} // namespace

// Payloads are defined little-endian; byte-swap on a big-endian host.
void write_payload(std::ostream& out, const std::vector<double>& v) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(double)));
    } else {
        for (double x : v) {
            unsigned char b[8];
            std::memcpy(b, &x, 8);
            std::swap(b[0], b[7]); std::swap(b[1], b[6]);
            std::swap(b[2], b[5]); std::swap(b[3], b[4]);
            out.write(reinterpret_cast<const char*>(b), 8);
        }
    }
}

void read_payload(std::istream& in, std::vector<double>& v, const std::string& path) {
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(v.size() * sizeof(double)));
    } else {
        for (double& x : v) {
            unsigned char b[8];
            in.read(reinterpret_cast<char*>(b), 8);
            std::swap(b[0], b[7]); std::swap(b[1], b[6]);
            std::swap(b[2], b[5]); std::swap(b[3], b[4]);
            std::memcpy(&x, b, 8);
        }
    }
    if (!in)
        throw std::runtime_error(path + ": truncated payload");
}

std::map<std::string, std::string> parse_header(std::istream& in,
                                                const std::string& magic,
                                                const std::string& path) {
    std::string line;
    if (!std::getline(in, line) || line != magic)
        throw std::runtime_error(path + ": bad magic, expected '" + magic + "'");
    std::map<std::string, std::string> h;
    while (std::getline(in, line)) {
        if (line == "end_header") return h;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ": malformed header line '" + line + "'");
        auto trim = [](std::string s) {
            auto a = s.find_first_not_of(" \t");
            auto b = s.find_last_not_of(" \t\r");
            return (a == std::string::npos) ? std::string() : s.substr(a, b - a + 1);
        };
        h[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    throw std::runtime_error(path + ": header not terminated by end_header");
}

void write_snapshot(const std::string& path, const VorticityField& f,
                    const SnapshotMeta& meta) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("write_snapshot: cannot open " + path);
    const Grid& g = f.grid;
    out << "VRLAB1\n"
        << "nr = " << g.nr << "\n"
        << "nz = " << g.nz << "\n"
        << "r_min = " << fmt_double(g.r_min) << "\n"
        << "r_max = " << fmt_double(g.r_max) << "\n"
        << "z_min = " << fmt_double(g.z_min) << "\n"
        << "z_max = " << fmt_double(g.z_max) << "\n"
        << "time = " << fmt_double(meta.time) << "\n"
        << "nu = " << fmt_double(meta.phys.nu) << "\n"
        << "gamma_circ = " << fmt_double(meta.phys.gamma_circ) << "\n"
        << "rbar = " << fmt_double(meta.phys.rbar) << "\n"
        << "zbar = " << fmt_double(meta.phys.zbar) << "\n"
        << "step = " << meta.step << "\n"
        << "config_hash = " << (meta.config_hash.empty() ? "-" : meta.config_hash) << "\n"
        << "end_header\n";
    write_payload(out, f.w);
    if (!out)
        throw std::runtime_error("write_snapshot: write failed for " + path);
}

VorticityField read_snapshot(const std::string& path, SnapshotMeta* meta) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("read_snapshot: cannot open " + path);
    auto h = parse_header(in, "VRLAB1", path);

    int nr = static_cast<int>(get_d(h, "nr", path));
    int nz = static_cast<int>(get_d(h, "nz", path));
    double rmin = h.count("r_min") ? get_d(h, "r_min", path) : 0.0;
    Grid g = build_offset_grid(rmin, get_d(h, "r_max", path),
                               get_d(h, "z_min", path), get_d(h, "z_max", path),
                               nr, nz);
    VorticityField f(g);
    read_payload(in, f.w, path);

    if (meta) {
        meta->time = get_d(h, "time", path);
        meta->phys.nu = get_d(h, "nu", path);
        meta->phys.gamma_circ = get_d(h, "gamma_circ", path);
        meta->phys.rbar = get_d(h, "rbar", path);
        meta->phys.zbar = get_d(h, "zbar", path);
        meta->step = h.count("step") ? static_cast<long>(get_d(h, "step", path)) : -1;
        meta->config_hash = h.count("config_hash") ? h.at("config_hash") : "-";
    }
    return f;
}

} // namespace vrlab
