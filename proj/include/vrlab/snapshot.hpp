#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "vrlab/field.hpp"
#include "vrlab/params.hpp"

namespace vrlab {

// Metadata carried alongside a stored vorticity field.
struct SnapshotMeta {
    double time = 0.0;
    PhysicalParams phys;
    std::string config_hash = "-";
    long step = -1;
};

// Snapshot files: a text header introduced by the magic line "VRLAB1",
// "key = value" lines, an "end_header" line, then the (nr+1)*(nz+1) node
// values as little-endian float64, row-major with the radial index outermost.
void write_snapshot(const std::string& path, const VorticityField& f,
                    const SnapshotMeta& meta);

VorticityField read_snapshot(const std::string& path, SnapshotMeta* meta = nullptr);

// Shared helpers for the other structured-text formats (kernel tables,
// checkpoint indexes). parse_header reads up to end_header and returns the
// key-value map; the magic line must match or a runtime_error names the file.
std::map<std::string, std::string> parse_header(std::istream& in,
                                                const std::string& magic,
                                                const std::string& path);

// Little-endian float64 payload I/O (byte-swapped on big-endian hosts).
void write_payload(std::ostream& out, const std::vector<double>& v);
void read_payload(std::istream& in, std::vector<double>& v,
                  const std::string& path);

} // namespace vrlab
