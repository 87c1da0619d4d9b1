#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bpod/balancing.hpp"
#include "bpod/dynamics.hpp"
#include "bpod/modal.hpp"
#include "bpod/types.hpp"

namespace bpod::io {

// One "BPR1" record:
//   magic "BPR1" | version u32 | kind u8 | n u64 | m u64 |
//   times m*f64 | weights m*f64 | data n*m complex128 column-major (re, im)
// all little-endian, no padding.  Files may hold several records back to back.
inline constexpr uint32_t kFormatVersion = 1;

enum class RecordKind : uint8_t {
    direct_snapshots = 0,
    adjoint_snapshots = 1,
    pod_basis = 2,
    balancing_modes = 3,
    adjoint_modes = 4,
    matrix = 5,
    field_dims = 6,
    field_v = 7,
    field_eta = 8,
};

struct Record {
    RecordKind kind = RecordKind::matrix;
    VectorXd times;    // per-column metadata (sample times / mode values)
    VectorXd weights;  // per-column quadrature weights (ones when unused)
    MatrixXcd data;
};

void write_record(std::ostream& out, const Record& record);
Record read_record(std::istream& in);

void write_records(const std::string& path, const std::vector<Record>& records);
std::vector<Record> read_records(const std::string& path);

// Snapshot sets round-trip through single records.
Record to_record(const dynamics::SnapshotSet& set);
dynamics::SnapshotSet snapshot_from_record(const Record& record);

Record to_record(const modal::ModeBasis& basis);          // pod kind
std::vector<Record> to_records(const modal::ModeBasis& basis);  // any kind
modal::ModeBasis basis_from_records(const std::vector<Record>& records);

// Reduced models: text header (ranks, Re, provenance) followed by the matrix
// blocks Ar, Br, Cr, Ar_conv, Ar_diff, recon in BPR1 records.
void write_rom(const std::string& path, const balancing::ReducedOrderModel& rom);
balancing::ReducedOrderModel read_rom(const std::string& path);

uint64_t fnv1a(const void* data, size_t size);
uint64_t fnv1a_file(const std::string& path);

}  // namespace bpod::io
