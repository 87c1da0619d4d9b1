#include "bpod/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "the BPR1 container is defined little-endian");

namespace bpod::io {

namespace {

void put_bytes(std::ostream& out, const void* p, size_t size) {
    out.write(static_cast<const char*>(p), std::streamsize(size));
    if (!out) throw IoError("write failed");
}

void get_bytes(std::istream& in, void* p, size_t size) {
    in.read(static_cast<char*>(p), std::streamsize(size));
    if (in.gcount() != std::streamsize(size)) throw IoError("truncated record");
}

template <typename T>
void put_pod(std::ostream& out, T v) {
    put_bytes(out, &v, sizeof(T));
}

template <typename T>
T get_pod(std::istream& in) {
    T v;
    get_bytes(in, &v, sizeof(T));
    return v;
}

}  // namespace

void write_record(std::ostream& out, const Record& record) {
    const Index n = record.data.rows();
    const Index m = record.data.cols();
    if (record.times.size() != m || record.weights.size() != m) {
        throw InvalidParameter("write_record: times/weights must have one entry per column");
    }
    put_bytes(out, "BPR1", 4);
    put_pod<uint32_t>(out, kFormatVersion);
    put_pod<uint8_t>(out, static_cast<uint8_t>(record.kind));
    put_pod<uint64_t>(out, uint64_t(n));
    put_pod<uint64_t>(out, uint64_t(m));
    put_bytes(out, record.times.data(), sizeof(double) * m);
    put_bytes(out, record.weights.data(), sizeof(double) * m);
    // column-major complex (re, im) pairs; Eigen's storage is already that
    put_bytes(out, record.data.data(), sizeof(cdouble) * size_t(n) * size_t(m));
}

Record read_record(std::istream& in) {
    char magic[4];
    get_bytes(in, magic, 4);
    if (std::memcmp(magic, "BPR1", 4) != 0) throw IoError("bad magic, not a BPR1 record");
    const uint32_t version = get_pod<uint32_t>(in);
    if (version != kFormatVersion) {
        throw IoError("unsupported BPR1 version " + std::to_string(version) +
                      " (expected " + std::to_string(kFormatVersion) + ")");
    }
    Record record;
    record.kind = static_cast<RecordKind>(get_pod<uint8_t>(in));
    const uint64_t n = get_pod<uint64_t>(in);
    const uint64_t m = get_pod<uint64_t>(in);
    if (n > (1ull << 32) || m > (1ull << 32)) throw IoError("implausible record size");
    record.times.resize(Index(m));
    record.weights.resize(Index(m));
    record.data.resize(Index(n), Index(m));
    get_bytes(in, record.times.data(), sizeof(double) * m);
    get_bytes(in, record.weights.data(), sizeof(double) * m);
    get_bytes(in, record.data.data(), sizeof(cdouble) * n * m);
    return record;
}

void write_records(const std::string& path, const std::vector<Record>& records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    for (const auto& r : records) write_record(out, r);
}

std::vector<Record> read_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::vector<Record> records;
    while (in.peek() != EOF) records.push_back(read_record(in));
    return records;
}

Record to_record(const dynamics::SnapshotSet& set) {
    Record r;
    r.kind = set.kind == dynamics::SnapshotKind::direct ? RecordKind::direct_snapshots
                                                        : RecordKind::adjoint_snapshots;
    r.times = set.times;
    r.weights = set.weights;
    r.data = set.data;
    return r;
}

dynamics::SnapshotSet snapshot_from_record(const Record& record) {
    if (record.kind != RecordKind::direct_snapshots &&
        record.kind != RecordKind::adjoint_snapshots) {
        throw IoError("record does not hold snapshots");
    }
    dynamics::SnapshotSet set;
    set.kind = record.kind == RecordKind::direct_snapshots
                   ? dynamics::SnapshotKind::direct
                   : dynamics::SnapshotKind::adjoint;
    set.times = record.times;
    set.weights = record.weights;
    set.data = record.data;
    return set;
}

Record to_record(const modal::ModeBasis& basis) {
    Record r;
    r.kind = RecordKind::pod_basis;
    r.times = basis.values.head(basis.rank());
    r.weights = VectorXd::Ones(basis.rank());
    r.weights[0] = basis.total_energy > 0.0 ? basis.total_energy : 1.0;
    r.data = basis.modes;
    return r;
}

std::vector<Record> to_records(const modal::ModeBasis& basis) {
    if (basis.kind == modal::BasisKind::pod) return {to_record(basis)};
    Record modes;
    modes.kind = RecordKind::balancing_modes;
    modes.times = basis.values.head(basis.rank());
    modes.weights = VectorXd::Ones(basis.rank());
    modes.data = basis.modes;
    Record adj = modes;
    adj.kind = RecordKind::adjoint_modes;
    adj.data = basis.adjoint_modes;
    return {modes, adj};
}

modal::ModeBasis basis_from_records(const std::vector<Record>& records) {
    if (records.empty()) throw IoError("no records for mode basis");
    modal::ModeBasis basis;
    const Record& first = records.front();
    basis.values = first.times;
    basis.modes = first.data;
    if (first.kind == RecordKind::pod_basis) {
        basis.kind = modal::BasisKind::pod;
        basis.total_energy = first.weights.size() ? first.weights[0] : 0.0;
    } else if (first.kind == RecordKind::balancing_modes) {
        basis.kind = modal::BasisKind::balancing;
        if (records.size() < 2 || records[1].kind != RecordKind::adjoint_modes) {
            throw IoError("balancing basis is missing its adjoint-mode record");
        }
        basis.adjoint_modes = records[1].data;
    } else {
        throw IoError("records do not hold a mode basis");
    }
    return basis;
}

namespace {

const char* provenance_name(balancing::Provenance p) {
    switch (p) {
        case balancing::Provenance::pod: return "pod";
        case balancing::Provenance::bpod: return "bpod";
        case balancing::Provenance::exact_bt: return "exact_bt";
    }
    return "?";
}

balancing::Provenance provenance_from(const std::string& s) {
    if (s == "pod") return balancing::Provenance::pod;
    if (s == "bpod") return balancing::Provenance::bpod;
    if (s == "exact_bt") return balancing::Provenance::exact_bt;
    throw IoError("unknown rom provenance: " + s);
}

Record matrix_record(const MatrixXcd& M) {
    Record r;
    r.kind = RecordKind::matrix;
    r.times = VectorXd::Zero(M.cols());
    r.weights = VectorXd::Ones(M.cols());
    r.data = M;
    return r;
}

}  // namespace

void write_rom(const std::string& path, const balancing::ReducedOrderModel& rom) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.precision(17);
    out << "bpod-rom 1\n"
        << "rank: " << rom.rank << "\n"
        << "output_rank: " << rom.output_rank << "\n"
        << "design_Re: " << rom.design_Re << "\n"
        << "provenance: " << provenance_name(rom.provenance) << "\n"
        << "blocks: Ar Br Cr Ar_conv Ar_diff recon\n"
        << "end-header\n";
    write_record(out, matrix_record(rom.Ar));
    write_record(out, matrix_record(rom.Br));
    write_record(out, matrix_record(rom.Cr));
    write_record(out, matrix_record(rom.Ar_conv));
    write_record(out, matrix_record(rom.Ar_diff));
    write_record(out, matrix_record(rom.recon.size() ? rom.recon : MatrixXcd(0, 0)));
}

balancing::ReducedOrderModel read_rom(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("bpod-rom", 0) != 0) {
        throw IoError("not a bpod rom file: " + path);
    }
    balancing::ReducedOrderModel rom;
    while (std::getline(in, line) && line != "end-header") {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "rank:") ls >> rom.rank;
        else if (key == "output_rank:") ls >> rom.output_rank;
        else if (key == "design_Re:") ls >> rom.design_Re;
        else if (key == "provenance:") {
            std::string v;
            ls >> v;
            rom.provenance = provenance_from(v);
        }
    }
    rom.Ar = read_record(in).data;
    rom.Br = read_record(in).data;
    rom.Cr = read_record(in).data;
    rom.Ar_conv = read_record(in).data;
    rom.Ar_diff = read_record(in).data;
    rom.recon = read_record(in).data;
    return rom;
}

uint64_t fnv1a(const void* data, size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    uint64_t h = 0xcbf29ce484222325ull;
    for (size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    uint64_t h = 0xcbf29ce484222325ull;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

}  // namespace bpod::io
