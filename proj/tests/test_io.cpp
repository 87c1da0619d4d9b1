#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "bpod/io.hpp"

using namespace bpod;
using namespace bpod::io;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("bpod_io_test_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

dynamics::SnapshotSet make_set(std::mt19937_64& rng) {
    std::normal_distribution<double> dist;
    dynamics::SnapshotSet set;
    set.kind = dynamics::SnapshotKind::adjoint;
    set.times.resize(7);
    for (int j = 0; j < 7; ++j) set.times[j] = j * 0.25;
    set.weights = dynamics::trapezoid_weights(set.times);
    set.data.resize(12, 7);
    for (Index i = 0; i < 12; ++i)
        for (Index j = 0; j < 7; ++j) set.data(i, j) = cdouble(dist(rng), dist(rng));
    return set;
}

}  // namespace

TEST_CASE("snapshot records round-trip bit exactly") {
    TempDir dir;
    std::mt19937_64 rng(77);
    auto set = make_set(rng);

    const std::string path = dir.file("snap.bpr");
    write_records(path, {to_record(set)});
    auto records = read_records(path);
    REQUIRE(records.size() == 1);
    auto back = snapshot_from_record(records[0]);

    CHECK(back.kind == set.kind);
    CHECK(back.times == set.times);
    CHECK(back.weights == set.weights);
    CHECK(back.data == set.data);

    // and the file itself is stable: rewriting produces identical bytes
    const std::string path2 = dir.file("snap2.bpr");
    write_records(path2, {to_record(back)});
    CHECK(fnv1a_file(path) == fnv1a_file(path2));
}

TEST_CASE("record header layout is exactly as documented") {
    TempDir dir;
    std::mt19937_64 rng(78);
    auto set = make_set(rng);
    const std::string path = dir.file("layout.bpr");
    write_records(path, {to_record(set)});

    std::ifstream in(path, std::ios::binary);
    char magic[4];
    in.read(magic, 4);
    CHECK(std::string(magic, 4) == "BPR1");
    uint32_t version;
    in.read(reinterpret_cast<char*>(&version), 4);
    CHECK(version == 1);
    uint8_t kind;
    in.read(reinterpret_cast<char*>(&kind), 1);
    CHECK(kind == 1);  // adjoint
    uint64_t n, m;
    in.read(reinterpret_cast<char*>(&n), 8);
    in.read(reinterpret_cast<char*>(&m), 8);
    CHECK(n == 12);
    CHECK(m == 7);
    const auto expected_size = std::filesystem::file_size(path);
    CHECK(expected_size == 4 + 4 + 1 + 8 + 8 + 7 * 8 + 7 * 8 + 12 * 7 * 16);
}

TEST_CASE("multiple records per file and kind dispatch") {
    TempDir dir;
    std::mt19937_64 rng(79);
    auto set = make_set(rng);

    modal::ModeBasis basis;
    basis.kind = modal::BasisKind::balancing;
    basis.modes = set.data.leftCols(3);
    basis.adjoint_modes = set.data.rightCols(3);
    basis.values = VectorXd::LinSpaced(3, 3.0, 1.0);

    const std::string path = dir.file("mixed.bpr");
    auto records = to_records(basis);
    records.push_back(to_record(set));
    write_records(path, records);

    auto back = read_records(path);
    REQUIRE(back.size() == 3);
    auto basis_back = basis_from_records({back[0], back[1]});
    CHECK(basis_back.kind == modal::BasisKind::balancing);
    CHECK(basis_back.modes == basis.modes);
    CHECK(basis_back.adjoint_modes == basis.adjoint_modes);
    CHECK(basis_back.values == basis.values);
    CHECK(snapshot_from_record(back[2]).data == set.data);
}

TEST_CASE("corrupted and truncated files are rejected") {
    TempDir dir;
    std::mt19937_64 rng(80);
    auto set = make_set(rng);
    const std::string path = dir.file("corrupt.bpr");
    write_records(path, {to_record(set)});

    SUBCASE("bad magic") {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(0);
        f.write("NOPE", 4);
        f.close();
        CHECK_THROWS_AS(read_records(path), IoError);
    }
    SUBCASE("wrong version") {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(4);
        uint32_t v = 9;
        f.write(reinterpret_cast<char*>(&v), 4);
        f.close();
        CHECK_THROWS_AS(read_records(path), IoError);
    }
    SUBCASE("truncation") {
        std::filesystem::resize_file(path, std::filesystem::file_size(path) - 9);
        CHECK_THROWS_AS(read_records(path), IoError);
    }
    SUBCASE("a flipped byte changes the checksum") {
        const uint64_t before = fnv1a_file(path);
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekg(40);
        char c;
        f.get(c);
        f.seekp(40);
        f.put(char(c ^ 0x10));
        f.close();
        CHECK(fnv1a_file(path) != before);
    }
}

TEST_CASE("rom files persist all blocks") {
    TempDir dir;
    std::mt19937_64 rng(81);
    std::normal_distribution<double> dist;
    balancing::ReducedOrderModel rom;
    rom.rank = 4;
    rom.output_rank = 2;
    rom.design_Re = 1234.5;
    rom.provenance = balancing::Provenance::bpod;
    auto rand_mat = [&](Index r, Index c) {
        MatrixXcd M(r, c);
        for (Index i = 0; i < r; ++i)
            for (Index j = 0; j < c; ++j) M(i, j) = cdouble(dist(rng), dist(rng));
        return M;
    };
    rom.Ar = rand_mat(4, 4);
    rom.Br = rand_mat(4, 1);
    rom.Cr = rand_mat(2, 4);
    rom.Ar_conv = rand_mat(4, 4);
    rom.Ar_diff = rand_mat(4, 4);
    rom.recon = rand_mat(10, 2);

    const std::string path = dir.file("model.rom");
    write_rom(path, rom);
    auto back = read_rom(path);
    CHECK(back.rank == 4);
    CHECK(back.output_rank == 2);
    CHECK(back.design_Re == 1234.5);
    CHECK(back.provenance == balancing::Provenance::bpod);
    CHECK(back.Ar == rom.Ar);
    CHECK(back.Br == rom.Br);
    CHECK(back.Cr == rom.Cr);
    CHECK(back.Ar_conv == rom.Ar_conv);
    CHECK(back.Ar_diff == rom.Ar_diff);
    CHECK(back.recon == rom.recon);
}
