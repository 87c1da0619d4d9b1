#include "bpod/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <functional>
#include <sstream>

#include <Eigen/Dense>

#include "bpod/analysis.hpp"
#include "bpod/balancing.hpp"
#include "bpod/channel.hpp"
#include "bpod/dynamics.hpp"
#include "bpod/field3d.hpp"
#include "bpod/io.hpp"
#include "bpod/linalg.hpp"
#include "bpod/modal.hpp"

namespace bpod::pipeline {

namespace fs = std::filesystem;
using config::CaseConfig;
using config::CaseKind;

namespace {

std::string hex64(uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------- csv input

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return int(i);
        throw IoError("csv: no column named " + name);
    }
    VectorXd numbers(const std::string& name) const {
        const int c = column(name);
        VectorXd out(rows.size());
        for (size_t r = 0; r < rows.size(); ++r) out[Index(r)] = std::stod(rows[r][c]);
        return out;
    }
};

Csv read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    Csv csv;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (first) {
            csv.header = cells;
            first = false;
        } else {
            csv.rows.push_back(cells);
        }
    }
    return csv;
}

// --------------------------------------------------------------- rom labels

std::string pod_label(int r) { return "pod_r" + std::to_string(r); }
std::string bpod_label(int s, int r) {
    return "bpod_s" + std::to_string(s) + "_r" + std::to_string(r);
}
std::string bt_label(int r) { return "bt_r" + std::to_string(r); }

// ------------------------------------------------------------- shared math

// ROM trajectory on the run's sample times, with the integrator step refined
// to the ROM's own stability limit (it must divide the run step).
MatrixXcd rom_trajectory(const MatrixXcd& Ar, const MatrixXcd& Br,
                         const VectorXd& times, double base_dt) {
    const double safe = dynamics::stable_dt(Ar);
    const long k = std::max(1L, long(std::ceil(base_dt / safe - 1e-12)));
    auto run = dynamics::propagate(Ar, VectorXcd(Br.col(0)), base_dt / k, times);
    MatrixXcd a(run.data.rows(), run.count());
    for (Index j = 0; j < run.count(); ++j) a.col(j) = run.unscaled(j);
    return a;
}

// Pair-boundary adjustment: bump a requested cut upward until the value gap
// below the cut exceeds the tie tolerance.
int pair_adjusted_rank(const VectorXd& values, int r, bool force, double tie_tol = 0.01) {
    if (force) return std::min<int>(r, int(values.size()));
    int out = std::min<int>(r, int(values.size()));
    while (out < values.size() &&
           values[out] > (1.0 - tie_tol) * values[out - 1]) {
        ++out;
    }
    return out;
}

// ------------------------------------------------------------ manifest etc.

std::string manifest_path(const std::string& workdir) {
    return (fs::path(workdir) / "manifest.txt").string();
}

struct StageCtx {
    const CaseConfig& cfg;
    std::string workdir;
    Manifest* manifest;
    std::ostream* log;
    std::string chain;  // accumulated upstream hash

    std::string abs(const std::string& rel) const {
        return (fs::path(workdir) / rel).string();
    }
    std::ostream& out() const { return *log; }
};

void record_artifacts(StageCtx& ctx, const std::vector<std::string>& rel_paths) {
    for (const auto& rel : rel_paths) {
        ctx.manifest->set("artifact." + rel, hex64(io::fnv1a_file(ctx.abs(rel))));
    }
}

bool artifacts_ok(const StageCtx& ctx, const std::vector<std::string>& rel_paths) {
    for (const auto& rel : rel_paths) {
        const std::string key = "artifact." + rel;
        if (!ctx.manifest->has(key)) return false;
        if (!fs::exists(ctx.abs(rel))) return false;
        if (ctx.manifest->get(key) != hex64(io::fnv1a_file(ctx.abs(rel)))) return false;
    }
    return true;
}

}  // namespace

Manifest Manifest::load(const std::string& workdir) {
    Manifest m;
    std::ifstream in(manifest_path(workdir));
    if (!in) return m;
    std::string line;
    while (std::getline(in, line)) {
        const auto colon = line.find(": ");
        if (colon == std::string::npos) continue;
        m.kv[line.substr(0, colon)] = line.substr(colon + 2);
    }
    return m;
}

void Manifest::save(const std::string& workdir) const {
    std::ofstream out(manifest_path(workdir), std::ios::trunc);
    if (!out) throw IoError("cannot write manifest in " + workdir);
    for (const auto& [k, v] : kv) out << k << ": " << v << "\n";
}

std::string Manifest::get(const std::string& key) const {
    auto it = kv.find(key);
    if (it == kv.end()) throw IoError("manifest: missing key " + key);
    return it->second;
}

const std::vector<std::string>& stage_names() {
    static const std::vector<std::string> names{"build",  "simulate", "pod",     "adjoint",
                                                "bpod",   "reduce",   "evaluate"};
    return names;
}

namespace {

// Stacked real data is persisted in its complex per-wavenumber form; the two
// layouts hold identical bytes per column.
MatrixXcd complexify(const field3d::GlobalSystem& sys, const MatrixXd& X) {
    const Index nb = sys.block_complex_dim;
    MatrixXcd C(X.rows() / 2, X.cols());
    for (size_t e = 0; e < sys.entries.size(); ++e) {
        C.middleRows(sys.offsets[e] / 2, nb).real() = X.middleRows(sys.offsets[e], nb);
        C.middleRows(sys.offsets[e] / 2, nb).imag() =
            X.middleRows(sys.offsets[e] + nb, nb);
    }
    return C;
}

MatrixXd realify(const field3d::GlobalSystem& sys, const MatrixXcd& C) {
    const Index nb = sys.block_complex_dim;
    MatrixXd X(C.rows() * 2, C.cols());
    for (size_t e = 0; e < sys.entries.size(); ++e) {
        X.middleRows(sys.offsets[e], nb) = C.middleRows(sys.offsets[e] / 2, nb).real();
        X.middleRows(sys.offsets[e] + nb, nb) =
            C.middleRows(sys.offsets[e] / 2, nb).imag();
    }
    return X;
}

// ================================================================ 1-D case
//
// The single-wavenumber case analyzes the real field Re{q(y) e^(i(ax+bz))}
// through the same stacked representation as the 3-D case, so POD/BPOD mode
// counts match the physical-space data (each complex mode is a traveling
// pair of real modes).

MatrixXcd realify_operator(const MatrixXcd& A) {
    const Index n = A.rows();
    MatrixXcd out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = A.real().cast<cdouble>();
    out.topRightCorner(n, n) = (-A.imag()).cast<cdouble>();
    out.bottomLeftCorner(n, n) = A.imag().cast<cdouble>();
    out.bottomRightCorner(n, n) = A.real().cast<cdouble>();
    return out;
}

struct SingleCase {
    StageCtx& ctx;
    const CaseConfig& cfg;

    explicit SingleCase(StageCtx& c) : ctx(c), cfg(c.cfg) {}

    field3d::GlobalSystem system(double re) const {
        return field3d::single_wavenumber_system({cfg.alpha, cfg.beta}, re,
                                                 spectral::chebyshev_grid(cfg.N));
    }

    double run_dt() const { return std::stod(ctx.manifest->get("run.dt")); }
    double run_T() const { return std::stod(ctx.manifest->get("run.T")); }

    VectorXd load_b(const field3d::GlobalSystem& sys) const {
        auto records = io::read_records(ctx.abs("snapshots/b.bpr"));
        return realify(sys, records.at(0).data);
    }
    dynamics::SnapshotSetReal load_direct(const field3d::GlobalSystem& sys) const {
        auto rec = io::read_records(ctx.abs("snapshots/direct.bpr")).at(0);
        dynamics::SnapshotSetReal set;
        set.times = rec.times;
        set.weights = rec.weights;
        set.data = realify(sys, rec.data);
        return set;
    }
    std::vector<dynamics::SnapshotSetReal> load_adjoint(
        const field3d::GlobalSystem& sys) const {
        std::vector<dynamics::SnapshotSetReal> runs;
        for (const auto& rec : io::read_records(ctx.abs("snapshots/adjoint.bpr"))) {
            dynamics::SnapshotSetReal set;
            set.kind = dynamics::SnapshotKind::adjoint;
            set.times = rec.times;
            set.weights = rec.weights;
            set.data = realify(sys, rec.data);
            runs.push_back(std::move(set));
        }
        return runs;
    }
    modal::ModeBasisReal load_pod(const field3d::GlobalSystem& sys) const {
        auto records = io::read_records(ctx.abs("modes/pod.bpr"));
        modal::ModeBasisReal basis;
        basis.kind = modal::BasisKind::pod;
        basis.values = records.at(0).times;
        basis.total_energy = records.at(0).weights[0];
        basis.modes = realify(sys, records.at(0).data);
        return basis;
    }
    modal::ModeBasisReal load_bpod(const field3d::GlobalSystem& sys, int s) const {
        auto records =
            io::read_records(ctx.abs("modes/bpod_s" + std::to_string(s) + ".bpr"));
        modal::ModeBasisReal basis;
        basis.kind = modal::BasisKind::balancing;
        basis.values = records.at(0).times;
        basis.modes = realify(sys, records.at(0).data);
        basis.adjoint_modes = realify(sys, records.at(1).data);
        return basis;
    }

    int smax() const { return cfg.output_ranks.empty() ? 0 : cfg.output_ranks.back(); }

    balancing::ExactBtSolver oracle(const field3d::GlobalSystem& sys,
                                    const VectorXd& b) const {
        const auto& m = sys.blocks[0];
        const Index n = m.state_dim();
        MatrixXd E2 = MatrixXd::Zero(2 * n, 2 * n);
        E2.topLeftCorner(n, n) = m.E_weight;
        E2.bottomRightCorner(n, n) = m.E_weight;
        return balancing::ExactBtSolver(realify_operator(m.A), realify_operator(m.A_conv),
                                        realify_operator(m.A_diff), m.reynolds,
                                        b.cast<cdouble>(), E2);
    }

    void build() {
        auto sys = system(cfg.reynolds);
        auto opt = channel::optimal_perturbation(sys.blocks[0], 0.0);
        const VectorXd b = field3d::stack(sys, {opt.state});
        const double dt = cfg.dt > 0.0 ? cfg.dt : field3d::stable_dt(sys);
        ctx.manifest->set("run.dt", fmt(dt));

        io::Record rec;
        rec.kind = io::RecordKind::matrix;
        rec.data = complexify(sys, b);
        rec.times = VectorXd::Zero(1);
        rec.weights = VectorXd::Ones(1);
        io::write_records(ctx.abs("snapshots/b.bpr"), {rec});

        analysis::write_energy_csv(ctx.abs("reports/growth.csv"), opt.curve.times,
                                   {{"G", opt.curve.growth}});
        ctx.out() << "[build] stacked dim=" << sys.stacked_dim() << " dt=" << dt
                  << " G_max=" << opt.curve.peak_growth << " at t=" << opt.curve.peak_time
                  << "\n";
    }

    void simulate() {
        auto sys = system(cfg.reynolds);
        dynamics::ImpulseRunConfig rc;
        rc.snapshot_count = cfg.snapshot_count;
        rc.dt = run_dt();
        rc.T = cfg.T;
        rc.decay_threshold = cfg.decay_threshold;
        rc.two_phase = cfg.two_phase;
        rc.fine_fraction = cfg.fine_fraction;
        rc.fine_window = cfg.fine_window;
        auto set = field3d::evolve_field(sys, load_b(sys), rc);
        for (const auto& w : set.warnings) ctx.out() << "[simulate] warning: " << w << "\n";
        io::Record rec;
        rec.kind = io::RecordKind::direct_snapshots;
        rec.times = set.times;
        rec.weights = set.weights;
        rec.data = complexify(sys, set.data);
        io::write_records(ctx.abs("snapshots/direct.bpr"), {rec});
        ctx.manifest->set("run.T", fmt(set.times[set.count() - 1]));
        ctx.out() << "[simulate] " << set.count() << " snapshots to t="
                  << set.times[set.count() - 1] << (set.decayed ? "" : " (not decayed)")
                  << "\n";
    }

    void pod() {
        auto sys = system(cfg.reynolds);
        auto direct = load_direct(sys);
        auto We = field3d::e_weight(sys);
        auto basis = modal::pod<double>(direct.data, We);
        io::Record rec;
        rec.kind = io::RecordKind::pod_basis;
        rec.times = basis.values;
        rec.weights = VectorXd::Ones(basis.rank());
        rec.weights[0] = basis.total_energy;
        rec.data = complexify(sys, basis.modes);
        io::write_records(ctx.abs("modes/pod.bpr"), {rec});
        analysis::write_values_csv(ctx.abs("reports/pod_eigenvalues.csv"), basis.values,
                                   basis.total_energy);
        ctx.out() << "[pod] rank=" << basis.rank()
                  << " first-pair=" << 100.0 * basis.energy_fraction(2) << "%\n";
    }

    void adjoint() {
        auto sys = system(cfg.reynolds);
        dynamics::ImpulseRunConfig rc;
        rc.snapshot_count = cfg.adjoint_count;
        rc.dt = run_dt();
        rc.T = run_T();
        auto runs = field3d::adjoint_impulse_runs(sys, load_pod(sys), smax(), rc);
        std::vector<io::Record> records;
        for (const auto& run : runs) {
            io::Record rec;
            rec.kind = io::RecordKind::adjoint_snapshots;
            rec.times = run.times;
            rec.weights = run.weights;
            rec.data = complexify(sys, run.data);
            records.push_back(std::move(rec));
        }
        io::write_records(ctx.abs("snapshots/adjoint.bpr"), records);
        ctx.out() << "[adjoint] " << runs.size() << " runs, " << runs[0].count()
                  << " snapshots each\n";
    }

    void bpod() {
        auto sys = system(cfg.reynolds);
        auto direct = load_direct(sys);
        auto runs = load_adjoint(sys);
        auto Wm = field3d::m_weight(sys);
        for (int s : cfg.output_ranks) {
            std::vector<dynamics::SnapshotSetReal> head(runs.begin(), runs.begin() + s);
            MatrixXd Y = dynamics::stack_columns(head);
            auto basis = balancing::bpod<double>(direct.data, Y, Wm, 0);
            for (const auto& w : basis.warnings) ctx.out() << "[bpod] " << w << "\n";
            io::Record modes, adj;
            modes.kind = io::RecordKind::balancing_modes;
            modes.times = basis.values.head(basis.rank());
            modes.weights = VectorXd::Ones(basis.rank());
            modes.data = complexify(sys, basis.modes);
            adj.kind = io::RecordKind::adjoint_modes;
            adj.times = modes.times;
            adj.weights = modes.weights;
            adj.data = complexify(sys, basis.adjoint_modes);
            io::write_records(ctx.abs("modes/bpod_s" + std::to_string(s) + ".bpr"),
                              {modes, adj});
            analysis::write_values_csv(
                ctx.abs("reports/hsv_s" + std::to_string(s) + ".csv"), basis.values,
                basis.values.sum());
            ctx.out() << "[bpod] s=" << s << " rank=" << basis.rank()
                      << " sigma1=" << basis.values[0] << "\n";
        }

        // Lyapunov oracle Hankel values for the comparisons and bounds, both
        // for the full-state energy output and for each output projection
        // (the latter is the system the snapshot procedure approximates).
        const VectorXd b = load_b(sys);
        auto solver = oracle(sys, b);
        analysis::write_values_csv(ctx.abs("reports/hsv_oracle.csv"),
                                   solver.gramians().hsv, solver.gramians().hsv.sum());
        {
            const auto& m = sys.blocks[0];
            const Index nb = m.state_dim();
            MatrixXcd Ast = realify_operator(m.A);
            MatrixXd E2 = MatrixXd::Zero(2 * nb, 2 * nb);
            E2.topLeftCorner(nb, nb) = m.E_weight;
            E2.bottomRightCorner(nb, nb) = m.E_weight;
            const MatrixXcd Lc = linalg::psd_factor(solver.gramians().Wc);
            auto pod_basis = load_pod(sys);
            for (int s : cfg.output_ranks) {
                MatrixXd Cop = (E2 * pod_basis.modes.leftCols(s)).transpose();
                MatrixXcd CtC = (Cop.transpose() * Cop).cast<cdouble>();
                MatrixXcd Wo = linalg::solve_lyapunov(Ast.adjoint(), CtC);
                MatrixXcd Lo = linalg::psd_factor(Wo);
                Eigen::BDCSVD<MatrixXcd> svd(Lo.adjoint() * Lc);
                analysis::write_values_csv(
                    ctx.abs("reports/hsv_oracle_s" + std::to_string(s) + ".csv"),
                    svd.singularValues(), svd.singularValues().sum());
            }
        }
        ctx.manifest->set("oracle.residual_c", fmt(solver.gramians().residual_c));
        ctx.manifest->set("oracle.residual_o", fmt(solver.gramians().residual_o));
        ctx.out() << "[bpod] oracle hsv1=" << solver.gramians().hsv[0]
                  << " lyap residuals " << solver.gramians().residual_c << ", "
                  << solver.gramians().residual_o << "\n";
    }

    void reduce() {
        auto sys = system(cfg.reynolds);
        const VectorXd b = load_b(sys);
        auto ops = field3d::global_ops(sys, b);
        auto We = field3d::e_weight(sys);
        auto Wm = field3d::m_weight(sys);
        auto pod_basis = load_pod(sys);
        auto proj = modal::output_projection<double>(pod_basis, We, smax());

        std::vector<std::string> built;
        auto save = [&](const std::string& label, const balancing::ReducedOrderModel& rom) {
            io::write_rom(ctx.abs("roms/" + label + ".rom"), rom);
            built.push_back(label);
        };
        for (int r : cfg.model_ranks) {
            const int rp = pair_adjusted_rank(pod_basis.values, r, cfg.force_rank);
            if (rp > pod_basis.rank()) continue;
            if (std::count(built.begin(), built.end(), pod_label(rp))) continue;
            save(pod_label(rp),
                 balancing::reduce<double>(ops, pod_basis, We, rp, proj.map, proj.theta));
        }
        for (int s : cfg.output_ranks) {
            auto basis = load_bpod(sys, s);
            for (int r : cfg.model_ranks) {
                const int rp = pair_adjusted_rank(basis.values, r, cfg.force_rank);
                if (rp > basis.rank()) continue;
                if (std::count(built.begin(), built.end(), bpod_label(s, rp))) continue;
                save(bpod_label(s, rp),
                     balancing::reduce<double>(ops, basis, Wm, rp, proj.map, proj.theta));
            }
        }
        {
            auto solver = oracle(sys, b);
            for (int r : cfg.model_ranks) {
                const int rp = pair_adjusted_rank(solver.gramians().hsv, r, cfg.force_rank);
                if (rp > solver.numerical_rank()) continue;
                if (std::count(built.begin(), built.end(), bt_label(rp))) continue;
                save(bt_label(rp), solver.truncate(rp));
            }
        }
        std::string names;
        for (const auto& bname : built) names += bname + " ";
        ctx.manifest->set("roms.list", names);
        ctx.out() << "[reduce] built " << built.size() << " models\n";
    }

    void evaluate();
};

// Shared by both cases: energy of reconstructed outputs over time.
VectorXd rom_energy_series(const MatrixXcd& a, const MatrixXcd& gram) {
    VectorXd e(a.cols());
    for (Index j = 0; j < a.cols(); ++j) {
        e[j] = std::real((a.col(j).adjoint() * gram * a.col(j))(0, 0));
    }
    return e;
}

void SingleCase::evaluate() {
    auto sys = system(cfg.reynolds);
    const VectorXd b = load_b(sys);
    auto direct = load_direct(sys);
    const VectorXd& times = direct.times;
    const double base_dt = run_dt();
    auto pod_basis = load_pod(sys);
    auto We = field3d::e_weight(sys);
    const Csv oracle_csv = read_csv(ctx.abs("reports/hsv_oracle.csv"));
    const VectorXd hsv = oracle_csv.numbers("value");

    // Full-field energy factor: F_st = blkdiag(F, F) with E_block = F^T F.
    const auto& m = sys.blocks[0];
    const Index nb = m.state_dim();
    const MatrixXd F = Eigen::LLT<MatrixXd>(m.E_weight).matrixL().transpose();
    MatrixXd F_st = MatrixXd::Zero(2 * nb, 2 * nb);
    F_st.topLeftCorner(nb, nb) = F;
    F_st.bottomRightCorner(nb, nb) = F;

    // The exact-BT transformations carry arbitrary complex column phases, so
    // lifts stay complex; reconstructed fields are real up to roundoff.
    struct RomEntry {
        std::string label;
        balancing::ReducedOrderModel rom;
        MatrixXcd lift;
    };
    std::vector<RomEntry> roms;
    {
        std::stringstream ss(ctx.manifest->get("roms.list"));
        std::string label;
        while (ss >> label) {
            RomEntry e;
            e.label = label;
            e.rom = io::read_rom(ctx.abs("roms/" + label + ".rom"));
            e.lift = e.rom.recon.size() ? MatrixXcd(e.rom.recon * e.rom.Cr) : e.rom.Cr;
            roms.push_back(std::move(e));
        }
    }
    MatrixXd E_st = MatrixXd::Zero(2 * nb, 2 * nb);
    E_st.topLeftCorner(nb, nb) = m.E_weight;
    E_st.bottomRightCorner(nb, nb) = m.E_weight;

    // --- impulse energies and field-level error two-norms -------------------
    std::vector<analysis::ErrorReport> reports(roms.size());
    std::vector<std::string> report_labels(roms.size());
    std::vector<analysis::NamedSeries> energies;
    {
        VectorXd full_energy(times.size());
        for (Index j = 0; j < times.size(); ++j) {
            full_energy[j] = field3d::state_energy(
                sys, VectorXd(direct.data.col(j) / std::sqrt(direct.weights[j])));
        }
        energies.push_back({"full", full_energy});
    }
    const double ref_energy = (direct.data.transpose() * We.apply(direct.data)).trace();

    for (size_t i = 0; i < roms.size(); ++i) {
        const auto& entry = roms[i];
        reports[i].rank = entry.rom.rank;
        report_labels[i] = entry.label;
        try {
            MatrixXcd a = rom_trajectory(entry.rom.Ar, entry.rom.Br, times, base_dt);
            MatrixXcd gram = entry.lift.adjoint() * real_times_complex(E_st, entry.lift);
            MatrixXcd recon(entry.lift.rows(), a.cols());
            VectorXd e(a.cols());
            for (Index j = 0; j < a.cols(); ++j) {
                const VectorXcd aj = a.col(j);
                e[j] = std::real((aj.adjoint() * gram * aj)(0, 0));
                recon.col(j) = std::sqrt(direct.weights[j]) * (entry.lift * aj);
            }
            if (cfg.eval_impulse) energies.push_back({entry.label, e});
            MatrixXcd diff = direct.data.cast<cdouble>() - recon;
            reports[i].two_norm_rel = std::sqrt(
                std::real((diff.adjoint() * real_times_complex(E_st, diff)).trace()) /
                ref_energy);
        } catch (const DivergenceError&) {
            // unstable model: the impulse-response error norm is infinite
            reports[i].two_norm_rel = std::numeric_limits<double>::infinity();
            ctx.out() << "[evaluate] " << entry.label << " diverges in time\n";
        }
    }
    if (cfg.eval_impulse)
        analysis::write_energy_csv(ctx.abs("reports/energy.csv"), times, energies);

    // --- frequency responses and H-infinity bounds ---------------------------
    // Responses are compared with every output expressed in the POD basis
    // (the full system's C is modified the same way); the H-infinity bound
    // checks use the full-field energy output the oracle Gramians assume.
    const VectorXd sweep = analysis::log_grid(1e-3, 1e2, 400);
    if (cfg.eval_freq || cfg.eval_bounds) {
        auto H_full = field3d::global_transfer(sys, b, F_st);
        auto cache = analysis::sweep_transfer(H_full, sweep);

        auto proj = modal::output_projection<double>(pod_basis, We, smax());
        auto H_full_op = field3d::global_transfer(sys, b, proj.map);

        std::vector<analysis::NamedSeries> freq_series;
        if (cfg.eval_freq) {
            freq_series.push_back(
                {"full", analysis::frequency_response(H_full_op, sweep).sigma_max});
        }

        for (size_t i = 0; i < roms.size(); ++i) {
            const auto& entry = roms[i];
            if (cfg.eval_freq) {
                MatrixXcd map_lift =
                    real_times_complex(MatrixXd(proj.map), entry.lift);
                auto H_rom =
                    analysis::dense_transfer(entry.rom.Ar, entry.rom.Br, map_lift);
                auto fr = analysis::frequency_response(H_rom, sweep);
                freq_series.push_back({entry.label, fr.sigma_max});
            }
            if (cfg.eval_bounds) {
                MatrixXcd flift = real_times_complex(F_st, entry.lift);
                auto H_rom = analysis::dense_transfer(entry.rom.Ar, entry.rom.Br, flift);
                auto rep = analysis::hinf_error(H_full, cache, H_rom, hsv, entry.rom.rank,
                                                reports[i].two_norm_rel);
                reports[i] = rep;
            }
        }
        if (cfg.eval_freq)
            analysis::write_freq_response_csv(ctx.abs("reports/freq_response.csv"), sweep,
                                              freq_series);

        if (cfg.eval_bounds) {
            // exact-BT sweep over every rank (no pair adjustment: the bounds
            // hold for literal cuts).
            auto solver = oracle(sys, b);
            const int top =
                std::min<int>(cfg.tol.bounds_rank_max, int(solver.numerical_rank()) - 1);
            for (int r = 1; r <= top; ++r) {
                auto rom = solver.truncate(r);
                auto H_rom = analysis::dense_transfer(
                    rom.Ar, rom.Br, real_times_complex(F_st, rom.Cr));
                auto rep = analysis::hinf_error(H_full, cache, H_rom, hsv, r, 0.0);
                reports.push_back(rep);
                report_labels.push_back("btsweep_r" + std::to_string(r));
            }
        }
    }
    analysis::write_error_norms_csv(ctx.abs("reports/error_norms.csv"), reports,
                                    report_labels);

    // --- spectra --------------------------------------------------------------
    if (cfg.eval_spectrum) {
        std::vector<std::pair<std::string, std::vector<cdouble>>> spectra;
        spectra.emplace_back("full", analysis::spectrum(sys.blocks[0].A));
        for (const auto& entry : roms)
            spectra.emplace_back(entry.label, analysis::spectrum(entry.rom.Ar));
        analysis::write_spectrum_csv(ctx.abs("reports/spectrum.csv"), spectra);
    }

    // --- Reynolds continuation -------------------------------------------------
    if (!cfg.re_sweep.empty()) {
        std::ofstream out(ctx.abs("reports/re_sweep.csv"), std::ios::trunc);
        out << "label,Re,max_real\n";
        for (double re : cfg.re_sweep) {
            auto m2 = channel::build_os_squire({cfg.alpha, cfg.beta}, re,
                                               sys.box.grid);
            out << "full," << fmt(re) << "," << fmt(analysis::max_real_eigenvalue(m2.A))
                << "\n";
            for (const auto& entry : roms) {
                auto cont = analysis::reynolds_continuation(entry.rom, re);
                out << entry.label << "," << fmt(re) << ","
                    << fmt(analysis::max_real_eigenvalue(cont.Ar)) << "\n";
            }
        }
    }

    // --- subspace traces ---------------------------------------------------------
    if (cfg.eval_traces && !cfg.output_ranks.empty()) {
        const int rmax = int(std::min<Index>(pod_basis.rank(), 15));
        std::vector<VectorXd> columns;
        for (int s : cfg.output_ranks) {
            auto basis = load_bpod(sys, s);
            VectorXd traces(rmax);
            for (int r = 1; r <= rmax; ++r) {
                traces[r - 1] =
                    r <= basis.rank()
                        ? analysis::subspace_trace<double>(pod_basis.modes.leftCols(r),
                                                           basis.modes.leftCols(r), We)
                        : std::numeric_limits<double>::quiet_NaN();
            }
            columns.push_back(traces);
        }
        std::ofstream out(ctx.abs("reports/trace.csv"), std::ios::trunc);
        out << "rank";
        for (int s : cfg.output_ranks) out << ",T_s" << s;
        out << "\n";
        for (int r = 1; r <= rmax; ++r) {
            out << r;
            for (const auto& col : columns) out << "," << fmt(col[r - 1]);
            out << "\n";
        }
    }

    // --- input-projection norms ----------------------------------------------------
    if (cfg.eval_bproj && !cfg.output_ranks.empty()) {
        auto Wm = field3d::m_weight(sys);
        const int rmax = int(std::min<Index>(pod_basis.rank(), 10));
        std::ofstream out(ctx.abs("reports/bproj.csv"), std::ios::trunc);
        out << "rank,pod_orth";
        for (int s : cfg.output_ranks) out << ",bpod_s" << s << "_orth,bpod_s" << s << "_petrov";
        out << "\n";
        std::vector<modal::ModeBasisReal> bases;
        for (int s : cfg.output_ranks) bases.push_back(load_bpod(sys, s));
        for (int r = 1; r <= rmax; ++r) {
            out << r << ","
                << fmt(analysis::input_projection_norm<double>(
                       pod_basis, r, b, We, analysis::ProjectionMode::orthogonal));
            for (auto& basis : bases) {
                const int rr = std::min<int>(r, int(basis.rank()));
                out << ","
                    << fmt(analysis::input_projection_norm<double>(
                           basis, rr, b, We, analysis::ProjectionMode::orthogonal))
                    << ","
                    << fmt(analysis::input_projection_norm<double>(
                           basis, rr, b, We, analysis::ProjectionMode::petrov, &Wm));
            }
            out << "\n";
        }
    }
    ctx.out() << "[evaluate] reports written\n";
}

// =============================================================== 3-D case

struct LocalizedCase {
    StageCtx& ctx;
    const CaseConfig& cfg;

    explicit LocalizedCase(StageCtx& c) : ctx(c), cfg(c.cfg) {}

    field3d::Box3D box() const {
        return field3d::make_box(cfg.grid_nx(), cfg.wall_normal_points(), cfg.grid_nz());
    }
    field3d::GlobalSystem system(double re) const {
        return field3d::build_global_system(box(), re);
    }

    double run_dt() const { return std::stod(ctx.manifest->get("run.dt")); }

    VectorXd load_b(const field3d::GlobalSystem& sys) const {
        auto records = io::read_records(ctx.abs("snapshots/b.bpr"));
        return realify(sys, records.at(0).data);
    }

    dynamics::SnapshotSetReal load_direct(const field3d::GlobalSystem& sys) const {
        auto rec = io::read_records(ctx.abs("snapshots/direct.bpr")).at(0);
        dynamics::SnapshotSetReal set;
        set.times = rec.times;
        set.weights = rec.weights;
        set.data = realify(sys, rec.data);
        return set;
    }
    std::vector<dynamics::SnapshotSetReal> load_adjoint(
        const field3d::GlobalSystem& sys) const {
        std::vector<dynamics::SnapshotSetReal> runs;
        for (const auto& rec : io::read_records(ctx.abs("snapshots/adjoint.bpr"))) {
            dynamics::SnapshotSetReal set;
            set.kind = dynamics::SnapshotKind::adjoint;
            set.times = rec.times;
            set.weights = rec.weights;
            set.data = realify(sys, rec.data);
            runs.push_back(std::move(set));
        }
        return runs;
    }
    modal::ModeBasisReal load_pod(const field3d::GlobalSystem& sys) const {
        auto records = io::read_records(ctx.abs("modes/pod.bpr"));
        modal::ModeBasisReal basis;
        basis.kind = modal::BasisKind::pod;
        basis.values = records.at(0).times;
        basis.total_energy = records.at(0).weights[0];
        basis.modes = realify(sys, records.at(0).data);
        return basis;
    }
    modal::ModeBasisReal load_bpod(const field3d::GlobalSystem& sys, int s) const {
        auto records =
            io::read_records(ctx.abs("modes/bpod_s" + std::to_string(s) + ".bpr"));
        modal::ModeBasisReal basis;
        basis.kind = modal::BasisKind::balancing;
        basis.values = records.at(0).times;
        basis.modes = realify(sys, records.at(0).data);
        basis.adjoint_modes = realify(sys, records.at(1).data);
        return basis;
    }

    int smax() const { return cfg.output_ranks.empty() ? 0 : cfg.output_ranks.back(); }

    void build() {
        auto sys = system(cfg.reynolds);
        auto actuator = field3d::gaussian_actuator(box(), cfg.amplitude, cfg.alpha_r,
                                                   cfg.alpha_y);
        double nyquist = 0.0;
        VectorXd b = field3d::project_to_state(sys, field3d::to_spectral(actuator), &nyquist);
        const double dt = cfg.dt > 0.0 ? cfg.dt : field3d::stable_dt(sys);
        ctx.manifest->set("run.dt", fmt(dt));
        ctx.manifest->set("run.nyquist_fraction", fmt(nyquist));

        io::Record rec;
        rec.kind = io::RecordKind::matrix;
        rec.data = complexify(sys, b);
        rec.times = VectorXd::Zero(1);
        rec.weights = VectorXd::Ones(1);
        io::write_records(ctx.abs("snapshots/b.bpr"), {rec});
        field3d::write_slice_csv(ctx.abs("reports/slice_t0.csv"), actuator, 0.0);
        ctx.out() << "[build] stacked dim=" << sys.stacked_dim() << " wavenumbers="
                  << sys.entries.size() << " dt=" << dt
                  << " nyquist fraction=" << nyquist << "\n";
    }

    dynamics::ImpulseRunConfig run_config() const {
        dynamics::ImpulseRunConfig rc;
        rc.snapshot_count = cfg.snapshot_count;
        rc.dt = run_dt();
        rc.T = cfg.T > 0.0 ? cfg.T : 1200.0;
        rc.decay_threshold = cfg.decay_threshold;
        rc.two_phase = cfg.two_phase;
        rc.fine_fraction = cfg.fine_fraction;
        rc.fine_window = cfg.fine_window;
        return rc;
    }

    void simulate() {
        auto sys = system(cfg.reynolds);
        auto set = field3d::evolve_field(sys, load_b(sys), run_config());
        for (const auto& w : set.warnings) ctx.out() << "[simulate] note: " << w << "\n";
        io::Record rec;
        rec.kind = io::RecordKind::direct_snapshots;
        rec.times = set.times;
        rec.weights = set.weights;
        rec.data = complexify(sys, set.data);
        io::write_records(ctx.abs("snapshots/direct.bpr"), {rec});

        const double e0 = field3d::state_energy(sys, VectorXd(set.data.col(0) / std::sqrt(set.weights[0])));
        const Index last = set.count() - 1;
        const double eT = field3d::state_energy(
            sys, VectorXd(set.data.col(last) / std::sqrt(set.weights[last])));
        ctx.manifest->set("run.terminal_energy_ratio", fmt(eT / e0));
        // peak field slice for the record
        Index peak = 0;
        double best = -1.0;
        for (Index j = 0; j < set.count(); ++j) {
            const double e = field3d::state_energy(
                sys, VectorXd(set.data.col(j) / std::sqrt(set.weights[j])));
            if (e > best) {
                best = e;
                peak = j;
            }
        }
        auto field = field3d::from_spectral(field3d::state_to_spectral(
            sys, VectorXd(set.data.col(peak) / std::sqrt(set.weights[peak]))));
        field3d::write_slice_csv(ctx.abs("reports/slice_peak.csv"), field, 0.0);
        ctx.manifest->set("run.peak_time", fmt(set.times[peak]));
        ctx.out() << "[simulate] " << set.count() << " snapshots, terminal/initial energy="
                  << eT / e0 << ", peak at t=" << set.times[peak] << "\n";
    }

    void pod() {
        auto sys = system(cfg.reynolds);
        auto direct = load_direct(sys);
        auto We = field3d::e_weight(sys);
        auto basis = modal::pod<double>(direct.data, We);
        io::Record rec;
        rec.kind = io::RecordKind::pod_basis;
        rec.times = basis.values;
        rec.weights = VectorXd::Ones(basis.rank());
        rec.weights[0] = basis.total_energy;
        rec.data = complexify(sys, basis.modes);
        io::write_records(ctx.abs("modes/pod.bpr"), {rec});
        analysis::write_values_csv(ctx.abs("reports/pod_eigenvalues.csv"), basis.values,
                                   basis.total_energy);
        ctx.out() << "[pod] rank=" << basis.rank()
                  << " first5=" << 100.0 * basis.energy_fraction(5) << "%\n";
    }

    void adjoint() {
        auto sys = system(cfg.reynolds);
        auto rc = run_config();
        rc.snapshot_count = cfg.adjoint_count;
        auto runs = field3d::adjoint_impulse_runs(sys, load_pod(sys), smax(), rc);
        std::vector<io::Record> records;
        for (const auto& run : runs) {
            io::Record rec;
            rec.kind = io::RecordKind::adjoint_snapshots;
            rec.times = run.times;
            rec.weights = run.weights;
            rec.data = complexify(sys, run.data);
            records.push_back(std::move(rec));
        }
        io::write_records(ctx.abs("snapshots/adjoint.bpr"), records);
        ctx.out() << "[adjoint] " << runs.size() << " runs\n";
    }

    void bpod() {
        auto sys = system(cfg.reynolds);
        auto direct = load_direct(sys);
        auto runs = load_adjoint(sys);
        auto Wm = field3d::m_weight(sys);
        for (int s : cfg.output_ranks) {
            std::vector<dynamics::SnapshotSetReal> head(runs.begin(), runs.begin() + s);
            MatrixXd Y = dynamics::stack_columns(head);
            auto basis = balancing::bpod<double>(direct.data, Y, Wm, 0);
            for (const auto& w : basis.warnings) ctx.out() << "[bpod] " << w << "\n";
            io::Record modes, adj;
            modes.kind = io::RecordKind::balancing_modes;
            modes.times = basis.values.head(basis.rank());
            modes.weights = VectorXd::Ones(basis.rank());
            modes.data = complexify(sys, basis.modes);
            adj.kind = io::RecordKind::adjoint_modes;
            adj.times = modes.times;
            adj.weights = modes.weights;
            adj.data = complexify(sys, basis.adjoint_modes);
            io::write_records(ctx.abs("modes/bpod_s" + std::to_string(s) + ".bpr"),
                              {modes, adj});
            analysis::write_values_csv(
                ctx.abs("reports/hsv_s" + std::to_string(s) + ".csv"), basis.values,
                basis.values.sum());
            ctx.out() << "[bpod] s=" << s << " rank=" << basis.rank() << "\n";
        }
    }

    void reduce() {
        auto sys = system(cfg.reynolds);
        const VectorXd b = load_b(sys);
        auto ops = field3d::global_ops(sys, b);
        auto We = field3d::e_weight(sys);
        auto Wm = field3d::m_weight(sys);
        auto pod_basis = load_pod(sys);
        auto proj = modal::output_projection<double>(pod_basis, We, smax());

        std::vector<std::string> built;
        auto save = [&](const std::string& label, const balancing::ReducedOrderModel& rom) {
            io::write_rom(ctx.abs("roms/" + label + ".rom"), rom);
            built.push_back(label);
        };
        for (int r : cfg.model_ranks) {
            const int rp = pair_adjusted_rank(pod_basis.values, r, cfg.force_rank);
            if (rp > pod_basis.rank()) continue;
            if (std::count(built.begin(), built.end(), pod_label(rp))) continue;
            save(pod_label(rp),
                 balancing::reduce<double>(ops, pod_basis, We, rp, proj.map, proj.theta));
        }
        for (int s : cfg.output_ranks) {
            auto basis = load_bpod(sys, s);
            for (int r : cfg.model_ranks) {
                const int rp = pair_adjusted_rank(basis.values, r, cfg.force_rank);
                if (rp > basis.rank()) continue;
                if (std::count(built.begin(), built.end(), bpod_label(s, rp))) continue;
                save(bpod_label(s, rp),
                     balancing::reduce<double>(ops, basis, Wm, rp, proj.map, proj.theta));
            }
        }
        std::string names;
        for (const auto& bname : built) names += bname + " ";
        ctx.manifest->set("roms.list", names);
        ctx.out() << "[reduce] built " << built.size() << " models\n";
    }

    void evaluate();
};

void LocalizedCase::evaluate() {
    auto sys = system(cfg.reynolds);
    const VectorXd b = load_b(sys);
    auto direct = load_direct(sys);
    const VectorXd& times = direct.times;
    const double base_dt = run_dt();
    auto pod_basis = load_pod(sys);
    auto We = field3d::e_weight(sys);

    struct RomEntry {
        std::string label;
        balancing::ReducedOrderModel rom;
        MatrixXd lift;  // real lift to the stacked space
    };
    std::vector<RomEntry> roms;
    {
        std::stringstream ss(ctx.manifest->get("roms.list"));
        std::string label;
        while (ss >> label) {
            RomEntry e;
            e.label = label;
            e.rom = io::read_rom(ctx.abs("roms/" + label + ".rom"));
            e.lift = (e.rom.recon * e.rom.Cr).real();
            roms.push_back(std::move(e));
        }
    }

    // --- energies and two-norm errors --------------------------------------
    std::vector<analysis::NamedSeries> energies;
    VectorXd full_energy(times.size());
    for (Index j = 0; j < times.size(); ++j) {
        full_energy[j] = field3d::state_energy(
            sys, VectorXd(direct.data.col(j) / std::sqrt(direct.weights[j])));
    }
    energies.push_back({"full", full_energy});

    const MatrixXd EX = We.apply(direct.data);
    const double ref_energy = (direct.data.transpose() * EX).trace();

    std::vector<analysis::ErrorReport> reports(roms.size());
    std::vector<std::string> report_labels(roms.size());
    for (size_t i = 0; i < roms.size(); ++i) {
        const auto& entry = roms[i];
        reports[i].rank = entry.rom.rank;
        report_labels[i] = entry.label;
        try {
            MatrixXcd a = rom_trajectory(entry.rom.Ar, entry.rom.Br, times, base_dt);
            MatrixXd gram = entry.lift.transpose() * We.apply(entry.lift);
            VectorXd e(a.cols());
            MatrixXd recon(entry.lift.rows(), a.cols());
            for (Index j = 0; j < a.cols(); ++j) {
                const VectorXd aj = a.col(j).real();
                e[j] = aj.dot(gram * aj);
                recon.col(j) = std::sqrt(direct.weights[j]) * (entry.lift * aj);
            }
            if (cfg.eval_impulse) energies.push_back({entry.label, e});
            MatrixXd diff = direct.data - recon;
            reports[i].two_norm_rel =
                std::sqrt((diff.transpose() * We.apply(diff)).trace() / ref_energy);
        } catch (const DivergenceError&) {
            reports[i].two_norm_rel = std::numeric_limits<double>::infinity();
            ctx.out() << "[evaluate] " << entry.label << " diverges in time\n";
        }
    }
    if (cfg.eval_impulse)
        analysis::write_energy_csv(ctx.abs("reports/energy.csv"), times, energies);
    analysis::write_error_norms_csv(ctx.abs("reports/error_norms.csv"), reports,
                                    report_labels);

    // --- frequency response (against the largest BPOD reference) ------------
    if (cfg.eval_freq) {
        auto proj = modal::output_projection<double>(pod_basis, We, smax());
        const VectorXd sweep = analysis::log_grid(1e-3, 1e1, 240);
        std::vector<analysis::NamedSeries> freq_series;
        auto H_full = field3d::global_transfer(sys, b, proj.map);
        freq_series.push_back(
            {"full", analysis::frequency_response(H_full, sweep).sigma_max});
        for (const auto& entry : roms) {
            MatrixXd map_lift = proj.map * entry.lift;
            auto H_rom = analysis::dense_transfer(entry.rom.Ar, entry.rom.Br,
                                                  map_lift.cast<cdouble>());
            freq_series.push_back(
                {entry.label, analysis::frequency_response(H_rom, sweep).sigma_max});
        }
        analysis::write_freq_response_csv(ctx.abs("reports/freq_response.csv"), sweep,
                                          freq_series);
    }

    // --- spectra -------------------------------------------------------------
    if (cfg.eval_spectrum) {
        std::vector<std::pair<std::string, std::vector<cdouble>>> spectra;
        for (const auto& entry : roms)
            spectra.emplace_back(entry.label, analysis::spectrum(entry.rom.Ar));
        analysis::write_spectrum_csv(ctx.abs("reports/spectrum.csv"), spectra);
    }

    // --- Reynolds continuation ------------------------------------------------
    if (!cfg.re_sweep.empty()) {
        std::ofstream out(ctx.abs("reports/re_sweep.csv"), std::ios::trunc);
        out << "label,Re,max_real\n";
        for (double re : cfg.re_sweep) {
            auto sys2 = field3d::build_global_system(box(), re);
            auto rc = run_config();
            auto full_run = field3d::evolve_field(sys2, b, rc);
            VectorXd e_full(full_run.count());
            for (Index j = 0; j < full_run.count(); ++j) {
                e_full[j] = field3d::state_energy(
                    sys2, VectorXd(full_run.data.col(j) / std::sqrt(full_run.weights[j])));
            }
            std::vector<analysis::NamedSeries> re_energies{{"full", e_full}};
            double worst_full = -1e300;
            for (const auto& m2 : sys2.blocks)
                worst_full = std::max(worst_full, analysis::max_real_eigenvalue(m2.A));
            out << "full," << fmt(re) << "," << fmt(worst_full) << "\n";

            for (const auto& entry : roms) {
                auto cont = analysis::reynolds_continuation(entry.rom, re);
                const double worst = analysis::max_real_eigenvalue(cont.Ar);
                out << entry.label << "," << fmt(re) << "," << fmt(worst) << "\n";
                if (worst < 0.0) {
                    try {
                        MatrixXcd a =
                            rom_trajectory(cont.Ar, cont.Br, full_run.times, base_dt);
                        MatrixXd gram = entry.lift.transpose() * We.apply(entry.lift);
                        VectorXd e(a.cols());
                        for (Index j = 0; j < a.cols(); ++j) {
                            const VectorXd aj = a.col(j).real();
                            e[j] = aj.dot(gram * aj);
                        }
                        re_energies.push_back({entry.label, e});
                    } catch (const DivergenceError&) {
                        ctx.out() << "[evaluate] " << entry.label << " diverges at Re="
                                  << re << "\n";
                    }
                }
            }
            analysis::write_energy_csv(
                ctx.abs("reports/energy_re" + std::to_string(int(re)) + ".csv"),
                full_run.times, re_energies);
        }
    }

    // --- subspace traces ---------------------------------------------------------
    if (cfg.eval_traces && !cfg.output_ranks.empty()) {
        const int rmax = int(std::min<Index>(pod_basis.rank(), 15));
        std::vector<VectorXd> columns;
        for (int s : cfg.output_ranks) {
            auto basis = load_bpod(sys, s);
            VectorXd traces(rmax);
            for (int r = 1; r <= rmax; ++r) {
                traces[r - 1] =
                    r <= basis.rank()
                        ? analysis::subspace_trace<double>(pod_basis.modes.leftCols(r),
                                                           basis.modes.leftCols(r), We)
                        : std::numeric_limits<double>::quiet_NaN();
            }
            columns.push_back(traces);
        }
        std::ofstream out(ctx.abs("reports/trace.csv"), std::ios::trunc);
        out << "rank";
        for (int s : cfg.output_ranks) out << ",T_s" << s;
        out << "\n";
        for (int r = 1; r <= rmax; ++r) {
            out << r;
            for (const auto& col : columns) out << "," << fmt(col[r - 1]);
            out << "\n";
        }
    }

    // --- input-projection norms ----------------------------------------------------
    if (cfg.eval_bproj && !cfg.output_ranks.empty()) {
        auto Wm = field3d::m_weight(sys);
        const int rmax = int(std::min<Index>(pod_basis.rank(), 10));
        std::ofstream out(ctx.abs("reports/bproj.csv"), std::ios::trunc);
        out << "rank,pod_orth";
        for (int s : cfg.output_ranks) out << ",bpod_s" << s << "_orth,bpod_s" << s << "_petrov";
        out << "\n";
        std::vector<modal::ModeBasisReal> bases;
        for (int s : cfg.output_ranks) bases.push_back(load_bpod(sys, s));
        for (int r = 1; r <= rmax; ++r) {
            out << r << ","
                << fmt(analysis::input_projection_norm<double>(
                       pod_basis, r, b, We, analysis::ProjectionMode::orthogonal));
            for (auto& basis : bases) {
                const int rr = std::min<int>(r, int(basis.rank()));
                out << ","
                    << fmt(analysis::input_projection_norm<double>(
                           basis, rr, b, We, analysis::ProjectionMode::orthogonal))
                    << ","
                    << fmt(analysis::input_projection_norm<double>(
                           basis, rr, b, We, analysis::ProjectionMode::petrov, &Wm));
            }
            out << "\n";
        }
    }
    ctx.out() << "[evaluate] reports written\n";
}

// ------------------------------------------------------------ stage wiring

std::vector<std::string> stage_artifacts(const CaseConfig& cfg, const std::string& stage) {
    std::vector<std::string> a;
    const bool single = cfg.kind == CaseKind::single_wavenumber;
    if (stage == "build") {
        a = {"snapshots/b.bpr"};
        if (single) a.push_back("reports/growth.csv");
        else a.push_back("reports/slice_t0.csv");
    } else if (stage == "simulate") {
        a = {"snapshots/direct.bpr"};
        if (!single) a.push_back("reports/slice_peak.csv");
    } else if (stage == "pod") {
        a = {"modes/pod.bpr", "reports/pod_eigenvalues.csv"};
    } else if (stage == "adjoint") {
        a = {"snapshots/adjoint.bpr"};
    } else if (stage == "bpod") {
        for (int s : cfg.output_ranks) {
            a.push_back("modes/bpod_s" + std::to_string(s) + ".bpr");
            a.push_back("reports/hsv_s" + std::to_string(s) + ".csv");
        }
        if (single) {
            a.push_back("reports/hsv_oracle.csv");
            for (int sop : cfg.output_ranks)
                a.push_back("reports/hsv_oracle_s" + std::to_string(sop) + ".csv");
        }
    } else if (stage == "reduce") {
        // rom files are enumerated in the manifest; the directory must exist
    } else if (stage == "evaluate") {
        a.push_back("reports/error_norms.csv");
        if (cfg.eval_impulse) a.push_back("reports/energy.csv");
        if (cfg.eval_freq) a.push_back("reports/freq_response.csv");
        if (cfg.eval_spectrum) a.push_back("reports/spectrum.csv");
        if (!cfg.re_sweep.empty()) a.push_back("reports/re_sweep.csv");
        if (cfg.eval_traces && !cfg.output_ranks.empty()) a.push_back("reports/trace.csv");
        if (cfg.eval_bproj && !cfg.output_ranks.empty()) a.push_back("reports/bproj.csv");
    }
    return a;
}

std::vector<std::string> rom_artifacts(const Manifest& manifest) {
    std::vector<std::string> a;
    if (!manifest.has("roms.list")) return a;
    std::stringstream ss(manifest.get("roms.list"));
    std::string label;
    while (ss >> label) a.push_back("roms/" + label + ".rom");
    return a;
}

void run_stage(StageCtx& ctx, const std::string& stage) {
    const bool single = ctx.cfg.kind == CaseKind::single_wavenumber;
    SingleCase sc(ctx);
    LocalizedCase lc(ctx);
    if (stage == "build") single ? sc.build() : lc.build();
    else if (stage == "simulate") single ? sc.simulate() : lc.simulate();
    else if (stage == "pod") single ? sc.pod() : lc.pod();
    else if (stage == "adjoint") single ? sc.adjoint() : lc.adjoint();
    else if (stage == "bpod") single ? sc.bpod() : lc.bpod();
    else if (stage == "reduce") single ? sc.reduce() : lc.reduce();
    else if (stage == "evaluate") single ? sc.evaluate() : lc.evaluate();
    else throw InvalidParameter("unknown stage: " + stage);
}

}  // namespace

int run_pipeline(const CaseConfig& cfg, const std::string& workdir, std::ostream& log,
                 const std::string& only) {
    try {
        fs::create_directories(workdir);
        for (const char* sub : {"snapshots", "modes", "roms", "reports"})
            fs::create_directories(fs::path(workdir) / sub);

        Manifest manifest = Manifest::load(workdir);
        const std::string cfg_hash = hex64(config::config_hash(cfg));
        if (manifest.has("config_hash") && manifest.get("config_hash") != cfg_hash) {
            log << "config changed; stages will rerun as needed\n";
        }
        manifest.set("format", std::to_string(kWorkdirFormatVersion));
        manifest.set("bpod_version", "0.1.0");
        manifest.set("config_hash", cfg_hash);
        {
            std::ofstream cfg_out(fs::path(workdir) / "config.cfg");
            cfg_out << config::canonical_dump(cfg);
        }

        StageCtx ctx{cfg, workdir, &manifest, &log, cfg_hash};
        bool only_seen = only.empty();
        for (const auto& stage : stage_names()) {
            ctx.chain = hex64(io::fnv1a((ctx.chain + stage + cfg_hash).data(),
                                        ctx.chain.size() + stage.size() + cfg_hash.size()));
            const std::string hash_key = "stage." + stage + ".hash";
            const std::string status_key = "stage." + stage + ".status";

            std::vector<std::string> artifacts = stage_artifacts(cfg, stage);
            if (stage == "reduce" || stage == "evaluate") {
                auto extra = rom_artifacts(manifest);
                artifacts.insert(artifacts.end(), extra.begin(), extra.end());
            }

            const bool requested = only.empty() || stage == only;
            const bool fresh = manifest.has(hash_key) &&
                               manifest.get(hash_key) == ctx.chain &&
                               manifest.has(status_key) &&
                               manifest.get(status_key) == "done" &&
                               artifacts_ok(ctx, artifacts);
            if (!requested) {
                if (!only_seen && !fresh) {
                    log << "error: stage '" << only << "' needs '" << stage
                        << "' to have completed first\n";
                    return 2;
                }
                if (stage == only) only_seen = true;
                continue;
            }
            if (fresh) {
                log << "[" << stage << "] up to date, skipped\n";
                continue;
            }

            manifest.set(status_key, "running");
            manifest.save(workdir);
            run_stage(ctx, stage);

            std::vector<std::string> done_artifacts = stage_artifacts(cfg, stage);
            if (stage == "reduce") {
                auto extra = rom_artifacts(manifest);
                done_artifacts.insert(done_artifacts.end(), extra.begin(), extra.end());
            }
            record_artifacts(ctx, done_artifacts);
            manifest.set(hash_key, ctx.chain);
            manifest.set(status_key, "done");
            manifest.save(workdir);
        }
        manifest.save(workdir);
        return 0;
    } catch (const InvalidParameter& e) {
        log << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 1;
    }
}

bool VerifyReport::ok() const {
    if (!missing.empty()) return false;
    for (const auto& item : items)
        if (!item.pass) return false;
    return true;
}

namespace {

// criterion helpers operating on the artifact tree --------------------------

struct Verifier {
    std::string workdir;
    CaseConfig cfg;
    Manifest manifest;
    VerifyReport report;

    std::string abs(const std::string& rel) const {
        return (fs::path(workdir) / rel).string();
    }

    void add(const std::string& name, bool pass, const std::string& detail) {
        report.items.push_back({name, pass, detail});
    }

    VectorXd csv_numbers(const std::string& rel, const std::string& col) {
        return read_csv(abs(rel)).numbers(col);
    }

    // error_norms.csv lookup
    struct ErrorRow {
        double two_norm, hinf, lower, upper;
        int rank;
    };
    std::map<std::string, ErrorRow> error_rows;
    void load_error_rows() {
        auto csv = read_csv(abs("reports/error_norms.csv"));
        const int cl = csv.column("label"), cr = csv.column("rank"),
                  ct = csv.column("two_norm"), ch = csv.column("hinf"),
                  clo = csv.column("lower"), cup = csv.column("upper");
        for (const auto& row : csv.rows) {
            error_rows[row[cl]] = ErrorRow{std::stod(row[ct]), std::stod(row[ch]),
                                           std::stod(row[clo]), std::stod(row[cup]),
                                           std::stoi(row[cr])};
        }
    }

    std::map<std::pair<std::string, double>, double> re_rows;  // (label, Re) -> max_real
    void load_re_rows() {
        auto csv = read_csv(abs("reports/re_sweep.csv"));
        const int cl = csv.column("label"), cre = csv.column("Re"),
                  cm = csv.column("max_real");
        for (const auto& row : csv.rows)
            re_rows[{row[cl], std::stod(row[cre])}] = std::stod(row[cm]);
    }
};

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f%%", v);
    return buf;
}

void verify_single(Verifier& v) {
    const auto& tol = v.cfg.tol;

    // criterion 1: stability threshold bracketing
    {
        auto grid = spectral::chebyshev_grid(v.cfg.N);
        auto stable = channel::build_os_squire({1.02, 0.0}, 5500.0, grid);
        auto unstable = channel::build_os_squire({1.02, 0.0}, 6100.0, grid);
        const double s = analysis::max_real_eigenvalue(stable.A);
        const double u = analysis::max_real_eigenvalue(unstable.A);
        v.add("1 stability threshold", s < 0.0 && u > 0.0,
              "max Re(lambda): Re=5500 -> " + fmt(s) + ", Re=6100 -> " + fmt(u));
    }

    // criterion 2: POD energy fractions
    {
        const VectorXd frac = v.csv_numbers("reports/pod_eigenvalues.csv",
                                            "cumulative_fraction");
        const double pair1 = 100.0 * frac[1];
        const double pairs3 = 100.0 * frac[5];
        const double op4 = 100.0 * frac[3];
        const double op8 = 100.0 * frac[7];
        const bool pass = std::abs(pair1 - tol.pod_pair1_pct) <= tol.pod_pair1_tol &&
                          std::abs(pairs3 - tol.pod_pairs3_pct) <= tol.pod_pairs3_tol &&
                          std::abs(op4 - tol.op4_pct) <= tol.op4_tol &&
                          std::abs(op8 - tol.op8_pct) <= tol.op8_tol;
        v.add("2 pod energy fractions", pass,
              "pair1=" + pct(pair1) + " pairs3=" + pct(pairs3) + " s4=" + pct(op4) +
                  " s8=" + pct(op8));
    }

    // criterion 3: BPOD hsv against the Lyapunov oracle of the output-projected
    // system (what the snapshots approximate), plus proximity to the full-BT
    // values; impulse errors vs exact BT.
    {
        const VectorXd oracle_full = v.csv_numbers("reports/hsv_oracle.csv", "value");
        bool pass = true;
        std::string detail;
        for (int s : v.cfg.output_ranks) {
            const VectorXd hsv =
                v.csv_numbers("reports/hsv_s" + std::to_string(s) + ".csv", "value");
            const VectorXd oracle = v.csv_numbers(
                "reports/hsv_oracle_s" + std::to_string(s) + ".csv", "value");
            double worst = 0.0, worst_full = 0.0;
            for (int j = 0; j < s && j < hsv.size() && j < oracle.size(); ++j) {
                worst = std::max(worst, std::abs(hsv[j] - oracle[j]) / oracle[j]);
                worst_full =
                    std::max(worst_full, std::abs(hsv[j] - oracle_full[j]) / oracle_full[j]);
            }
            pass = pass && worst <= tol.hsv_match_rel && worst_full <= tol.hsv_full_rel;
            detail += "s" + std::to_string(s) + " vs op-oracle=" + fmt(worst) +
                      " vs full-bt=" + fmt(worst_full) + " ";
        }
        v.load_error_rows();
        double worst_ratio = 0.0;
        int compared = 0;
        for (int s : v.cfg.output_ranks) {
            for (int r = 2; r <= s; r += 2) {
                auto itb = v.error_rows.find(bpod_label(s, r));
                auto ite = v.error_rows.find(bt_label(r));
                if (itb == v.error_rows.end() || ite == v.error_rows.end()) continue;
                ++compared;
                worst_ratio = std::max(
                    worst_ratio, std::abs(itb->second.two_norm / ite->second.two_norm - 1.0));
            }
        }
        pass = pass && compared >= 4 && worst_ratio <= tol.impulse_ratio;
        detail += "impulse ratio dev=" + fmt(worst_ratio) + " over " +
                  std::to_string(compared) + " ranks";
        v.add("3 bpod matches exact balanced truncation", pass, detail);
    }

    // criterion 4: H-infinity bounds
    {
        bool pass = true;
        double worst_low = 1e300, worst_high = -1e300;
        for (int r = 1; r <= tol.bounds_rank_max; ++r) {
            auto it = v.error_rows.find("btsweep_r" + std::to_string(r));
            if (it == v.error_rows.end()) {
                pass = false;
                continue;
            }
            const auto& row = it->second;
            const double lo = row.hinf / std::max(row.lower, 1e-300);
            const double hi = row.hinf / std::max(row.upper, 1e-300);
            worst_low = std::min(worst_low, lo);
            worst_high = std::max(worst_high, hi);
            pass = pass && lo >= 1.0 - tol.bounds_slack && hi <= 1.0 + tol.bounds_slack;
        }
        // BPOD obeys the bounds up to the output-projection rank
        for (int s : v.cfg.output_ranks) {
            for (int r = 2; r <= s; r += 2) {
                auto it = v.error_rows.find(bpod_label(s, r));
                if (it == v.error_rows.end()) continue;
                const auto& row = it->second;
                pass = pass && row.hinf >= row.lower * (1.0 - tol.bounds_slack) &&
                       row.hinf <= row.upper * (1.0 + tol.bounds_slack);
            }
        }
        v.add("4 h-infinity bounds", pass,
              "bt hinf/lower min=" + fmt(worst_low) + " hinf/upper max=" + fmt(worst_high));
    }

    // criterion 5: frequency-response peaks
    {
        auto csv = read_csv(v.abs("reports/freq_response.csv"));
        const VectorXd omega = csv.numbers("omega");
        const VectorXd full = csv.numbers("full");
        Index ipeak;
        full.maxCoeff(&ipeak);
        const double wpeak = omega[ipeak];

        auto peak_of = [&](const std::string& label) {
            const VectorXd s = csv.numbers(label);
            Index ip;
            s.maxCoeff(&ip);
            return omega[ip];
        };
        auto value_near = [&](const VectorXd& s, double w) {
            Index best = 0;
            for (Index i = 1; i < omega.size(); ++i)
                if (std::abs(std::log(omega[i] / w)) <
                    std::abs(std::log(omega[best] / w)))
                    best = i;
            return s[best];
        };
        const int s_hi = v.cfg.output_ranks.back();
        const std::string bpod2 = bpod_label(s_hi, 2);
        const std::string pod2 = pod_label(2);
        bool pass = true;
        std::string detail;
        const double wb = peak_of(bpod2);
        pass = pass && std::abs(wb / wpeak - 1.0) <= tol.peak_freq_rel;
        detail += "bpod2 peak " + fmt(wb) + " vs full " + fmt(wpeak) + "; ";
        // POD-2 response a decade below the peak is a small fraction of full
        const VectorXd pod2_s = csv.numbers(pod2);
        const double pod2_off = value_near(pod2_s, wpeak / 10.0);
        const double full_off = value_near(full, wpeak / 10.0);
        pass = pass && pod2_off <= tol.pod2_offpeak_frac * full_off;
        detail += "pod2 offpeak frac=" + fmt(pod2_off / full_off) + "; ";
        // ten-mode models match the full response everywhere
        for (const std::string label : {pod_label(10), bpod_label(s_hi, 10)}) {
            const VectorXd s = csv.numbers(label);
            double worst = 0.0;
            for (Index i = 0; i < omega.size(); ++i)
                worst = std::max(worst, std::abs(s[i] / full[i] - 1.0));
            pass = pass && worst <= tol.match10_rel;
            detail += label + " dev=" + fmt(worst) + " ";
        }
        v.add("5 frequency response", pass, detail);
    }

    // criterion 6 (single-wavenumber half): Re continuation of rank-12 models
    if (!v.cfg.re_sweep.empty()) {
        v.load_re_rows();
        const int s_hi = v.cfg.output_ranks.back();
        const double re = v.cfg.re_sweep.front();
        const double pod12 = v.re_rows.at({pod_label(12), re});
        const double bpod12 = v.re_rows.at({bpod_label(s_hi, 12), re});
        v.add("6a reynolds continuation (single wavenumber)", pod12 > 0.0 && bpod12 < 0.0,
              "Re=" + fmt(re) + " pod12 max Re(lambda)=" + fmt(pod12) + " bpod12=" +
                  fmt(bpod12));
    }

    // criterion 8: Hankel invariance to the state inner product
    {
        auto grid = spectral::chebyshev_grid(32);
        auto m = channel::build_os_squire({v.cfg.alpha, v.cfg.beta}, v.cfg.reynolds, grid);
        VectorXcd bsmall = channel::optimal_perturbation(m, 0.0).state;
        auto bt = balancing::exact_balanced_truncation(m, bsmall, 1);
        VectorXd weighted = balancing::hsv_weighted_adjoint(m, bsmall);
        double worst = 0.0;
        for (Index j = 0; j < std::min(weighted.size(), bt.gramians.hsv.size()); ++j) {
            if (bt.gramians.hsv[j] < tol.hsv_invariance_floor * bt.gramians.hsv[0]) break;
            worst = std::max(worst,
                             std::abs(weighted[j] - bt.gramians.hsv[j]) / bt.gramians.hsv[j]);
        }
        v.add("8 gramian-product invariance", worst <= tol.hsv_invariance_rel,
              "worst rel dev=" + fmt(worst));
    }

    // criterion 9 is the property suite; checked by the caller for both kinds
}

void verify_properties(Verifier& v) {
    const auto& tol = v.cfg.tol;
    std::string detail;
    bool pass = true;

    auto grid = spectral::chebyshev_grid(24);
    auto m = channel::build_os_squire({1.0, 1.0}, 800.0, grid);
    VectorXcd b = channel::optimal_perturbation(m, 0.0).state;
    m.B = b;

    dynamics::ImpulseRunConfig rc;
    rc.snapshot_count = 160;
    rc.dt = dynamics::stable_dt(m.A);
    auto direct = dynamics::direct_impulse_snapshots(m, b, rc);
    DenseWeight<cdouble> energy(m.E_weight);
    DenseWeight<cdouble> M(m.M_weight);
    auto pod_basis = modal::pod<cdouble>(direct.data, energy);
    auto runs = dynamics::adjoint_impulse_snapshots(m, pod_basis, 4, rc);
    auto bpod_basis = balancing::bpod<cdouble>(
        direct.data, dynamics::stack_columns(runs), M, 8);

    {  // biorthogonality
        MatrixXcd biorth =
            bpod_basis.adjoint_modes.adjoint() * M.apply(bpod_basis.modes);
        const double dev =
            (biorth - MatrixXcd::Identity(biorth.rows(), biorth.cols())).norm();
        pass = pass && dev <= tol.biorthogonality;
        detail += "biorth=" + fmt(dev) + " ";
    }
    {  // Lyapunov residuals
        auto bt = balancing::exact_balanced_truncation(m, b, 1);
        pass = pass && bt.gramians.residual_c <= tol.lyapunov_residual &&
               bt.gramians.residual_o <= tol.lyapunov_residual;
        detail += "lyap=" + fmt(std::max(bt.gramians.residual_c, bt.gramians.residual_o)) +
                  " ";
    }
    {  // adjoint identity
        MatrixXcd adj = channel::build_adjoint(m);
        std::mt19937_64 rng(v.cfg.seed);
        std::normal_distribution<double> dist;
        double worst = 0.0;
        for (int t = 0; t < 5; ++t) {
            VectorXcd x(m.state_dim()), z(m.state_dim());
            for (Index j = 0; j < m.state_dim(); ++j) {
                x[j] = cdouble(dist(rng), dist(rng));
                z[j] = cdouble(dist(rng), dist(rng));
            }
            const cdouble lhs =
                ((m.A * x).adjoint() * real_times_complex(m.M_weight, MatrixXcd(z)))(0, 0);
            const cdouble rhs =
                (x.adjoint() * real_times_complex(m.M_weight, MatrixXcd(adj * z)))(0, 0);
            worst = std::max(worst, std::abs(lhs - rhs) / (x.norm() * z.norm()));
        }
        pass = pass && worst <= tol.adjoint_identity;
        detail += "adjoint=" + fmt(worst) + " ";
    }
    {  // POD orthonormality
        MatrixXcd gram = pod_basis.modes.adjoint() * energy.apply(pod_basis.modes);
        const double dev =
            (gram - MatrixXcd::Identity(gram.rows(), gram.cols())).norm();
        pass = pass && dev <= tol.pod_orthonormality;
        detail += "pod_orth=" + fmt(dev) + " ";
    }
    {  // Parseval and projector idempotence
        auto proj = modal::output_projection<cdouble>(pod_basis, energy, 4);
        std::mt19937_64 rng(v.cfg.seed + 1);
        std::normal_distribution<double> dist;
        double parseval = 0.0, idem = 0.0;
        for (int t = 0; t < 5; ++t) {
            VectorXcd y(m.state_dim());
            for (Index j = 0; j < m.state_dim(); ++j) y[j] = cdouble(dist(rng), dist(rng));
            const VectorXcd yhat = proj.map * y;
            const MatrixXcd py = proj.project(MatrixXcd(y));
            const double pw =
                std::sqrt(std::real((py.adjoint() * energy.apply(py))(0, 0)));
            parseval = std::max(parseval, std::abs(yhat.norm() - pw) / pw);
            idem = std::max(idem, (proj.project(py) - py).norm() / py.norm());
        }
        pass = pass && parseval <= tol.parseval && idem <= tol.projector_idempotence;
        detail += "parseval=" + fmt(parseval) + " idem=" + fmt(idem) + " ";
    }
    {  // subspace trace bounds
        const double t_self = analysis::subspace_trace<cdouble>(
            pod_basis.modes.leftCols(3), pod_basis.modes.leftCols(3), energy);
        const double t_cross = analysis::subspace_trace<cdouble>(
            pod_basis.modes.leftCols(3), bpod_basis.modes.leftCols(5), energy);
        pass = pass && std::abs(t_self - 3.0) <= tol.trace_bound && t_cross >= -tol.trace_bound &&
               t_cross <= 3.0 + tol.trace_bound;
        detail += "trace_self=" + fmt(t_self) + " ";
    }
    {  // RK4 order
        std::mt19937_64 rng(v.cfg.seed + 2);
        std::normal_distribution<double> dist;
        MatrixXcd A(6, 6);
        for (Index i = 0; i < 6; ++i)
            for (Index j = 0; j < 6; ++j) A(i, j) = cdouble(dist(rng), dist(rng));
        A -= (A.eigenvalues().real().maxCoeff() + 0.5) * MatrixXcd::Identity(6, 6);
        VectorXcd x0 = VectorXcd::Ones(6);
        VectorXd times(2);
        times << 0.0, 1.0;
        auto run = [&](double dt) {
            return dynamics::propagate(A, x0, dt, times).unscaled(1);
        };
        const VectorXcd ref = run(0.04 / 8.0);
        const double ratio = (run(0.04) - ref).norm() / (run(0.02) - ref).norm();
        pass = pass && ratio >= tol.rk4_ratio_lo && ratio <= tol.rk4_ratio_hi;
        detail += "rk4_ratio=" + fmt(ratio);
    }
    v.add("9 property suites", pass, detail);
}

void verify_localized(Verifier& v) {
    const auto& tol = v.cfg.tol;

    // criterion 7: localized-case structure
    {
        const VectorXd values = v.csv_numbers("reports/pod_eigenvalues.csv", "value");
        const VectorXd frac = v.csv_numbers("reports/pod_eigenvalues.csv",
                                            "cumulative_fraction");
        const double five = 100.0 * frac[4];
        const double ten = 100.0 * frac[std::min<Index>(9, frac.size() - 1)];
        const double total = values.sum() / frac[frac.size() - 1];
        const double pair45 = 100.0 * (values[3] + values[4]) / (values.sum() / frac[frac.size() - 1]);
        bool pass = std::abs(five - tol.loc_pod5_pct) <= tol.loc_pod5_tol &&
                    std::abs(ten - tol.loc_pod10_pct) <= tol.loc_pod10_tol &&
                    std::abs(pair45 - tol.loc_pair45_pct) <= tol.loc_pair45_tol;
        std::string detail = "five=" + pct(five) + " ten=" + pct(ten) + " pair45=" +
                             pct(pair45);

        const int s_lo = v.cfg.output_ranks.front();
        const VectorXd hsv =
            v.csv_numbers("reports/hsv_s" + std::to_string(s_lo) + ".csv", "value");
        const double p45 = std::abs(hsv[3] / hsv[4] - 1.0);
        const double p78 = std::abs(hsv[6] / hsv[7] - 1.0);
        pass = pass && p45 <= tol.hsv_pair_rel && p78 <= tol.hsv_pair_rel;
        detail += " hsv45 dev=" + fmt(p45) + " hsv78 dev=" + fmt(p78);

        // 3-mode BPOD tracks the full energy peak; 3-mode POD misses it
        auto csv = read_csv(v.abs("reports/energy.csv"));
        const VectorXd full = csv.numbers("full");
        const int s_hi = v.cfg.output_ranks.back();
        const VectorXd bpod3 = csv.numbers(bpod_label(s_hi, 3));
        const VectorXd pod3 = csv.numbers(pod_label(3));
        const double fpk = full.maxCoeff();
        const double bpk_err = std::abs(bpod3.maxCoeff() - fpk) / fpk;
        const double ppk_err = std::abs(pod3.maxCoeff() - fpk) / fpk;
        pass = pass && bpk_err <= tol.bpod3_peak_rel &&
               ppk_err >= tol.pod3_peak_factor * bpk_err;
        detail += " bpod3 peak err=" + fmt(bpk_err) + " pod3 peak err=" + fmt(ppk_err);
        (void)total;
        v.add("7 localized-case structure", pass, detail);
    }

    // criterion 6 (localized half): POD unstable at Re=3000, 3-mode BPOD stays
    // stable and tracks the full energy
    if (!v.cfg.re_sweep.empty()) {
        v.load_re_rows();
        const double re_hi = v.cfg.re_sweep.back();
        const int s_hi = v.cfg.output_ranks.back();
        const double pod17 = v.re_rows.at({pod_label(17), re_hi});
        const double bpod3 = v.re_rows.at({bpod_label(s_hi, 3), re_hi});
        bool pass = pod17 > 0.0 && bpod3 < 0.0;
        std::string detail = "Re=" + fmt(re_hi) + " pod17=" + fmt(pod17) +
                             " bpod3=" + fmt(bpod3);

        auto csv = read_csv(v.abs("reports/energy_re" + std::to_string(int(re_hi)) + ".csv"));
        const VectorXd full = csv.numbers("full");
        const VectorXd bpod3_e = csv.numbers(bpod_label(s_hi, 3));
        const double dev = std::abs(bpod3_e.maxCoeff() - full.maxCoeff()) / full.maxCoeff();
        pass = pass && dev <= tol.energy_track_rel;
        detail += " bpod3 peak dev=" + fmt(dev);
        v.add("6b reynolds continuation (localized)", pass, detail);
    }

    // criterion 10: Petrov projection of B exceeds one; orthogonal never does
    {
        auto csv = read_csv(v.abs("reports/bproj.csv"));
        const VectorXd pod_orth = csv.numbers("pod_orth");
        bool orth_ok = pod_orth.maxCoeff() <= 1.0 + 1e-10;
        bool petrov_exceeds = false;
        double petrov_max = 0.0;
        for (int s : v.cfg.output_ranks) {
            const VectorXd orth = csv.numbers("bpod_s" + std::to_string(s) + "_orth");
            orth_ok = orth_ok && orth.maxCoeff() <= 1.0 + 1e-10;
            const VectorXd petrov = csv.numbers("bpod_s" + std::to_string(s) + "_petrov");
            for (Index r = 0; r < std::min<Index>(5, petrov.size()); ++r) {
                petrov_max = std::max(petrov_max, petrov[r]);
                if (petrov[r] > 1.0) petrov_exceeds = true;
            }
        }
        v.add("10 input-projection norms", orth_ok && petrov_exceeds,
              "max orth<=1: " + std::string(orth_ok ? "yes" : "no") +
                  ", max petrov r<=5: " + fmt(petrov_max));
    }

    // subspace trace floor (part of criterion 7's run)
    {
        auto csv = read_csv(v.abs("reports/trace.csv"));
        const int s_lo = v.cfg.output_ranks.front();
        const VectorXd t = csv.numbers("T_s" + std::to_string(s_lo));
        v.add("7b pod/bpod subspace trace at rank 3", t[2] >= v.cfg.tol.trace3_min,
              "T(3)=" + fmt(t[2]));
    }
}

}  // namespace

VerifyReport verify(const std::string& workdir, std::ostream& log) {
    Verifier v;
    v.workdir = workdir;

    // version gate and integrity first
    if (!fs::exists(manifest_path(workdir))) {
        v.report.missing.push_back("manifest.txt");
        log << "verify: no manifest in " << workdir << "\n";
        return v.report;
    }
    v.manifest = Manifest::load(workdir);
    if (!v.manifest.has("format") ||
        v.manifest.get("format") != std::to_string(kWorkdirFormatVersion)) {
        const std::string detail =
            "format version mismatch: expected " + std::to_string(kWorkdirFormatVersion) +
            ", found " + (v.manifest.has("format") ? v.manifest.get("format") : "none");
        v.report.items.push_back({"workdir format", false, detail});
        log << "[FAIL] workdir format: " << detail << "\n";
        return v.report;
    }
    v.cfg = config::load_config((fs::path(workdir) / "config.cfg").string());

    for (const auto& [key, value] : v.manifest.kv) {
        if (key.rfind("artifact.", 0) != 0) continue;
        const std::string rel = key.substr(9);
        const std::string path = v.abs(rel);
        if (!fs::exists(path)) {
            v.report.missing.push_back(rel + " (missing)");
        } else if (hex64(io::fnv1a_file(path)) != value) {
            v.report.missing.push_back(rel + " (checksum failure)");
        }
    }
    for (const auto& stage : stage_names()) {
        const std::string key = "stage." + stage + ".status";
        if (!v.manifest.has(key)) {
            v.report.missing.push_back("stage " + stage + " (never ran)");
        } else if (v.manifest.get(key) != "done") {
            v.report.missing.push_back("stage " + stage + " (incomplete)");
        }
    }
    if (!v.report.missing.empty()) {
        for (const auto& m : v.report.missing) log << "verify: " << m << "\n";
        return v.report;
    }

    try {
        if (v.cfg.kind == CaseKind::single_wavenumber) {
            verify_single(v);
        } else {
            verify_localized(v);
        }
        verify_properties(v);
    } catch (const std::exception& e) {
        v.report.items.push_back({"verification run", false, e.what()});
    }

    for (const auto& item : v.report.items) {
        log << (item.pass ? "[PASS] " : "[FAIL] ") << item.name << ": " << item.detail
            << "\n";
    }
    return v.report;
}

}  // namespace bpod::pipeline
