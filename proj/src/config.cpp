#include "bpod/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <functional>

#include "bpod/io.hpp"

namespace bpod::config {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw InvalidParameter("config: bad boolean for " + key + ": " + v);
}

template <typename T>
std::vector<T> parse_list(const std::string& v) {
    std::vector<T> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(static_cast<T>(std::stod(item)));
    }
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

template <typename T>
std::string fmt_list(const std::vector<T>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        if constexpr (std::is_same_v<T, int>) out += std::to_string(v[i]);
        else out += fmt(v[i]);
    }
    return out;
}

struct FieldBinder {
    CaseConfig& cfg;

    using Setter = std::function<void(const std::string&)>;
    std::map<std::string, Setter> setters;

    void bind_double(const std::string& key, double& field) {
        setters[key] = [&field, key](const std::string& v) { field = std::stod(v); };
    }
    void bind_int(const std::string& key, int& field) {
        setters[key] = [&field](const std::string& v) { field = std::stoi(v); };
    }
    void bind_bool(const std::string& key, bool& field) {
        setters[key] = [&field, key](const std::string& v) { field = parse_bool(v, key); };
    }

    explicit FieldBinder(CaseConfig& c) : cfg(c) {
        setters["case.kind"] = [&](const std::string& v) {
            if (v == "single_wavenumber") cfg.kind = CaseKind::single_wavenumber;
            else if (v == "localized3d") cfg.kind = CaseKind::localized3d;
            else throw InvalidParameter("config: unknown case.kind " + v);
        };
        bind_double("case.alpha", cfg.alpha);
        bind_double("case.beta", cfg.beta);
        bind_double("case.Re", cfg.reynolds);
        bind_int("case.N", cfg.N);
        bind_int("case.Nx", cfg.Nx);
        bind_int("case.Nz", cfg.Nz);
        bind_bool("case.paper_grid", cfg.paper_grid);
        bind_double("case.amplitude", cfg.amplitude);
        bind_double("case.alpha_r", cfg.alpha_r);
        bind_double("case.alpha_y", cfg.alpha_y);

        bind_int("snapshots.count", cfg.snapshot_count);
        bind_int("snapshots.adjoint_count", cfg.adjoint_count);
        bind_double("snapshots.dt", cfg.dt);
        bind_double("snapshots.T", cfg.T);
        bind_double("snapshots.decay_threshold", cfg.decay_threshold);
        bind_bool("snapshots.two_phase", cfg.two_phase);
        bind_double("snapshots.fine_fraction", cfg.fine_fraction);
        bind_double("snapshots.fine_window", cfg.fine_window);

        setters["models.output_ranks"] = [&](const std::string& v) {
            cfg.output_ranks = parse_list<int>(v);
        };
        setters["models.ranks"] = [&](const std::string& v) {
            cfg.model_ranks = parse_list<int>(v);
        };
        bind_bool("models.force_rank", cfg.force_rank);

        bind_bool("evaluate.impulse", cfg.eval_impulse);
        bind_bool("evaluate.freq", cfg.eval_freq);
        bind_bool("evaluate.spectrum", cfg.eval_spectrum);
        bind_bool("evaluate.bounds", cfg.eval_bounds);
        bind_bool("evaluate.traces", cfg.eval_traces);
        bind_bool("evaluate.b_projection", cfg.eval_bproj);
        setters["evaluate.re_sweep"] = [&](const std::string& v) {
            cfg.re_sweep = parse_list<double>(v);
        };
        setters["run.seed"] = [&](const std::string& v) {
            cfg.seed = std::stoull(v);
        };

        Tolerances& t = cfg.tol;
        bind_double("tolerances.pod_pair1_pct", t.pod_pair1_pct);
        bind_double("tolerances.pod_pair1_tol", t.pod_pair1_tol);
        bind_double("tolerances.pod_pairs3_pct", t.pod_pairs3_pct);
        bind_double("tolerances.pod_pairs3_tol", t.pod_pairs3_tol);
        bind_double("tolerances.op4_pct", t.op4_pct);
        bind_double("tolerances.op4_tol", t.op4_tol);
        bind_double("tolerances.op8_pct", t.op8_pct);
        bind_double("tolerances.op8_tol", t.op8_tol);
        bind_double("tolerances.hsv_match_rel", t.hsv_match_rel);
        bind_double("tolerances.hsv_full_rel", t.hsv_full_rel);
        bind_double("tolerances.impulse_ratio", t.impulse_ratio);
        bind_double("tolerances.bounds_slack", t.bounds_slack);
        bind_int("tolerances.bounds_rank_max", t.bounds_rank_max);
        bind_double("tolerances.peak_freq_rel", t.peak_freq_rel);
        bind_double("tolerances.pod2_offpeak_frac", t.pod2_offpeak_frac);
        bind_double("tolerances.match10_rel", t.match10_rel);
        bind_double("tolerances.dominant_eig_rel", t.dominant_eig_rel);
        bind_double("tolerances.pod4_marginal", t.pod4_marginal);
        bind_double("tolerances.loc_pod5_pct", t.loc_pod5_pct);
        bind_double("tolerances.loc_pod5_tol", t.loc_pod5_tol);
        bind_double("tolerances.loc_pod10_pct", t.loc_pod10_pct);
        bind_double("tolerances.loc_pod10_tol", t.loc_pod10_tol);
        bind_double("tolerances.loc_pair45_pct", t.loc_pair45_pct);
        bind_double("tolerances.loc_pair45_tol", t.loc_pair45_tol);
        bind_double("tolerances.hsv_pair_rel", t.hsv_pair_rel);
        bind_double("tolerances.bpod3_peak_rel", t.bpod3_peak_rel);
        bind_double("tolerances.pod3_peak_factor", t.pod3_peak_factor);
        bind_double("tolerances.energy_track_rel", t.energy_track_rel);
        bind_double("tolerances.trace3_min", t.trace3_min);
        bind_double("tolerances.hsv_invariance_rel", t.hsv_invariance_rel);
        bind_double("tolerances.hsv_invariance_floor", t.hsv_invariance_floor);
        bind_double("tolerances.biorthogonality", t.biorthogonality);
        bind_double("tolerances.lyapunov_residual", t.lyapunov_residual);
        bind_double("tolerances.adjoint_identity", t.adjoint_identity);
        bind_double("tolerances.pod_orthonormality", t.pod_orthonormality);
        bind_double("tolerances.parseval", t.parseval);
        bind_double("tolerances.projector_idempotence", t.projector_idempotence);
        bind_double("tolerances.trace_bound", t.trace_bound);
        bind_double("tolerances.rk4_ratio_lo", t.rk4_ratio_lo);
        bind_double("tolerances.rk4_ratio_hi", t.rk4_ratio_hi);
    }
};

}  // namespace

CaseConfig config_from_map(const std::map<std::string, std::string>& kv) {
    CaseConfig cfg;
    FieldBinder binder(cfg);
    for (const auto& [key, value] : kv) {
        auto it = binder.setters.find(key);
        if (it == binder.setters.end()) {
            throw InvalidParameter("config: unknown key " + key);
        }
        try {
            it->second(value);
        } catch (const InvalidParameter&) {
            throw;
        } catch (const std::exception&) {
            throw InvalidParameter("config: bad value for " + key + ": " + value);
        }
    }
    if (cfg.snapshot_count < 2 || cfg.adjoint_count < 2) {
        throw InvalidParameter("config: snapshot counts must be >= 2");
    }
    if (cfg.reynolds <= 0.0) throw InvalidParameter("config: Re must be positive");
    for (double re : cfg.re_sweep)
        if (re <= 0.0) throw InvalidParameter("config: re_sweep values must be positive");
    std::sort(cfg.output_ranks.begin(), cfg.output_ranks.end());
    std::sort(cfg.model_ranks.begin(), cfg.model_ranks.end());
    return cfg;
}

CaseConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    std::map<std::string, std::string> kv;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw InvalidParameter("config: bad section header at line " +
                                       std::to_string(lineno));
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidParameter("config: expected key = value at line " +
                                   std::to_string(lineno));
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        kv[section.empty() ? key : section + "." + key] = value;
    }
    return config_from_map(kv);
}

std::string canonical_dump(const CaseConfig& cfg) {
    std::map<std::string, std::string> kv;
    kv["case.kind"] =
        cfg.kind == CaseKind::single_wavenumber ? "single_wavenumber" : "localized3d";
    kv["case.alpha"] = fmt(cfg.alpha);
    kv["case.beta"] = fmt(cfg.beta);
    kv["case.Re"] = fmt(cfg.reynolds);
    kv["case.N"] = std::to_string(cfg.N);
    kv["case.Nx"] = std::to_string(cfg.Nx);
    kv["case.Nz"] = std::to_string(cfg.Nz);
    kv["case.paper_grid"] = cfg.paper_grid ? "true" : "false";
    kv["case.amplitude"] = fmt(cfg.amplitude);
    kv["case.alpha_r"] = fmt(cfg.alpha_r);
    kv["case.alpha_y"] = fmt(cfg.alpha_y);
    kv["snapshots.count"] = std::to_string(cfg.snapshot_count);
    kv["snapshots.adjoint_count"] = std::to_string(cfg.adjoint_count);
    kv["snapshots.dt"] = fmt(cfg.dt);
    kv["snapshots.T"] = fmt(cfg.T);
    kv["snapshots.decay_threshold"] = fmt(cfg.decay_threshold);
    kv["snapshots.two_phase"] = cfg.two_phase ? "true" : "false";
    kv["snapshots.fine_fraction"] = fmt(cfg.fine_fraction);
    kv["snapshots.fine_window"] = fmt(cfg.fine_window);
    kv["models.output_ranks"] = fmt_list(cfg.output_ranks);
    kv["models.ranks"] = fmt_list(cfg.model_ranks);
    kv["models.force_rank"] = cfg.force_rank ? "true" : "false";
    kv["evaluate.impulse"] = cfg.eval_impulse ? "true" : "false";
    kv["evaluate.freq"] = cfg.eval_freq ? "true" : "false";
    kv["evaluate.spectrum"] = cfg.eval_spectrum ? "true" : "false";
    kv["evaluate.bounds"] = cfg.eval_bounds ? "true" : "false";
    kv["evaluate.traces"] = cfg.eval_traces ? "true" : "false";
    kv["evaluate.b_projection"] = cfg.eval_bproj ? "true" : "false";
    kv["evaluate.re_sweep"] = fmt_list(cfg.re_sweep);
    kv["run.seed"] = std::to_string(cfg.seed);

    const Tolerances& t = cfg.tol;
    kv["tolerances.pod_pair1_pct"] = fmt(t.pod_pair1_pct);
    kv["tolerances.pod_pair1_tol"] = fmt(t.pod_pair1_tol);
    kv["tolerances.pod_pairs3_pct"] = fmt(t.pod_pairs3_pct);
    kv["tolerances.pod_pairs3_tol"] = fmt(t.pod_pairs3_tol);
    kv["tolerances.op4_pct"] = fmt(t.op4_pct);
    kv["tolerances.op4_tol"] = fmt(t.op4_tol);
    kv["tolerances.op8_pct"] = fmt(t.op8_pct);
    kv["tolerances.op8_tol"] = fmt(t.op8_tol);
    kv["tolerances.hsv_match_rel"] = fmt(t.hsv_match_rel);
    kv["tolerances.hsv_full_rel"] = fmt(t.hsv_full_rel);
    kv["tolerances.impulse_ratio"] = fmt(t.impulse_ratio);
    kv["tolerances.bounds_slack"] = fmt(t.bounds_slack);
    kv["tolerances.bounds_rank_max"] = std::to_string(t.bounds_rank_max);
    kv["tolerances.peak_freq_rel"] = fmt(t.peak_freq_rel);
    kv["tolerances.pod2_offpeak_frac"] = fmt(t.pod2_offpeak_frac);
    kv["tolerances.match10_rel"] = fmt(t.match10_rel);
    kv["tolerances.dominant_eig_rel"] = fmt(t.dominant_eig_rel);
    kv["tolerances.pod4_marginal"] = fmt(t.pod4_marginal);
    kv["tolerances.loc_pod5_pct"] = fmt(t.loc_pod5_pct);
    kv["tolerances.loc_pod5_tol"] = fmt(t.loc_pod5_tol);
    kv["tolerances.loc_pod10_pct"] = fmt(t.loc_pod10_pct);
    kv["tolerances.loc_pod10_tol"] = fmt(t.loc_pod10_tol);
    kv["tolerances.loc_pair45_pct"] = fmt(t.loc_pair45_pct);
    kv["tolerances.loc_pair45_tol"] = fmt(t.loc_pair45_tol);
    kv["tolerances.hsv_pair_rel"] = fmt(t.hsv_pair_rel);
    kv["tolerances.bpod3_peak_rel"] = fmt(t.bpod3_peak_rel);
    kv["tolerances.pod3_peak_factor"] = fmt(t.pod3_peak_factor);
    kv["tolerances.energy_track_rel"] = fmt(t.energy_track_rel);
    kv["tolerances.trace3_min"] = fmt(t.trace3_min);
    kv["tolerances.hsv_invariance_rel"] = fmt(t.hsv_invariance_rel);
    kv["tolerances.hsv_invariance_floor"] = fmt(t.hsv_invariance_floor);
    kv["tolerances.biorthogonality"] = fmt(t.biorthogonality);
    kv["tolerances.lyapunov_residual"] = fmt(t.lyapunov_residual);
    kv["tolerances.adjoint_identity"] = fmt(t.adjoint_identity);
    kv["tolerances.pod_orthonormality"] = fmt(t.pod_orthonormality);
    kv["tolerances.parseval"] = fmt(t.parseval);
    kv["tolerances.projector_idempotence"] = fmt(t.projector_idempotence);
    kv["tolerances.trace_bound"] = fmt(t.trace_bound);
    kv["tolerances.rk4_ratio_lo"] = fmt(t.rk4_ratio_lo);
    kv["tolerances.rk4_ratio_hi"] = fmt(t.rk4_ratio_hi);

    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

uint64_t config_hash(const CaseConfig& cfg) {
    const std::string dump = canonical_dump(cfg);
    return io::fnv1a(dump.data(), dump.size());
}

}  // namespace bpod::config
