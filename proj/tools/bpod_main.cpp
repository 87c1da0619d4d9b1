#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bpod/config.hpp"
#include "bpod/pipeline.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string workdir = "bpod_work";
    std::vector<std::string> overrides;  // section.key=value

    // frequently used mirrors of CaseConfig fields
    std::string kind;
    double alpha = std::nan(""), beta = std::nan(""), reynolds = std::nan("");
    int N = -1, Nx = -1, Nz = -1;
    int snapshots = -1, adjoint_snapshots = -1;
    double dt = std::nan(""), horizon = std::nan("");
    std::string output_ranks, model_ranks, re_sweep;
    bool paper_grid = false, force_rank = false, two_phase = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "configuration file (key = value)");
    cmd->add_option("--workdir", opts.workdir, "artifact directory");
    cmd->add_option("--set", opts.overrides, "override a config entry, section.key=value");
    cmd->add_option("--kind", opts.kind, "single_wavenumber or localized3d");
    cmd->add_option("--alpha", opts.alpha, "streamwise wavenumber");
    cmd->add_option("--beta", opts.beta, "spanwise wavenumber");
    cmd->add_option("--Re", opts.reynolds, "Reynolds number");
    cmd->add_option("--N", opts.N, "wall-normal polynomial order");
    cmd->add_option("--Nx", opts.Nx, "streamwise modes (localized case)");
    cmd->add_option("--Nz", opts.Nz, "spanwise modes (localized case)");
    cmd->add_option("--snapshots", opts.snapshots, "direct snapshot count");
    cmd->add_option("--adjoint-snapshots", opts.adjoint_snapshots, "per-run adjoint count");
    cmd->add_option("--dt", opts.dt, "integrator step (0 = stability-selected)");
    cmd->add_option("--T", opts.horizon, "fixed horizon (0 = decay-based)");
    cmd->add_option("--output-ranks", opts.output_ranks, "output projection ranks, comma list");
    cmd->add_option("--ranks", opts.model_ranks, "model ranks, comma list");
    cmd->add_option("--re-sweep", opts.re_sweep, "off-design Reynolds numbers, comma list");
    cmd->add_flag("--paper-grid", opts.paper_grid, "use the full 32x65x32 grid");
    cmd->add_flag("--force-rank", opts.force_rank, "cut exactly at the requested ranks");
    cmd->add_flag("--two-phase", opts.two_phase, "fine-then-coarse snapshot spacing");
}

bpod::config::CaseConfig resolve_config(const CommonOpts& opts) {
    std::map<std::string, std::string> kv;
    if (!opts.config_path.empty()) {
        // parse file first, then layer command-line values on top
        auto cfg = bpod::config::load_config(opts.config_path);
        std::istringstream dump(bpod::config::canonical_dump(cfg));
        std::string line;
        while (std::getline(dump, line)) {
            const auto eq = line.find(" = ");
            if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 3);
        }
    }
    for (const auto& ov : opts.overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos) {
            throw bpod::InvalidParameter("--set expects section.key=value, got " + ov);
        }
        kv[ov.substr(0, eq)] = ov.substr(eq + 1);
    }
    auto put = [&kv](const std::string& key, const std::string& value) { kv[key] = value; };
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    if (!opts.kind.empty()) put("case.kind", opts.kind);
    if (!std::isnan(opts.alpha)) put("case.alpha", fmt(opts.alpha));
    if (!std::isnan(opts.beta)) put("case.beta", fmt(opts.beta));
    if (!std::isnan(opts.reynolds)) put("case.Re", fmt(opts.reynolds));
    if (opts.N > 0) put("case.N", std::to_string(opts.N));
    if (opts.Nx > 0) put("case.Nx", std::to_string(opts.Nx));
    if (opts.Nz > 0) put("case.Nz", std::to_string(opts.Nz));
    if (opts.snapshots > 0) put("snapshots.count", std::to_string(opts.snapshots));
    if (opts.adjoint_snapshots > 0)
        put("snapshots.adjoint_count", std::to_string(opts.adjoint_snapshots));
    if (!std::isnan(opts.dt)) put("snapshots.dt", fmt(opts.dt));
    if (!std::isnan(opts.horizon)) put("snapshots.T", fmt(opts.horizon));
    if (!opts.output_ranks.empty()) put("models.output_ranks", opts.output_ranks);
    if (!opts.model_ranks.empty()) put("models.ranks", opts.model_ranks);
    if (!opts.re_sweep.empty()) put("evaluate.re_sweep", opts.re_sweep);
    if (opts.paper_grid) put("case.paper_grid", "true");
    if (opts.force_rank) put("models.force_rank", "true");
    if (opts.two_phase) put("snapshots.two_phase", "true");
    return bpod::config::config_from_map(kv);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"snapshot-based balanced POD for the linearized channel-flow testbed"};
    app.require_subcommand(1);

    // One stage per verb, plus the full pipeline and the verifier.
    const std::vector<std::string> stage_verbs{"build",  "simulate", "pod",     "adjoint",
                                               "bpod",   "reduce",   "evaluate"};
    std::map<std::string, CommonOpts> opts;
    std::map<std::string, CLI::App*> cmds;

    for (const auto& verb : stage_verbs) {
        auto* cmd = app.add_subcommand(verb, "run the '" + verb + "' stage");
        add_common(cmd, opts[verb]);
        cmds[verb] = cmd;
    }
    {
        auto* cmd = app.add_subcommand("pipeline", "run every stage in order");
        add_common(cmd, opts["pipeline"]);
        cmds["pipeline"] = cmd;
    }
    {
        auto* cmd = app.add_subcommand("verify",
                                       "check artifacts and the acceptance criteria");
        add_common(cmd, opts["verify"]);
        cmds["verify"] = cmd;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        for (const auto& [verb, cmd] : cmds) {
            if (!cmd->parsed()) continue;
            const CommonOpts& o = opts[verb];
            if (verb == "verify") {
                auto report = bpod::pipeline::verify(o.workdir, std::cout);
                if (!report.missing.empty()) {
                    std::cout << report.missing.size() << " artifact problem(s)\n";
                    return 1;
                }
                return report.ok() ? 0 : 1;
            }
            const auto cfg = resolve_config(o);
            const std::string only = verb == "pipeline" ? "" : verb;
            return bpod::pipeline::run_pipeline(cfg, o.workdir, std::cout, only);
        }
    } catch (const bpod::InvalidParameter& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
