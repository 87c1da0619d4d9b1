#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "bpod/analysis.hpp"
#include "bpod/balancing.hpp"
#include "bpod/channel.hpp"
#include "bpod/config.hpp"
#include "bpod/dynamics.hpp"
#include "bpod/field3d.hpp"
#include "bpod/modal.hpp"
#include "bpod/pipeline.hpp"
#include "bpod/spectral.hpp"

namespace py = pybind11;
using namespace bpod;

namespace {

spectral::Grid1D make_grid(int N) { return spectral::chebyshev_grid(N); }

channel::StateVector to_state(const channel::StateSpaceModel& m, const VectorXcd& x) {
    return channel::unpack_state(m, x);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Snapshot-based balanced POD for the linearized channel-flow testbed";

    py::register_exception<InvalidParameter>(m, "InvalidParameterError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalErrorException", PyExc_RuntimeError);

    // ---- spectral -----------------------------------------------------------
    m.def("chebyshev_points", [](int N) { return make_grid(N).points; },
          py::arg("N"), "Gauss-Lobatto nodes cos(pi j / N), descending");
    m.def(
        "diff_matrix",
        [](int N, int order, bool clamped) {
            return spectral::diff_matrix(make_grid(N), order,
                                         clamped ? spectral::BoundaryTreatment::clamped
                                                 : spectral::BoundaryTreatment::none)
                .matrix;
        },
        py::arg("N"), py::arg("order"), py::arg("clamped") = false,
        "Chebyshev collocation differentiation matrix");
    m.def("quadrature_weights",
          [](int N) { return spectral::quadrature_weights(make_grid(N)).weights; },
          py::arg("N"), "Clenshaw-Curtis weights on the Gauss-Lobatto nodes");

    // ---- channel ------------------------------------------------------------
    py::class_<channel::StateSpaceModel>(m, "OsSquireModel")
        .def(py::init([](double alpha, double beta, double Re, int N) {
                 return channel::build_os_squire({alpha, beta}, Re, make_grid(N));
             }),
             py::arg("alpha"), py::arg("beta"), py::arg("Re"), py::arg("N"))
        .def_readonly("A", &channel::StateSpaceModel::A)
        .def_readonly("A_conv", &channel::StateSpaceModel::A_conv)
        .def_readonly("A_diff", &channel::StateSpaceModel::A_diff)
        .def_readonly("M_weight", &channel::StateSpaceModel::M_weight)
        .def_readonly("E_weight", &channel::StateSpaceModel::E_weight)
        .def_readonly("reynolds", &channel::StateSpaceModel::reynolds)
        .def_property_readonly("state_dim", &channel::StateSpaceModel::state_dim)
        .def_property_readonly(
            "grid_points",
            [](const channel::StateSpaceModel& mm) { return mm.grid.points; })
        .def("adjoint", &channel::build_adjoint,
             "discrete M-adjoint M^{-1} A^H M")
        .def("adjoint_continuous", &channel::build_adjoint_continuous,
             "collocation of the continuous adjoint equations")
        .def(
            "m_inner",
            [](const channel::StateSpaceModel& mm, const VectorXcd& a, const VectorXcd& b) {
                return channel::m_inner_product(to_state(mm, a), to_state(mm, b), mm);
            },
            py::arg("q1"), py::arg("q2"))
        .def(
            "energy_inner",
            [](const channel::StateSpaceModel& mm, const VectorXcd& a, const VectorXcd& b) {
                return channel::energy_inner_product(to_state(mm, a), to_state(mm, b), mm);
            },
            py::arg("q1"), py::arg("q2"))
        .def(
            "recover_velocities",
            [](const channel::StateSpaceModel& mm, const VectorXcd& x) {
                auto vel = channel::recover_velocities(to_state(mm, x), mm);
                return py::make_tuple(vel.u, vel.v, vel.w);
            },
            py::arg("state"), "(u, v, w) on the full grid")
        .def(
            "optimal_perturbation",
            [](const channel::StateSpaceModel& mm, double horizon) {
                auto opt = channel::optimal_perturbation(mm, horizon);
                return py::make_tuple(opt.state, opt.curve.times, opt.curve.growth,
                                      opt.curve.peak_time, opt.curve.peak_growth);
            },
            py::arg("horizon") = 0.0,
            "(state, times, growth, peak_time, peak_growth); horizon <= 0 sweeps "
            "for the global optimum");

    // ---- dynamics -----------------------------------------------------------
    m.def("stable_dt", &dynamics::stable_dt, py::arg("A"), py::arg("safety") = 0.5);
    m.def(
        "propagate",
        [](const MatrixXcd& A, const VectorXcd& x0, double dt, const VectorXd& times) {
            auto set = dynamics::propagate(A, x0, dt, times);
            return py::make_tuple(set.data, set.times, set.weights);
        },
        py::arg("A"), py::arg("x0"), py::arg("dt"), py::arg("sample_times"),
        "RK4 trajectory; columns scaled by sqrt(trapezoid weight)");

    // ---- modal / balancing ----------------------------------------------------
    m.def(
        "pod",
        [](const MatrixXcd& X, const MatrixXd& W, int max_modes) {
            DenseWeight<cdouble> weight(W);
            auto basis = modal::pod<cdouble>(X, weight, max_modes);
            return py::make_tuple(basis.modes, basis.values, basis.total_energy);
        },
        py::arg("snapshots"), py::arg("weight"), py::arg("max_modes") = -1,
        "(modes, eigenvalues, total_energy) by the method of snapshots");
    m.def(
        "bpod",
        [](const MatrixXcd& X, const MatrixXcd& Y, const MatrixXd& M, int r) {
            DenseWeight<cdouble> weight(M);
            auto basis = balancing::bpod<cdouble>(X, Y, weight, r);
            return py::make_tuple(basis.modes, basis.adjoint_modes, basis.values);
        },
        py::arg("X"), py::arg("Y"), py::arg("M"), py::arg("r") = 0,
        "(balancing_modes, adjoint_modes, hankel_values) from the SVD of Y^H M X");
    m.def(
        "exact_balanced_truncation",
        [](const channel::StateSpaceModel& model, const MatrixXcd& B, int r) {
            auto bt = balancing::exact_balanced_truncation(model, B, r);
            py::dict out;
            out["Ar"] = bt.rom.Ar;
            out["Br"] = bt.rom.Br;
            out["Cr"] = bt.rom.Cr;
            out["Ar_conv"] = bt.rom.Ar_conv;
            out["Ar_diff"] = bt.rom.Ar_diff;
            out["hsv"] = bt.gramians.hsv;
            out["Wc"] = bt.gramians.Wc;
            out["Wo"] = bt.gramians.Wo;
            out["phi"] = bt.phi;
            out["psi"] = bt.psi;
            return out;
        },
        py::arg("model"), py::arg("B"), py::arg("r"),
        "dense Lyapunov-based balanced truncation oracle");
    m.def(
        "reduce_dense",
        [](const MatrixXcd& A, const MatrixXcd& Aconv, const MatrixXcd& Adiff,
           const MatrixXcd& B, double Re, const MatrixXcd& modes,
           const MatrixXcd& adjoint_modes, const MatrixXd& W, int r,
           const MatrixXcd& output_map) {
            auto ops = balancing::dense_ops(A, Aconv, Adiff, B, Re);
            modal::ModeBasis basis;
            basis.modes = modes;
            basis.values = VectorXd::Ones(modes.cols());
            if (adjoint_modes.size()) {
                basis.kind = modal::BasisKind::balancing;
                basis.adjoint_modes = adjoint_modes;
            }
            DenseWeight<cdouble> weight(W);
            auto rom = balancing::reduce<cdouble>(ops, basis, weight, r, output_map,
                                                  MatrixXcd());
            return py::make_tuple(rom.Ar, rom.Br, rom.Cr, rom.Ar_conv, rom.Ar_diff);
        },
        py::arg("A"), py::arg("A_conv"), py::arg("A_diff"), py::arg("B"), py::arg("Re"),
        py::arg("modes"), py::arg("adjoint_modes"), py::arg("weight"), py::arg("r"),
        py::arg("output_map"),
        "Galerkin / Petrov-Galerkin projection onto a mode basis");

    // ---- analysis -------------------------------------------------------------
    m.def(
        "frequency_response",
        [](const MatrixXcd& A, const MatrixXcd& B, const MatrixXcd& C,
           const VectorXd& omegas) {
            return analysis::frequency_response(A, B, C, omegas).sigma_max;
        },
        py::arg("A"), py::arg("B"), py::arg("C"), py::arg("omegas"));
    m.def("spectrum", &analysis::spectrum, py::arg("A"),
          "eigenvalues sorted by descending real part");
    m.def("impulse_error_2norm",
          py::overload_cast<const MatrixXcd&, const MatrixXcd&, const VectorXd&>(
              &analysis::impulse_error_2norm),
          py::arg("y_full"), py::arg("y_rom"), py::arg("times"));
    m.def(
        "subspace_trace",
        [](const MatrixXcd& A, const MatrixXcd& B, const MatrixXd& W) {
            DenseWeight<cdouble> weight(W);
            return analysis::subspace_trace<cdouble>(A, B, weight);
        },
        py::arg("basis_a"), py::arg("basis_b"), py::arg("weight"),
        "trace(P_A P_B P_A) with W-orthogonal projectors");

    // ---- field3d ---------------------------------------------------------------
    m.def(
        "gaussian_actuator",
        [](int Nx, int N, int Nz, double amplitude, double alpha_r, double alpha_y) {
            auto box = field3d::make_box(Nx, N, Nz);
            auto f = field3d::gaussian_actuator(box, amplitude, alpha_r, alpha_y);
            return f.v;
        },
        py::arg("Nx"), py::arg("N"), py::arg("Nz"), py::arg("amplitude") = 1.0,
        py::arg("alpha_r") = 0.7, py::arg("alpha_y") = 0.6,
        "wall-normal velocity array ((Nx*Nz) x Ny, row = ix*Nz+iz)");

    // ---- pipeline ----------------------------------------------------------------
    m.def(
        "run_pipeline",
        [](const std::string& config_path, const std::string& workdir) {
            auto cfg = config::load_config(config_path);
            std::ostringstream log;
            const int code = pipeline::run_pipeline(cfg, workdir, log);
            return py::make_tuple(code, log.str());
        },
        py::arg("config_path"), py::arg("workdir"));
    m.def(
        "verify_workdir",
        [](const std::string& workdir) {
            std::ostringstream log;
            auto report = pipeline::verify(workdir, log);
            py::list items;
            for (const auto& item : report.items)
                items.append(py::make_tuple(item.name, item.pass, item.detail));
            return py::make_tuple(report.ok(), items, log.str());
        },
        py::arg("workdir"));

    m.attr("__version__") = "0.1.0";
}
