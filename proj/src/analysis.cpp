#include "bpod/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <Eigen/Dense>

#include "bpod/dynamics.hpp"
#include "bpod/linalg.hpp"

namespace bpod::analysis {

namespace {

const cdouble kI(0.0, 1.0);

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

}  // namespace

TransferFn dense_transfer(const MatrixXcd& A, const MatrixXcd& B, const MatrixXcd& C) {
    return [A, B, C](double omega) -> MatrixXcd {
        MatrixXcd shifted = -A;
        shifted.diagonal().array() += kI * omega;
        Eigen::PartialPivLU<MatrixXcd> lu(shifted);
        return C * lu.solve(B);
    };
}

VectorXd log_grid(double w_lo, double w_hi, int count) {
    if (w_lo <= 0.0 || w_hi <= w_lo || count < 2) {
        throw InvalidParameter("log_grid: bad sweep parameters");
    }
    VectorXd w(count);
    const double l0 = std::log10(w_lo), l1 = std::log10(w_hi);
    for (int i = 0; i < count; ++i)
        w[i] = std::pow(10.0, l0 + (l1 - l0) * i / (count - 1));
    return w;
}

FrequencyResponse frequency_response(const TransferFn& H, const VectorXd& omegas) {
    FrequencyResponse fr;
    fr.omegas = omegas;
    fr.sigma_max.resize(omegas.size());
    for (Index i = 0; i < omegas.size(); ++i) {
        try {
            const MatrixXcd h = H(omegas[i]);
            if (!h.allFinite()) throw NumericalError("singular resolvent");
            fr.sigma_max[i] = h.jacobiSvd().singularValues()(0);
        } catch (const std::exception&) {
            fr.sigma_max[i] = std::numeric_limits<double>::quiet_NaN();
            fr.failed.push_back(int(i));
        }
    }
    return fr;
}

FrequencyResponse frequency_response(const MatrixXcd& A, const MatrixXcd& B,
                                     const MatrixXcd& C, const VectorXd& omegas) {
    return frequency_response(dense_transfer(A, B, C), omegas);
}

double hinf_norm(const TransferFn& H, const VectorXd& omegas, double* omega_at_peak) {
    if (omegas.size() < 3) throw InvalidParameter("hinf_norm: sweep too coarse");
    auto value = [&](double w) { return H(w).jacobiSvd().singularValues()(0); };

    Index best = 0;
    double best_v = -1.0;
    for (Index i = 0; i < omegas.size(); ++i) {
        const double v = value(omegas[i]);
        if (v > best_v) {
            best_v = v;
            best = i;
        }
    }
    const double lo = omegas[std::max<Index>(0, best - 1)];
    const double hi = omegas[std::min<Index>(omegas.size() - 1, best + 1)];
    double peak_w = omegas[best];
    if (hi > lo) {
        // Refine in log-frequency.
        const double w = linalg::golden_section_max(
            [&](double lw) { return value(std::exp(lw)); }, std::log(lo), std::log(hi),
            1e-6);
        peak_w = std::exp(w);
        best_v = std::max(best_v, value(peak_w));
    }
    if (omega_at_peak) *omega_at_peak = peak_w;
    return best_v;
}

namespace {

template <typename Mat>
double impulse_error_impl(const Mat& y_full, const Mat& y_rom, const VectorXd& times) {
    if (y_full.rows() != y_rom.rows() || y_full.cols() != y_rom.cols() ||
        y_full.cols() != times.size()) {
        throw DimensionMismatch("impulse_error_2norm: mismatched series");
    }
    const VectorXd w = dynamics::trapezoid_weights(times);
    double err = 0.0, ref = 0.0;
    for (Index j = 0; j < times.size(); ++j) {
        err += w[j] * (y_full.col(j) - y_rom.col(j)).squaredNorm();
        ref += w[j] * y_full.col(j).squaredNorm();
    }
    if (ref <= 0.0) throw NumericalError("impulse_error_2norm: zero reference series");
    return std::sqrt(err / ref);
}

}  // namespace

double impulse_error_2norm(const MatrixXcd& y_full, const MatrixXcd& y_rom,
                           const VectorXd& times) {
    return impulse_error_impl(y_full, y_rom, times);
}

double impulse_error_2norm(const MatrixXd& y_full, const MatrixXd& y_rom,
                           const VectorXd& times) {
    return impulse_error_impl(y_full, y_rom, times);
}

namespace {

ErrorReport bound_fields(const VectorXd& hsv, int rank, double two_norm_rel) {
    ErrorReport report;
    report.rank = rank;
    report.two_norm_rel = two_norm_rel;
    report.hsv_lower = rank < hsv.size() ? hsv[rank] : 0.0;
    report.hsv_upper = 0.0;
    for (Index j = rank; j < hsv.size(); ++j) report.hsv_upper += 2.0 * hsv[j];
    return report;
}

}  // namespace

ErrorReport hinf_error(const TransferFn& H_full, const TransferFn& H_rom,
                       const VectorXd& hsv, int rank, const VectorXd& omegas,
                       double two_norm_rel) {
    ErrorReport report = bound_fields(hsv, rank, two_norm_rel);
    TransferFn diff = [&H_full, &H_rom](double w) -> MatrixXcd {
        return H_full(w) - H_rom(w);
    };
    report.hinf_est = hinf_norm(diff, omegas);
    return report;
}

SweepCache sweep_transfer(const TransferFn& H, const VectorXd& omegas) {
    SweepCache cache;
    cache.omegas = omegas;
    cache.values.reserve(omegas.size());
    for (Index i = 0; i < omegas.size(); ++i) cache.values.push_back(H(omegas[i]));
    return cache;
}

ErrorReport hinf_error(const TransferFn& H_full, const SweepCache& full_cache,
                       const TransferFn& H_rom, const VectorXd& hsv, int rank,
                       double two_norm_rel) {
    ErrorReport report = bound_fields(hsv, rank, two_norm_rel);

    const VectorXd& omegas = full_cache.omegas;
    Index best = 0;
    double best_v = -1.0;
    for (Index i = 0; i < omegas.size(); ++i) {
        const double v = (full_cache.values[size_t(i)] - H_rom(omegas[i]))
                             .jacobiSvd()
                             .singularValues()(0);
        if (v > best_v) {
            best_v = v;
            best = i;
        }
    }
    const double lo = omegas[std::max<Index>(0, best - 1)];
    const double hi = omegas[std::min<Index>(omegas.size() - 1, best + 1)];
    if (hi > lo) {
        auto value = [&](double w) {
            return (H_full(w) - H_rom(w)).jacobiSvd().singularValues()(0);
        };
        const double w = linalg::golden_section_max(
            [&](double lw) { return value(std::exp(lw)); }, std::log(lo), std::log(hi),
            1e-6);
        best_v = std::max(best_v, value(std::exp(w)));
    }
    report.hinf_est = best_v;
    return report;
}

std::vector<cdouble> spectrum(const MatrixXcd& A) {
    Eigen::ComplexEigenSolver<MatrixXcd> ces(A, false);
    if (ces.info() != Eigen::Success) throw NumericalError("spectrum: eigensolver failed");
    std::vector<cdouble> eigs(ces.eigenvalues().data(),
                              ces.eigenvalues().data() + ces.eigenvalues().size());
    std::sort(eigs.begin(), eigs.end(), [](cdouble a, cdouble b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return eigs;
}

double max_real_eigenvalue(const MatrixXcd& A) {
    Eigen::ComplexEigenSolver<MatrixXcd> ces(A, false);
    return ces.eigenvalues().real().maxCoeff();
}

balancing::ReducedOrderModel reynolds_continuation(
    const balancing::ReducedOrderModel& rom, double reynolds_new) {
    if (reynolds_new <= 0.0) {
        throw InvalidParameter("reynolds_continuation: Re must be positive");
    }
    balancing::ReducedOrderModel out = rom;
    out.Ar = rom.Ar_conv + (1.0 / reynolds_new) * rom.Ar_diff;
    out.design_Re = reynolds_new;
    return out;
}

template <typename Scalar>
double subspace_trace(const MatrixX<Scalar>& basis_a, const MatrixX<Scalar>& basis_b,
                      const WeightOp<Scalar>& W) {
    if (basis_a.rows() != basis_b.rows() || basis_a.rows() != W.dim()) {
        throw DimensionMismatch("subspace_trace: basis dimensions do not conform");
    }
    auto orthonormalize = [&](const MatrixX<Scalar>& V) {
        MatrixX<Scalar> G = V.adjoint() * W.apply(V);
        Eigen::LLT<MatrixX<Scalar>> llt(Scalar(0.5) * (G + G.adjoint()));
        if (llt.info() != Eigen::Success) {
            throw NumericalError("subspace_trace: basis is numerically rank deficient");
        }
        MatrixX<Scalar> R = llt.matrixL().adjoint();
        return MatrixX<Scalar>(
            R.template triangularView<Eigen::Upper>().template solve<Eigen::OnTheRight>(V));
    };
    const MatrixX<Scalar> qa = orthonormalize(basis_a);
    const MatrixX<Scalar> qb = orthonormalize(basis_b);
    return (qa.adjoint() * W.apply(qb)).squaredNorm();
}

template double subspace_trace<double>(const MatrixX<double>&, const MatrixX<double>&,
                                       const WeightOp<double>&);
template double subspace_trace<cdouble>(const MatrixX<cdouble>&, const MatrixX<cdouble>&,
                                        const WeightOp<cdouble>&);

template <typename Scalar>
double input_projection_norm(const modal::ModeBasisT<Scalar>& basis, int r,
                             const VectorX<Scalar>& b, const WeightOp<Scalar>& W,
                             ProjectionMode mode, const WeightOp<Scalar>* M) {
    if (r == 0) return 0.0;
    if (r < 0 || r > basis.rank()) throw InvalidParameter("input_projection_norm: rank");
    const double b_norm = W.norm(b);
    if (b_norm == 0.0) throw NumericalError("input_projection_norm: zero input");

    VectorX<Scalar> pb;
    if (mode == ProjectionMode::orthogonal) {
        MatrixX<Scalar> theta = basis.modes.leftCols(r);
        MatrixX<Scalar> G = theta.adjoint() * W.apply(theta);
        Eigen::LLT<MatrixX<Scalar>> llt(Scalar(0.5) * (G + G.adjoint()));
        if (llt.info() != Eigen::Success) {
            throw NumericalError("input_projection_norm: modes rank deficient under W");
        }
        VectorX<Scalar> coeff = llt.solve(theta.adjoint() * W.apply(MatrixX<Scalar>(b)));
        pb = theta * coeff;
    } else {
        if (basis.adjoint_modes.cols() < r) {
            throw InvalidParameter("input_projection_norm: petrov mode needs adjoint modes");
        }
        if (!M) throw InvalidParameter("input_projection_norm: petrov mode needs M");
        VectorX<Scalar> coeff =
            basis.adjoint_modes.leftCols(r).adjoint() * M->apply(MatrixX<Scalar>(b));
        pb = basis.modes.leftCols(r) * coeff;
    }
    return W.norm(pb) / b_norm;
}

template double input_projection_norm<double>(const modal::ModeBasisT<double>&, int,
                                              const VectorX<double>&,
                                              const WeightOp<double>&, ProjectionMode,
                                              const WeightOp<double>*);
template double input_projection_norm<cdouble>(const modal::ModeBasisT<cdouble>&, int,
                                               const VectorX<cdouble>&,
                                               const WeightOp<cdouble>&, ProjectionMode,
                                               const WeightOp<cdouble>*);

void write_freq_response_csv(const std::string& path, const VectorXd& omegas,
                             const std::vector<NamedSeries>& systems) {
    auto out = open_csv(path);
    out << "omega";
    for (const auto& s : systems) out << "," << s.label;
    out << "\n";
    for (Index i = 0; i < omegas.size(); ++i) {
        out << fmt(omegas[i]);
        for (const auto& s : systems) out << "," << fmt(s.values[i]);
        out << "\n";
    }
}

void write_error_norms_csv(const std::string& path,
                           const std::vector<ErrorReport>& reports,
                           const std::vector<std::string>& labels) {
    auto out = open_csv(path);
    out << "label,rank,two_norm,hinf,lower,upper\n";
    for (size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        out << labels[i] << "," << r.rank << "," << fmt(r.two_norm_rel) << ","
            << fmt(r.hinf_est) << "," << fmt(r.hsv_lower) << "," << fmt(r.hsv_upper)
            << "\n";
    }
}

void write_spectrum_csv(const std::string& path,
                        const std::vector<std::pair<std::string, std::vector<cdouble>>>&
                            labeled_spectra) {
    auto out = open_csv(path);
    out << "re,im,system\n";
    for (const auto& [label, eigs] : labeled_spectra) {
        for (const auto& e : eigs)
            out << fmt(e.real()) << "," << fmt(e.imag()) << "," << label << "\n";
    }
}

void write_energy_csv(const std::string& path, const VectorXd& times,
                      const std::vector<NamedSeries>& systems) {
    auto out = open_csv(path);
    out << "t";
    for (const auto& s : systems) out << "," << s.label;
    out << "\n";
    for (Index i = 0; i < times.size(); ++i) {
        out << fmt(times[i]);
        for (const auto& s : systems) out << "," << fmt(s.values[i]);
        out << "\n";
    }
}

void write_trace_csv(const std::string& path, const std::vector<int>& ranks,
                     const VectorXd& traces) {
    auto out = open_csv(path);
    out << "rank,T\n";
    for (size_t i = 0; i < ranks.size(); ++i)
        out << ranks[i] << "," << fmt(traces[Index(i)]) << "\n";
}

void write_values_csv(const std::string& path, const VectorXd& values,
                      double total_energy) {
    auto out = open_csv(path);
    out << "index,value,cumulative_fraction\n";
    double cum = 0.0;
    for (Index i = 0; i < values.size(); ++i) {
        cum += values[i];
        out << (i + 1) << "," << fmt(values[i]) << ","
            << fmt(total_energy > 0.0 ? cum / total_energy : 0.0) << "\n";
    }
}

}  // namespace bpod::analysis
