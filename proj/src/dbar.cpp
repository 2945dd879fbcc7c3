#include "eit/dbar.hpp"

#include <cmath>
#include <sstream>

#include "eit/errors.hpp"
#include "eit/gmres.hpp"
#include "eit/parallel.hpp"

namespace eit {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

DbarSolver::DbarSolver(const ScatteringField& tau, double cutoff, double tol, int max_iter)
    : kgrid_(tau.kgrid), tol_(tol), max_iter_(max_iter) {
    if (!(cutoff > 0.0)) throw std::invalid_argument("cutoff must be positive");
    if (cutoff > kgrid_->Rtilde + 1e-12)
        throw std::invalid_argument("cutoff exceeds the k-grid radius");
    tau_masked_.assign(kgrid_->size(), Complex(0.0, 0.0));
    for (std::size_t i = 0; i < kgrid_->size(); ++i) {
        if (std::abs(kgrid_->points[i]) < cutoff) {
            const Complex v = tau.tau[i];
            if (std::isnan(v.real()) || std::isnan(v.imag()))
                throw std::invalid_argument("scattering data contains NaN");
            tau_masked_[i] = v;
        }
    }
    if (kgrid_->zero_index < 0) throw std::invalid_argument("k-grid does not contain k = 0");
    zero_flat_ = static_cast<std::size_t>(kgrid_->zero_index);

    const int n = kgrid_->n;
    const double h = kgrid_->h;
    // Green kernel 1/k with the quadrature weight h^2 / (2 pi)^2 and the
    // -4 pi i factor from t / conj(kappa) folded in: prefactor = -i h^2 / pi.
    const Complex pref = Complex(0.0, -1.0) * h * h / kPi;
    green_ = std::make_unique<PaddedConvolution>(n, [&](int a, int b) {
        if (a == 0 && b == 0) return Complex(0.0, 0.0);
        return pref / Complex(a * h, b * h);
    });
}

DbarPointResult DbarSolver::solve_point(Complex z) const {
    const std::size_t total = kgrid_->size();
    std::vector<Complex> phase(total);
    for (std::size_t i = 0; i < total; ++i) {
        if (tau_masked_[i] == Complex(0.0, 0.0)) {
            phase[i] = Complex(0.0, 0.0);
            continue;
        }
        const double p = -2.0 * (kgrid_->points[i] * z).real();
        phase[i] = tau_masked_[i] * Complex(std::cos(p), std::sin(p));
    }

    const std::size_t nreal = 2 * total;
    std::vector<Complex> m(total), conv(total);
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
        for (std::size_t i = 0; i < total; ++i) m[i] = phase[i] * Complex(x[i], -x[total + i]);
        green_->apply(m, conv);
        y.resize(nreal);
        for (std::size_t i = 0; i < total; ++i) {
            y[i] = x[i] - conv[i].real();
            y[total + i] = x[total + i] - conv[i].imag();
        }
    };

    std::vector<double> rhs(nreal, 0.0);
    std::fill(rhs.begin(), rhs.begin() + static_cast<std::ptrdiff_t>(total), 1.0);
    std::vector<double> x(nreal, 0.0);
    const GmresResult res = gmres(nreal, apply, rhs, x, tol_, max_iter_);
    if (!res.converged) {
        std::ostringstream msg;
        msg << "D-bar solve did not converge at z = (" << z.real() << ", " << z.imag()
            << "), residual " << res.relative_residual;
        throw NumericError(msg.str());
    }
    DbarPointResult out;
    out.m0 = Complex(x[zero_flat_], x[total + zero_flat_]);
    out.iterations = res.iterations;
    return out;
}

DbarReconstruction reconstruct_sigma(const ScatteringField& tau, std::shared_ptr<const ZGrid> zgrid,
                                     double cutoff, double tol, int max_iter) {
    DbarSolver solver(tau, cutoff, tol, max_iter);
    DbarReconstruction rec;
    rec.sigma = make_constant_image(zgrid, 1.0);
    const ZGrid& g = *rec.sigma.grid;
    std::vector<double> imag_part(g.disc_points.size(), 0.0);
    std::vector<double> real_part(g.disc_points.size(), 0.0);
    parallel_for(g.disc_points.size(), [&](std::size_t i) {
        const std::size_t flat = static_cast<std::size_t>(g.disc_points[i]);
        const DbarPointResult r = solver.solve_point(g.points[flat]);
        const Complex s = r.m0 * r.m0;
        real_part[i] = s.real();
        imag_part[i] = s.imag();
    });
    double max_re = 0.0, max_im = 0.0;
    for (std::size_t i = 0; i < real_part.size(); ++i) {
        rec.sigma.values[static_cast<std::size_t>(g.disc_points[i])] = real_part[i];
        max_re = std::max(max_re, std::abs(real_part[i]));
        max_im = std::max(max_im, std::abs(imag_part[i]));
    }
    rec.max_imag_residual = max_re > 0.0 ? max_im / max_re : 0.0;
    return rec;
}

}  // namespace eit
