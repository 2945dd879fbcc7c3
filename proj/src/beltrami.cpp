#include "eit/beltrami.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "eit/errors.hpp"
#include "eit/gmres.hpp"
#include "eit/parallel.hpp"

namespace eit {

namespace {
constexpr double kPi = 3.14159265358979323846;

// Cell-averaged kernel sample: near the singularity the point value of the
// kernel is a poor quadrature weight, so average over an nq x nq midpoint
// subgrid of the cell.  The self cell integrates to zero for both kernels
// (odd symmetry for 1/z, four-fold rotation symmetry for 1/z^2).
template <class Fn>
Complex cell_average(Fn&& f, double h, int a, int b) {
    if (a == 0 && b == 0) return Complex(0.0, 0.0);
    if (std::abs(a) > 6 || std::abs(b) > 6) return f(Complex(a * h, b * h));
    const int nq = 8;
    Complex sum(0.0, 0.0);
    for (int j = 0; j < nq; ++j)
        for (int i = 0; i < nq; ++i) {
            const double dx = (i + 0.5) / nq - 0.5;
            const double dy = (j + 0.5) / nq - 0.5;
            sum += f(Complex((a + dx) * h, (b + dy) * h));
        }
    return sum / static_cast<double>(nq * nq);
}

std::unique_ptr<PaddedConvolution> make_cauchy_conv(int n, double h) {
    const double w = h * h / kPi;  // quadrature weight folded into the kernel
    return std::make_unique<PaddedConvolution>(n, [&](int a, int b) {
        return cell_average([&](Complex z) { return Complex(w, 0.0) / z; }, h, a, b);
    });
}

std::unique_ptr<PaddedConvolution> make_beurling_conv(int n, double h) {
    const double w = h * h / kPi;
    return std::make_unique<PaddedConvolution>(n, [&](int a, int b) {
        return cell_average([&](Complex z) { return Complex(-w, 0.0) / (z * z); }, h, a, b);
    });
}

}  // namespace

std::vector<Complex> cauchy_transform(const std::vector<Complex>& field, const ZGrid& grid) {
    std::vector<Complex> out;
    make_cauchy_conv(grid.n, grid.h)->apply(field, out);
    return out;
}

std::vector<Complex> beurling_transform(const std::vector<Complex>& field, const ZGrid& grid) {
    std::vector<Complex> out;
    make_beurling_conv(grid.n, grid.h)->apply(field, out);
    return out;
}

BeltramiSolver::BeltramiSolver(std::shared_ptr<const ZGrid> grid, std::vector<double> mu,
                               double tol, int max_iter)
    : grid_(std::move(grid)), mu_(std::move(mu)), tol_(tol), max_iter_(max_iter) {
    if (mu_.size() != grid_->size()) throw std::invalid_argument("mu field size does not match grid");
    double sup = 0.0;
    for (std::size_t i = 0; i < mu_.size(); ++i) {
        sup = std::max(sup, std::abs(mu_[i]));
        if (!grid_->disc_mask[i] && mu_[i] != 0.0)
            throw std::invalid_argument("mu must be supported in the unit disc");
    }
    if (sup >= 1.0) throw std::invalid_argument("sup |mu| must be < 1");
    const int n = grid_->n;
    const double h = grid_->h;
    const double w = h * h / kPi;
    cauchy_ = make_cauchy_conv(n, h);
    pair_ = std::make_unique<DualConvolution>(
        n,
        [&](int a, int b) { return cell_average([&](Complex z) { return Complex(w, 0.0) / z; }, h, a, b); },
        [&](int a, int b) {
            return cell_average([&](Complex z) { return Complex(-w, 0.0) / (z * z); }, h, a, b);
        });
}

void BeltramiSolver::solve_one_sign(Complex k, int sign, std::vector<Complex>& u_out,
                                    std::vector<Complex>& m_out, int& iters, bool& ok) const {
    const std::size_t total = grid_->size();
    const Complex kbar = std::conj(k);

    // rho = sign * mu * e(-z, k),  e(-z,k) = exp(-2i Re(k z))
    std::vector<Complex> rho(total);
    for (std::size_t i = 0; i < total; ++i) {
        if (mu_[i] == 0.0) {
            rho[i] = Complex(0.0, 0.0);
            continue;
        }
        const double phase = -2.0 * (k * grid_->points[i]).real();
        rho[i] = static_cast<double>(sign) * mu_[i] * Complex(std::cos(phase), std::sin(phase));
    }

    std::vector<Complex> u(total), pu(total), su(total), work(total);
    const std::size_t nreal = 2 * total;
    auto pack = [&](const std::vector<Complex>& c, std::vector<double>& r) {
        for (std::size_t i = 0; i < total; ++i) {
            r[i] = c[i].real();
            r[total + i] = c[i].imag();
        }
    };
    auto unpack = [&](const std::vector<double>& r, std::vector<Complex>& c) {
        for (std::size_t i = 0; i < total; ++i) c[i] = Complex(r[i], r[total + i]);
    };

    std::vector<double> rhs(nreal);
    for (std::size_t i = 0; i < total; ++i) work[i] = Complex(0.0, -1.0) * kbar * rho[i];
    pack(work, rhs);

    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
        unpack(x, u);
        pair_->apply(u, pu, su);
        for (std::size_t i = 0; i < total; ++i) {
            work[i] = u[i] + Complex(0.0, 1.0) * kbar * rho[i] * std::conj(pu[i]) - rho[i] * std::conj(su[i]);
        }
        y.resize(nreal);
        pack(work, y);
    };

    std::vector<double> x(nreal, 0.0);
    const GmresResult res = gmres(nreal, apply, rhs, x, tol_, max_iter_);
    iters = res.iterations;
    ok = res.converged;
    unpack(x, u);
    u_out = u;
    cauchy_->apply(u, pu);
    m_out.resize(total);
    for (std::size_t i = 0; i < total; ++i) m_out[i] = 1.0 + pu[i];
}

PlaneCgoSolution BeltramiSolver::solve(Complex k, bool throw_on_failure) const {
    PlaneCgoSolution sol;
    sol.k = k;
    bool ok_p = false, ok_m = false;
    solve_one_sign(k, +1, sol.dbar_plus, sol.M_plus, sol.iterations_plus, ok_p);
    solve_one_sign(k, -1, sol.dbar_minus, sol.M_minus, sol.iterations_minus, ok_m);
    sol.converged = ok_p && ok_m;
    if (!sol.converged && throw_on_failure) {
        std::ostringstream msg;
        msg << "Beltrami solve did not converge at k = (" << k.real() << ", " << k.imag()
            << "), iterations " << sol.iterations_plus << "/" << sol.iterations_minus;
        throw NumericError(msg.str());
    }
    return sol;
}

Complex BeltramiSolver::tau_at(Complex k) const {
    const PlaneCgoSolution sol = solve(k);
    const double w = grid_->h * grid_->h / (2.0 * kPi);
    Complex acc(0.0, 0.0);
    for (int32_t idx : grid_->disc_points) {
        acc += sol.dbar_plus[static_cast<std::size_t>(idx)] - sol.dbar_minus[static_cast<std::size_t>(idx)];
    }
    return std::conj(w * acc);
}

std::vector<Complex> BeltramiSolver::boundary_trace_plus(const PlaneCgoSolution& sol,
                                                         const std::vector<double>& thetas) const {
    const ZGrid& g = *grid_;
    std::vector<Complex> out;
    out.reserve(thetas.size());
    for (double th : thetas) {
        const double x = std::cos(th), y = std::sin(th);
        double fx = (x + g.s) / g.h, fy = (y + g.s) / g.h;
        int ix = static_cast<int>(std::floor(fx)), iy = static_cast<int>(std::floor(fy));
        ix = std::clamp(ix, 0, g.n - 2);
        iy = std::clamp(iy, 0, g.n - 2);
        const double tx = fx - ix, ty = fy - iy;
        auto at = [&](int i, int j) { return sol.M_plus[static_cast<std::size_t>(j) * g.n + i]; };
        out.push_back((1 - tx) * (1 - ty) * at(ix, iy) + tx * (1 - ty) * at(ix + 1, iy) +
                      (1 - tx) * ty * at(ix, iy + 1) + tx * ty * at(ix + 1, iy + 1));
    }
    return out;
}

ScatteringField scattering_from_mu(std::shared_ptr<const ZGrid> grid, const std::vector<double>& mu,
                                   std::shared_ptr<const KGrid> kgrid, const std::vector<uint8_t>& kmask,
                                   double tol, int max_iter) {
    if (kmask.size() != kgrid->size()) throw std::invalid_argument("k mask size mismatch");
    BeltramiSolver solver(grid, mu, tol, max_iter);
    ScatteringField field;
    field.kgrid = kgrid;
    field.tau.assign(kgrid->size(), Complex(0.0, 0.0));
    field.valid_mask.assign(kgrid->size(), 0);

    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < kmask.size(); ++i)
        if (kmask[i]) active.push_back(i);
    // sweep ordered by |k| so failures at large |k| truncate cleanly
    std::sort(active.begin(), active.end(), [&](std::size_t a, std::size_t b) {
        const double ra = std::abs(kgrid->points[a]), rb = std::abs(kgrid->points[b]);
        if (ra != rb) return ra < rb;
        return a < b;
    });

    parallel_for(active.size(), [&](std::size_t j) {
        const std::size_t idx = active[j];
        const Complex k = kgrid->points[idx];
        if (k == Complex(0.0, 0.0)) {
            // tau(0) from the formula; t(0) = 0 regardless via the kbar factor
            field.tau[idx] = solver.tau_at(k);
            field.valid_mask[idx] = 1;
            return;
        }
        try {
            field.tau[idx] = solver.tau_at(k);
            field.valid_mask[idx] = 1;
        } catch (const NumericError&) {
            field.tau[idx] = Complex(0.0, 0.0);
            field.valid_mask[idx] = 0;
        }
    });
    return field;
}

std::vector<Complex> dbar_spectral(const std::vector<Complex>& field, const ZGrid& grid) {
    const int n = grid.n;
    std::vector<Complex> hat = field;
    fft2(hat, n, false);
    const double dxi = kPi / grid.s;  // 2*pi / (2s)
    for (int j = 0; j < n; ++j) {
        const int qy = j < n / 2 ? j : j - n;
        for (int i = 0; i < n; ++i) {
            const int qx = i < n / 2 ? i : i - n;
            const Complex zeta(qx * dxi, qy * dxi);
            hat[static_cast<std::size_t>(j) * n + i] *= Complex(0.0, 0.5) * zeta;
        }
    }
    fft2(hat, n, true);
    return hat;
}

}  // namespace eit
