#include "eit/boundary_cgo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eit/errors.hpp"
#include "eit/gmres.hpp"
#include "eit/parallel.hpp"

namespace eit {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TraceSolver::TraceSolver(const BoundaryOpMatrix& dn, double tol, int max_iter)
    : N_(dn.N), tol_(tol), max_iter_(max_iter) {
    if (dn.kind != BoundaryOpMatrix::Kind::DN) throw std::invalid_argument("TraceSolver expects a DN matrix");
    const int nn = 2 * N_ + 1;
    TrigBasis basis;
    basis.N = N_;
    const auto th = basis.nodes();

    basis_nodes_.resize(nn, nn);
    const double psi0 = 1.0 / std::sqrt(2.0 * kPi);
    for (int j = 0; j < nn; ++j) {
        basis_nodes_(j, 0) = psi0;
        for (int c = 1; c < nn; ++c) basis_nodes_(j, c) = basis.eval(c, th[static_cast<std::size_t>(j)]);
    }

    // Tangential derivative and its pseudo-inverse in the trig basis.
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(nn, nn);
    Eigen::MatrixXd Dinv = Eigen::MatrixXd::Zero(nn, nn);
    for (int w = 1; w <= N_; ++w) {
        const int c0 = 2 * w - 1, c1 = 2 * w;
        D(c0, c1) = w;
        D(c1, c0) = -w;
        Dinv(c0, c1) = -1.0 / w;
        Dinv(c1, c0) = 1.0 / w;
    }

    // mu-Hilbert transforms: H_{+mu} = dT^{-1} Lambda, H_{-mu} = -R Lambda',
    // using Lambda_{1/sigma} = -dT Lambda^{-1} dT = -dT R dT.
    Eigen::MatrixXd Rpad = Eigen::MatrixXd::Zero(nn, nn);
    Rpad.block(1, 1, 2 * N_, 2 * N_) = dn_to_nd_block(dn);
    const Eigen::MatrixXd H_plus = Dinv * dn.entries;
    const Eigen::MatrixXd H_minus = -Rpad * D;

    auto interior_rows = [&](const Eigen::MatrixXd& H) {
        Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(2 * N_, 2 * nn);
        for (int c = 1; c < nn; ++c) {
            rows.block(c - 1, 0, 1, nn) = -H.row(c);
            rows(c - 1, nn + c) = 1.0;
        }
        return rows;
    };
    interior_plus_ = interior_rows(H_plus);
    interior_minus_ = interior_rows(H_minus);
}

std::vector<double> TraceSolver::thetas() const {
    TrigBasis basis;
    basis.N = N_;
    return basis.nodes();
}

std::vector<Complex> TraceSolver::solve_branch(Complex k, const Eigen::MatrixXd& interior) const {
    const int nn = 2 * N_ + 1;
    const auto th = thetas();

    // multiplier w_j = exp(-i k z_j) on the boundary nodes
    std::vector<Complex> w(static_cast<std::size_t>(nn));
    for (int j = 0; j < nn; ++j) {
        const Complex z(std::cos(th[static_cast<std::size_t>(j)]), std::sin(th[static_cast<std::size_t>(j)]));
        w[static_cast<std::size_t>(j)] = std::exp(Complex(0.0, -1.0) * k * z);
    }

    // G(n, c) = sum_j F(n, j) w_j B(j, c) for Fourier rows n = 0..N
    Eigen::MatrixXcd G(N_ + 1, nn);
    for (int n = 0; n <= N_; ++n) {
        for (int c = 0; c < nn; ++c) {
            Complex acc(0.0, 0.0);
            for (int j = 0; j < nn; ++j) {
                const double ang = -n * th[static_cast<std::size_t>(j)];
                acc += Complex(std::cos(ang), std::sin(ang)) * w[static_cast<std::size_t>(j)] * basis_nodes_(j, c);
            }
            G(n, c) = acc / static_cast<double>(nn);
        }
    }

    const int dim = 2 * nn;  // [u_hat; v_hat]
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    A.block(0, 0, 2 * N_, dim) = interior;
    int row = 2 * N_;
    for (int n = 1; n <= N_; ++n) {
        for (int c = 0; c < nn; ++c) {
            A(row, c) = G(n, c).real();
            A(row, nn + c) = -G(n, c).imag();
            A(row + 1, c) = G(n, c).imag();
            A(row + 1, nn + c) = G(n, c).real();
        }
        row += 2;
    }
    for (int c = 0; c < nn; ++c) {
        A(row, c) = G(0, c).real();
        A(row, nn + c) = -G(0, c).imag();
        A(row + 1, c) = G(0, c).imag();
        A(row + 1, nn + c) = G(0, c).real();
    }
    rhs[row] = 1.0;

    std::vector<double> rhs_v(rhs.data(), rhs.data() + dim);
    std::vector<double> x(static_cast<std::size_t>(dim), 0.0);
    auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
        Eigen::Map<const Eigen::VectorXd> vin(in.data(), dim);
        Eigen::VectorXd vout = A * vin;
        out.assign(vout.data(), vout.data() + dim);
    };
    const GmresResult res = gmres(static_cast<std::size_t>(dim), apply, rhs_v, x, tol_, max_iter_);
    if (!res.converged) {
        std::ostringstream msg;
        msg << "CGO trace system did not converge at k = (" << k.real() << ", " << k.imag()
            << "), residual " << res.relative_residual;
        throw NumericError(msg.str());
    }

    std::vector<Complex> M(static_cast<std::size_t>(nn));
    Eigen::Map<const Eigen::VectorXd> uh(x.data(), nn);
    Eigen::Map<const Eigen::VectorXd> vh(x.data() + nn, nn);
    const Eigen::VectorXd un = basis_nodes_ * uh;
    const Eigen::VectorXd vn = basis_nodes_ * vh;
    for (int j = 0; j < nn; ++j) M[static_cast<std::size_t>(j)] = w[static_cast<std::size_t>(j)] * Complex(un[j], vn[j]);
    return M;
}

CgoBoundaryTraces TraceSolver::solve(Complex k) const {
    CgoBoundaryTraces tr;
    tr.k = k;
    tr.thetas = thetas();
    tr.M_plus = solve_branch(k, interior_plus_);
    tr.M_minus = solve_branch(k, interior_minus_);
    return tr;
}

Complex TraceSolver::a1_coefficient(const std::vector<Complex>& M_nodes) const {
    const int nn = 2 * N_ + 1;
    const auto th = thetas();
    Complex acc(0.0, 0.0);
    for (int j = 0; j < nn; ++j) {
        acc += M_nodes[static_cast<std::size_t>(j)] *
               Complex(std::cos(th[static_cast<std::size_t>(j)]), std::sin(th[static_cast<std::size_t>(j)]));
    }
    return acc / static_cast<double>(nn);
}

ScatteringField extract_tau(const BoundaryOpMatrix& dn, std::shared_ptr<const KGrid> kgrid, double R) {
    TraceSolver solver(dn);
    ScatteringField field;
    field.kgrid = kgrid;
    field.tau.assign(kgrid->size(), Complex(0.0, 0.0));
    field.valid_mask.assign(kgrid->size(), 0);

    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < kgrid->size(); ++i) {
        if (std::abs(kgrid->points[i]) < R) active.push_back(i);
    }
    std::sort(active.begin(), active.end(), [&](std::size_t a, std::size_t b) {
        const double ra = std::abs(kgrid->points[a]), rb = std::abs(kgrid->points[b]);
        if (ra != rb) return ra < rb;
        return a < b;
    });

    parallel_for(active.size(), [&](std::size_t j) {
        const std::size_t idx = active[j];
        try {
            const CgoBoundaryTraces tr = solver.solve(kgrid->points[idx]);
            const Complex a1p = solver.a1_coefficient(tr.M_plus);
            const Complex a1m = solver.a1_coefficient(tr.M_minus);
            field.tau[idx] = 0.5 * (std::conj(a1p) - std::conj(a1m));
            field.valid_mask[idx] = 1;
        } catch (const NumericError&) {
            field.tau[idx] = Complex(0.0, 0.0);  // truncated: beyond the reliable radius
            field.valid_mask[idx] = 0;
        }
    });
    return field;
}

Sinogram build_sinogram(const BoundaryOpMatrix& dn, double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("sinogram radius must be positive");
    TraceSolver solver(dn);
    const int nn = 2 * dn.N + 1;
    const auto th = solver.thetas();
    Sinogram sino;
    sino.rho = rho;
    sino.entries.resize(nn, nn);
    std::vector<std::vector<Complex>> cols(static_cast<std::size_t>(nn));
    parallel_for(static_cast<std::size_t>(nn), [&](std::size_t l) {
        const Complex k = rho * Complex(std::cos(th[l]), std::sin(th[l]));
        const CgoBoundaryTraces tr = solver.solve(k);
        cols[l] = tr.M_plus;
    });
    for (int l = 0; l < nn; ++l)
        for (int m = 0; m < nn; ++m)
            sino.entries(m, l) = cols[static_cast<std::size_t>(l)][static_cast<std::size_t>(m)] - 1.0;
    return sino;
}

double sinogram_discrepancy(const Sinogram& a, const Sinogram& b) {
    if (a.entries.rows() != b.entries.rows() || a.entries.cols() != b.entries.cols())
        throw std::invalid_argument("sinogram shape mismatch");
    if (a.rho != b.rho) throw std::invalid_argument("sinogram radius mismatch");
    const double denom = b.entries.norm();
    if (denom == 0.0) throw NumericError("sinogram discrepancy: reference sinogram is identically zero");
    return (a.entries - b.entries).norm() / denom;
}

}  // namespace eit
