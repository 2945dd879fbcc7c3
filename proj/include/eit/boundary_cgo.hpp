#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "eit/fields.hpp"
#include "eit/forward.hpp"

namespace eit {

/// Beltrami CGO traces M_{+mu}, M_{-mu} on the boundary nodes for one k.
struct CgoBoundaryTraces {
    Complex k;
    std::vector<double> thetas;
    std::vector<Complex> M_plus;
    std::vector<Complex> M_minus;
};

/// CGO sinogram: (2N+1) x (2N+1) matrix of M_mu(e^{i theta_m}, rho e^{i phi_l}) - 1
/// with phi_l = theta_l.
struct Sinogram {
    double rho = 2.0;
    Eigen::MatrixXcd entries;
};

/// Solves the boundary integral equation for the CGO traces from a DN matrix.
///
/// The trace g = f_{+/-mu}(., k)|_{boundary} is pinned down by two conditions:
/// the exterior Cauchy projection (e^{-ikz} g has no positive Fourier modes and
/// unit mean, from the analyticity of M outside the disc), and the interior
/// one (the mean-free part of Im g is the mu-Hilbert transform of Re g, where
/// H_mu = dT^{-1} Lambda_sigma is read off the DN data; the -mu branch uses
/// Lambda_{1/sigma} = -dT Lambda_sigma^{-1} dT).  Both are assembled as dense
/// blocks on the 2N+1 nodes / trig coefficients and the resulting real-linear
/// system is solved by GMRES.
class TraceSolver {
public:
    TraceSolver(const BoundaryOpMatrix& dn, double tol = 1e-8, int max_iter = 500);

    CgoBoundaryTraces solve(Complex k) const;

    /// First negative Fourier coefficient a1 of a trace vector (coefficient of
    /// e^{-i theta}), i.e. the 1/z coefficient of M outside the disc.
    Complex a1_coefficient(const std::vector<Complex>& M_nodes) const;

    int N() const { return N_; }
    std::vector<double> thetas() const;

private:
    int N_;
    double tol_;
    int max_iter_;
    Eigen::MatrixXd basis_nodes_;   // (2N+1) x (2N+1): [psi_0, phi_1..phi_2N] at nodes
    Eigen::MatrixXd interior_plus_;  // 2N x 66 block of interior rows, +mu
    Eigen::MatrixXd interior_minus_;
    std::vector<Complex> solve_branch(Complex k, const Eigen::MatrixXd& interior) const;
};

/// Scattering transform on all k-grid points with |k| < R from DN data:
/// tau(k) = (conj(a1+) - conj(a1-)) / 2, zero outside the mask.  Failed trace
/// solves (beyond the reliable radius) are zeroed and flagged invalid.
ScatteringField extract_tau(const BoundaryOpMatrix& dn, std::shared_ptr<const KGrid> kgrid,
                            double R);

Sinogram build_sinogram(const BoundaryOpMatrix& dn, double rho);

/// Relative L2(T^2) distance ||a - b|| / ||b|| over the node grid.
double sinogram_discrepancy(const Sinogram& a, const Sinogram& b);

}  // namespace eit
