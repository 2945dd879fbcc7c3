#pragma once

#include <memory>
#include <vector>

#include "eit/fft.hpp"
#include "eit/fields.hpp"

namespace eit {

/// CGO solution of the plane Beltrami equation at one spectral parameter:
/// M = e^{-ikz} f with f = e^{ikz}(1 + O(1/z)).  dbar_m holds the compactly
/// supported field dbar_z M, which is the unknown of the singular-integral
/// formulation and feeds the scattering integral directly.
struct PlaneCgoSolution {
    Complex k;
    std::vector<Complex> M_plus, M_minus;
    std::vector<Complex> dbar_plus, dbar_minus;
    bool converged = false;
    int iterations_plus = 0;
    int iterations_minus = 0;
};

/// Solver for dbar f = +/- mu conj(d f) on the periodic [-s, s) box.  The
/// solid Cauchy transform P = dbar^{-1} and the Beurling transform S = d P
/// are applied as exact (zero-padded) convolutions with the free-space
/// kernels 1/(pi z) and -1/(pi z^2); near-field samples are cell-averaged.
/// The resulting real-linear system for u = dbar M,
///   u + i conj(k) rho conj(P u) - rho conj(S u) = -i conj(k) rho,
/// with rho = (+/-) mu e(-z, k), is solved by GMRES on its Re/Im splitting.
class BeltramiSolver {
public:
    BeltramiSolver(std::shared_ptr<const ZGrid> grid, std::vector<double> mu,
                   double tol = 1e-6, int max_iter = 200);

    /// Solve for both signs at one k.  Throws NumericError on non-convergence
    /// unless throw_on_failure is false (the solution then carries converged=false).
    PlaneCgoSolution solve(Complex k, bool throw_on_failure = true) const;

    /// Scattering transform value at one k via the area integral of
    /// dbar(M_plus - M_minus) over the disc support.
    Complex tau_at(Complex k) const;

    /// Trace of M (plus branch) on |z| = 1 at the given angles, by bilinear
    /// interpolation from the grid.
    std::vector<Complex> boundary_trace_plus(const PlaneCgoSolution& sol,
                                             const std::vector<double>& thetas) const;

    const ZGrid& grid() const { return *grid_; }
    const std::vector<double>& mu() const { return mu_; }

private:
    void solve_one_sign(Complex k, int sign, std::vector<Complex>& u_out,
                        std::vector<Complex>& m_out, int& iters, bool& ok) const;

    std::shared_ptr<const ZGrid> grid_;
    std::vector<double> mu_;
    double tol_;
    int max_iter_;
    std::unique_ptr<PaddedConvolution> cauchy_;  // P alone, for M = 1 + P u
    std::unique_ptr<DualConvolution> pair_;      // (P, S) with a shared forward FFT
};

/// Scattering transform tau(k) on the selected k-grid points (mask nonzero).
/// Per-k solves are independent and run on the parallel map; failed points
/// are recorded in the valid_mask and carry tau = 0.
ScatteringField scattering_from_mu(std::shared_ptr<const ZGrid> grid, const std::vector<double>& mu,
                                   std::shared_ptr<const KGrid> kgrid, const std::vector<uint8_t>& kmask,
                                   double tol = 1e-6, int max_iter = 200);

/// Spectral dbar derivative on the periodic box (test utility and cross-check
/// for the area-integral route).
std::vector<Complex> dbar_spectral(const std::vector<Complex>& field, const ZGrid& grid);

/// Free-space solid Cauchy transform P = dbar^{-1} and Beurling transform
/// S = d dbar^{-1} of a compactly supported grid field, via the same padded
/// convolutions the Beltrami solver uses.
std::vector<Complex> cauchy_transform(const std::vector<Complex>& field, const ZGrid& grid);
std::vector<Complex> beurling_transform(const std::vector<Complex>& field, const ZGrid& grid);

}  // namespace eit
