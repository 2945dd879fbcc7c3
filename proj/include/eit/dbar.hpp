#pragma once

#include <memory>
#include <vector>

#include "eit/fft.hpp"
#include "eit/fields.hpp"

namespace eit {

struct DbarPointResult {
    Complex m0;          // m_R(z, 0)
    int iterations = 0;
};

/// Solves the D-bar integral equation
///   m(k) = 1 + (2pi)^{-2} int_{|kappa|<cutoff} t(kappa) / ((k - kappa) conj(kappa))
///                e(-z, kappa) conj(m(kappa)) dkappa
/// on the k-grid by zero-padded FFT convolution with the 1/k kernel.  The
/// kbar factor of t cancels the conj(kappa) denominator exactly, so the
/// integrand is assembled from tau directly: t/conj(kappa) = -4 pi i tau.
/// The conjugation makes the system real-linear; it is solved by GMRES on
/// the Re/Im splitting.
class DbarSolver {
public:
    DbarSolver(const ScatteringField& tau, double cutoff, double tol = 1e-6, int max_iter = 300);

    DbarPointResult solve_point(Complex z) const;

    const KGrid& kgrid() const { return *kgrid_; }

private:
    std::shared_ptr<const KGrid> kgrid_;
    std::vector<Complex> tau_masked_;
    double tol_;
    int max_iter_;
    std::size_t zero_flat_ = 0;
    std::unique_ptr<PaddedConvolution> green_;
};

struct DbarReconstruction {
    ConductivityImage sigma;
    double max_imag_residual = 0.0;  // max |Im sigma_R| / max |Re sigma_R| over the disc
};

/// sigma_R(z) = (m_R(z,0))^2 evaluated on the disc points of the z-grid.
DbarReconstruction reconstruct_sigma(const ScatteringField& tau, std::shared_ptr<const ZGrid> zgrid,
                                     double cutoff, double tol = 1e-6, int max_iter = 300);

}  // namespace eit
