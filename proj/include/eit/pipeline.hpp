#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eit/boundary_cgo.hpp"
#include "eit/contrast.hpp"
#include "eit/fields.hpp"
#include "eit/forward.hpp"

namespace eit {

struct PipelineConfig {
    std::string phantom = "heart_lungs";  // name or path of a phantom spec
    double R = 5.0;
    double Rtilde = 10.0;
    int J = 3;
    int K = 4;
    double lambda = 0.1;
    ContrastBounds bounds{0.3, 2.5};
    double eta = 0.0;
    uint64_t seed = 7;
    int ell = 8;
    double s = 2.3;
    int m = 7;
    int mesh_level = 6;
    int basis_N = 16;
    double rho = 2.0;
    int budget = 60;
    double tv_s_param = 0.0;
    int ell_scatter = 0;                 // z-grid exponent for the extension solves (0 = same as ell)
    std::optional<double> deltaR;        // progressive annulus step (off by default)
    std::optional<double> stop_thresh;   // relative-change stopping rule (off by default)
};

struct StageMetrics {
    double l2_db = 0.0, l2_tv = 0.0, l2_ce = 0.0;
    double ssim_db = 0.0, ssim_tv = 0.0, ssim_ce = 0.0;
};

struct IterationRecord {
    int j = 0;
    ConductivityImage sigma_db, sigma_tv, sigma_ce;
    ScatteringField tau;      // the transform used for this iteration's D-bar
    double ce_s = 0.0, ce_t = 0.0, ce_discrepancy = 0.0;
    StageMetrics metrics;     // vs truth when provided
    double max_imag_residual = 0.0;
    bool stopped_early = false;
};

/// Hermite blend weight: 1 inside |k| < R-1, p(|k| - (R-1)) with
/// p(t) = 1 - 3t^2 + 2t^3 in the overlap, 0 outside |k| > R.
double blend_chi(Complex k, double R);

/// Scattering extension: Beltrami transform of sigma_ce on the annulus
/// R-1 <= |k| <= Rtilde blended with tau0 through chi.  A positive
/// ell_scatter below the image's own exponent resamples the piecewise
/// constant image onto the coarser grid before solving (the transform values
/// move by far less than the blending tolerates).
ScatteringField extend_scattering(const ScatteringField& tau0, const ConductivityImage& sigma_ce,
                                  double R, double Rtilde, double annulus_grow = 0.0,
                                  int ell_scatter = 0);

double relative_l2(const ConductivityImage& a, const ConductivityImage& b);
double ssim(const ConductivityImage& a, const ConductivityImage& truth);
bool stop_check(const ConductivityImage& current, const ConductivityImage& previous, double thresh);

struct PipelineResult {
    ScatteringField tau0;
    std::vector<IterationRecord> iterations;
};

/// Runs the full loop from a (noisy) DN matrix: initial transform, then per
/// iteration D-bar -> TV -> CE -> extension.  truth, when given, fills the
/// per-stage metrics.
PipelineResult run_pipeline(const BoundaryOpMatrix& dn, const PipelineConfig& config,
                            const ConductivityImage* truth = nullptr);

std::string metrics_csv(const std::vector<IterationRecord>& records);

}  // namespace eit
