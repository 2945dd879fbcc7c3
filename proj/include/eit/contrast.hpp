#pragma once

#include <array>
#include <functional>
#include <vector>

#include "eit/boundary_cgo.hpp"
#include "eit/fields.hpp"

namespace eit {

/// A priori conductivity bounds 0 < c < 1 < C.
struct ContrastBounds {
    double c = 0.3;
    double C = 2.5;
};

/// Two-parameter contrast family around a piecewise-constant image:
///   sigma_{s,t} = 1 + t (C-1) f / M   where sigma_tilde > 1,
///                 1 + s (c-1) f / m   where sigma_tilde < 1,
///                 1                   otherwise,
/// with f = sigma_tilde - 1, m = min f, M = max f.  When the image has no
/// values on one side of 1 that branch is inert.
struct ContrastFamily {
    ConductivityImage base;
    ContrastBounds bounds;
    double m = 0.0, M = 0.0;
    bool has_below = false;  // m < 0
    bool has_above = false;  // M > 0

    ConductivityImage member(double s, double t) const;
};

ContrastFamily make_family(const ConductivityImage& sigma_tv, const ContrastBounds& bounds);

struct DirectResult {
    double s = 0.0, t = 0.0;
    double value = 0.0;
    int evaluations = 0;
    std::vector<std::array<double, 3>> samples;  // (s, t, value) audit log
};

/// Deterministic DIRECT (dividing rectangles) global minimization over
/// [0,1]^2.  Objective failures mark the sample infeasible (large value) and
/// the search continues.
DirectResult direct_minimize(const std::function<double(double, double)>& objective, int budget);

struct ContrastEnhanceConfig {
    int mesh_level = 6;
    int basis_N = 16;
    double rho = 2.0;
    int budget = 60;
};

struct ContrastEnhanceResult {
    ConductivityImage sigma_ce;
    double s = 0.0, t = 0.0;
    double discrepancy = 0.0;
    std::vector<std::array<double, 3>> samples;
};

/// Sinogram discrepancy of one family member against the measured sinogram;
/// runs a noiseless forward solve of sigma_{s,t}.
double evaluate_candidate(const ContrastFamily& family, double s, double t,
                          const Sinogram& measured, const ContrastEnhanceConfig& cfg);

/// Full contrast-enhancement step: DIRECT search of (s,t) in [0,1]^2 against
/// the measured CGO sinogram, with memoized candidate evaluations.
ContrastEnhanceResult contrast_enhance(const ConductivityImage& sigma_tv, const ContrastBounds& bounds,
                                       const Sinogram& measured, const ContrastEnhanceConfig& cfg);

}  // namespace eit
