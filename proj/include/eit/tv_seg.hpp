#pragma once

#include <functional>
#include <vector>

#include "eit/fields.hpp"

namespace eit {

/// Relaxed multi-label segmentation state: K membership channels per pixel on
/// the probability simplex plus the region means.
struct LabelField {
    int K = 0;
    int width = 0, height = 0;          // crop window around the disc
    std::vector<double> u;              // K * width * height, channel-major
    std::vector<double> c;              // K region means, ascending at init
    double lambda = 0.0;
};

struct SegmentationResult {
    LabelField labels;                  // thresholded (binary) memberships
    ConductivityImage piecewise;        // sigma_TV = sum_k u*_k c_k on the disc
    int outer_iterations = 0;
    std::vector<double> energy_trace;   // thresholded primal energy per outer pass
};

struct SegmentationOptions {
    int max_outer = 20;
    int max_inner = 2000;
    double inner_tol = 1e-5;
    double outer_tol = 1e-4;
    double s_param = 0.0;               // edge-weight strength; 0 = plain TV
    double smoothing = 2.0;             // Gaussian width (pixels) for the edge map
    /// test hook, called after every inner iterate with (u, px, py, g, K, npix)
    std::function<void(const std::vector<double>&, const std::vector<double>&,
                       const std::vector<double>&, const std::vector<double>&, int, int)> observer;
};

/// Deterministic k-means (k-means++ seeding, Lloyd iterations) over the disc
/// pixels; means returned ascending.  If the image has fewer distinct values
/// than K the distinct values are returned padded with the largest one.
std::vector<double> kmeans_init(const ConductivityImage& image, int K, uint64_t seed);

/// Edge-stopping weight g = 1 / (1 + s ||grad sigma_smooth||^2), identically 1
/// when s = 0.
std::vector<double> edge_weight(const ConductivityImage& image, double s_param, double smoothing);

/// Forward-difference gradient with Neumann boundary and its negative
/// adjoint divergence on a W x H field (exact adjoint pair: <grad u, p> =
/// -<u, div p> in the flat inner product).
void grad_forward(const double* u, int W, int H, double* gx, double* gy);
void div_backward(const double* px, const double* py, int W, int H, double* out);

/// Euclidean projection onto the probability simplex (in place).
void project_simplex(double* v, int K);

/// Radial projection of a 2-vector onto |p| <= bound (in place).
void project_dual(double& px, double& py, double bound);

/// Primal-dual solve of the convex-relaxed piecewise-constant segmentation
/// with alternating mean updates, followed by thresholding.  The image is
/// segmented on its disc pixels; exterior pixels are frozen to the label
/// whose mean is closest to the background.
SegmentationResult segment(const ConductivityImage& image, int K, double lambda, uint64_t seed,
                           const SegmentationOptions& opts = {});

}  // namespace eit
