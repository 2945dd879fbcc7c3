#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace eit {

using Complex = std::complex<double>;

/// Uniform square grid in the z-plane, 2^ell x 2^ell points on
/// [-s, s) x [-s, s), half-open in both axes.  Storage is row-major with
/// y as the outer index: flat = iy * n + ix, z = (-s + ix*h) + i(-s + iy*h).
/// The disc mask marks points with |z| <= 1.
struct ZGrid {
    int ell = 0;
    double s = 0.0;
    int n = 0;         // points per side, 2^ell
    double h = 0.0;    // spacing 2s / n
    std::vector<Complex> points;        // size n*n
    std::vector<uint8_t> disc_mask;     // size n*n, 1 iff |z| <= 1
    std::vector<int32_t> disc_index;    // size n*n, compact index or -1
    std::vector<int32_t> disc_points;   // flat indices of masked points

    std::size_t size() const { return points.size(); }
    int disc_count() const { return static_cast<int>(disc_points.size()); }
    Complex point(int ix, int iy) const { return points[static_cast<std::size_t>(iy) * n + ix]; }
};

/// Spectral-variable grid, 2^m x 2^m points on [-Rtilde, Rtilde)^2 with the
/// same layout convention as ZGrid.  Carries the masks used by the
/// truncation / extension steps: |k| <= R, |k| <= Rtilde, and the annulus
/// mask_Rtilde \ {|k| < R-1}.  k = 0 falls on the grid and is flagged; the
/// scattering transform t(k) vanishes there because of its kbar factor.
struct KGrid {
    int m = 0;
    double R = 0.0;
    double Rtilde = 0.0;
    int n = 0;
    double h = 0.0;
    std::vector<Complex> points;
    std::vector<uint8_t> mask_R;
    std::vector<uint8_t> mask_Rtilde;
    std::vector<uint8_t> mask_annulus;
    int32_t zero_index = -1;   // flat index of k = 0

    std::size_t size() const { return points.size(); }
};

ZGrid make_zgrid(int ell, double s);
KGrid make_kgrid(int m, double R, double Rtilde);

}  // namespace eit
