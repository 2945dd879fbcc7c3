#include "eit/grids.hpp"

#include <cmath>

namespace eit {

ZGrid make_zgrid(int ell, double s) {
    if (ell < 4) throw std::invalid_argument("make_zgrid: ell must be >= 4");
    if (!(s > 1.0)) throw std::invalid_argument("make_zgrid: s must exceed 1 so the grid contains the closed unit disc");
    ZGrid g;
    g.ell = ell;
    g.s = s;
    g.n = 1 << ell;
    g.h = 2.0 * s / g.n;
    const std::size_t total = static_cast<std::size_t>(g.n) * g.n;
    g.points.resize(total);
    g.disc_mask.assign(total, 0);
    g.disc_index.assign(total, -1);
    for (int iy = 0; iy < g.n; ++iy) {
        const double y = -s + iy * g.h;
        for (int ix = 0; ix < g.n; ++ix) {
            const double x = -s + ix * g.h;
            const std::size_t idx = static_cast<std::size_t>(iy) * g.n + ix;
            g.points[idx] = Complex(x, y);
            if (x * x + y * y <= 1.0) {
                g.disc_mask[idx] = 1;
                g.disc_index[idx] = static_cast<int32_t>(g.disc_points.size());
                g.disc_points.push_back(static_cast<int32_t>(idx));
            }
        }
    }
    return g;
}

KGrid make_kgrid(int m, double R, double Rtilde) {
    if (!(R > 1.0)) throw std::invalid_argument("make_kgrid: R must exceed 1 (blending uses the annulus R-1 < |k| < R)");
    if (!(Rtilde > R)) throw std::invalid_argument("make_kgrid: Rtilde must exceed R");
    KGrid g;
    g.m = m;
    g.R = R;
    g.Rtilde = Rtilde;
    g.n = 1 << m;
    g.h = 2.0 * Rtilde / g.n;
    const std::size_t total = static_cast<std::size_t>(g.n) * g.n;
    g.points.resize(total);
    g.mask_R.assign(total, 0);
    g.mask_Rtilde.assign(total, 0);
    g.mask_annulus.assign(total, 0);
    for (int iy = 0; iy < g.n; ++iy) {
        const double y = -Rtilde + iy * g.h;
        for (int ix = 0; ix < g.n; ++ix) {
            const double x = -Rtilde + ix * g.h;
            const std::size_t idx = static_cast<std::size_t>(iy) * g.n + ix;
            g.points[idx] = Complex(x, y);
            const double r = std::hypot(x, y);
            if (r <= R) g.mask_R[idx] = 1;
            if (r <= Rtilde) g.mask_Rtilde[idx] = 1;
            if (r <= Rtilde && !(r < R - 1.0)) g.mask_annulus[idx] = 1;
            if (x == 0.0 && y == 0.0) g.zero_index = static_cast<int32_t>(idx);
        }
    }
    return g;
}

}  // namespace eit
