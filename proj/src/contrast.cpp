#include "eit/contrast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "eit/errors.hpp"
#include "eit/forward.hpp"

namespace eit {

ConductivityImage ContrastFamily::member(double s, double t) const {
    if (s < 0.0 || s > 1.0 || t < 0.0 || t > 1.0)
        throw std::invalid_argument("contrast parameters must lie in [0,1]^2");
    ConductivityImage out = base;
    const double cb = bounds.c, Cb = bounds.C;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const double f = base.values[i] - 1.0;
        double v = 1.0;
        // lerp form (1-w)*1 + w*bound so the extremal pixel lands on the
        // bound exactly at s = 1 / t = 1
        if (f > 0.0 && has_above) {
            const double w = t * (f / M);
            v = (1.0 - w) + w * Cb;
        } else if (f < 0.0 && has_below) {
            const double w = s * (f / m);
            v = (1.0 - w) + w * cb;
        }
        out.values[i] = v;
    }
    out.background = 1.0;
    return out;
}

ContrastFamily make_family(const ConductivityImage& sigma_tv, const ContrastBounds& bounds) {
    if (!(bounds.c > 0.0 && bounds.c < 1.0)) throw std::invalid_argument("lower bound must satisfy 0 < c < 1");
    if (!(bounds.C > 1.0)) throw std::invalid_argument("upper bound must satisfy C > 1");
    ContrastFamily fam;
    fam.base = sigma_tv;
    fam.bounds = bounds;
    fam.m = 0.0;
    fam.M = 0.0;
    for (int32_t flat : sigma_tv.grid->disc_points) {
        const double f = sigma_tv.values[static_cast<std::size_t>(flat)] - 1.0;
        fam.m = std::min(fam.m, f);
        fam.M = std::max(fam.M, f);
    }
    fam.has_below = fam.m < 0.0;
    fam.has_above = fam.M > 0.0;
    if (!fam.has_below && !fam.has_above)
        throw std::invalid_argument("make_family: image is identically 1, nothing to enhance");
    return fam;
}

namespace {

struct Rect {
    double cx, cy;        // center
    int lx = 0, ly = 0;   // trisection levels per dimension
    double value = 0.0;

    double half_diag() const {
        const double sx = 0.5 * std::pow(3.0, -lx);
        const double sy = 0.5 * std::pow(3.0, -ly);
        return std::sqrt(sx * sx + sy * sy);
    }
};

}  // namespace

DirectResult direct_minimize(const std::function<double(double, double)>& objective, int budget) {
    if (budget < 9) throw std::invalid_argument("direct_minimize: budget must be at least 9");
    DirectResult res;
    constexpr double kInfeasible = 1e100;
    constexpr double kEps = 1e-4;

    auto eval = [&](double x, double y) {
        double v;
        try {
            v = objective(x, y);
            if (!std::isfinite(v)) v = kInfeasible;
        } catch (...) {
            v = kInfeasible;
        }
        ++res.evaluations;
        res.samples.push_back({x, y, v});
        return v;
    };

    std::vector<Rect> rects;
    rects.push_back({0.5, 0.5, 0, 0, eval(0.5, 0.5)});

    auto best_of = [&]() {
        std::size_t bi = 0;
        for (std::size_t i = 1; i < rects.size(); ++i)
            if (rects[i].value < rects[bi].value) bi = i;
        return bi;
    };

    while (res.evaluations < budget) {
        // Potentially optimal rectangles: best rect of each size class that
        // sits on the lower convex hull of (half-diagonal, value) and can beat
        // fmin - eps |fmin| for some admissible slope K > 0.
        const double fmin = rects[best_of()].value;
        std::map<double, std::size_t> best_per_size;  // ascending size -> index of min value
        for (std::size_t i = 0; i < rects.size(); ++i) {
            const double d = rects[i].half_diag();
            auto it = best_per_size.find(d);
            if (it == best_per_size.end() || rects[i].value < rects[it->second].value)
                best_per_size[d] = i;
        }
        const std::vector<std::pair<double, std::size_t>> classes(best_per_size.begin(), best_per_size.end());
        std::vector<std::size_t> hull;
        for (std::size_t i = 0; i < classes.size(); ++i) {
            const double d1 = classes[i].first;
            const double f1 = rects[classes[i].second].value;
            double K_lo = 0.0;
            for (std::size_t j = 0; j < i; ++j)
                K_lo = std::max(K_lo, (f1 - rects[classes[j].second].value) / (d1 - classes[j].first));
            double K_hi = std::numeric_limits<double>::infinity();
            for (std::size_t j = i + 1; j < classes.size(); ++j)
                K_hi = std::min(K_hi, (rects[classes[j].second].value - f1) / (classes[j].first - d1));
            bool ok = K_lo <= K_hi + 1e-15;
            if (ok && std::isfinite(K_hi) && f1 - K_hi * d1 > fmin - kEps * std::abs(fmin) + 1e-15)
                ok = false;
            if (ok) hull.push_back(classes[i].second);
        }
        if (hull.empty()) hull.push_back(classes.back().second);

        bool divided = false;
        for (std::size_t idx : hull) {
            if (res.evaluations >= budget) break;
            Rect r = rects[idx];
            // split along the longest side(s); ties split both, best first
            const int lmin = std::min(r.lx, r.ly);
            std::vector<int> dims;
            if (r.lx == lmin) dims.push_back(0);
            if (r.ly == lmin) dims.push_back(1);
            const double delta = std::pow(3.0, -(lmin + 1));

            struct Probe {
                int dim;
                double v1, v2;
                double best() const { return std::min(v1, v2); }
            };
            std::vector<Probe> probes;
            for (int dim : dims) {
                if (res.evaluations + 2 > budget) break;
                const double ox = dim == 0 ? delta : 0.0;
                const double oy = dim == 1 ? delta : 0.0;
                Probe p;
                p.dim = dim;
                p.v1 = eval(r.cx + ox, r.cy + oy);
                p.v2 = eval(r.cx - ox, r.cy - oy);
                probes.push_back(p);
            }
            if (probes.empty()) continue;
            divided = true;
            std::stable_sort(probes.begin(), probes.end(),
                             [](const Probe& a, const Probe& b) { return a.best() < b.best(); });
            // carve the current rect: each probe dimension is trisected in order
            Rect center = r;
            std::size_t self = idx;
            for (const Probe& p : probes) {
                if (p.dim == 0) {
                    Rect right = center, left = center;
                    ++right.lx;
                    ++left.lx;
                    ++center.lx;
                    right.cx = center.cx + delta;
                    left.cx = center.cx - delta;
                    right.value = p.v1;
                    left.value = p.v2;
                    rects.push_back(right);
                    rects.push_back(left);
                } else {
                    Rect top = center, bottom = center;
                    ++top.ly;
                    ++bottom.ly;
                    ++center.ly;
                    top.cy = center.cy + delta;
                    bottom.cy = center.cy - delta;
                    top.value = p.v1;
                    bottom.value = p.v2;
                    rects.push_back(top);
                    rects.push_back(bottom);
                }
            }
            rects[self] = center;
        }
        if (!divided) break;
    }

    const std::size_t bi = best_of();
    res.s = rects[bi].cx;
    res.t = rects[bi].cy;
    res.value = rects[bi].value;
    return res;
}

double evaluate_candidate(const ContrastFamily& family, double s, double t,
                          const Sinogram& measured, const ContrastEnhanceConfig& cfg) {
    const ConductivityImage cand = family.member(s, t);
    TrigBasis basis;
    basis.N = cfg.basis_N;
    const BoundaryOpMatrix nd = assemble_nd(cand, basis, cfg.mesh_level);
    const BoundaryOpMatrix dn = nd_to_dn(nd);
    const Sinogram sino = build_sinogram(dn, cfg.rho);
    return sinogram_discrepancy(sino, measured);
}

ContrastEnhanceResult contrast_enhance(const ConductivityImage& sigma_tv, const ContrastBounds& bounds,
                                       const Sinogram& measured, const ContrastEnhanceConfig& cfg) {
    const ContrastFamily family = make_family(sigma_tv, bounds);
    std::map<std::pair<long long, long long>, double> cache;
    auto objective = [&](double s, double t) {
        const auto key = std::make_pair(static_cast<long long>(std::llround(s * 1e6)),
                                        static_cast<long long>(std::llround(t * 1e6)));
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        const double v = evaluate_candidate(family, s, t, measured, cfg);
        cache.emplace(key, v);
        return v;
    };
    const DirectResult dr = direct_minimize(objective, cfg.budget);
    ContrastEnhanceResult out;
    out.sigma_ce = family.member(dr.s, dr.t);
    out.s = dr.s;
    out.t = dr.t;
    out.discrepancy = dr.value;
    out.samples = dr.samples;
    return out;
}

}  // namespace eit
