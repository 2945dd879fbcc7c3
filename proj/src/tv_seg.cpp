#include "eit/tv_seg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "eit/rng.hpp"

namespace eit {

namespace {

struct Crop {
    int x0 = 0, y0 = 0, w = 0, h = 0;
};

Crop disc_crop(const ZGrid& g) {
    int xmin = g.n, xmax = -1, ymin = g.n, ymax = -1;
    for (int32_t flat : g.disc_points) {
        const int ix = static_cast<int>(flat) % g.n;
        const int iy = static_cast<int>(flat) / g.n;
        xmin = std::min(xmin, ix);
        xmax = std::max(xmax, ix);
        ymin = std::min(ymin, iy);
        ymax = std::max(ymax, iy);
    }
    Crop c;
    c.x0 = std::max(0, xmin - 1);
    c.y0 = std::max(0, ymin - 1);
    c.w = std::min(g.n - 1, xmax + 1) - c.x0 + 1;
    c.h = std::min(g.n - 1, ymax + 1) - c.y0 + 1;
    return c;
}

}  // namespace

std::vector<double> kmeans_init(const ConductivityImage& image, int K, uint64_t seed) {
    if (K < 2) throw std::invalid_argument("kmeans_init: K must be at least 2");
    const ZGrid& g = *image.grid;
    std::vector<double> vals;
    vals.reserve(g.disc_points.size());
    for (int32_t flat : g.disc_points) {
        const double v = image.values[static_cast<std::size_t>(flat)];
        if (!std::isfinite(v)) throw std::invalid_argument("kmeans_init: image contains non-finite values");
        vals.push_back(v);
    }
    std::set<double> distinct(vals.begin(), vals.end());
    if (static_cast<int>(distinct.size()) < K) {
        // Degenerate input: fewer distinct values than clusters; return the
        // distinct values padded with the largest.
        std::vector<double> c(distinct.begin(), distinct.end());
        while (static_cast<int>(c.size()) < K) c.push_back(c.back());
        return c;
    }

    Rng rng(seed);
    std::vector<double> centers;
    centers.push_back(vals[static_cast<std::size_t>(rng.below(vals.size()))]);
    std::vector<double> d2(vals.size());
    while (static_cast<int>(centers.size()) < K) {
        double total = 0.0;
        for (std::size_t i = 0; i < vals.size(); ++i) {
            double best = std::numeric_limits<double>::max();
            for (double c : centers) best = std::min(best, (vals[i] - c) * (vals[i] - c));
            d2[i] = best;
            total += best;
        }
        double target = rng.uniform() * total;
        std::size_t pick = 0;
        for (std::size_t i = 0; i < vals.size(); ++i) {
            target -= d2[i];
            if (target <= 0.0) {
                pick = i;
                break;
            }
            pick = i;
        }
        centers.push_back(vals[pick]);
    }

    std::vector<int> assign(vals.size(), -1);
    for (int pass = 0; pass < 100; ++pass) {
        bool changed = false;
        for (std::size_t i = 0; i < vals.size(); ++i) {
            int best = 0;
            double bd = std::numeric_limits<double>::max();
            for (int k = 0; k < K; ++k) {
                const double d = (vals[i] - centers[static_cast<std::size_t>(k)]) *
                                 (vals[i] - centers[static_cast<std::size_t>(k)]);
                if (d < bd) {
                    bd = d;
                    best = k;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        if (!changed) break;
        std::vector<double> sum(static_cast<std::size_t>(K), 0.0);
        std::vector<std::size_t> cnt(static_cast<std::size_t>(K), 0);
        for (std::size_t i = 0; i < vals.size(); ++i) {
            sum[static_cast<std::size_t>(assign[i])] += vals[i];
            ++cnt[static_cast<std::size_t>(assign[i])];
        }
        for (int k = 0; k < K; ++k) {
            if (cnt[static_cast<std::size_t>(k)] > 0)
                centers[static_cast<std::size_t>(k)] = sum[static_cast<std::size_t>(k)] / cnt[static_cast<std::size_t>(k)];
        }
    }
    std::sort(centers.begin(), centers.end());
    return centers;
}

std::vector<double> edge_weight(const ConductivityImage& image, double s_param, double smoothing) {
    if (s_param < 0.0 || smoothing < 0.0) throw std::invalid_argument("edge_weight: negative parameter");
    const ZGrid& g = *image.grid;
    std::vector<double> out(g.size(), 1.0);
    if (s_param == 0.0) return out;

    std::vector<double> smooth = image.values;
    if (smoothing > 0.0) {
        const int radius = static_cast<int>(std::ceil(3.0 * smoothing));
        std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
        double ksum = 0.0;
        for (int i = -radius; i <= radius; ++i) {
            kernel[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * i * i / (smoothing * smoothing));
            ksum += kernel[static_cast<std::size_t>(i + radius)];
        }
        for (double& v : kernel) v /= ksum;
        std::vector<double> tmp(g.size());
        for (int iy = 0; iy < g.n; ++iy)
            for (int ix = 0; ix < g.n; ++ix) {
                double acc = 0.0;
                for (int d = -radius; d <= radius; ++d) {
                    const int x = std::clamp(ix + d, 0, g.n - 1);
                    acc += kernel[static_cast<std::size_t>(d + radius)] * smooth[static_cast<std::size_t>(iy) * g.n + x];
                }
                tmp[static_cast<std::size_t>(iy) * g.n + ix] = acc;
            }
        for (int iy = 0; iy < g.n; ++iy)
            for (int ix = 0; ix < g.n; ++ix) {
                double acc = 0.0;
                for (int d = -radius; d <= radius; ++d) {
                    const int y = std::clamp(iy + d, 0, g.n - 1);
                    acc += kernel[static_cast<std::size_t>(d + radius)] * tmp[static_cast<std::size_t>(y) * g.n + ix];
                }
                smooth[static_cast<std::size_t>(iy) * g.n + ix] = acc;
            }
    }

    const double inv2h = 1.0 / (2.0 * g.h);
    for (int iy = 0; iy < g.n; ++iy)
        for (int ix = 0; ix < g.n; ++ix) {
            const int xm = std::max(ix - 1, 0), xp = std::min(ix + 1, g.n - 1);
            const int ym = std::max(iy - 1, 0), yp = std::min(iy + 1, g.n - 1);
            const double gx = (smooth[static_cast<std::size_t>(iy) * g.n + xp] -
                               smooth[static_cast<std::size_t>(iy) * g.n + xm]) * inv2h;
            const double gy = (smooth[static_cast<std::size_t>(yp) * g.n + ix] -
                               smooth[static_cast<std::size_t>(ym) * g.n + ix]) * inv2h;
            out[static_cast<std::size_t>(iy) * g.n + ix] = 1.0 / (1.0 + s_param * (gx * gx + gy * gy));
        }
    return out;
}

void grad_forward(const double* u, int W, int H, double* gx, double* gy) {
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * W + x;
            gx[p] = (x + 1 < W) ? u[p + 1] - u[p] : 0.0;
            gy[p] = (y + 1 < H) ? u[p + static_cast<std::size_t>(W)] - u[p] : 0.0;
        }
}

void div_backward(const double* px, const double* py, int W, int H, double* out) {
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * W + x;
            double d = 0.0;
            if (x < W - 1) d += px[p];
            if (x > 0) d -= px[p - 1];
            if (y < H - 1) d += py[p];
            if (y > 0) d -= py[p - static_cast<std::size_t>(W)];
            out[p] = d;
        }
}

void project_simplex(double* v, int K) {
    // sort-based Euclidean projection onto { x >= 0, sum x = 1 }
    double sorted[64];
    if (K > 64) throw std::invalid_argument("project_simplex: K too large");
    std::copy(v, v + K, sorted);
    std::sort(sorted, sorted + K, std::greater<double>());
    double cum = 0.0, theta = 0.0;
    int rho = 0;
    for (int j = 0; j < K; ++j) {
        cum += sorted[j];
        const double t = (cum - 1.0) / (j + 1);
        if (sorted[j] - t > 0.0) {
            rho = j + 1;
            theta = t;
        }
    }
    (void)rho;
    for (int k = 0; k < K; ++k) v[k] = std::max(v[k] - theta, 0.0);
}

void project_dual(double& px, double& py, double bound) {
    const double norm = std::sqrt(px * px + py * py);
    if (norm > bound) {
        const double scale = bound / norm;
        px *= scale;
        py *= scale;
    }
}

SegmentationResult segment(const ConductivityImage& image, int K, double lambda, uint64_t seed,
                           const SegmentationOptions& opts) {
    if (!(lambda > 0.0)) throw std::invalid_argument("segment: lambda must be positive");
    if (K < 2 || K > 64) throw std::invalid_argument("segment: K out of range");
    for (double v : image.values)
        if (!std::isfinite(v)) throw std::invalid_argument("segment: non-finite input image");

    const ZGrid& g = *image.grid;
    const Crop crop = disc_crop(g);
    const int W = crop.w, H = crop.h;
    const std::size_t npix = static_cast<std::size_t>(W) * H;

    std::vector<double> img(npix), gw(npix);
    std::vector<uint8_t> inside(npix);
    const std::vector<double> gfull = edge_weight(image, opts.s_param, opts.smoothing);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const std::size_t full = static_cast<std::size_t>(y + crop.y0) * g.n + (x + crop.x0);
            const std::size_t p = static_cast<std::size_t>(y) * W + x;
            img[p] = image.values[full];
            gw[p] = gfull[full];
            inside[p] = g.disc_mask[full];
        }

    std::vector<double> c = kmeans_init(image, K, seed);

    // The data weight acts on the image mapped to an 8-bit dynamic range, so
    // lambda keeps the same meaning across images of different contrast.
    double lo = 1e300, hi = -1e300;
    for (std::size_t p = 0; p < npix; ++p) {
        if (!inside[p]) continue;
        lo = std::min(lo, img[p]);
        hi = std::max(hi, img[p]);
    }
    const double gray = hi > lo ? 255.0 / (hi - lo) : 1.0;
    const double data_scale = gray * gray;

    const std::size_t total = static_cast<std::size_t>(K) * npix;
    std::vector<double> u(total, 0.0), ubar(total), uold(total);
    std::vector<double> px(total, 0.0), py(total, 0.0);
    std::vector<double> f(total, 0.0);
    int frozen_label = 0;

    auto nearest_label = [&](double value) {
        int best = 0;
        double bd = std::numeric_limits<double>::max();
        for (int k = 0; k < K; ++k) {
            const double d = std::abs(value - c[static_cast<std::size_t>(k)]);
            if (d < bd) {
                bd = d;
                best = k;
            }
        }
        return best;
    };

    auto refresh_f_and_frozen = [&]() {
        for (int k = 0; k < K; ++k) {
            const double ck = c[static_cast<std::size_t>(k)];
            for (std::size_t p = 0; p < npix; ++p) {
                const double d = img[p] - ck;
                f[static_cast<std::size_t>(k) * npix + p] = 0.5 * lambda * data_scale * d * d;
            }
        }
        frozen_label = nearest_label(image.background);
        for (std::size_t p = 0; p < npix; ++p) {
            if (inside[p]) continue;
            for (int k = 0; k < K; ++k) u[static_cast<std::size_t>(k) * npix + p] = 0.0;
            u[static_cast<std::size_t>(frozen_label) * npix + p] = 1.0;
        }
    };

    // initial one-hot labeling by nearest mean
    refresh_f_and_frozen();
    for (std::size_t p = 0; p < npix; ++p) {
        if (!inside[p]) continue;
        const int k = nearest_label(img[p]);
        u[static_cast<std::size_t>(k) * npix + p] = 1.0;
    }
    ubar = u;

    const double tau1 = 1.0 / std::sqrt(8.0);
    const double tau2 = 1.0 / std::sqrt(8.0);
    std::vector<double> gx(npix), gy(npix), divp(static_cast<std::size_t>(K) * npix);

    SegmentationResult result;
    std::vector<int> label(npix, 0);
    std::vector<double> cprev;

    int outer = 0;
    for (; outer < opts.max_outer; ++outer) {
        cprev = c;
        refresh_f_and_frozen();

        for (int inner = 0; inner < opts.max_inner; ++inner) {
            // dual ascent with the edge-weighted ball constraint
            for (int k = 0; k < K; ++k) {
                const std::size_t base = static_cast<std::size_t>(k) * npix;
                grad_forward(ubar.data() + base, W, H, gx.data(), gy.data());
                for (std::size_t p = 0; p < npix; ++p) {
                    px[base + p] += tau1 * gx[p];
                    py[base + p] += tau1 * gy[p];
                    project_dual(px[base + p], py[base + p], gw[p]);
                }
                div_backward(px.data() + base, py.data() + base, W, H, divp.data() + base);
            }
            // primal descent: u <- Proj_S(u + tau2 (div p - f))
            uold = u;
            for (std::size_t p = 0; p < npix; ++p) {
                if (!inside[p]) continue;
                double vals[64];
                for (int k = 0; k < K; ++k) {
                    const std::size_t q = static_cast<std::size_t>(k) * npix + p;
                    vals[k] = u[q] + tau2 * (divp[q] - f[q]);
                }
                project_simplex(vals, K);
                for (int k = 0; k < K; ++k) u[static_cast<std::size_t>(k) * npix + p] = vals[k];
            }
            // over-relaxed auxiliary variable
            double dn = 0.0, un = 0.0;
            for (std::size_t i = 0; i < total; ++i) {
                const double d = u[i] - uold[i];
                dn += d * d;
                un += uold[i] * uold[i];
                ubar[i] = u[i] + d;
            }
            if (opts.observer) opts.observer(u, px, py, gw, K, static_cast<int>(npix));
            if (un > 0.0 && std::sqrt(dn / un) < opts.inner_tol) break;
        }

        // threshold (smallest index wins ties)
        for (std::size_t p = 0; p < npix; ++p) {
            int best = 0;
            double bv = u[p];
            for (int k = 1; k < K; ++k) {
                const double v = u[static_cast<std::size_t>(k) * npix + p];
                if (v > bv) {
                    bv = v;
                    best = k;
                }
            }
            label[p] = inside[p] ? best : frozen_label;
        }

        // mean update over the thresholded regions (empty region keeps its mean)
        std::vector<double> sum(static_cast<std::size_t>(K), 0.0);
        std::vector<std::size_t> cnt(static_cast<std::size_t>(K), 0);
        for (std::size_t p = 0; p < npix; ++p) {
            if (!inside[p]) continue;
            sum[static_cast<std::size_t>(label[p])] += img[p];
            ++cnt[static_cast<std::size_t>(label[p])];
        }
        for (int k = 0; k < K; ++k)
            if (cnt[static_cast<std::size_t>(k)] > 0)
                c[static_cast<std::size_t>(k)] = sum[static_cast<std::size_t>(k)] / cnt[static_cast<std::size_t>(k)];

        // thresholded primal energy (monitored; the alternating scheme has no
        // global descent guarantee)
        double energy = 0.0;
        for (int k = 0; k < K; ++k) {
            const std::size_t base = static_cast<std::size_t>(k) * npix;
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x) {
                    const std::size_t p = static_cast<std::size_t>(y) * W + x;
                    const double here = label[p] == k ? 1.0 : 0.0;
                    const double right = (x + 1 < W) ? (label[p + 1] == k ? 1.0 : 0.0) : here;
                    const double up = (y + 1 < H) ? (label[p + W] == k ? 1.0 : 0.0) : here;
                    energy += gw[p] * std::hypot(right - here, up - here);
                    if (inside[p]) energy += (label[p] == k ? f[base + p] : 0.0);
                }
        }
        result.energy_trace.push_back(energy);

        double cchange = 0.0;
        for (int k = 0; k < K; ++k) cchange = std::max(cchange, std::abs(c[static_cast<std::size_t>(k)] - cprev[static_cast<std::size_t>(k)]));
        if (cchange < opts.outer_tol) {
            ++outer;
            break;
        }
    }

    result.outer_iterations = outer;
    result.labels.K = K;
    result.labels.width = W;
    result.labels.height = H;
    result.labels.lambda = lambda;
    result.labels.c = c;
    result.labels.u.assign(total, 0.0);
    for (std::size_t p = 0; p < npix; ++p)
        result.labels.u[static_cast<std::size_t>(label[p]) * npix + p] = 1.0;

    result.piecewise = make_constant_image(image.grid, image.background);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const std::size_t full = static_cast<std::size_t>(y + crop.y0) * g.n + (x + crop.x0);
            if (!g.disc_mask[full]) continue;
            const std::size_t p = static_cast<std::size_t>(y) * W + x;
            result.piecewise.values[full] = c[static_cast<std::size_t>(label[p])];
        }
    return result;
}

}  // namespace eit
