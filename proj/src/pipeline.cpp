#include "eit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "eit/beltrami.hpp"
#include "eit/dbar.hpp"
#include "eit/errors.hpp"
#include "eit/tv_seg.hpp"

namespace eit {

double blend_chi(Complex k, double R) {
    if (!(R > 1.0)) throw std::invalid_argument("blend_chi: R must exceed 1");
    const double r = std::abs(k);
    if (r < R - 1.0) return 1.0;
    if (r > R) return 0.0;
    const double t = r - (R - 1.0);
    return 1.0 - 3.0 * t * t + 2.0 * t * t * t;
}

ScatteringField extend_scattering(const ScatteringField& tau0, const ConductivityImage& sigma_ce,
                                  double R, double Rtilde, double annulus_grow, int ell_scatter) {
    const auto kgrid = tau0.kgrid;
    if (!(Rtilde <= kgrid->Rtilde + 1e-12)) throw std::invalid_argument("extension radius exceeds the k-grid");

    // annulus R-1 <= |k| <= min(Rtilde + grow, grid radius)
    const double outer = std::min(Rtilde + annulus_grow, kgrid->Rtilde);
    std::vector<uint8_t> mask(kgrid->size(), 0);
    for (std::size_t i = 0; i < kgrid->size(); ++i) {
        const double r = std::abs(kgrid->points[i]);
        if (r >= R - 1.0 && r <= outer) mask[i] = 1;
    }

    std::shared_ptr<const ZGrid> sgrid = sigma_ce.grid;
    std::vector<double> mu;
    if (ell_scatter > 0 && ell_scatter != sigma_ce.grid->ell) {
        auto coarse = std::make_shared<const ZGrid>(make_zgrid(ell_scatter, sigma_ce.grid->s));
        ConductivityImage sampled = make_constant_image(coarse, 1.0);
        const ZGrid& fine = *sigma_ce.grid;
        for (int32_t flat : coarse->disc_points) {
            const Complex z = coarse->points[static_cast<std::size_t>(flat)];
            int ix = static_cast<int>(std::floor((z.real() + fine.s) / fine.h + 0.5));
            int iy = static_cast<int>(std::floor((z.imag() + fine.s) / fine.h + 0.5));
            ix = std::clamp(ix, 0, fine.n - 1);
            iy = std::clamp(iy, 0, fine.n - 1);
            const std::size_t src = static_cast<std::size_t>(iy) * fine.n + ix;
            sampled.values[static_cast<std::size_t>(flat)] =
                fine.disc_mask[src] ? sigma_ce.values[src] : 1.0;
        }
        sgrid = std::move(coarse);
        mu = beltrami_mu(sampled);
    } else {
        mu = beltrami_mu(sigma_ce);
    }
    const ScatteringField tau_ext = scattering_from_mu(sgrid, mu, kgrid, mask);
    std::size_t failures = 0;
    for (std::size_t i = 0; i < kgrid->size(); ++i)
        if (mask[i] && !tau_ext.valid_mask[i]) ++failures;
    if (failures > 0) {
        std::ostringstream msg;
        msg << "scattering extension failed at " << failures << " annulus points";
        throw NumericError(msg.str());
    }

    ScatteringField out;
    out.kgrid = kgrid;
    out.tau.assign(kgrid->size(), Complex(0.0, 0.0));
    out.valid_mask.assign(kgrid->size(), 1);
    for (std::size_t i = 0; i < kgrid->size(); ++i) {
        const double r = std::abs(kgrid->points[i]);
        if (r > outer) continue;
        const double chi = blend_chi(kgrid->points[i], R);
        const Complex base = chi > 0.0 ? tau0.tau[i] : Complex(0.0, 0.0);
        const Complex ext = chi < 1.0 ? tau_ext.tau[i] : Complex(0.0, 0.0);
        out.tau[i] = chi * base + (1.0 - chi) * ext;
    }
    return out;
}

double relative_l2(const ConductivityImage& a, const ConductivityImage& b) {
    if (a.grid->ell != b.grid->ell || a.grid->s != b.grid->s)
        throw std::invalid_argument("relative_l2: grid mismatch");
    double num = 0.0, den = 0.0;
    for (int32_t flat : a.grid->disc_points) {
        const double d = a.values[static_cast<std::size_t>(flat)] - b.values[static_cast<std::size_t>(flat)];
        num += d * d;
        den += b.values[static_cast<std::size_t>(flat)] * b.values[static_cast<std::size_t>(flat)];
    }
    if (den == 0.0) throw std::invalid_argument("relative_l2: reference is zero on the disc");
    return std::sqrt(num / den);
}

double ssim(const ConductivityImage& a, const ConductivityImage& truth) {
    if (a.grid->ell != truth.grid->ell || a.grid->s != truth.grid->s)
        throw std::invalid_argument("ssim: grid mismatch");
    const ZGrid& g = *a.grid;

    // 11 x 11 Gaussian window, sigma 1.5, over disc pixels only with the
    // weights renormalized inside the mask.
    constexpr int radius = 5;
    double w[2 * radius + 1][2 * radius + 1];
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            w[dy + radius][dx + radius] = std::exp(-(dx * dx + dy * dy) / (2.0 * 1.5 * 1.5));

    double tmin = truth.values[static_cast<std::size_t>(g.disc_points[0])];
    double tmax = tmin;
    for (int32_t flat : g.disc_points) {
        tmin = std::min(tmin, truth.values[static_cast<std::size_t>(flat)]);
        tmax = std::max(tmax, truth.values[static_cast<std::size_t>(flat)]);
    }
    double L = tmax - tmin;
    if (L <= 0.0) L = std::max(std::abs(tmax), 1.0);  // constant reference: fall back to its scale
    const double C1 = (0.01 * L) * (0.01 * L);
    const double C2 = (0.03 * L) * (0.03 * L);

    double acc = 0.0;
    std::size_t count = 0;
    for (int32_t flat : g.disc_points) {
        const int ix = static_cast<int>(flat) % g.n;
        const int iy = static_cast<int>(flat) / g.n;
        double sw = 0.0, ma = 0.0, mb = 0.0;
        for (int dy = -radius; dy <= radius; ++dy)
            for (int dx = -radius; dx <= radius; ++dx) {
                const int x = ix + dx, y = iy + dy;
                if (x < 0 || x >= g.n || y < 0 || y >= g.n) continue;
                const std::size_t q = static_cast<std::size_t>(y) * g.n + x;
                if (!g.disc_mask[q]) continue;
                const double wi = w[dy + radius][dx + radius];
                sw += wi;
                ma += wi * a.values[q];
                mb += wi * truth.values[q];
            }
        ma /= sw;
        mb /= sw;
        double va = 0.0, vb = 0.0, cov = 0.0;
        for (int dy = -radius; dy <= radius; ++dy)
            for (int dx = -radius; dx <= radius; ++dx) {
                const int x = ix + dx, y = iy + dy;
                if (x < 0 || x >= g.n || y < 0 || y >= g.n) continue;
                const std::size_t q = static_cast<std::size_t>(y) * g.n + x;
                if (!g.disc_mask[q]) continue;
                const double wi = w[dy + radius][dx + radius] / sw;
                va += wi * (a.values[q] - ma) * (a.values[q] - ma);
                vb += wi * (truth.values[q] - mb) * (truth.values[q] - mb);
                cov += wi * (a.values[q] - ma) * (truth.values[q] - mb);
            }
        acc += ((2.0 * ma * mb + C1) * (2.0 * cov + C2)) /
               ((ma * ma + mb * mb + C1) * (va + vb + C2));
        ++count;
    }
    return acc / static_cast<double>(count);
}

bool stop_check(const ConductivityImage& current, const ConductivityImage& previous, double thresh) {
    double num = 0.0, den = 0.0;
    for (int32_t flat : current.grid->disc_points) {
        const double d = current.values[static_cast<std::size_t>(flat)] - previous.values[static_cast<std::size_t>(flat)];
        num += d * d;
        den += current.values[static_cast<std::size_t>(flat)] * current.values[static_cast<std::size_t>(flat)];
    }
    if (den == 0.0) return false;
    return std::sqrt(num / den) < thresh;
}

PipelineResult run_pipeline(const BoundaryOpMatrix& dn, const PipelineConfig& config,
                            const ConductivityImage* truth) {
    if (!(config.R > 1.0) || !(config.Rtilde > config.R) || config.J < 1)
        throw std::invalid_argument("invalid pipeline configuration");

    if (truth && (truth->grid->ell != config.ell || truth->grid->s != config.s))
        throw std::invalid_argument("truth image grid does not match the configured z-grid");
    auto zgrid = truth ? truth->grid : std::make_shared<const ZGrid>(make_zgrid(config.ell, config.s));
    auto kgrid = std::make_shared<const KGrid>(make_kgrid(config.m, config.R, config.Rtilde));

    PipelineResult result;
    result.tau0 = extract_tau(dn, kgrid, config.R);

    const Sinogram measured = build_sinogram(dn, config.rho);
    ContrastEnhanceConfig ce_cfg;
    ce_cfg.mesh_level = config.mesh_level;
    ce_cfg.basis_N = config.basis_N;
    ce_cfg.rho = config.rho;
    ce_cfg.budget = config.budget;

    ScatteringField tau = result.tau0;
    for (int j = 1; j <= config.J; ++j) {
        IterationRecord rec;
        rec.j = j;
        rec.tau = tau;
        const double cutoff = j == 1 ? config.R : config.Rtilde;
        DbarReconstruction db = reconstruct_sigma(tau, zgrid, cutoff);
        rec.sigma_db = std::move(db.sigma);
        rec.max_imag_residual = db.max_imag_residual;

        SegmentationOptions seg_opts;
        seg_opts.s_param = config.tv_s_param;
        SegmentationResult seg = segment(rec.sigma_db, config.K, config.lambda, config.seed, seg_opts);
        rec.sigma_tv = std::move(seg.piecewise);

        ContrastEnhanceResult ce = contrast_enhance(rec.sigma_tv, config.bounds, measured, ce_cfg);
        rec.sigma_ce = std::move(ce.sigma_ce);
        rec.ce_s = ce.s;
        rec.ce_t = ce.t;
        rec.ce_discrepancy = ce.discrepancy;

        if (truth) {
            rec.metrics.l2_db = relative_l2(rec.sigma_db, *truth);
            rec.metrics.l2_tv = relative_l2(rec.sigma_tv, *truth);
            rec.metrics.l2_ce = relative_l2(rec.sigma_ce, *truth);
            rec.metrics.ssim_db = ssim(rec.sigma_db, *truth);
            rec.metrics.ssim_tv = ssim(rec.sigma_tv, *truth);
            rec.metrics.ssim_ce = ssim(rec.sigma_ce, *truth);
        }

        const bool last = j == config.J;
        bool stop_now = false;
        if (!last && config.stop_thresh && j > 1) {
            stop_now = stop_check(rec.sigma_ce, result.iterations.back().sigma_ce, *config.stop_thresh);
            rec.stopped_early = stop_now;
        }
        if (!last && !stop_now) {
            const double grow = config.deltaR ? (j - 1) * (*config.deltaR) : 0.0;
            tau = extend_scattering(result.tau0, rec.sigma_ce, config.R, config.Rtilde, grow, config.ell_scatter);
        }
        result.iterations.push_back(std::move(rec));
        if (stop_now) break;
    }
    return result;
}

std::string metrics_csv(const std::vector<IterationRecord>& records) {
    std::ostringstream out;
    out << "j,l2_db,l2_tv,l2_ce,ssim_db,ssim_tv,ssim_ce\n";
    char buf[256];
    for (const auto& rec : records) {
        std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", rec.j,
                      rec.metrics.l2_db, rec.metrics.l2_tv, rec.metrics.l2_ce,
                      rec.metrics.ssim_db, rec.metrics.ssim_tv, rec.metrics.ssim_ce);
        out << buf;
    }
    return out.str();
}

}  // namespace eit
