#include "eit/fields.hpp"

#include <cmath>
#include <stdexcept>

namespace eit {

ConductivityImage make_constant_image(std::shared_ptr<const ZGrid> grid, double value) {
    if (!(value > 0.0)) throw std::invalid_argument("conductivity must be positive");
    ConductivityImage img;
    img.grid = std::move(grid);
    img.values.assign(img.grid->size(), value);
    img.background = value;
    return img;
}

std::vector<double> beltrami_mu(const ConductivityImage& sigma) {
    std::vector<double> mu(sigma.values.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double s = sigma.values[i];
        if (!(s > 0.0)) throw std::domain_error("beltrami_mu: sigma must be positive everywhere");
        mu[i] = (1.0 - s) / (1.0 + s);
    }
    return mu;
}

ConductivityImage rescale_background(const ConductivityImage& sigma, double sigma0) {
    if (!(sigma0 > 0.0)) throw std::invalid_argument("rescale_background: sigma0 must be positive");
    ConductivityImage out = sigma;
    for (double& v : out.values) v /= sigma0;
    out.background = sigma.background / sigma0;
    return out;
}

ConductivityImage unrescale_background(const ConductivityImage& sigma, double sigma0) {
    if (!(sigma0 > 0.0)) throw std::invalid_argument("unrescale_background: sigma0 must be positive");
    ConductivityImage out = sigma;
    for (double& v : out.values) v *= sigma0;
    out.background = sigma.background * sigma0;
    return out;
}

ScatteringField make_zero_scattering(std::shared_ptr<const KGrid> kgrid) {
    ScatteringField f;
    f.kgrid = std::move(kgrid);
    f.tau.assign(f.kgrid->size(), Complex(0.0, 0.0));
    f.valid_mask.assign(f.kgrid->size(), 1);
    return f;
}

}  // namespace eit
