#pragma once

#include <memory>
#include <string>
#include <vector>

#include "eit/grids.hpp"

namespace eit {

/// Real conductivity field on a ZGrid.  Values outside the disc mask are kept
/// at the background value; only disc pixels carry reconstruction content.
struct ConductivityImage {
    std::shared_ptr<const ZGrid> grid;
    std::vector<double> values;   // size grid->size()
    double background = 1.0;

    double& at(std::size_t flat) { return values[flat]; }
    double at(std::size_t flat) const { return values[flat]; }
};

ConductivityImage make_constant_image(std::shared_ptr<const ZGrid> grid, double value);

/// Beltrami coefficient mu = (1 - sigma) / (1 + sigma) on the same grid.
std::vector<double> beltrami_mu(const ConductivityImage& sigma);

/// sigma / sigma0 with background rescaled to 1; multiply back with
/// unrescale to recover the original field.
ConductivityImage rescale_background(const ConductivityImage& sigma, double sigma0);
ConductivityImage unrescale_background(const ConductivityImage& sigma, double sigma0);

enum class ScatteringConvention { Tau, T };

/// Complex scattering transform on a KGrid.  Stored as tau(k); the
/// t(k) = -4*pi*i*conj(k)*tau(k) convention is available on demand.
/// valid_mask marks k points where the solver produced a usable value.
struct ScatteringField {
    std::shared_ptr<const KGrid> kgrid;
    std::vector<Complex> tau;           // size kgrid->size()
    std::vector<uint8_t> valid_mask;    // 1 = usable

    Complex t_value(std::size_t flat) const {
        const Complex k = kgrid->points[flat];
        return Complex(0.0, -4.0 * 3.14159265358979323846) * std::conj(k) * tau[flat];
    }
};

ScatteringField make_zero_scattering(std::shared_ptr<const KGrid> kgrid);

}  // namespace eit
