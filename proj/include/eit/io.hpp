#pragma once

#include <string>
#include <vector>

#include "eit/fields.hpp"

namespace eit {

// Field dumps are flat little-endian float64 arrays with a JSON sidecar
// header (same path with .json appended to the stem).  Complex fields store
// the Re plane followed by the Im plane.

void save_image(const ConductivityImage& img, const std::string& bin_path);
ConductivityImage load_image(const std::string& bin_path);

void save_real_field(const std::vector<double>& values, const ZGrid& grid,
                     const std::string& kind, const std::string& bin_path);
std::vector<double> load_real_field(const std::string& bin_path, ZGrid* grid_out = nullptr);

void save_scattering(const ScatteringField& field, const std::string& bin_path);
ScatteringField load_scattering(const std::string& bin_path);

void save_matrix_csv(const std::vector<std::vector<double>>& rows, const std::string& path);

std::string json_header_path(const std::string& bin_path);

}  // namespace eit
