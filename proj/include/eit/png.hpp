#pragma once

#include <string>

#include "eit/fields.hpp"

namespace eit {

/// Writes an RGB preview of the image with the fixed colormap; values are
/// clamped to [vmin, vmax] (pass the reference phantom's range to put every
/// stage on the same color scale).  Returns true if any value was clamped.
bool emit_preview(const ConductivityImage& image, double vmin, double vmax, const std::string& path);

}  // namespace eit
