#pragma once

#include <string>
#include <vector>

#include "eit/fields.hpp"

namespace eit {

/// Piecewise-constant phantom description.  Shapes are painted in order, so a
/// later shape overwrites earlier ones where they overlap (the heart ellipse
/// may sit on top of a lung).
struct PhantomShape {
    enum class Kind { Ellipse, Annulus, Band };
    Kind kind = Kind::Ellipse;
    double value = 1.0;
    // Ellipse: center (cx, cy), semi-axes (a, b), rotation angle_deg.
    double cx = 0.0, cy = 0.0, a = 0.0, b = 0.0, angle_deg = 0.0;
    // Annulus: center (cx, cy), radii r_inner <= r_outer (a = r_inner, b = r_outer).
    // Band: horizontal layer y in [y0, y1) clipped to |z - (cx,cy)| < clip_r.
    double y0 = 0.0, y1 = 0.0, clip_r = 0.0;

    bool contains(double x, double y) const;
    /// Largest |z| the shape can reach; used to verify supp(sigma-1) stays in the open disc.
    double max_radius() const;
};

struct PhantomSpec {
    std::string name;
    double background = 1.0;
    std::vector<PhantomShape> shapes;
};

ConductivityImage build_phantom(const PhantomSpec& spec, std::shared_ptr<const ZGrid> grid);

/// Reference geometries used throughout the tests; conductivity values follow
/// the heart-and-lungs and stratified-pipeline test cases.
PhantomSpec heart_lungs_spec();
PhantomSpec pipeline_spec();

PhantomSpec phantom_spec_from_json(const std::string& text);
std::string phantom_spec_to_json(const PhantomSpec& spec);
PhantomSpec load_phantom_spec(const std::string& path);

}  // namespace eit
