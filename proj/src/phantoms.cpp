#include "eit/phantoms.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace eit {

namespace {
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
}

bool PhantomShape::contains(double x, double y) const {
    switch (kind) {
        case Kind::Ellipse: {
            const double c = std::cos(angle_deg * kDegToRad), s = std::sin(angle_deg * kDegToRad);
            const double dx = x - cx, dy = y - cy;
            const double u = c * dx + s * dy;
            const double v = -s * dx + c * dy;
            return (u * u) / (a * a) + (v * v) / (b * b) <= 1.0;
        }
        case Kind::Annulus: {
            const double r = std::hypot(x - cx, y - cy);
            return r >= a && r <= b;
        }
        case Kind::Band: {
            if (y < y0 || y >= y1) return false;
            return std::hypot(x - cx, y - cy) < clip_r;
        }
    }
    return false;
}

double PhantomShape::max_radius() const {
    const double center = std::hypot(cx, cy);
    switch (kind) {
        case Kind::Ellipse:
            return center + std::max(a, b);
        case Kind::Annulus:
            return center + b;
        case Kind::Band:
            return center + clip_r;
    }
    return 0.0;
}

ConductivityImage build_phantom(const PhantomSpec& spec, std::shared_ptr<const ZGrid> grid) {
    if (!(spec.background > 0.0)) throw std::invalid_argument("phantom background must be positive");
    for (const auto& sh : spec.shapes) {
        if (!(sh.value > 0.0)) throw std::invalid_argument("phantom region values must be positive");
        if (sh.max_radius() >= 1.0)
            throw std::invalid_argument("phantom shape reaches |z| >= 1; inclusions must stay in the open disc");
    }
    ConductivityImage img = make_constant_image(grid, spec.background);
    img.background = spec.background;
    const ZGrid& g = *img.grid;
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        if (!g.disc_mask[idx]) continue;
        const double x = g.points[idx].real();
        const double y = g.points[idx].imag();
        for (const auto& sh : spec.shapes) {
            if (sh.contains(x, y)) img.values[idx] = sh.value;  // later shape wins
        }
    }
    return img;
}

PhantomSpec heart_lungs_spec() {
    PhantomSpec spec;
    spec.name = "heart_lungs";
    spec.background = 1.0;
    PhantomShape left;
    left.kind = PhantomShape::Kind::Ellipse;
    left.cx = -0.4;
    left.cy = -0.05;
    left.a = 0.2;
    left.b = 0.45;
    left.angle_deg = -12.0;
    left.value = 0.5;
    PhantomShape right = left;
    right.cx = 0.4;
    right.angle_deg = 12.0;
    PhantomShape heart;
    heart.kind = PhantomShape::Kind::Ellipse;
    heart.cx = 0.0;
    heart.cy = 0.5;
    heart.a = 0.2;
    heart.b = 0.2;
    heart.value = 2.0;
    spec.shapes = {left, right, heart};
    return spec;
}

PhantomSpec pipeline_spec() {
    PhantomSpec spec;
    spec.name = "pipeline";
    spec.background = 1.0;
    // Pipe wall: annulus at the pipe conductivity (same as background).
    PhantomShape wall;
    wall.kind = PhantomShape::Kind::Annulus;
    wall.a = 0.8;
    wall.b = 0.92;
    wall.value = 1.0;
    // Stratified content inside the bore: sand at the bottom, water, oil on top.
    PhantomShape sand;
    sand.kind = PhantomShape::Kind::Band;
    sand.y0 = -1.0;
    sand.y1 = -0.3;
    sand.clip_r = 0.65;
    sand.value = 0.3;
    PhantomShape water = sand;
    water.y0 = -0.3;
    water.y1 = 0.15;
    water.value = 2.0;
    PhantomShape oil = sand;
    oil.y0 = 0.15;
    oil.y1 = 1.0;
    oil.value = 1.2;
    spec.shapes = {wall, sand, water, oil};
    return spec;
}

namespace {

PhantomShape shape_from_json(const nlohmann::json& j) {
    PhantomShape sh;
    const std::string kind = j.at("kind").get<std::string>();
    sh.value = j.at("value").get<double>();
    if (kind == "ellipse") {
        sh.kind = PhantomShape::Kind::Ellipse;
        sh.cx = j.at("cx").get<double>();
        sh.cy = j.at("cy").get<double>();
        sh.a = j.at("a").get<double>();
        sh.b = j.at("b").get<double>();
        sh.angle_deg = j.value("angle_deg", 0.0);
    } else if (kind == "annulus") {
        sh.kind = PhantomShape::Kind::Annulus;
        sh.cx = j.value("cx", 0.0);
        sh.cy = j.value("cy", 0.0);
        sh.a = j.at("r_inner").get<double>();
        sh.b = j.at("r_outer").get<double>();
    } else if (kind == "band") {
        sh.kind = PhantomShape::Kind::Band;
        sh.cx = j.value("cx", 0.0);
        sh.cy = j.value("cy", 0.0);
        sh.y0 = j.at("y0").get<double>();
        sh.y1 = j.at("y1").get<double>();
        sh.clip_r = j.at("clip_r").get<double>();
    } else {
        throw std::invalid_argument("unknown phantom shape kind: " + kind);
    }
    return sh;
}

nlohmann::json shape_to_json(const PhantomShape& sh) {
    nlohmann::json j;
    j["value"] = sh.value;
    switch (sh.kind) {
        case PhantomShape::Kind::Ellipse:
            j["kind"] = "ellipse";
            j["cx"] = sh.cx;
            j["cy"] = sh.cy;
            j["a"] = sh.a;
            j["b"] = sh.b;
            j["angle_deg"] = sh.angle_deg;
            break;
        case PhantomShape::Kind::Annulus:
            j["kind"] = "annulus";
            j["cx"] = sh.cx;
            j["cy"] = sh.cy;
            j["r_inner"] = sh.a;
            j["r_outer"] = sh.b;
            break;
        case PhantomShape::Kind::Band:
            j["kind"] = "band";
            j["cx"] = sh.cx;
            j["cy"] = sh.cy;
            j["y0"] = sh.y0;
            j["y1"] = sh.y1;
            j["clip_r"] = sh.clip_r;
            break;
    }
    return j;
}

}  // namespace

PhantomSpec phantom_spec_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    PhantomSpec spec;
    spec.name = j.value("name", "phantom");
    spec.background = j.value("background", 1.0);
    for (const auto& s : j.at("shapes")) spec.shapes.push_back(shape_from_json(s));
    return spec;
}

std::string phantom_spec_to_json(const PhantomSpec& spec) {
    nlohmann::json j;
    j["name"] = spec.name;
    j["background"] = spec.background;
    j["shapes"] = nlohmann::json::array();
    for (const auto& s : spec.shapes) j["shapes"].push_back(shape_to_json(s));
    return j.dump(2);
}

PhantomSpec load_phantom_spec(const std::string& path) {
    if (path == "heart_lungs") return heart_lungs_spec();
    if (path == "pipeline") return pipeline_spec();
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open phantom spec: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return phantom_spec_from_json(ss.str());
}

}  // namespace eit
