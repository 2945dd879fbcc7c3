#include "eit/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace eit {

namespace {

void write_doubles(const std::string& path, const double* data, std::size_t count) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
    if (!out) throw std::runtime_error("short write to " + path);
}

std::vector<double> read_doubles(const std::string& path, std::size_t expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::vector<double> data(expected);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(expected * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != expected * sizeof(double))
        throw std::runtime_error("unexpected size of " + path);
    return data;
}

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

}  // namespace

std::string json_header_path(const std::string& bin_path) { return bin_path + ".json"; }

void save_image(const ConductivityImage& img, const std::string& bin_path) {
    write_doubles(bin_path, img.values.data(), img.values.size());
    nlohmann::json j;
    j["kind"] = "conductivity_image";
    j["layout"] = "row-major-y-outer";
    j["grid"] = {{"ell", img.grid->ell}, {"s", img.grid->s}};
    j["background"] = img.background;
    write_json(json_header_path(bin_path), j);
}

ConductivityImage load_image(const std::string& bin_path) {
    const auto j = read_json(json_header_path(bin_path));
    if (j.at("kind") != "conductivity_image") throw std::runtime_error("not a conductivity image: " + bin_path);
    const int ell = j.at("grid").at("ell").get<int>();
    const double s = j.at("grid").at("s").get<double>();
    auto grid = std::make_shared<ZGrid>(make_zgrid(ell, s));
    ConductivityImage img;
    img.values = read_doubles(bin_path, grid->size());
    img.grid = std::move(grid);
    img.background = j.value("background", 1.0);
    return img;
}

void save_real_field(const std::vector<double>& values, const ZGrid& grid,
                     const std::string& kind, const std::string& bin_path) {
    if (values.size() != grid.size()) throw std::invalid_argument("field size does not match grid");
    write_doubles(bin_path, values.data(), values.size());
    nlohmann::json j;
    j["kind"] = kind;
    j["layout"] = "row-major-y-outer";
    j["grid"] = {{"ell", grid.ell}, {"s", grid.s}};
    write_json(json_header_path(bin_path), j);
}

std::vector<double> load_real_field(const std::string& bin_path, ZGrid* grid_out) {
    const auto j = read_json(json_header_path(bin_path));
    const int ell = j.at("grid").at("ell").get<int>();
    const double s = j.at("grid").at("s").get<double>();
    ZGrid grid = make_zgrid(ell, s);
    auto values = read_doubles(bin_path, grid.size());
    if (grid_out) *grid_out = std::move(grid);
    return values;
}

void save_scattering(const ScatteringField& field, const std::string& bin_path) {
    const std::size_t total = field.tau.size();
    std::vector<double> planes(2 * total);
    for (std::size_t i = 0; i < total; ++i) {
        planes[i] = field.tau[i].real();
        planes[total + i] = field.tau[i].imag();
    }
    write_doubles(bin_path, planes.data(), planes.size());
    nlohmann::json j;
    j["kind"] = "scattering_field";
    j["layout"] = "row-major-y-outer, Re plane then Im plane";
    j["convention"] = "tau";
    j["grid"] = {{"m", field.kgrid->m}, {"R", field.kgrid->R}, {"Rtilde", field.kgrid->Rtilde}};
    write_json(json_header_path(bin_path), j);
}

ScatteringField load_scattering(const std::string& bin_path) {
    const auto j = read_json(json_header_path(bin_path));
    if (j.at("kind") != "scattering_field") throw std::runtime_error("not a scattering field: " + bin_path);
    const int m = j.at("grid").at("m").get<int>();
    const double R = j.at("grid").at("R").get<double>();
    const double Rt = j.at("grid").at("Rtilde").get<double>();
    auto kgrid = std::make_shared<KGrid>(make_kgrid(m, R, Rt));
    const std::size_t total = kgrid->size();
    const auto planes = read_doubles(bin_path, 2 * total);
    ScatteringField f;
    f.kgrid = std::move(kgrid);
    f.tau.resize(total);
    for (std::size_t i = 0; i < total; ++i) f.tau[i] = Complex(planes[i], planes[total + i]);
    f.valid_mask.assign(total, 1);
    return f;
}

void save_matrix_csv(const std::vector<std::vector<double>>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    char buf[64];
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
            out << buf;
            if (i + 1 < row.size()) out << ",";
        }
        out << "\n";
    }
}

}  // namespace eit
