#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <json.hpp>

#include "eit/beltrami.hpp"
#include "eit/boundary_cgo.hpp"
#include "eit/config.hpp"
#include "eit/contrast.hpp"
#include "eit/dbar.hpp"
#include "eit/errors.hpp"
#include "eit/io.hpp"
#include "eit/parallel.hpp"
#include "eit/phantoms.hpp"
#include "eit/pipeline.hpp"
#include "eit/png.hpp"
#include "eit/sha256.hpp"
#include "eit/tv_seg.hpp"

namespace fs = std::filesystem;
using namespace eit;

namespace {

constexpr const char* kVersion = "eit 1.0.0";

struct StageClock {
    std::map<std::string, double> seconds;
    template <class Fn>
    auto time(const std::string& name, Fn&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        auto out = fn();
        seconds[name] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return out;
    }
};

std::pair<double, double> parse_pair(const std::string& text, char sep, const char* what) {
    const auto pos = text.find(sep);
    if (pos == std::string::npos) throw ConfigError(std::string("expected '<a>") + sep + "<b>' for " + what);
    return {std::stod(text.substr(0, pos)), std::stod(text.substr(pos + 1))};
}

std::vector<uint8_t> parse_kmask(const std::string& text, const KGrid& kgrid) {
    std::vector<uint8_t> mask(kgrid.size(), 0);
    if (text.rfind("disc:", 0) == 0) {
        const double r = std::stod(text.substr(5));
        for (std::size_t i = 0; i < kgrid.size(); ++i)
            if (std::abs(kgrid.points[i]) <= r) mask[i] = 1;
    } else if (text.rfind("annulus:", 0) == 0) {
        const auto [a, b] = parse_pair(text.substr(8), ':', "--kmask annulus");
        for (std::size_t i = 0; i < kgrid.size(); ++i) {
            const double r = std::abs(kgrid.points[i]);
            if (r >= a && r <= b) mask[i] = 1;
        }
    } else {
        throw ConfigError("kmask must be disc:R or annulus:A:B");
    }
    return mask;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

int run_command(const PipelineConfig& config, const std::string& out_dir) {
    fs::create_directories(out_dir);
    StageClock clock;
    auto path = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };

    const PhantomSpec spec = load_phantom_spec(config.phantom);
    auto grid = std::make_shared<const ZGrid>(make_zgrid(config.ell, config.s));
    const ConductivityImage truth = build_phantom(spec, grid);
    TrigBasis basis;
    basis.N = config.basis_N;

    const BoundaryOpMatrix nd =
        clock.time("simulate_nd", [&] { return assemble_nd(truth, basis, config.mesh_level); });
    const BoundaryOpMatrix noisy = add_noise(nd, basis, config.eta, config.seed);
    const BoundaryOpMatrix dn = nd_to_dn(noisy);

    const PipelineResult result = clock.time("pipeline", [&] { return run_pipeline(dn, config, &truth); });

    // dump artifacts: truth, data, per-iteration images and transforms,
    // previews on the truth's color scale
    double vmin = 1e300, vmax = -1e300;
    for (int32_t flat : grid->disc_points) {
        vmin = std::min(vmin, truth.values[static_cast<std::size_t>(flat)]);
        vmax = std::max(vmax, truth.values[static_cast<std::size_t>(flat)]);
    }
    if (!(vmax > vmin)) vmax = vmin + 1.0;

    std::vector<std::string> outputs;
    auto dump_image = [&](const ConductivityImage& img, const std::string& stem) {
        save_image(img, path(stem + ".bin"));
        emit_preview(img, vmin, vmax, path(stem + ".png"));
        outputs.push_back(stem + ".bin");
        outputs.push_back(stem + ".bin.json");
        outputs.push_back(stem + ".png");
    };
    dump_image(truth, "sigma_true");
    save_boundary_op(nd, path("nd.bin"));
    save_boundary_op(dn, path("dn.bin"));
    for (const char* f : {"nd.bin", "nd.bin.csv", "nd.bin.json", "dn.bin", "dn.bin.csv", "dn.bin.json"})
        outputs.push_back(f);
    save_scattering(result.tau0, path("tau0.bin"));
    outputs.push_back("tau0.bin");
    outputs.push_back("tau0.bin.json");

    for (const auto& rec : result.iterations) {
        const std::string suffix = "_j" + std::to_string(rec.j);
        dump_image(rec.sigma_db, "sigma_db" + suffix);
        dump_image(rec.sigma_tv, "sigma_tv" + suffix);
        dump_image(rec.sigma_ce, "sigma_ce" + suffix);
        save_scattering(rec.tau, path("tau" + suffix + ".bin"));
        outputs.push_back("tau" + suffix + ".bin");
        outputs.push_back("tau" + suffix + ".bin.json");
    }

    write_text(path("metrics.csv"), metrics_csv(result.iterations));
    outputs.push_back("metrics.csv");

    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["config"] = nlohmann::json::parse(config_to_json(config));
    manifest["threads"] = max_threads();
    manifest["iterations"] = static_cast<int>(result.iterations.size());
    for (const auto& rec : result.iterations) {
        manifest["contrast"].push_back({{"j", rec.j},
                                        {"s", rec.ce_s},
                                        {"t", rec.ce_t},
                                        {"discrepancy", rec.ce_discrepancy},
                                        {"max_imag_residual", rec.max_imag_residual}});
    }
    for (const auto& [stage, secs] : clock.seconds) manifest["timings"][stage] = secs;
    for (const auto& name : outputs) manifest["outputs"][name] = sha256_file(path(name));
    write_text(path("manifest.json"), manifest.dump(2) + "\n");

    std::cout << "wrote " << outputs.size() + 1 << " files to " << out_dir << "\n";
    std::cout << metrics_csv(result.iterations);
    return 0;
}

int metrics_command(const std::string& results_dir, const std::string& out_path) {
    const fs::path dir(results_dir);
    const ConductivityImage truth = load_image((dir / "sigma_true.bin").string());
    std::vector<IterationRecord> recs;
    for (int j = 1;; ++j) {
        const std::string suffix = "_j" + std::to_string(j);
        if (!fs::exists(dir / ("sigma_db" + suffix + ".bin"))) break;
        IterationRecord rec;
        rec.j = j;
        rec.sigma_db = load_image((dir / ("sigma_db" + suffix + ".bin")).string());
        rec.sigma_tv = load_image((dir / ("sigma_tv" + suffix + ".bin")).string());
        rec.sigma_ce = load_image((dir / ("sigma_ce" + suffix + ".bin")).string());
        rec.metrics.l2_db = relative_l2(rec.sigma_db, truth);
        rec.metrics.l2_tv = relative_l2(rec.sigma_tv, truth);
        rec.metrics.l2_ce = relative_l2(rec.sigma_ce, truth);
        rec.metrics.ssim_db = ssim(rec.sigma_db, truth);
        rec.metrics.ssim_tv = ssim(rec.sigma_tv, truth);
        rec.metrics.ssim_ce = ssim(rec.sigma_ce, truth);
        recs.push_back(std::move(rec));
    }
    if (recs.empty()) throw ConfigError("no per-iteration images found in " + results_dir);
    const std::string csv = metrics_csv(recs);
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        write_text(out_path, csv);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TV-enhanced D-bar reconstruction for 2-D EIT"};
    app.set_version_flag("--version", std::string(kVersion));
    int threads = 0;
    app.add_option("--threads", threads, "worker thread cap (default: hardware)");

    std::string phantom = "heart_lungs", out_dir = "data";
    double noise = 0.0;
    uint64_t seed = 7;
    int ell = 8, mesh_level = 6, basis_N = 16;
    double s_half = 2.3;
    auto* simulate = app.add_subcommand("simulate", "simulate noisy EIT boundary data for a phantom");
    simulate->add_option("--phantom", phantom, "phantom name (heart_lungs, pipeline) or spec JSON path");
    simulate->add_option("--noise", noise, "relative noise level eta");
    simulate->add_option("--seed", seed, "noise seed");
    simulate->add_option("--out", out_dir, "output directory");
    simulate->add_option("--ell", ell, "z-grid exponent");
    simulate->add_option("--s", s_half, "z-grid half-width");
    simulate->add_option("--mesh-level", mesh_level, "FEM refinement level");
    simulate->add_option("--N", basis_N, "trig basis order");

    std::string sigma_path, mu_path, kmask = "disc:5", tau_out = "tau.bin";
    int m_exp = 7;
    double Rr = 5.0, Rt = 10.0;
    auto* scatter = app.add_subcommand("scatter", "Beltrami scattering transform of a conductivity image");
    scatter->add_option("--sigma", sigma_path, "conductivity image (bin)");
    scatter->add_option("--mu", mu_path, "Beltrami coefficient field (bin), alternative to --sigma");
    scatter->add_option("--m", m_exp, "k-grid exponent");
    scatter->add_option("--R", Rr, "k-grid truncation radius");
    scatter->add_option("--Rtilde", Rt, "k-grid outer radius");
    scatter->add_option("--kmask", kmask, "disc:R or annulus:A:B");
    scatter->add_option("--out", tau_out, "output scattering file");

    std::string tau_path, sigma_out = "sigma_db.bin";
    double cutoff = 5.0;
    auto* reconstruct = app.add_subcommand("reconstruct", "D-bar reconstruction from scattering data");
    reconstruct->add_option("--scattering", tau_path, "scattering field (bin)")->required();
    reconstruct->add_option("--cutoff", cutoff, "truncation radius");
    reconstruct->add_option("--ell", ell, "z-grid exponent");
    reconstruct->add_option("--s", s_half, "z-grid half-width");
    reconstruct->add_option("--out", sigma_out, "output image");

    std::string seg_in, seg_out = "sigma_tv.bin";
    int K = 4;
    double lambda = 0.1, s_param = 0.0;
    uint64_t seg_seed = 7;
    auto* seg = app.add_subcommand("segment", "TV segmentation of a reconstruction");
    seg->add_option("--in", seg_in, "input image")->required();
    seg->add_option("--K", K, "region count");
    seg->add_option("--lambda", lambda, "data weight");
    seg->add_option("--s-param", s_param, "edge-weight strength (0 = plain TV)");
    seg->add_option("--seed", seg_seed, "k-means seed");
    seg->add_option("--out", seg_out, "output image");

    std::string enh_in, enh_data, enh_out = "sigma_ce.bin", bounds_text = "0.3:2.5", log_path;
    double rho = 2.0;
    int budget = 60;
    auto* enhance = app.add_subcommand("enhance", "CGO-sinogram contrast enhancement");
    enhance->add_option("--in", enh_in, "piecewise-constant image")->required();
    enhance->add_option("--data", enh_data, "measured DN matrix (bin)")->required();
    enhance->add_option("--bounds", bounds_text, "a priori bounds c:C");
    enhance->add_option("--rho", rho, "sinogram radius");
    enhance->add_option("--budget", budget, "DIRECT evaluation budget");
    enhance->add_option("--mesh-level", mesh_level, "FEM refinement level for candidates");
    enhance->add_option("--log", log_path, "CSV audit log of sampled (s, t, value)");
    enhance->add_option("--out", enh_out, "output image");

    std::string config_path, run_out = "results";
    auto* run = app.add_subcommand("run", "full iterated pipeline from a JSON config");
    run->add_option("--config", config_path, "pipeline config JSON")->required();
    run->add_option("--out", run_out, "results directory");

    std::string metrics_results, metrics_out;
    auto* metrics = app.add_subcommand("metrics", "recompute metrics.csv from a results directory");
    metrics->add_option("--results", metrics_results, "results directory from `run`")->required();
    metrics->add_option("--out", metrics_out, "output CSV (default: stdout)");

    app.require_subcommand(0, 1);
    CLI11_PARSE(app, argc, argv);
    if (threads > 0) set_max_threads(threads);

    try {
        if (simulate->parsed()) {
            fs::create_directories(out_dir);
            const PhantomSpec spec = load_phantom_spec(phantom);
            auto grid = std::make_shared<const ZGrid>(make_zgrid(ell, s_half));
            const ConductivityImage truth = build_phantom(spec, grid);
            TrigBasis basis;
            basis.N = basis_N;
            const BoundaryOpMatrix nd = assemble_nd(truth, basis, mesh_level);
            const BoundaryOpMatrix noisy = add_noise(nd, basis, noise, seed);
            const BoundaryOpMatrix dn = nd_to_dn(noisy);
            save_image(truth, (fs::path(out_dir) / "sigma_true.bin").string());
            save_boundary_op(noisy, (fs::path(out_dir) / "nd.bin").string());
            save_boundary_op(dn, (fs::path(out_dir) / "dn.bin").string());
            double vmin = 1e300, vmax = -1e300;
            for (int32_t flat : grid->disc_points) {
                vmin = std::min(vmin, truth.values[static_cast<std::size_t>(flat)]);
                vmax = std::max(vmax, truth.values[static_cast<std::size_t>(flat)]);
            }
            emit_preview(truth, vmin, vmax > vmin ? vmax : vmin + 1.0,
                         (fs::path(out_dir) / "sigma_true.png").string());
            std::cout << "simulated " << spec.name << " with eta=" << noise << " seed=" << seed << "\n";
            return 0;
        }
        if (scatter->parsed()) {
            if (sigma_path.empty() == mu_path.empty())
                throw ConfigError("scatter needs exactly one of --sigma or --mu");
            auto kgrid = std::make_shared<const KGrid>(make_kgrid(m_exp, Rr, Rt));
            std::shared_ptr<const ZGrid> grid;
            std::vector<double> mu;
            if (!sigma_path.empty()) {
                const ConductivityImage img = load_image(sigma_path);
                grid = img.grid;
                mu = beltrami_mu(img);
            } else {
                ZGrid g;
                mu = load_real_field(mu_path, &g);
                grid = std::make_shared<const ZGrid>(std::move(g));
            }
            const auto mask = parse_kmask(kmask, *kgrid);
            const ScatteringField tau = scattering_from_mu(grid, mu, kgrid, mask);
            std::size_t failed = 0;
            for (std::size_t i = 0; i < mask.size(); ++i)
                if (mask[i] && !tau.valid_mask[i]) ++failed;
            if (failed > 0)
                throw NumericError("scattering solve failed at " + std::to_string(failed) + " k-points");
            save_scattering(tau, tau_out);
            std::cout << "wrote " << tau_out << "\n";
            return 0;
        }
        if (reconstruct->parsed()) {
            const ScatteringField tau = load_scattering(tau_path);
            auto grid = std::make_shared<const ZGrid>(make_zgrid(ell, s_half));
            const DbarReconstruction rec = reconstruct_sigma(tau, grid, cutoff);
            save_image(rec.sigma, sigma_out);
            std::cout << "max imaginary residual: " << rec.max_imag_residual << "\n";
            return 0;
        }
        if (seg->parsed()) {
            const ConductivityImage img = load_image(seg_in);
            SegmentationOptions opts;
            opts.s_param = s_param;
            const SegmentationResult res = segment(img, K, lambda, seg_seed, opts);
            save_image(res.piecewise, seg_out);
            std::cout << "outer iterations: " << res.outer_iterations << "\n";
            return 0;
        }
        if (enhance->parsed()) {
            const ConductivityImage img = load_image(enh_in);
            const BoundaryOpMatrix dn = load_boundary_op(enh_data);
            const auto [cb, Cb] = parse_pair(bounds_text, ':', "--bounds");
            ContrastEnhanceConfig cfg;
            cfg.mesh_level = mesh_level;
            cfg.basis_N = dn.N;
            cfg.rho = rho;
            cfg.budget = budget;
            const Sinogram measured = build_sinogram(dn, rho);
            const ContrastEnhanceResult res = contrast_enhance(img, ContrastBounds{cb, Cb}, measured, cfg);
            save_image(res.sigma_ce, enh_out);
            if (!log_path.empty()) {
                std::vector<std::vector<double>> rows;
                for (const auto& sample : res.samples) rows.push_back({sample[0], sample[1], sample[2]});
                save_matrix_csv(rows, log_path);
            }
            std::cout << "optimal (s, t) = (" << res.s << ", " << res.t << "), discrepancy "
                      << res.discrepancy << "\n";
            return 0;
        }
        if (run->parsed()) {
            return run_command(load_config(config_path), run_out);
        }
        if (metrics->parsed()) {
            return metrics_command(metrics_results, metrics_out);
        }
        std::cout << app.help();
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
