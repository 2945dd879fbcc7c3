#include <doctest.h>

#include <cmath>

#include "eit/contrast.hpp"
#include "eit/phantoms.hpp"

using namespace eit;

namespace {
ConductivityImage tv_like_image(std::shared_ptr<const ZGrid> grid) {
    ConductivityImage img = make_constant_image(grid, 1.0);
    for (int32_t flat : grid->disc_points) {
        const Complex z = grid->points[static_cast<std::size_t>(flat)];
        double v = 1.0;
        if (std::abs(z - Complex(-0.3, 0.0)) < 0.35) v = 0.5;
        if (std::abs(z - Complex(0.4, 0.1)) < 0.3) v = 2.0;
        img.values[static_cast<std::size_t>(flat)] = v;
    }
    return img;
}
}  // namespace

TEST_CASE("family endpoints hit the a priori bounds exactly") {
    auto grid = std::make_shared<const ZGrid>(make_zgrid(6, 2.3));
    const ContrastFamily fam = make_family(tv_like_image(grid), ContrastBounds{0.3, 2.5});
    SUBCASE("sigma_{1,1} attains min c and max C") {
        const ConductivityImage extreme = fam.member(1.0, 1.0);
        double lo = 1e300, hi = -1e300;
        for (int32_t flat : grid->disc_points) {
            lo = std::min(lo, extreme.values[static_cast<std::size_t>(flat)]);
            hi = std::max(hi, extreme.values[static_cast<std::size_t>(flat)]);
        }
        CHECK(lo == 0.3);
        CHECK(hi == 2.5);
    }
    SUBCASE("sigma_{0,0} is identically 1") {
        const ConductivityImage flat = fam.member(0.0, 0.0);
        for (double v : flat.values) CHECK(v == 1.0);
    }
    SUBCASE("pixels at the exact value 1 never move") {
        const ConductivityImage mid = fam.member(0.7, 0.4);
        for (int32_t flat : grid->disc_points) {
            if (fam.base.values[static_cast<std::size_t>(flat)] == 1.0)
                CHECK(mid.values[static_cast<std::size_t>(flat)] == 1.0);
        }
    }
}

TEST_CASE("all-above-1 image leaves the s branch inert") {
    auto grid = std::make_shared<const ZGrid>(make_zgrid(5, 2.3));
    ConductivityImage img = make_constant_image(grid, 1.0);
    for (int32_t flat : grid->disc_points) {
        const Complex z = grid->points[static_cast<std::size_t>(flat)];
        if (std::abs(z) < 0.5) img.values[static_cast<std::size_t>(flat)] = 1.8;
    }
    const ContrastFamily fam = make_family(img, ContrastBounds{0.2, 3.0});
    CHECK(fam.has_above);
    CHECK(!fam.has_below);
    // s has no effect; the max value is monotone in t per the formula
    const auto a = fam.member(0.0, 0.5);
    const auto b = fam.member(1.0, 0.5);
    CHECK(a.values == b.values);
    double prev_max = 0.0;
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const auto img_t = fam.member(0.0, t);
        double hi = -1e300;
        for (int32_t flat : grid->disc_points) hi = std::max(hi, img_t.values[static_cast<std::size_t>(flat)]);
        // pointwise formula oracle: max = 1 + t (C - 1)
        CHECK(hi == doctest::Approx(1.0 + t * 2.0).epsilon(1e-12));
        CHECK(hi >= prev_max);
        prev_max = hi;
    }
}

TEST_CASE("monotone range of the family") {
    auto grid = std::make_shared<const ZGrid>(make_zgrid(5, 2.3));
    const ContrastFamily fam = make_family(tv_like_image(grid), ContrastBounds{0.3, 2.5});
    double prev_min = 1e300;
    for (double s : {0.0, 0.3, 0.6, 1.0}) {
        const auto img_s = fam.member(s, 0.4);
        double lo = 1e300;
        for (int32_t flat : grid->disc_points) lo = std::min(lo, img_s.values[static_cast<std::size_t>(flat)]);
        CHECK(lo <= prev_min + 1e-15);
        prev_min = lo;
    }
}

TEST_CASE("identically-1 image has nothing to enhance") {
    auto grid = std::make_shared<const ZGrid>(make_zgrid(5, 2.3));
    CHECK_THROWS_AS(make_family(make_constant_image(grid, 1.0), ContrastBounds{0.3, 2.5}),
                    std::invalid_argument);
}

TEST_CASE("invalid bounds are rejected") {
    auto grid = std::make_shared<const ZGrid>(make_zgrid(5, 2.3));
    const auto img = tv_like_image(grid);
    CHECK_THROWS_AS(make_family(img, ContrastBounds{1.2, 2.5}), std::invalid_argument);
    CHECK_THROWS_AS(make_family(img, ContrastBounds{0.3, 0.9}), std::invalid_argument);
}

namespace {
std::pair<double, double> dense_grid_argmin(const std::function<double(double, double)>& f) {
    double best =  1e300, bs = 0, bt = 0;
    for (int i = 0; i <= 100; ++i)
        for (int j = 0; j <= 100; ++j) {
            const double v = f(i / 100.0, j / 100.0);
            if (v < best) {
                best = v;
                bs = i / 100.0;
                bt = j / 100.0;
            }
        }
    return {bs, bt};
}
}  // namespace

TEST_CASE("DIRECT finds analytic minima within 0.05 of the dense-grid oracle") {
    SUBCASE("interior quadratic") {
        auto f = [](double s, double t) { return (s - 0.3) * (s - 0.3) + (t - 0.7) * (t - 0.7); };
        const DirectResult r = direct_minimize(f, 100);
        const auto [gs, gt] = dense_grid_argmin(f);
        CHECK(std::abs(r.s - gs) < 0.05);
        CHECK(std::abs(r.t - gt) < 0.05);
    }
    SUBCASE("corner minimum") {
        auto f = [](double s, double t) { return (s - 1.0) * (s - 1.0) + (t - 1.0) * (t - 1.0); };
        const DirectResult r = direct_minimize(f, 150);
        const auto [gs, gt] = dense_grid_argmin(f);
        CHECK(std::abs(r.s - gs) < 0.05);
        CHECK(std::abs(r.t - gt) < 0.05);
    }
    SUBCASE("two-well landscape") {
        auto f = [](double s, double t) {
            return -std::exp(-8.0 * ((s - 0.8) * (s - 0.8) + (t - 0.2) * (t - 0.2))) -
                   0.8 * std::exp(-10.0 * ((s - 0.2) * (s - 0.2) + (t - 0.7) * (t - 0.7)));
        };
        const DirectResult r = direct_minimize(f, 150);
        const auto [gs, gt] = dense_grid_argmin(f);
        CHECK(std::abs(r.s - gs) < 0.05);
        CHECK(std::abs(r.t - gt) < 0.05);
    }
}

TEST_CASE("DIRECT on a constant objective returns the constant") {
    const DirectResult r = direct_minimize([](double, double) { return 3.25; }, 30);
    CHECK(r.value == 3.25);
    CHECK(r.evaluations <= 30);
}

TEST_CASE("DIRECT never returns worse than its own samples") {
    auto f = [](double s, double t) { return std::sin(9.0 * s) * std::cos(7.0 * t) + s * t; };
    const DirectResult r = direct_minimize(f, 120);
    for (const auto& sample : r.samples) CHECK(r.value <= sample[2] + 1e-15);
    // the center is always sampled first
    CHECK(r.samples[0][0] == 0.5);
    CHECK(r.samples[0][1] == 0.5);
    CHECK(r.value <= f(0.5, 0.5));
}

TEST_CASE("DIRECT treats objective failures as infeasible and continues") {
    auto f = [](double s, double t) {
        if (s > 0.6 && t > 0.6) throw std::runtime_error("forward solver blew up");
        return (s - 0.2) * (s - 0.2) + (t - 0.2) * (t - 0.2);
    };
    const DirectResult r = direct_minimize(f, 120);
    CHECK(std::abs(r.s - 0.2) < 0.06);
    CHECK(std::abs(r.t - 0.2) < 0.06);
}

TEST_CASE("DIRECT is deterministic and respects the minimum budget") {
    auto f = [](double s, double t) { return s + 2.0 * t; };
    const DirectResult a = direct_minimize(f, 60);
    const DirectResult b = direct_minimize(f, 60);
    CHECK(a.samples == b.samples);
    CHECK(a.s == b.s);
    CHECK(a.t == b.t);
    CHECK_THROWS_AS(direct_minimize(f, 5), std::invalid_argument);
}
