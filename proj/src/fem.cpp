#include "eit/fem.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace eit {

namespace {
constexpr double kPi = 3.14159265358979323846;

double wrap_angle(double a) {
    while (a < -kPi) a += 2.0 * kPi;
    while (a >= kPi) a -= 2.0 * kPi;
    return a;
}
}  // namespace

FemMesh make_disc_mesh(int refinement_level) {
    if (refinement_level < 0 || refinement_level > 9)
        throw std::invalid_argument("mesh refinement level out of range");
    FemMesh mesh;
    mesh.level = refinement_level;
    auto& V = mesh.vertices;
    auto& T = mesh.triangles;
    V.push_back({0.0, 0.0});
    for (int i = 0; i < 6; ++i) {
        const double a = 2.0 * kPi * i / 6.0;
        V.push_back({std::cos(a), std::sin(a)});
    }
    for (int i = 0; i < 6; ++i) T.push_back({0, 1 + i, 1 + (i + 1) % 6});

    auto on_circle = [&](int v) {
        const double r = std::hypot(V[v][0], V[v][1]);
        return std::abs(r - 1.0) < 1e-12;
    };

    for (int pass = 0; pass < refinement_level; ++pass) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            std::array<double, 2> p{0.5 * (V[a][0] + V[b][0]), 0.5 * (V[a][1] + V[b][1])};
            if (on_circle(a) && on_circle(b)) {
                const double r = std::hypot(p[0], p[1]);
                p[0] /= r;
                p[1] /= r;
            }
            const int idx = static_cast<int>(V.size());
            V.push_back(p);
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(4 * T.size());
        for (const auto& t : T) {
            const int m01 = mid(t[0], t[1]);
            const int m12 = mid(t[1], t[2]);
            const int m20 = mid(t[2], t[0]);
            next.push_back({t[0], m01, m20});
            next.push_back({t[1], m12, m01});
            next.push_back({t[2], m20, m12});
            next.push_back({m01, m12, m20});
        }
        T = std::move(next);
    }

    for (int v = 0; v < static_cast<int>(V.size()); ++v) {
        if (on_circle(v)) mesh.boundary.push_back(v);
    }
    std::sort(mesh.boundary.begin(), mesh.boundary.end(), [&](int a, int b) {
        return std::atan2(V[a][1], V[a][0]) < std::atan2(V[b][1], V[b][0]);
    });
    mesh.boundary_angle.reserve(mesh.boundary.size());
    for (int v : mesh.boundary) mesh.boundary_angle.push_back(std::atan2(V[v][1], V[v][0]));
    return mesh;
}

NeumannSolver::NeumannSolver(const ConductivityImage& sigma, std::shared_ptr<const FemMesh> mesh)
    : mesh_(std::move(mesh)) {
    const FemMesh& M = *mesh_;
    const ZGrid& grid = *sigma.grid;
    n_ = M.vertex_count();

    auto sample_sigma = [&](double x, double y) {
        int ix = static_cast<int>(std::floor((x + grid.s) / grid.h + 0.5));
        int iy = static_cast<int>(std::floor((y + grid.s) / grid.h + 0.5));
        ix = std::clamp(ix, 0, grid.n - 1);
        iy = std::clamp(iy, 0, grid.n - 1);
        return sigma.values[static_cast<std::size_t>(iy) * grid.n + ix];
    };

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(M.triangles.size() * 9 + 4 * M.boundary.size());
    for (const auto& t : M.triangles) {
        const auto& p0 = M.vertices[t[0]];
        const auto& p1 = M.vertices[t[1]];
        const auto& p2 = M.vertices[t[2]];
        const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        const double area = 0.5 * std::abs(det);
        if (area <= 0.0) throw std::runtime_error("degenerate mesh triangle");
        // P1 shape-function gradients
        const double bx[3] = {p1[1] - p2[1], p2[1] - p0[1], p0[1] - p1[1]};
        const double by[3] = {p2[0] - p1[0], p0[0] - p2[0], p1[0] - p0[0]};
        const double cxp = (p0[0] + p1[0] + p2[0]) / 3.0;
        const double cyp = (p0[1] + p1[1] + p2[1]) / 3.0;
        const double sig = sample_sigma(cxp, cyp);
        if (!(sig > 0.0)) throw std::runtime_error("nonpositive conductivity sampled on mesh");
        const double scale = sig / (4.0 * area);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trip.emplace_back(t[i], t[j], scale * (bx[i] * bx[j] + by[i] * by[j]));
    }

    // Lagrange multiplier row/column: integral of the trace over the boundary
    // (angle measure), piecewise linear in theta between boundary vertices.
    const int nb = static_cast<int>(M.boundary.size());
    boundary_weight_.resize(nb);
    for (int i = 0; i < nb; ++i) {
        const double prev = M.boundary_angle[(i + nb - 1) % nb];
        const double next = M.boundary_angle[(i + 1) % nb];
        double span = next - prev;
        if (span < 0.0) span += 2.0 * kPi;
        boundary_weight_[i] = 0.5 * span;
    }
    for (int i = 0; i < nb; ++i) {
        trip.emplace_back(M.boundary[i], n_, boundary_weight_[i]);
        trip.emplace_back(n_, M.boundary[i], boundary_weight_[i]);
    }

    Eigen::SparseMatrix<double> A(n_ + 1, n_ + 1);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    lu_.compute(A);
    if (lu_.info() != Eigen::Success) throw std::runtime_error("singular FEM system (bad conductivity sampling?)");
}

std::vector<double> NeumannSolver::solve(const std::function<double(double)>& current) const {
    const FemMesh& M = *mesh_;
    const int nb = static_cast<int>(M.boundary.size());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_ + 1);

    // Load vector: integral over the boundary of current(theta) * hat_v(theta),
    // 4-point Gauss-Legendre on each angular interval.
    static const double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
    static const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
    double total = 0.0;
    for (int i = 0; i < nb; ++i) {
        const int j = (i + 1) % nb;
        const double a0 = M.boundary_angle[i];
        double a1 = M.boundary_angle[j];
        if (a1 <= a0) a1 += 2.0 * kPi;
        const double half = 0.5 * (a1 - a0);
        const double midp = 0.5 * (a1 + a0);
        for (int q = 0; q < 4; ++q) {
            const double th = midp + half * gx[q];
            const double w = half * gw[q];
            const double f = current(wrap_angle(th));
            const double lam = (th - a0) / (a1 - a0);
            rhs[M.boundary[i]] += w * f * (1.0 - lam);
            rhs[M.boundary[j]] += w * f * lam;
            total += w * f;
        }
    }
    if (std::abs(total) > 1e-6 * (1.0 + rhs.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("Neumann current is not mean-free over the boundary");

    Eigen::VectorXd sol = lu_.solve(rhs);
    if (lu_.info() != Eigen::Success) throw std::runtime_error("FEM solve failed");
    return std::vector<double>(sol.data(), sol.data() + n_);
}

double NeumannSolver::trace_at(const std::vector<double>& u, double theta) const {
    const FemMesh& M = *mesh_;
    const int nb = static_cast<int>(M.boundary.size());
    const double th = wrap_angle(theta);
    // boundary_angle is sorted; find the interval containing th
    auto it = std::upper_bound(M.boundary_angle.begin(), M.boundary_angle.end(), th);
    int j = static_cast<int>(it - M.boundary_angle.begin()) % nb;
    int i = (j + nb - 1) % nb;
    double a0 = M.boundary_angle[i];
    double a1 = M.boundary_angle[j];
    double t = th;
    if (a1 <= a0) {  // wrap interval
        a1 += 2.0 * kPi;
        if (t < a0) t += 2.0 * kPi;
    }
    const double lam = (t - a0) / (a1 - a0);
    return (1.0 - lam) * u[M.boundary[i]] + lam * u[M.boundary[j]];
}

}  // namespace eit
