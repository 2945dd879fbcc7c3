#include "eit/forward.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "eit/io.hpp"
#include "eit/parallel.hpp"
#include "eit/rng.hpp"

namespace eit {

namespace {
constexpr double kPi = 3.14159265358979323846;
const double kInvSqrtPi = 1.0 / std::sqrt(kPi);
}  // namespace

double TrigBasis::node(int m) const { return (m - 1 - N) * 2.0 * kPi / (2 * N + 1); }

double TrigBasis::eval(int n, double theta) const {
    const int w = frequency(n);
    return kInvSqrtPi * ((n % 2 == 1) ? std::cos(w * theta) : std::sin(w * theta));
}

std::vector<double> TrigBasis::nodes() const {
    std::vector<double> t(static_cast<std::size_t>(node_count()));
    for (int m = 1; m <= node_count(); ++m) t[static_cast<std::size_t>(m - 1)] = node(m);
    return t;
}

ForwardSolver::ForwardSolver(const ConductivityImage& sigma, int mesh_level)
    : mesh_(std::make_shared<FemMesh>(make_disc_mesh(mesh_level))), solver_(sigma, mesh_) {}

std::vector<double> ForwardSolver::solve_pattern(const TrigBasis& basis, int n) const {
    return solver_.solve([&](double theta) { return basis.eval(n, theta); });
}

BoundaryOpMatrix assemble_nd(const ConductivityImage& sigma, const TrigBasis& basis, int mesh_level) {
    const int nf = basis.function_count();
    ForwardSolver fwd(sigma, mesh_level);
    const NeumannSolver& ns = fwd.solver();
    const FemMesh& mesh = ns.mesh();
    const int nb = static_cast<int>(mesh.boundary.size());

    // Boundary load vectors b_n over boundary vertices (Gauss-Legendre per edge,
    // same rule as the solver's right-hand side).
    static const double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
    static const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
    Eigen::MatrixXd loads = Eigen::MatrixXd::Zero(nb, nf);
    for (int i = 0; i < nb; ++i) {
        const int j = (i + 1) % nb;
        const double a0 = mesh.boundary_angle[i];
        double a1 = mesh.boundary_angle[j];
        if (a1 <= a0) a1 += 2.0 * kPi;
        const double half = 0.5 * (a1 - a0);
        const double midp = 0.5 * (a1 + a0);
        for (int q = 0; q < 4; ++q) {
            const double th = midp + half * gx[q];
            const double w = half * gw[q];
            const double lam = (th - a0) / (a1 - a0);
            for (int n = 1; n <= nf; ++n) {
                const double f = basis.eval(n, th);
                loads(i, n - 1) += w * f * (1.0 - lam);
                loads(j, n - 1) += w * f * lam;
            }
        }
    }

    // Traces of the 2N solutions at the boundary vertices.
    Eigen::MatrixXd traces(nb, nf);
    std::vector<std::vector<double>> sols(static_cast<std::size_t>(nf));
    parallel_for(static_cast<std::size_t>(nf), [&](std::size_t idx) {
        sols[idx] = fwd.solve_pattern(basis, static_cast<int>(idx) + 1);
    });
    for (int n = 0; n < nf; ++n)
        for (int i = 0; i < nb; ++i) traces(i, n) = sols[static_cast<std::size_t>(n)][mesh.boundary[i]];

    BoundaryOpMatrix op;
    op.kind = BoundaryOpMatrix::Kind::ND;
    op.N = basis.N;
    op.mesh_level = mesh_level;
    // Galerkin pairing <R phi_n, phi_m> = b_m . u_n; symmetric because the
    // constrained Neumann solve is a symmetric map of the load vectors.
    op.entries = loads.transpose() * traces;
    return op;
}

BoundaryOpMatrix add_noise(const BoundaryOpMatrix& nd, const TrigBasis& basis, double eta, uint64_t seed) {
    if (nd.kind != BoundaryOpMatrix::Kind::ND) throw std::invalid_argument("add_noise expects an ND matrix");
    if (eta < 0.0) throw std::invalid_argument("noise level must be nonnegative");
    if (eta == 0.0) return nd;

    const int nf = basis.function_count();
    const int nn = basis.node_count();
    const auto thetas = basis.nodes();

    // Node values of each column response R phi_n (band-limited, evaluated
    // exactly from the coefficients), perturbed and re-projected by the
    // 2N+1-node quadrature.
    Eigen::MatrixXd phi_at_nodes(nn, nf);
    for (int m = 0; m < nn; ++m)
        for (int n = 1; n <= nf; ++n) phi_at_nodes(m, n - 1) = basis.eval(n, thetas[static_cast<std::size_t>(m)]);

    BoundaryOpMatrix out = nd;
    out.noise_level = eta;
    out.seed = seed;
    Rng rng(seed);
    const double quad_w = 2.0 * kPi / nn;
    for (int n = 0; n < nf; ++n) {
        Eigen::VectorXd vals = phi_at_nodes * nd.entries.col(n);
        const double sup = vals.cwiseAbs().maxCoeff();
        // One Gaussian amplitude per current pattern scaled by the response's
        // sup norm, spread over the boundary nodes with a random unit-sup
        // profile: the relative L-inf perturbation of column n is exactly
        // eta |N_n|, and the node-space shape survives the projection back
        // onto the mean-free trig coefficients.
        const double amplitude = eta * rng.normal() * sup;
        Eigen::VectorXd profile(nn);
        for (int m = 0; m < nn; ++m) profile[m] = rng.normal();
        profile /= profile.cwiseAbs().maxCoeff();
        out.entries.col(n) += quad_w * phi_at_nodes.transpose() * (amplitude * profile);
    }
    return out;
}

BoundaryOpMatrix nd_to_dn(const BoundaryOpMatrix& nd) {
    if (nd.kind != BoundaryOpMatrix::Kind::ND) throw std::invalid_argument("nd_to_dn expects an ND matrix");
    const int nf = 2 * nd.N;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(nd.entries);
    if (!lu.isInvertible())
        throw std::runtime_error("ND matrix is singular (noise level too high for inversion)");
    BoundaryOpMatrix dn;
    dn.kind = BoundaryOpMatrix::Kind::DN;
    dn.N = nd.N;
    dn.noise_level = nd.noise_level;
    dn.seed = nd.seed;
    dn.mesh_level = nd.mesh_level;
    dn.entries = Eigen::MatrixXd::Zero(nf + 1, nf + 1);
    dn.entries.block(1, 1, nf, nf) = lu.inverse();
    return dn;
}

Eigen::MatrixXd dn_to_nd_block(const BoundaryOpMatrix& dn) {
    if (dn.kind != BoundaryOpMatrix::Kind::DN) throw std::invalid_argument("dn_to_nd_block expects a DN matrix");
    const int nf = 2 * dn.N;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(dn.entries.block(1, 1, nf, nf));
    if (!lu.isInvertible()) throw std::runtime_error("DN block is singular");
    return lu.inverse();
}

void save_boundary_op(const BoundaryOpMatrix& op, const std::string& bin_path) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(op.entries.rows()));
    for (int i = 0; i < op.entries.rows(); ++i) {
        rows[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(op.entries.cols()));
        for (int j = 0; j < op.entries.cols(); ++j) rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = op.entries(i, j);
    }
    save_matrix_csv(rows, bin_path + ".csv");

    std::ofstream bin(bin_path, std::ios::binary);
    if (!bin) throw std::runtime_error("cannot write " + bin_path);
    bin.write(reinterpret_cast<const char*>(op.entries.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(op.entries.size())));

    nlohmann::json j;
    j["kind"] = "boundary_op";
    j["op"] = op.kind == BoundaryOpMatrix::Kind::ND ? "ND" : "DN";
    j["N"] = op.N;
    j["eta"] = op.noise_level;
    j["seed"] = op.seed;
    j["mesh_level"] = op.mesh_level;
    j["layout"] = "column-major float64";
    std::ofstream hdr(json_header_path(bin_path));
    hdr << j.dump(2) << "\n";
}

BoundaryOpMatrix load_boundary_op(const std::string& bin_path) {
    std::ifstream hdr(json_header_path(bin_path));
    if (!hdr) throw std::runtime_error("cannot read " + json_header_path(bin_path));
    nlohmann::json j;
    hdr >> j;
    if (j.at("kind") != "boundary_op") throw std::runtime_error("not a boundary op: " + bin_path);
    BoundaryOpMatrix op;
    op.kind = j.at("op") == "ND" ? BoundaryOpMatrix::Kind::ND : BoundaryOpMatrix::Kind::DN;
    op.N = j.at("N").get<int>();
    op.noise_level = j.value("eta", 0.0);
    op.seed = j.value("seed", uint64_t{0});
    op.mesh_level = j.value("mesh_level", 0);
    const int size = op.kind == BoundaryOpMatrix::Kind::ND ? 2 * op.N : 2 * op.N + 1;
    op.entries.resize(size, size);
    std::ifstream bin(bin_path, std::ios::binary);
    if (!bin) throw std::runtime_error("cannot read " + bin_path);
    bin.read(reinterpret_cast<char*>(op.entries.data()),
             static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(op.entries.size())));
    if (!bin) throw std::runtime_error("unexpected size of " + bin_path);
    return op;
}

}  // namespace eit
