#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "eit/fem.hpp"
#include "eit/fields.hpp"

namespace eit {

/// Orthonormal trigonometric boundary basis: 2N functions
///   phi_n(theta) = pi^{-1/2} cos((n+1)theta/2)  (n odd)
///   phi_n(theta) = pi^{-1/2} sin(n theta/2)     (n even)
/// for 1 <= n <= 2N, plus the quadrature nodes
///   theta_m = (m-1-N) 2 pi / (2N+1),  1 <= m <= 2N+1.
struct TrigBasis {
    int N = 16;

    int function_count() const { return 2 * N; }
    int node_count() const { return 2 * N + 1; }
    static int frequency(int n) { return (n % 2 == 1) ? (n + 1) / 2 : n / 2; }
    double node(int m) const;        // m in [1, 2N+1]
    double eval(int n, double theta) const;  // n in [1, 2N]
    std::vector<double> nodes() const;
};

/// Dense boundary operator in the trig basis.  ND is 2N x 2N on the mean-free
/// subspace; DN is (2N+1) x (2N+1) with a zero first row and column for the
/// constant basis element.
struct BoundaryOpMatrix {
    enum class Kind { ND, DN };
    Kind kind = Kind::ND;
    int N = 16;
    Eigen::MatrixXd entries;
    double noise_level = 0.0;
    uint64_t seed = 0;
    int mesh_level = 0;
};

/// Forward simulation context: mesh + factorized solver for one conductivity.
class ForwardSolver {
public:
    ForwardSolver(const ConductivityImage& sigma, int mesh_level);

    /// Solve the Neumann problem with current pattern phi_n; returns nodal potential.
    std::vector<double> solve_pattern(const TrigBasis& basis, int n) const;

    const NeumannSolver& solver() const { return solver_; }

private:
    std::shared_ptr<const FemMesh> mesh_;
    NeumannSolver solver_;
};

/// Assemble the Neumann-to-Dirichlet matrix R_sigma by Galerkin pairing of the
/// boundary load vectors with the FEM traces; exactly symmetric by construction.
BoundaryOpMatrix assemble_nd(const ConductivityImage& sigma, const TrigBasis& basis, int mesh_level);

/// Relative Gaussian noise: for every current pattern the trace is perturbed at
/// the 2N+1 nodes by eta * N_j * max_j |trace| with independent standard normal
/// draws, then re-projected onto the trig coefficients by node quadrature.
/// eta = 0 returns the input bit-identically.
BoundaryOpMatrix add_noise(const BoundaryOpMatrix& nd, const TrigBasis& basis, double eta, uint64_t seed);

/// DN matrix: inverse of the ND block, bordered by a zero first row and column.
BoundaryOpMatrix nd_to_dn(const BoundaryOpMatrix& nd);

/// ND block recovered from a DN matrix (inverse of the trailing 2N x 2N block).
Eigen::MatrixXd dn_to_nd_block(const BoundaryOpMatrix& dn);

void save_boundary_op(const BoundaryOpMatrix& op, const std::string& bin_path);
BoundaryOpMatrix load_boundary_op(const std::string& bin_path);

}  // namespace eit
