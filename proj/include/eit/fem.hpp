#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "eit/fields.hpp"

namespace eit {

/// Conforming P1 triangulation of the unit disc built by uniform refinement
/// of a 6-triangle fan; boundary vertices are projected onto |z| = 1 after
/// each refinement.  Boundary vertices are indexed in increasing angle order.
struct FemMesh {
    int level = 0;
    std::vector<std::array<double, 2>> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<int> boundary;          // vertex indices, sorted by angle in [-pi, pi)
    std::vector<double> boundary_angle; // angle of each boundary vertex

    int vertex_count() const { return static_cast<int>(vertices.size()); }
};

FemMesh make_disc_mesh(int refinement_level);

/// Factorized Neumann solver for div(sigma grad u) = 0 with the zero-mean
/// boundary constraint enforced by a Lagrange multiplier.  sigma is sampled
/// from the pixel image at triangle centroids (nearest pixel).
class NeumannSolver {
public:
    NeumannSolver(const ConductivityImage& sigma, std::shared_ptr<const FemMesh> mesh);

    /// Solve with Neumann data sigma du/dnu = current(theta) on the boundary.
    /// current must integrate to zero over the boundary; checked to tolerance.
    /// Returns the nodal solution (interior potential).
    std::vector<double> solve(const std::function<double(double)>& current) const;

    /// Boundary trace of a nodal solution evaluated at angle theta by linear
    /// interpolation between adjacent boundary vertices.
    double trace_at(const std::vector<double>& u, double theta) const;

    const FemMesh& mesh() const { return *mesh_; }

private:
    std::shared_ptr<const FemMesh> mesh_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
    std::vector<double> boundary_weight_;  // angle span / 2 per boundary vertex
    int n_ = 0;
};

}  // namespace eit
