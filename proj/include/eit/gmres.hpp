#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace eit {

struct GmresResult {
    bool converged = false;
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Full (unrestarted) GMRES with Givens rotations for real linear operators.
/// Used for the real-linear systems that arise after splitting conjugating
/// operators into Re/Im blocks.  x is both the initial guess and the output.
GmresResult gmres(std::size_t n,
                  const std::function<void(const std::vector<double>&, std::vector<double>&)>& apply,
                  const std::vector<double>& rhs,
                  std::vector<double>& x,
                  double tol,
                  int max_iter);

}  // namespace eit
