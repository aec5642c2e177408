#pragma once

#include <random>

#include "quadsafe/qp.hpp"

namespace quadsafe::verify {

// Random problem of the given dimension with up to max_rows rows. Every row is
// satisfied on a ball of radius `margin` inside the box, so the problem is
// feasible with room for a grid to land inside.
QpProblem random_feasible_qp(std::mt19937_64& rng, int dim, int max_rows = 4, double margin = 0.05);

// Brute-force minimizer of 0.5 ||u - u_hat||^2. In one dimension the box is
// scanned on a grid of `step`. In two dimensions each coordinate is resolved
// on its own grid pass; along every grid line the feasible segment is an
// interval intersection, and the best point on it is a clamp.
QpVector grid_minimizer(const QpProblem& p, double step = 1e-3);

}  // namespace quadsafe::verify
