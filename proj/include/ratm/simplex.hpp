#pragma once

#include <cstddef>
#include <vector>

#include "ratm/exceptions.hpp"

namespace ratm {

/**
 * Dense linear program in computational form:
 *
 *   min c^T x   subject to   A x = b,   lower <= x <= upper,
 *
 * with all bounds finite. Inequalities are expressed by the caller through
 * slack columns.
 */
struct lp_problem {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a; // row-major, rows x cols
    std::vector<double> b;
    std::vector<double> c;
    std::vector<double> lower;
    std::vector<double> upper;

    double& at(std::size_t r, std::size_t j) { return a[r * cols + j]; }
    double at(std::size_t r, std::size_t j) const { return a[r * cols + j]; }
};

struct lp_solution {
    std::vector<double> x;
    double objective = 0.0;
};

/**
 * Two-phase primal simplex with bounded variables and an explicit dense
 * basis inverse. Dantzig pricing with a Bland fallback against cycling.
 * Throws feasibility_error when no feasible point exists and
 * divergence_error if the iteration limit is exceeded.
 *
 * When `secondary` is given (one cost per column), a third phase minimizes
 * it over the optimal face of the primary objective: only columns whose
 * primary reduced cost vanishes may enter, so the primary optimum is
 * preserved exactly.
 */
lp_solution solve_lp(const lp_problem& lp, const std::vector<double>* secondary = nullptr);

} // namespace ratm
