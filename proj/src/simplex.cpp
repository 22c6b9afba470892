#include "ratm/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace ratm {

namespace {

constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-11;
constexpr double kFeasTol = 1e-8;

enum class var_status : std::uint8_t { basic, at_lower, at_upper };

struct tableau {
    std::size_t m, n_total, n_struct;
    const lp_problem* lp;
    std::vector<double> art_sign;   // +-1 column sign per artificial
    std::vector<double> lower, upper, x;
    std::vector<var_status> status;
    std::vector<std::size_t> basis; // size m
    std::vector<double> binv;      // m x m row-major

    double col(std::size_t r, std::size_t j) const {
        if (j < n_struct) return lp->at(r, j);
        return (j - n_struct == r) ? art_sign[r] : 0.0;
    }
};

void rebuild_binv(tableau& t) {
    const std::size_t m = t.m;
    // Gauss-Jordan inversion of the basis matrix
    std::vector<double> work(m * 2 * m, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t k = 0; k < m; ++k) work[r * 2 * m + k] = t.col(r, t.basis[k]);
        work[r * 2 * m + m + r] = 1.0;
    }
    for (std::size_t p = 0; p < m; ++p) {
        std::size_t best = p;
        for (std::size_t r = p + 1; r < m; ++r)
            if (std::abs(work[r * 2 * m + p]) > std::abs(work[best * 2 * m + p])) best = r;
        if (std::abs(work[best * 2 * m + p]) < kPivotTol)
            throw divergence_error("singular basis in simplex");
        if (best != p)
            for (std::size_t k = 0; k < 2 * m; ++k)
                std::swap(work[p * 2 * m + k], work[best * 2 * m + k]);
        const double inv = 1.0 / work[p * 2 * m + p];
        for (std::size_t k = 0; k < 2 * m; ++k) work[p * 2 * m + k] *= inv;
        for (std::size_t r = 0; r < m; ++r) {
            if (r == p) continue;
            const double f = work[r * 2 * m + p];
            if (f == 0.0) continue;
            for (std::size_t k = 0; k < 2 * m; ++k)
                work[r * 2 * m + k] -= f * work[p * 2 * m + k];
        }
    }
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t k = 0; k < m; ++k) t.binv[r * m + k] = work[r * 2 * m + m + k];
}

void recompute_basic_values(tableau& t) {
    const std::size_t m = t.m;
    std::vector<double> rhs(t.lp->b);
    for (std::size_t j = 0; j < t.n_total; ++j) {
        if (t.status[j] == var_status::basic) continue;
        const double v = t.x[j];
        if (v == 0.0) continue;
        for (std::size_t r = 0; r < m; ++r) {
            const double aij = t.col(r, j);
            if (aij != 0.0) rhs[r] -= aij * v;
        }
    }
    for (std::size_t k = 0; k < m; ++k) {
        double v = 0.0;
        for (std::size_t r = 0; r < m; ++r) v += t.binv[k * m + r] * rhs[r];
        t.x[t.basis[k]] = v;
    }
}

// One simplex phase over the given costs. Returns when no improving column
// remains. `allow_enter(j)` filters candidate entering columns. When `guard`
// is set, only columns with vanishing reduced cost under it may enter, which
// confines the phase to the guard objective's optimal face.
template <typename Allow>
void run_phase(tableau& t, const std::vector<double>& cost, Allow allow_enter,
               const std::vector<double>* guard = nullptr) {
    const std::size_t m = t.m;
    const std::size_t iter_cap = 200 * (t.n_total + m) + 2000;
    const std::size_t bland_after = 20 * (t.n_total + m) + 200;
    std::vector<double> y(m), yg(m), ucol(m);

    for (std::size_t iter = 0;; ++iter) {
        if (iter > iter_cap) throw divergence_error("simplex iteration limit exceeded");
        const bool bland = iter > bland_after;
        if (iter > 0 && iter % 128 == 0) {
            rebuild_binv(t);
            recompute_basic_values(t);
        }

        // simplex multipliers y = c_B * Binv
        for (std::size_t i = 0; i < m; ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k < m; ++k) acc += cost[t.basis[k]] * t.binv[k * m + i];
            y[i] = acc;
        }
        if (guard != nullptr) {
            for (std::size_t i = 0; i < m; ++i) {
                double acc = 0.0;
                for (std::size_t k = 0; k < m; ++k)
                    acc += (*guard)[t.basis[k]] * t.binv[k * m + i];
                yg[i] = acc;
            }
        }

        // pricing
        std::size_t enter = t.n_total;
        double best_score = bland ? 0.0 : kDualTol;
        int enter_dir = 0;
        for (std::size_t j = 0; j < t.n_total; ++j) {
            if (t.status[j] == var_status::basic || !allow_enter(j)) continue;
            double d = cost[j];
            for (std::size_t r = 0; r < m; ++r) {
                const double aij = t.col(r, j);
                if (aij != 0.0) d -= y[r] * aij;
            }
            int dir = 0;
            if (t.status[j] == var_status::at_lower && d < -kDualTol) dir = +1;
            else if (t.status[j] == var_status::at_upper && d > kDualTol) dir = -1;
            if (dir == 0) continue;
            if (guard != nullptr) {
                double dg = (*guard)[j];
                for (std::size_t r = 0; r < m; ++r) {
                    const double aij = t.col(r, j);
                    if (aij != 0.0) dg -= yg[r] * aij;
                }
                if (std::abs(dg) > kDualTol) continue;
            }
            if (bland) { enter = j; enter_dir = dir; break; }
            if (std::abs(d) > best_score) {
                best_score = std::abs(d);
                enter = j;
                enter_dir = dir;
            }
        }
        if (enter == t.n_total) return; // phase optimal

        for (std::size_t r = 0; r < m; ++r) {
            double acc = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                const double aij = t.col(k, enter);
                if (aij != 0.0) acc += t.binv[r * m + k] * aij;
            }
            ucol[r] = acc;
        }

        // ratio test: entering variable moves by delta >= 0 towards its
        // opposite bound; basic variables move by -dir * delta * ucol.
        double delta = t.upper[enter] - t.lower[enter];
        std::size_t leave = m; // m = bound flip
        double leave_pivot = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const double step = enter_dir * ucol[k];
            const std::size_t jb = t.basis[k];
            double limit;
            if (step > kPivotTol) limit = (t.x[jb] - t.lower[jb]) / step;
            else if (step < -kPivotTol) limit = (t.upper[jb] - t.x[jb]) / (-step);
            else continue;
            if (limit < 0.0) limit = 0.0;
            if (limit < delta - 1e-12) {
                delta = limit;
                leave = k;
                leave_pivot = ucol[k];
            } else if (leave != m && limit <= delta + 1e-12) {
                const bool prefer = bland ? t.basis[k] < t.basis[leave]
                                          : std::abs(ucol[k]) > std::abs(leave_pivot);
                if (prefer) {
                    leave = k;
                    leave_pivot = ucol[k];
                }
            }
        }

        // apply the step
        if (delta > 0.0) {
            for (std::size_t k = 0; k < m; ++k)
                if (ucol[k] != 0.0) t.x[t.basis[k]] -= enter_dir * delta * ucol[k];
            t.x[enter] += enter_dir * delta;
        }
        if (leave == m) {
            t.status[enter] = enter_dir > 0 ? var_status::at_upper : var_status::at_lower;
            t.x[enter] = enter_dir > 0 ? t.upper[enter] : t.lower[enter];
            continue;
        }

        const std::size_t jl = t.basis[leave];
        const double step = enter_dir * ucol[leave];
        t.status[jl] = step > 0.0 ? var_status::at_lower : var_status::at_upper;
        t.x[jl] = step > 0.0 ? t.lower[jl] : t.upper[jl];
        t.status[enter] = var_status::basic;
        t.basis[leave] = enter;

        // pivot Binv on ucol[leave]
        const double piv = ucol[leave];
        const double inv = 1.0 / piv;
        for (std::size_t i = 0; i < m; ++i) t.binv[leave * m + i] *= inv;
        for (std::size_t k = 0; k < m; ++k) {
            if (k == leave) continue;
            const double f = ucol[k];
            if (f == 0.0) continue;
            for (std::size_t i = 0; i < m; ++i)
                t.binv[k * m + i] -= f * t.binv[leave * m + i];
        }
    }
}

} // namespace

lp_solution solve_lp(const lp_problem& lp, const std::vector<double>* secondary) {
    const std::size_t m = lp.rows, n = lp.cols;
    if (secondary != nullptr && secondary->size() != n)
        throw std::invalid_argument("secondary cost size mismatch");
    if (lp.a.size() != m * n || lp.b.size() != m || lp.c.size() != n ||
        lp.lower.size() != n || lp.upper.size() != n)
        throw std::invalid_argument("inconsistent LP dimensions");
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(lp.lower[j]) || !std::isfinite(lp.upper[j]))
            throw std::invalid_argument("LP bounds must be finite");
        if (lp.lower[j] > lp.upper[j]) throw feasibility_error("empty variable bound");
    }

    tableau t;
    t.m = m;
    t.n_struct = n;
    t.n_total = n + m;
    t.lp = &lp;
    t.art_sign.assign(m, 1.0);
    t.lower = lp.lower;
    t.upper = lp.upper;
    t.lower.resize(t.n_total, 0.0);
    t.upper.resize(t.n_total, 0.0);
    t.x.assign(t.n_total, 0.0);
    t.status.assign(t.n_total, var_status::at_lower);
    t.basis.resize(m);
    t.binv.assign(m * m, 0.0);

    // structurals start at the bound of smaller magnitude
    for (std::size_t j = 0; j < n; ++j) {
        if (std::abs(lp.upper[j]) < std::abs(lp.lower[j])) {
            t.status[j] = var_status::at_upper;
            t.x[j] = lp.upper[j];
        } else {
            t.x[j] = lp.lower[j];
        }
    }

    // artificial basis covering the residual
    std::vector<double> resid(lp.b);
    for (std::size_t j = 0; j < n; ++j) {
        if (t.x[j] == 0.0) continue;
        for (std::size_t r = 0; r < m; ++r) {
            const double aij = lp.at(r, j);
            if (aij != 0.0) resid[r] -= aij * t.x[j];
        }
    }
    double infeas = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        t.art_sign[r] = resid[r] >= 0.0 ? 1.0 : -1.0;
        const std::size_t ja = n + r;
        t.basis[r] = ja;
        t.status[ja] = var_status::basic;
        t.x[ja] = std::abs(resid[r]);
        t.upper[ja] = std::abs(resid[r]) + 1.0;
        t.binv[r * m + r] = t.art_sign[r];
        infeas += std::abs(resid[r]);
    }

    if (infeas > kFeasTol) {
        std::vector<double> phase1(t.n_total, 0.0);
        for (std::size_t r = 0; r < m; ++r) phase1[n + r] = 1.0;
        run_phase(t, phase1, [](std::size_t) { return true; });
        double art_mass = 0.0;
        for (std::size_t r = 0; r < m; ++r) art_mass += t.x[n + r];
        if (art_mass > kFeasTol) throw feasibility_error("LP infeasible");
    }
    // pin artificials at zero for phase 2
    for (std::size_t r = 0; r < m; ++r) {
        t.upper[n + r] = 0.0;
        if (t.status[n + r] != var_status::basic) t.x[n + r] = 0.0;
    }

    std::vector<double> phase2(t.n_total, 0.0);
    std::copy(lp.c.begin(), lp.c.end(), phase2.begin());
    run_phase(t, phase2, [n](std::size_t j) { return j < n; });

    if (secondary != nullptr) {
        std::vector<double> phase3(t.n_total, 0.0);
        std::copy(secondary->begin(), secondary->end(), phase3.begin());
        run_phase(t, phase3, [n](std::size_t j) { return j < n; }, &phase2);
    }

    lp_solution sol;
    sol.x.assign(t.x.begin(), t.x.begin() + static_cast<std::ptrdiff_t>(n));
    sol.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) sol.objective += lp.c[j] * sol.x[j];
    return sol;
}

} // namespace ratm
