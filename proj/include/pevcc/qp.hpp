#pragma once

#include "pevcc/fleet.hpp"

namespace pevcc {

// Strictly convex dense QP
//   min 1/2 x'Hx + g'x   s.t.  E x = e,  C x <= d
// solved by the Goldfarb-Idnani dual active-set method. Multipliers satisfy
//   H x + g + E'y + C'z = 0,  z >= 0,  z_i (C x - d)_i = 0.
struct QpResult {
    Vec x;
    Vec eq_multipliers;    // y
    Vec ineq_multipliers;  // z
    double objective = 0.0;
    int iterations = 0;
    std::vector<int> active;  // indices of active inequality rows
};

QpResult solve_dense_qp(const Mat& hessian, const Vec& linear, const Mat& eq_rows, const Vec& eq_rhs,
                        const Mat& ineq_rows, const Vec& ineq_rhs, int max_iterations = 0);

}  // namespace pevcc
