#pragma once

#include "pevcc/problem.hpp"

#include <string>
#include <vector>

namespace pevcc {

// Candidate primal-dual point of the centralized problem. Bound multipliers
// (mu_plus for x <= upper, mu_minus for x >= lower) are reconstructed from
// stationarity at clamped coordinates rather than iterated.
struct CentralSolution {
    std::vector<Vec> x_star;
    Vec load_star;
    Vec lambda_star;
    std::vector<Vec> mu_star;  // one entry per row of A
    std::vector<Vec> mu_plus_star;
    std::vector<Vec> mu_minus_star;
    double objective_star = 0.0;
    int iterations = 0;
    std::string method;
};

struct ResidualReport {
    double stationarity_load = 0.0;      // 2 c1 L + c2 - lambda
    double stationarity_schedule = 0.0;  // lambda + A'mu + mu_plus - mu_minus
    double load_balance = 0.0;           // L - sum_v x_v
    double primal_energy = 0.0;          // max(0, A x - b)
    double primal_bounds = 0.0;          // outside [lower, upper]
    double dual_negativity = 0.0;        // max(0, -mu), also for bound multipliers
    double complementarity = 0.0;        // |mu_i (A x - b)_i|, |mu_plus (x - upper)|, |mu_minus (lower - x)|

    double max() const;
};

// A coordinate within this distance of a bound counts as clamped there.
inline constexpr double kActiveBoundTolerance = 1e-7;

// Fills mu_plus_star / mu_minus_star from g = lambda + A'mu at clamped coordinates.
void recover_bound_multipliers(const Problem& problem, CentralSolution& sol,
                               double active_tol = kActiveBoundTolerance);

ResidualReport kkt_residual(const Problem& problem, const CentralSolution& candidate);

// f(L) + lambda'(sum x - L) + sum mu'(A x - b) + mu_plus'(x - upper) + mu_minus'(lower - x)
double lagrangian_value(const Problem& problem, const CentralSolution& sol);

// Lagrange dual function at (lambda, mu, mu_plus, mu_minus), assuming the
// schedule stationarity holds so the x-minimisation is bounded.
double dual_value(const Problem& problem, const CentralSolution& sol);

struct CentralOptions {
    double tolerance = 1e-10;  // scaled primal/dual/complementarity target
    int max_iterations = 200;
};

// Primal-dual interior point method (Mehrotra predictor-corrector) on the
// structure "separable vehicle blocks + one coupling equality". Each Newton step
// factors one small matrix per vehicle plus a T x T Schur complement.
CentralSolution solve_centralized(const Problem& problem, const CentralOptions& options = {});

struct BlockDescentOptions {
    double tolerance = 1e-13;  // max schedule change over one sweep
    int max_sweeps = 200000;
};

// Gauss-Seidel over vehicles, each block solved exactly by the dual active-set QP.
// Independent of solve_centralized; used to cross-validate f*.
CentralSolution solve_centralized_block_descent(const Problem& problem, const BlockDescentOptions& options = {});

}  // namespace pevcc
