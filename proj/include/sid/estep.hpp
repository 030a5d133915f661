#pragma once

#include <vector>

#include "sid/model.hpp"

namespace sid {

// Defect magnitudes of the discrete forward-backward optimality system at a
// candidate solution. All zero (to roundoff) at the exact minimizer.
struct EStepResiduals {
    double forward = 0.0;      // max_k |state-equation defect|
    double backward = 0.0;     // max over interior k of |adjoint defect|
    double bc_initial = 0.0;   // |x_0 - x0 + Pi0 q(0)|
    double bc_terminal = 0.0;  // |q on the last interval|
};

struct EStepSolution {
    TrajectoryEstimate traj;
    double objective_K = 0.0;
    EStepResiduals residuals;
};

// Gain of the per-interval noise elimination: w_k = gain * defect_k with
// gain = beta (Q^{-1} + beta G'G)^{-1} G'. The defect here excludes the -G w
// term.
Matrix noise_gain(const ModelSpec& spec);

// Unique minimizer over w of (beta/2)|defect - G w|^2 + (1/2) w'Q^{-1}w.
// Equals -Q G' q with q = -beta (defect - G w).
Vector eliminate_noise(const Vector& defect, const ModelSpec& spec);

// Per-interval weight left after eliminating w, computed from the elimination
// gain as beta (I - G * gain). Equals (G Q G' + I/beta)^{-1} by the Woodbury
// identity.
Matrix eliminated_weight(const ModelSpec& spec);

// Exact global minimizer of the convex quadratic K(A,B; x, w) over the node
// states and interval noises: w is eliminated in closed form, the remaining
// SPD block-tridiagonal system in x_0..x_M is solved by block Cholesky, then
// w and q are recovered. Deterministic elimination order.
EStepSolution solve_estep(const DynamicsEstimate& dyn, const Dataset& dataset,
                          const ModelSpec& spec);

// Recomputes the optimality-system defects for a given solution:
//   forward_k  = (x_{k+1}-x_k)/h - A x_k - B v_k + (G Q G' + I/beta) q_k
//   backward_k = -(q_k - q_{k-1})/h - A' q_k + C' R^{-1}(y_k - C x_k)
// with q extended to t=0 by one backward step for the initial condition
// x_0 = x0 - Pi0 q(0), and q at T read off the last interval.
EStepResiduals estep_residuals(const EStepSolution& sol,
                               const DynamicsEstimate& dyn,
                               const Dataset& dataset, const ModelSpec& spec);

}  // namespace sid
