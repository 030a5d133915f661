#pragma once

#include <vector>

#include "sid/model.hpp"

namespace sid {

// Normal-equation data of the ridge-regularized regression in (A, B), with
// stacked regressor z_k = [x_k; v_k]:
//   S   = h sum_k z_k z_k'                      (N+d) x (N+d), symmetric PSD
//   RHS = h sum_k ((x_{k+1}-x_k)/h - G w_k) z_k'    N x (N+d)
struct GramSystem {
    Matrix S;
    Matrix RHS;
};

GramSystem assemble_gram(const std::vector<Vector>& x,
                         const std::vector<Vector>& w,
                         const std::vector<Vector>& v, const ModelSpec& spec,
                         const TimeGrid& grid);

// Unique minimizer of the convex quadratic L(A,B; x, w): the stacked unknown
// Theta = [A B] solves Theta (alpha I + beta S) = alpha [A0 B0] + beta RHS,
// via one SPD factorization.
DynamicsEstimate solve_mstep(const std::vector<Vector>& x,
                             const std::vector<Vector>& w,
                             const Dataset& dataset, const ModelSpec& spec);

// Stationarity residual of the identification step as a rank-one sum:
//   |alpha (A - A0) + h sum_k q_k x_k'|_F + |alpha (B - B0) + h sum_k q_k v_k'|_F.
double mstep_stationarity(const DynamicsEstimate& dyn,
                          const std::vector<Vector>& x,
                          const std::vector<Vector>& q,
                          const std::vector<Vector>& v, const ModelSpec& spec,
                          const TimeGrid& grid);

}  // namespace sid
