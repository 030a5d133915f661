#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sid/estep.hpp"
#include "sid/model.hpp"

namespace sid {

struct FitOptions {
    int max_iters = 200;
    double tol_step = 1e-8;  // on |Z^{n+1} - Z^n|_Z
    double tol_stat = 1e-6;  // on combined stationarity residuals
    bool check_descent = true;
    // Initialization defaults to the prior (A0, B0).
    std::optional<DynamicsEstimate> warm_start;
};

enum class StopReason { step_tol, stat_tol, max_iters };

std::string to_string(StopReason reason);

// Outcome of a fit. J_history holds J(Z^0)..J(Z^n) (iterations+1 entries);
// step_norms and descent_gap_errors hold one entry per sweep.
struct FitReport {
    int iterations = 0;
    std::vector<double> J_history;
    std::vector<double> step_norms;
    std::vector<double> descent_gap_errors;
    std::vector<double> estep_residual_history;  // max defect field per sweep
    std::vector<double> mstep_residual_history;
    DynamicsEstimate final_estimate;
    TrajectoryEstimate final_traj;
    EStepResiduals final_estep_residuals;
    double final_mstep_residual = 0.0;
    bool converged = false;
    StopReason stop_reason = StopReason::max_iters;
};

// Iterate norm of the trajectory space:
//   |Z1-Z2|^2 = |dA|_F^2 + |dB|_F^2 + |dx_0|^2
//             + h sum_k |d(dx/dt)_k|^2 + h sum_k |dw_k|^2
// with forward differences (x_{k+1}-x_k)/h on intervals.
double z_norm(const Iterate& z1, const Iterate& z2, const TimeGrid& grid);

// Alternating minimization from (A0, B0): each sweep runs one exact M-step on
// the current trajectory followed by one exact E-step at the new (A, B).
// Records J, step norms and the descent-identity error per sweep; stops on
// step tolerance, stationarity tolerance, or max_iters. Throws
// DescentViolation if J increases by more than 1e-9 (1 + |J|) while
// check_descent is on.
FitReport fit(const Dataset& dataset, const ModelSpec& spec,
              const FitOptions& options = {});

}  // namespace sid
