#include "sid/fit.hpp"

#include <cmath>
#include <sstream>

#include "sid/mstep.hpp"
#include "sid/objective.hpp"

namespace sid {

std::string to_string(StopReason reason) {
    switch (reason) {
        case StopReason::step_tol: return "step_tol";
        case StopReason::stat_tol: return "stat_tol";
        case StopReason::max_iters: return "max_iters";
    }
    return "unknown";
}

double z_norm(const Iterate& z1, const Iterate& z2, const TimeGrid& grid) {
    const std::size_t M = static_cast<std::size_t>(grid.M);
    if (z1.traj.x.size() != M + 1 || z2.traj.x.size() != M + 1 ||
        z1.traj.w.size() != M || z2.traj.w.size() != M) {
        throw DimensionMismatch("z_norm: trajectory lengths must match grid");
    }
    const double h = grid.h();
    double sq = (z1.dyn.A - z2.dyn.A).squaredNorm() +
                (z1.dyn.B - z2.dyn.B).squaredNorm() +
                (z1.traj.x[0] - z2.traj.x[0]).squaredNorm();
    for (std::size_t k = 0; k < M; ++k) {
        const Vector ddot = ((z1.traj.x[k + 1] - z1.traj.x[k]) -
                             (z2.traj.x[k + 1] - z2.traj.x[k])) /
                            h;
        sq += h * ddot.squaredNorm();
        sq += h * (z1.traj.w[k] - z2.traj.w[k]).squaredNorm();
    }
    return std::sqrt(sq);
}

FitReport fit(const Dataset& dataset, const ModelSpec& spec,
              const FitOptions& options) {
    if (options.max_iters < 1) {
        throw Error("fit: max_iters must be >= 1");
    }

    FitReport report;
    DynamicsEstimate dyn =
        options.warm_start ? *options.warm_start
                           : DynamicsEstimate{spec.A0, spec.B0};

    EStepSolution estep = solve_estep(dyn, dataset, spec);
    Iterate z{dyn, estep.traj};
    double J = evaluate_J(z, dataset, spec);
    report.J_history.push_back(J);

    for (int n = 0; n < options.max_iters; ++n) {
        const DynamicsEstimate dyn_next =
            solve_mstep(z.traj.x, z.traj.w, dataset, spec);
        EStepSolution estep_next = solve_estep(dyn_next, dataset, spec);
        const Iterate z_next{dyn_next, estep_next.traj};
        const double J_next = evaluate_J(z_next, dataset, spec);

        const DescentGap gap = descent_gap(z, z_next, dataset, spec);
        const double step = z_norm(z_next, z, dataset.grid);
        const double mstep_res =
            mstep_stationarity(dyn_next, z_next.traj.x, z_next.traj.q,
                               dataset.v, spec, dataset.grid);
        const EStepResiduals& eres = estep_next.residuals;

        report.iterations = n + 1;
        report.J_history.push_back(J_next);
        report.step_norms.push_back(step);
        report.descent_gap_errors.push_back(std::abs(gap.lhs - gap.rhs));
        report.estep_residual_history.push_back(
            std::max({eres.forward, eres.backward, eres.bc_initial,
                      eres.bc_terminal}));
        report.mstep_residual_history.push_back(mstep_res);

        if (options.check_descent &&
            J_next > J + 1e-9 * (1.0 + std::abs(J))) {
            std::ostringstream msg;
            msg << "J increased at sweep " << n + 1 << ": " << J << " -> "
                << J_next << " (gap lhs=" << gap.lhs << ", rhs=" << gap.rhs
                << ")";
            throw DescentViolation(msg.str());
        }

        z = z_next;
        J = J_next;
        report.final_estimate = dyn_next;
        report.final_traj = z.traj;
        report.final_estep_residuals = eres;
        report.final_mstep_residual = mstep_res;

        const double combined_res =
            std::max({eres.forward, eres.backward, eres.bc_initial,
                      eres.bc_terminal, mstep_res});
        if (step <= options.tol_step) {
            report.converged = true;
            report.stop_reason = StopReason::step_tol;
            return report;
        }
        if (combined_res <= options.tol_stat) {
            report.converged = true;
            report.stop_reason = StopReason::stat_tol;
            return report;
        }
    }
    report.converged = false;
    report.stop_reason = StopReason::max_iters;
    return report;
}

}  // namespace sid
