#include "sid/mstep.hpp"

#include <Eigen/Cholesky>
#include <sstream>

namespace sid {

namespace {

void check_lengths(std::size_t x_len, std::size_t other_len, std::size_t M,
                   const char* where) {
    if (x_len != M + 1 || other_len != M) {
        std::ostringstream msg;
        msg << where << ": expected x:" << M + 1 << " and per-interval:" << M
            << ", got x:" << x_len << " and " << other_len;
        throw DimensionMismatch(msg.str());
    }
}

}  // namespace

GramSystem assemble_gram(const std::vector<Vector>& x,
                         const std::vector<Vector>& w,
                         const std::vector<Vector>& v, const ModelSpec& spec,
                         const TimeGrid& grid) {
    const auto& [N, d, m, p] = spec.dims;
    const std::size_t M = static_cast<std::size_t>(grid.M);
    check_lengths(x.size(), w.size(), M, "assemble_gram");
    if (v.size() != M) {
        throw DimensionMismatch("assemble_gram: control length must be M");
    }
    const double h = grid.h();

    GramSystem sys;
    sys.S = Matrix::Zero(N + d, N + d);
    sys.RHS = Matrix::Zero(N, N + d);
    Vector z(N + d);
    for (std::size_t k = 0; k < M; ++k) {
        z.head(N) = x[k];
        z.tail(d) = v[k];
        const Vector g = (x[k + 1] - x[k]) / h - spec.G * w[k];
        sys.S.noalias() += h * z * z.transpose();
        sys.RHS.noalias() += h * g * z.transpose();
    }
    return sys;
}

DynamicsEstimate solve_mstep(const std::vector<Vector>& x,
                             const std::vector<Vector>& w,
                             const Dataset& dataset, const ModelSpec& spec) {
    const auto& [N, d, m, p] = spec.dims;
    const GramSystem sys =
        assemble_gram(x, w, dataset.v, spec, dataset.grid);

    Matrix Theta0(N, N + d);
    Theta0.leftCols(N) = spec.A0;
    Theta0.rightCols(d) = spec.B0;

    const Matrix lhs = spec.alpha * Matrix::Identity(N + d, N + d) +
                       spec.beta * sys.S;
    const auto llt = lhs.llt();
    if (llt.info() != Eigen::Success) {
        throw SingularSystem("M-step normal matrix is not SPD");
    }
    // Theta (alpha I + beta S) = alpha Theta0 + beta RHS, solved transposed.
    const Matrix rhs_t =
        (spec.alpha * Theta0 + spec.beta * sys.RHS).transpose();
    const Matrix Theta = llt.solve(rhs_t).transpose();

    DynamicsEstimate dyn;
    dyn.A = Theta.leftCols(N);
    dyn.B = Theta.rightCols(d);
    return dyn;
}

double mstep_stationarity(const DynamicsEstimate& dyn,
                          const std::vector<Vector>& x,
                          const std::vector<Vector>& q,
                          const std::vector<Vector>& v, const ModelSpec& spec,
                          const TimeGrid& grid) {
    const std::size_t M = static_cast<std::size_t>(grid.M);
    check_lengths(x.size(), q.size(), M, "mstep_stationarity");
    if (v.size() != M) {
        throw DimensionMismatch("mstep_stationarity: control length must be M");
    }
    const double h = grid.h();
    Matrix resA = spec.alpha * (dyn.A - spec.A0);
    Matrix resB = spec.alpha * (dyn.B - spec.B0);
    for (std::size_t k = 0; k < M; ++k) {
        resA.noalias() += h * q[k] * x[k].transpose();
        resB.noalias() += h * q[k] * v[k].transpose();
    }
    return resA.norm() + resB.norm();
}

}  // namespace sid
