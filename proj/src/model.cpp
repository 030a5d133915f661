#include "sid/model.hpp"

#include <Eigen/Eigenvalues>
#include <sstream>

namespace sid {

namespace {

void check_shape(const Matrix& X, int rows, int cols, const char* name) {
    if (X.rows() != rows || X.cols() != cols) {
        std::ostringstream msg;
        msg << name << " has shape " << X.rows() << "x" << X.cols()
            << ", expected " << rows << "x" << cols;
        throw DimensionMismatch(msg.str());
    }
}

// Symmetrize when the asymmetry is roundoff-level, reject otherwise, then
// require all eigenvalues strictly positive relative to the spectral radius.
Matrix check_spd(const Matrix& X, const char* name) {
    const double scale = X.cwiseAbs().maxCoeff();
    const double asym = (X - X.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * std::max(scale, 1.0)) {
        throw NotSPD(name, std::numeric_limits<double>::quiet_NaN());
    }
    Matrix S = 0.5 * (X + X.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(S, Eigen::EigenvaluesOnly);
    const double min_eig = eig.eigenvalues().minCoeff();
    const double max_abs = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (!(min_eig > 1e-12 * max_abs)) {
        throw NotSPD(name, min_eig);
    }
    return S;
}

}  // namespace

ModelSpec validate_spec(const ModelSpec& spec) {
    const auto& [N, d, m, p] = spec.dims;
    if (N < 1 || d < 1 || m < 1 || p < 1) {
        std::ostringstream msg;
        msg << "dims must be strictly positive, got N=" << N << " d=" << d
            << " m=" << m << " p=" << p;
        throw DimensionMismatch(msg.str());
    }
    check_shape(spec.C, p, N, "C");
    check_shape(spec.G, N, m, "G");
    check_shape(spec.Q, m, m, "Q");
    check_shape(spec.R, p, p, "R");
    check_shape(spec.Pi0, N, N, "Pi0");
    if (spec.x0.size() != N) {
        std::ostringstream msg;
        msg << "x0 has length " << spec.x0.size() << ", expected " << N;
        throw DimensionMismatch(msg.str());
    }
    check_shape(spec.A0, N, N, "A0");
    check_shape(spec.B0, N, d, "B0");
    if (!(spec.alpha > 0.0)) {
        throw NonPositiveWeight("alpha must be > 0, got " +
                                std::to_string(spec.alpha));
    }
    if (!(spec.beta > 0.0)) {
        throw NonPositiveWeight("beta must be > 0, got " +
                                std::to_string(spec.beta));
    }
    ModelSpec out = spec;
    out.Q = check_spd(spec.Q, "Q");
    out.R = check_spd(spec.R, "R");
    out.Pi0 = check_spd(spec.Pi0, "Pi0");
    return out;
}

TimeGrid make_grid(double T, int M) {
    if (!(T > 0.0) || M < 1) {
        std::ostringstream msg;
        msg << "invalid grid: T=" << T << ", M=" << M;
        throw InvalidGrid(msg.str());
    }
    return TimeGrid{T, M};
}

}  // namespace sid
