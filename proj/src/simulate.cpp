#include "sid/simulate.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace sid {

ControlKind control_kind_from_string(const std::string& s) {
    if (s == "zero") return ControlKind::zero;
    if (s == "step") return ControlKind::step;
    if (s == "sine") return ControlKind::sine;
    if (s == "multisine") return ControlKind::multisine;
    throw UnknownKind("unknown control kind '" + s + "'");
}

std::string to_string(ControlKind kind) {
    switch (kind) {
        case ControlKind::zero: return "zero";
        case ControlKind::step: return "step";
        case ControlKind::sine: return "sine";
        case ControlKind::multisine: return "multisine";
    }
    throw UnknownKind("invalid control kind value");
}

std::vector<Vector> make_control(ControlKind kind, const ControlParams& params,
                                 const TimeGrid& grid, int d) {
    if (!(grid.T > 0.0) || grid.M < 1) {
        throw InvalidGrid("make_control requires a valid grid");
    }
    const int M = grid.M;
    std::vector<Vector> v(static_cast<std::size_t>(M));
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (int k = 0; k < M; ++k) {
        const double t = grid.node(k);
        double value = 0.0;
        switch (kind) {
            case ControlKind::zero:
                value = 0.0;
                break;
            case ControlKind::step:
                value = params.amp;
                break;
            case ControlKind::sine:
                value = params.amp * std::sin(two_pi * params.freq * t);
                break;
            case ControlKind::multisine:
                for (const auto& [amp, freq] : params.components) {
                    value += amp * std::sin(two_pi * freq * t);
                }
                break;
            default:
                throw UnknownKind("invalid control kind value");
        }
        v[static_cast<std::size_t>(k)] = Vector::Constant(d, value);
    }
    return v;
}

SimResult simulate_sde(const Matrix& A_true, const Matrix& B_true,
                       const ModelSpec& spec, const TimeGrid& grid,
                       const std::vector<Vector>& v, std::uint64_t seed,
                       double noise_scale) {
    const auto& [N, d, m, p] = spec.dims;
    if (A_true.rows() != N || A_true.cols() != N) {
        throw DimensionMismatch("A_true must be NxN");
    }
    if (B_true.rows() != N || B_true.cols() != d) {
        throw DimensionMismatch("B_true must be Nxd");
    }
    const int M = grid.M;
    if (static_cast<int>(v.size()) != M) {
        std::ostringstream msg;
        msg << "control has " << v.size() << " entries, expected " << M;
        throw DimensionMismatch(msg.str());
    }
    const double h = grid.h();
    const double sqrt_h = std::sqrt(h);

    // Cholesky factors for correlated draws.
    const Matrix Lq = spec.Q.llt().matrixL();
    const Matrix Lr = spec.R.llt().matrixL();
    const Matrix Lpi = spec.Pi0.llt().matrixL();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto draw = [&](int n) {
        Vector z(n);
        for (int i = 0; i < n; ++i) z[i] = gauss(rng);
        return z;
    };

    SimResult res;
    res.seed = seed;
    res.x_true.resize(static_cast<std::size_t>(M) + 1);
    res.w_true.resize(static_cast<std::size_t>(M));
    res.dataset.grid = grid;
    res.dataset.v = v;
    res.dataset.y.resize(static_cast<std::size_t>(M));

    res.x_true[0] = spec.x0 + noise_scale * (Lpi * draw(N));
    for (int k = 0; k < M; ++k) {
        const Vector& xk = res.x_true[static_cast<std::size_t>(k)];
        // Rate observation of x at the interval left endpoint; variance R/h so
        // integrated increments have covariance h R.
        res.dataset.y[static_cast<std::size_t>(k)] =
            spec.C * xk + (noise_scale / sqrt_h) * (Lr * draw(p));
        // dW_k ~ N(0, noise_scale^2 h Q); stored as the rate dW_k / h.
        const Vector dW = (noise_scale * sqrt_h) * (Lq * draw(m));
        res.w_true[static_cast<std::size_t>(k)] = dW / h;
        res.x_true[static_cast<std::size_t>(k) + 1] =
            xk + h * (A_true * xk + B_true * v[static_cast<std::size_t>(k)]) +
            spec.G * dW;
    }
    return res;
}

}  // namespace sid
