#pragma once

// Independent reference computations for the test suites. Nothing here calls the
// library propagators or closed-form state builders.

#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "cqed/cqed.hpp"

namespace oracle {

using cqed::cplx;
using cqed::DenseMatrix;
using cqed::I;
using cqed::SparseMatrix;
using cqed::Vector;

/// exp(-iHt)v from the eigendecomposition of dense Hermitian H.
inline Vector expm_eig(const SparseMatrix& h, const Vector& v, double t) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es{DenseMatrix(h)};
    const auto& u = es.eigenvectors();
    Vector c = u.adjoint() * v;
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::exp(-I * (es.eigenvalues()(k) * t));
    return u * c;
}

/// Diagonalises H once; apply(v, t) is then exp(-iHt)v for any t.
class EigenPropagator {
public:
    explicit EigenPropagator(const SparseMatrix& h) : es_(DenseMatrix(h)) {}

    Vector apply(const Vector& v, double t) const {
        Vector c = es_.eigenvectors().adjoint() * v;
        for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::exp(-I * (es_.eigenvalues()(k) * t));
        return es_.eigenvectors() * c;
    }

private:
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es_;
};

/// exp(-iHt)v via the Padé/scaling-and-squaring matrix exponential.
inline Vector expm_pade(const SparseMatrix& h, const Vector& v, double t) {
    DenseMatrix m = DenseMatrix(h) * (-I * t);
    return m.exp() * v;
}

/// Fixed-step classical RK4 for i dψ/dt = H(t)ψ.
inline Vector rk4(const std::function<SparseMatrix(double)>& h, Vector y, double t0, double t1, long steps) {
    const double dt = (t1 - t0) / static_cast<double>(steps);
    auto f = [&](double t, const Vector& v) -> Vector { return -I * (h(t) * v); };
    for (long s = 0; s < steps; ++s) {
        const double t = t0 + dt * static_cast<double>(s);
        const Vector k1 = f(t, y);
        const Vector k2 = f(t + dt / 2, y + dt / 2 * k1);
        const Vector k3 = f(t + dt / 2, y + dt / 2 * k2);
        const Vector k4 = f(t + dt, y + dt * k3);
        y += dt / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return y;
}

/// Truncated bosonic annihilation operator on n_max+1 levels, built by hand.
inline DenseMatrix annihilation(int n_max) {
    DenseMatrix a = DenseMatrix::Zero(n_max + 1, n_max + 1);
    for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

/// Full-space operator atom ⊗ A ⊗ B by Kronecker products (atom slowest).
inline DenseMatrix kron3(const DenseMatrix& atom, const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix ab = Eigen::kroneckerProduct(a, b).eval();
    return Eigen::kroneckerProduct(atom, ab).eval();
}

/// Minimum of ⟨X_θ²⟩ - ⟨X_θ⟩² by a brute-force scan of θ on [0, π), with X_θ
/// assembled as a dense operator. Returns (variance, angle).
inline std::pair<double, double> scan_min_variance(const cqed::StateVector& psi, cqed::Mode mode, int steps = 4000) {
    const DenseMatrix a = DenseMatrix(cqed::ladder_matrix(psi.space(), mode, false));
    const Vector& v = psi.amplitudes();
    const Vector av = a * v;
    const Vector adv = a.adjoint() * v;
    const Vector aav = a * av;
    const Vector adadv = a.adjoint() * adv;
    const Vector adav = a.adjoint() * av;
    const Vector aadv = a * adv;
    const cplx ea = v.dot(av), ead = v.dot(adv), eaa = v.dot(aav), eadad = v.dot(adadv), eada = v.dot(adav),
               eaad = v.dot(aadv);
    double best = 1e300, best_angle = 0.0;
    for (int k = 0; k < steps; ++k) {
        const double th = cqed::kPi * k / steps;
        const cplx em = std::exp(-I * th), ep = std::exp(I * th);
        const double second = 0.25 * (eaa * em * em + eadad * ep * ep + eada + eaad).real();
        const double first = 0.5 * (ea * em + ead * ep).real();
        const double var = second - first * first;
        if (var < best) {
            best = var;
            best_angle = th;
        }
    }
    return {best, best_angle};
}

/// e^{-|α|²/2} α^n / √n!, not renormalised.
inline cplx coherent_amplitude(cplx alpha, int n) {
    cplx c = std::exp(-std::norm(alpha) / 2.0);
    for (int k = 1; k <= n; ++k) c *= alpha / std::sqrt(static_cast<double>(k));
    return c;
}

inline cqed::SystemParams ref_ladder(double omega_mag, double delta_cap) {
    cqed::SystemParams p;
    p.lambda_a = 3e5;
    p.lambda_b = 3e5;
    p.omega_mag = omega_mag;
    p.delta_cap = delta_cap;
    p.phi = cqed::kPi / 2;
    p.omega0 = 3e11;
    p.omega_i = 0.0;
    p.configuration = cqed::Configuration::ladder;
    return p;
}

inline cqed::SystemParams ref_lambda(double omega_mag, double delta_cap) {
    cqed::SystemParams p = ref_ladder(omega_mag, delta_cap);
    p.configuration = cqed::Configuration::lambda;
    p.omega_i = 6e11;
    return p;
}

inline std::mt19937_64& rng() {
    static std::mt19937_64 g(20240611);
    return g;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

inline cplx random_complex(double scale) { return {uniform(-scale, scale), uniform(-scale, scale)}; }

}  // namespace oracle
