#pragma once

// Closed-form states and figures of merit, plus estimators that measure the
// same quantities on numerically evolved states.
//
// Quadratures follow x = (a + a†)/2, p = -i(a - a†)/2, so the vacuum variance is 1/4.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "cqed/fockspace.hpp"

namespace cqed {

struct QuadratureSpec {
    Mode mode = Mode::a;
    /// 0 → x, π/2 → p
    double angle = 0.0;
};

struct MeritReport {
    std::optional<double> epr_sum_variance;
    std::optional<double> epr_quality;
    std::optional<double> squeeze_variance;
    std::optional<double> squeeze_factor_r;
    std::optional<cplx> overlap;
};

struct ModeMoments {
    cplx a;       // <a>
    cplx a2;      // <a²>
    double n;     // <a†a>
    double n_up;  // <aa†>, differs from n+1 only at the cutoff
};

inline ModeMoments mode_moments(const StateVector& psi, Mode mode) {
    const SparseMatrix a = ladder_matrix(psi.space(), mode, false);
    const Vector& v = psi.amplitudes();
    const Vector av = a * v;
    const Vector a2v = a * av;
    const Vector adv = SparseMatrix(a.adjoint()) * v;
    return {v.dot(av), v.dot(a2v), av.squaredNorm(), adv.squaredNorm()};
}

/// ⟨X_θ²⟩ - ⟨X_θ⟩², X_θ = (a e^{-iθ} + a† e^{iθ})/2.
inline double quadrature_variance(const StateVector& psi, const QuadratureSpec& q) {
    const ModeMoments m = mode_moments(psi, q.mode);
    const cplx rot = std::exp(-2.0 * I * q.angle);
    const double second = 0.25 * (2.0 * (m.a2 * rot).real() + m.n + m.n_up);
    const double first = 0.5 * 2.0 * (m.a * std::exp(-I * q.angle)).real();
    return second - first * first;
}

struct OptimalQuadrature {
    double variance;
    double angle;  // in [0, π)
};

/// Minimum of quadrature_variance over θ, in closed form.
inline OptimalQuadrature minimal_quadrature_variance(const StateVector& psi, Mode mode) {
    const ModeMoments m = mode_moments(psi, mode);
    const cplx c = m.a2 - m.a * m.a;
    const double base = m.n + m.n_up - 2.0 * std::norm(m.a);
    const double var = 0.25 * (base - 2.0 * std::abs(c));
    double angle = 0.5 * (std::arg(c) + kPi);
    angle = std::fmod(angle, kPi);
    if (angle < 0) angle += kPi;
    return {var, angle};
}

/// Difference of two squeezing angles reduced to [0, π/2].
inline double angle_separation(double a, double b) {
    double d = std::fmod(std::abs(a - b), kPi);
    return std::min(d, kPi - d);
}

/// 1 - variance/(1/4), clipped to [0, 1].
inline double squeezing_percent(double variance) {
    if (!(variance > 0)) throw Error("squeezing_percent: variance must be > 0");
    return std::clamp(1.0 - 4.0 * variance, 0.0, 1.0);
}

/// r such that the variance equals e^{-2r}/4.
inline double squeeze_factor_from_variance(double variance) {
    if (!(variance > 0)) throw Error("squeeze_factor_from_variance: variance must be > 0");
    return -0.5 * std::log(4.0 * variance);
}

inline double epr_quality(double r_eff) {
    if (r_eff < 0) throw Error("epr_quality: r_eff must be >= 0");
    return -std::expm1(-2.0 * r_eff);
}

/// ⟨(x_a - x_b)²⟩ + ⟨(p_a + p_b)²⟩; with mean_subtracted the squared means are removed.
inline double epr_sum_variance(const StateVector& psi, bool mean_subtracted = false) {
    const HilbertSpace& s = psi.space();
    if (!s.has_mode_b()) throw DimensionError("epr_sum_variance requires a two-mode state");
    const SparseMatrix a = ladder_matrix(s, Mode::a, false), ad = ladder_matrix(s, Mode::a, true);
    const SparseMatrix b = ladder_matrix(s, Mode::b, false), bd = ladder_matrix(s, Mode::b, true);
    const SparseMatrix x = 0.5 * (SparseMatrix(a + ad) - SparseMatrix(b + bd));
    const SparseMatrix p = (-0.5 * I) * (SparseMatrix(a - ad) + SparseMatrix(b - bd));
    const Vector& v = psi.amplitudes();
    const Vector xv = x * v, pv = p * v;
    double out = xv.squaredNorm() + pv.squaredNorm();
    if (mean_subtracted) {
        const double mx = v.dot(xv).real(), mp = v.dot(pv).real();
        out -= mx * mx + mp * mp;
    }
    return out;
}

/// Sum variance with mode b's quadratures rotated by the best local-oscillator phase θ:
/// (⟨a†a + aa†⟩ + ⟨b†b + bb†⟩)/2 - 2|⟨ab⟩|, with the truncated ladder operators so it matches
/// epr_sum_variance at that θ. Equals e^{-2r} for a two-mode squeezed vacuum of any pair phase.
inline double optimal_epr_sum_variance(const StateVector& psi) {
    const HilbertSpace& s = psi.space();
    if (!s.has_mode_b()) throw DimensionError("optimal_epr_sum_variance requires a two-mode state");
    const SparseMatrix a = ladder_matrix(s, Mode::a, false), ad = ladder_matrix(s, Mode::a, true);
    const SparseMatrix b = ladder_matrix(s, Mode::b, false), bd = ladder_matrix(s, Mode::b, true);
    const Vector& v = psi.amplitudes();
    const Vector bv = b * v;
    const Vector abv = a * bv;
    const double quad = (a * v).squaredNorm() + (ad * v).squaredNorm() + bv.squaredNorm() + (bd * v).squaredNorm();
    return 0.5 * quad - 2.0 * std::abs(v.dot(abv));
}

inline double fidelity(const StateVector& s1, const StateVector& s2) { return std::norm(inner(s1, s2)); }

/// Smallest n_max with tanh(r)^(n_max+1) <= 1e-8.
inline int two_mode_cutoff(double r_eff) {
    const double t = std::tanh(std::abs(r_eff));
    if (t == 0.0) return 1;
    const int n = static_cast<int>(std::ceil(std::log(1e-8) / std::log(t) - 1.0 - 1e-12));
    return std::max(1, n);
}

namespace detail {

inline void require_two_mode_cutoff(double r_eff, int n_max) {
    if (std::pow(std::tanh(std::abs(r_eff)), n_max + 1) > 1e-8)
        throw CutoffError("two-mode squeezed vacuum truncation too coarse", two_mode_cutoff(r_eff));
}

inline StateVector diagonal_pair_state(const HilbertSpace& space, const AtomicVector& atom, const Vector& c) {
    Vector psi = Vector::Zero(space.dimension());
    const int n_max = std::min(space.n_max_a(), *space.n_max_b());
    for (int k = 0; k < 3; ++k)
        for (int n = 0; n <= n_max; ++n) psi(space.index(static_cast<Level>(k), n, n)) = atom(k) * c(n);
    return StateVector::normalized(space, std::move(psi));
}

}  // namespace detail

/// Σ_n (±e^{iθ} tanh r)^n / cosh r |n,n⟩ on a two-mode space with cutoffs n_max, renormalised.
/// θ = `phase` is the argument of the squeeze parameter (0 for ab coupling ξ = i|ξ|).
inline StateVector two_mode_squeezed_vacuum(double r_eff, Sign sign, int n_max,
                                            const AtomicVector& atom = atomic_basis(Level::i), double phase = 0.0) {
    detail::require_two_mode_cutoff(r_eff, n_max);
    const HilbertSpace space = HilbertSpace::two_mode(n_max, n_max);
    const cplx t = sign_value(sign) * std::exp(I * phase) * std::tanh(r_eff);
    Vector c(n_max + 1);
    c(0) = 1.0 / std::cosh(r_eff);
    for (int n = 1; n <= n_max; ++n) c(n) = c(n - 1) * t;
    return detail::diagonal_pair_state(space, atom, c);
}

enum class Parity { even, odd };

/// Even (odd) combination |ψ_+⟩ ± |ψ_-⟩ of the two branches, i.e. the even (odd) n terms.
inline StateVector even_odd_epr(double r_eff, Parity parity, int n_max,
                                const AtomicVector& atom = atomic_basis(Level::i), double phase = 0.0) {
    detail::require_two_mode_cutoff(r_eff, n_max);
    const HilbertSpace space = HilbertSpace::two_mode(n_max, n_max);
    const cplx t = std::exp(I * phase) * std::tanh(r_eff);
    Vector c = Vector::Zero(n_max + 1);
    cplx term = 1.0 / std::cosh(r_eff);
    for (int n = 0; n <= n_max; ++n) {
        if ((n % 2 == 0) == (parity == Parity::even)) c(n) = term;
        term *= t;
    }
    return detail::diagonal_pair_state(space, atom, c);
}

/// ⟨ψ_+|ψ_-⟩ = 1/cosh(2r).
inline double branch_overlap(double r_eff) { return 1.0 / std::cosh(2.0 * r_eff); }

/// (-1)^(a†a); on |n,n⟩ states this separates the even and odd EPR combinations.
inline OperatorMatrix parity_operator(const HilbertSpace& space) {
    std::vector<Eigen::Triplet<cplx>> t;
    for (Index k = 0; k < space.dimension(); ++k) {
        const auto l = space.label(k);
        t.emplace_back(k, k, l.na % 2 == 0 ? 1.0 : -1.0);
    }
    SparseMatrix m(space.dimension(), space.dimension());
    m.setFromTriplets(t.begin(), t.end());
    return OperatorMatrix(space, m, true);
}

inline double cat_squeeze_factor(double zeta_mag, double tau) {
    if (tau < 0) throw Error("cat_squeeze_factor: tau must be >= 0");
    return std::asinh(2.0 * std::abs(zeta_mag) * tau);
}

struct DissipativeSqueezing {
    double r_tilde;
    double variance;
};

/// r̃ = 2|ζ_i|(1 - e^{-Γ_a τ})/Γ_a,  ⟨ΔX̃⟩² = [1 - (1 - e^{-2r̃}) e^{-Γ_c τ}]/4.
inline DissipativeSqueezing dissipative_squeezing(double zeta_i_mag, double tau, double gamma_a, double gamma_c) {
    if (gamma_a < 0 || gamma_c < 0) throw Error("dissipative_squeezing: rates must be >= 0");
    if (tau < 0) throw Error("dissipative_squeezing: tau must be >= 0");
    const double z = std::abs(zeta_i_mag);
    const double x = gamma_a * tau;
    // (1 - e^{-x})/Γ_a written to stay accurate as Γ_a → 0
    const double eff_time = x < 1e-8 ? tau * (1.0 - 0.5 * x) : -std::expm1(-x) / gamma_a;
    const double r = 2.0 * z * eff_time;
    const double var = 0.25 * (1.0 + std::expm1(-2.0 * r) * std::exp(-gamma_c * tau));
    return {r, var};
}

/// N(e^{-iθ}|β,-α⟩ ± e^{iθ}|-β,α⟩) with the atom factor `atom`.
inline StateVector entangled_coherent_state(cplx alpha, cplx beta, double theta, Sign sign, int n_max,
                                            const AtomicVector& atom = atomic_basis(Level::g)) {
    const HilbertSpace space = HilbertSpace::two_mode(n_max, n_max);
    const Vector first = product_state(space, atom, coherent_amplitudes(n_max, beta), coherent_amplitudes(n_max, -alpha))
                             .amplitudes();
    const Vector second = product_state(space, atom, coherent_amplitudes(n_max, -beta), coherent_amplitudes(n_max, alpha))
                              .amplitudes();
    Vector psi = std::exp(-I * theta) * first + sign_value(sign) * std::exp(I * theta) * second;
    if (psi.norm() < 1e-12) throw ZeroVectorError("entangled coherent superposition cancels");
    return StateVector::normalized(space, std::move(psi));
}

/// Project the atom onto |u⟩ (kept as the atomic factor) and renormalise.
/// Returns the state and the probability of the projection.
inline std::pair<StateVector, double> project_atom(const StateVector& psi, const AtomicVector& u) {
    const Vector out = atomic_outer(psi.space(), u, u) * psi.amplitudes();
    const double p = out.squaredNorm();
    return {StateVector::normalized(psi.space(), out), p};
}

/// (⟨u| ⊗ I)ψ as a vector over the mode basis.
inline Vector mode_part(const StateVector& psi, const AtomicVector& u) {
    const Index m = psi.space().mode_dimension();
    Vector out = Vector::Zero(m);
    for (int k = 0; k < 3; ++k) out += std::conj(u(k)) * psi.amplitudes().segment(k * m, m);
    return out;
}

/// Moments and optimal quadrature of a mixed state.
inline OptimalQuadrature minimal_quadrature_variance(const DensityMatrix& rho, Mode mode) {
    const SparseMatrix a = ladder_matrix(rho.space(), mode, false);
    const SparseMatrix ad = a.adjoint();
    const DenseMatrix arho = a * rho.entries();
    const cplx ma = arho.trace();
    const cplx ma2 = (a * arho).trace();
    const double n = (ad * arho).trace().real();
    const double n_up = (a * DenseMatrix(ad * rho.entries())).trace().real();
    const cplx c = ma2 - ma * ma;
    const double var = 0.25 * (n + n_up - 2.0 * std::norm(ma) - 2.0 * std::abs(c));
    double angle = std::fmod(0.5 * (std::arg(c) + kPi), kPi);
    if (angle < 0) angle += kPi;
    return {var, angle};
}

}  // namespace cqed
