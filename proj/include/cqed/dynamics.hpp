#pragma once

// Unitary and zero-temperature Lindblad time evolution.

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <utility>
#include <vector>

#include "cqed/hamiltonians.hpp"
#include "cqed/krylov.hpp"

namespace cqed {

struct EvolutionSpec {
    double t_start = 0.0;
    double t_end = 0.0;
    int sample_count = 2;
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    long max_steps = 10'000'000;

    void validate() const {
        if (!(t_end > t_start)) throw Error("EvolutionSpec: t_end must exceed t_start");
        if (sample_count < 2) throw Error("EvolutionSpec: sample_count must be >= 2");
        if (!(rel_tol > 0) || !(abs_tol > 0)) throw Error("EvolutionSpec: tolerances must be > 0");
    }

    /// Evenly spaced, both ends included.
    std::vector<double> sample_times() const {
        std::vector<double> t(sample_count);
        for (int k = 0; k < sample_count; ++k)
            t[k] = t_start + (t_end - t_start) * static_cast<double>(k) / (sample_count - 1);
        t.back() = t_end;
        return t;
    }
};

template <class S>
struct Trajectory {
    std::vector<double> times;
    std::vector<S> states;

    const S& final_state() const { return states.back(); }
};

/// exp(-iHt)ψ₀; see expmv for the propagator choice.
inline StateVector propagate_const(const OperatorMatrix& h, const StateVector& psi0, double t,
                                   const KrylovOptions& opts = {}) {
    require_same_space(h.space(), psi0.space());
    if (!h.is_hermitian()) throw Error("propagate_const requires a Hermitian-flagged operator");
    Vector out = expmv(h.entries(), psi0.amplitudes(), t, opts);
    // the propagator itself may not move the norm; drift already present in ψ₀ is carried along
    const double before = psi0.amplitudes().norm();
    const double drift = std::abs(out.norm() - before);
    if (drift > 1e-9) throw ConvergenceError("propagator changed the norm", drift);
    return StateVector(psi0.space(), std::move(out), 1e-9 + 2.0 * std::abs(before - 1.0));
}

/// Constant-H trajectory sampled at spec.sample_times(), stepping sample to sample.
inline Trajectory<StateVector> propagate_sampled(const OperatorMatrix& h, const StateVector& psi0,
                                                 const EvolutionSpec& spec, const KrylovOptions& opts = {}) {
    spec.validate();
    Trajectory<StateVector> tr;
    tr.times = spec.sample_times();
    KrylovOptions per_step = opts;
    per_step.tol = opts.tol / (spec.sample_count - 1);
    StateVector psi = psi0;
    double t_prev = spec.t_start;
    for (double t : tr.times) {
        if (t > t_prev) psi = propagate_const(h, psi, t - t_prev, per_step);
        t_prev = t;
        tr.states.push_back(psi);
    }
    return tr;
}

namespace detail {

/// Dormand–Prince 5(4) with adaptive steps. `rhs(t, y, dy)`; the error norm is
/// ‖err‖₂ / (abs_tol + rel_tol·‖y‖₂). `observe(k, y)` fires at each output time.
template <class State, class Rhs, class Observe>
void dopri5(Rhs&& rhs, State y, const std::vector<double>& outputs, const EvolutionSpec& spec, Observe&& observe) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    const double span = spec.t_end - spec.t_start;
    double t = spec.t_start;
    std::size_t next = 0;
    while (next < outputs.size() && outputs[next] <= t) observe(next++, y);
    if (next == outputs.size()) return;

    State k1, k2, k3, k4, k5, k6, k7, tmp, ynew;
    rhs(t, y, k1);
    double h = std::min((spec.t_end - spec.t_start) / 100.0, 0.01 * (std::sqrt(y.squaredNorm()) + 1e-300) /
                                                                  std::max(std::sqrt(k1.squaredNorm()), 1e-300));
    h = std::max(h, 1e-12 * (spec.t_end - spec.t_start));
    long steps = 0;
    double last_ratio = 0.0;

    while (next < outputs.size()) {
        if (++steps > spec.max_steps)
            throw ConvergenceError("adaptive integrator exceeded step budget", last_ratio * spec.rel_tol);
        const double target = outputs[next];
        bool hit = false;
        double step = h;
        if (t + step >= target) {
            step = target - t;
            hit = true;
        }
        tmp = y + step * a21 * k1;
        rhs(t + c2 * step, tmp, k2);
        tmp = y + step * (a31 * k1 + a32 * k2);
        rhs(t + c3 * step, tmp, k3);
        tmp = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + c4 * step, tmp, k4);
        tmp = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + c5 * step, tmp, k5);
        tmp = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(t + step, tmp, k6);
        ynew = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(t + step, ynew, k7);
        tmp = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        // error per unit step: local errors add up to at most rel_tol over the whole span
        const double share = std::max(spec.rel_tol * step / span, 16.0 * std::numeric_limits<double>::epsilon());
        const double scale = spec.abs_tol * step / span + share * std::sqrt(std::max(y.squaredNorm(), ynew.squaredNorm()));
        const double ratio = std::sqrt(tmp.squaredNorm()) / scale;
        last_ratio = ratio;
        if (!std::isfinite(ratio)) throw ConvergenceError("adaptive integrator produced non-finite values", ratio);

        if (ratio <= 1.0) {
            t = hit ? target : t + step;
            y.swap(ynew);
            k1.swap(k7);
            while (next < outputs.size() && outputs[next] <= t * (1.0 + 1e-15)) observe(next++, y);
            const double grow = ratio > 0 ? 0.9 * std::pow(ratio, -0.2) : 5.0;
            const double proposed = step * std::clamp(grow, 0.2, 5.0);
            // a step truncated to hit an output must not shrink the stride
            h = hit ? std::max(h, proposed) : proposed;
        } else {
            h = step * std::clamp(0.9 * std::pow(ratio, -0.2), 0.1, 0.9);
            if (h < 1e-15 * std::max(std::abs(t), spec.t_end - spec.t_start))
                throw ConvergenceError("adaptive integrator step size underflow", ratio * spec.rel_tol);
        }
    }
}

}  // namespace detail

/// Time-dependent Schrödinger equation, adaptive Dormand–Prince integration.
/// Sample states must keep unit norm within 1e-6 or a ConvergenceError is raised.
inline Trajectory<StateVector> evolve_schrodinger(const TimeDependentHamiltonian& h, const StateVector& psi0,
                                                  const EvolutionSpec& spec) {
    spec.validate();
    require_same_space(h.space(), psi0.space());
    Trajectory<StateVector> tr;
    tr.times = spec.sample_times();
    Vector scratch(psi0.amplitudes().size());
    auto rhs = [&](double t, const Vector& y, Vector& dy) {
        h.apply(t, y, scratch);
        dy = -I * scratch;
    };
    auto observe = [&](std::size_t, const Vector& y) {
        const double n = y.norm();
        if (std::abs(n - 1.0) > 1e-6)
            throw ConvergenceError("norm drift beyond 1e-6 during unitary evolution", std::abs(n - 1.0));
        tr.states.emplace_back(psi0.space(), y, 1e-6);
    };
    detail::dopri5(rhs, psi0.amplitudes(), tr.times, spec, observe);
    return tr;
}

struct DecayChannel {
    double rate;
    OperatorMatrix collapse;
};

/// Cavity loss: collapse operator a (and b) at rate Γ_c.
inline std::vector<DecayChannel> cavity_decay(const HilbertSpace& space, double gamma_c) {
    if (gamma_c < 0) throw Error("decay rate must be >= 0");
    std::vector<DecayChannel> out;
    out.push_back({gamma_c, ladder_operator(space, Mode::a, false)});
    if (space.has_mode_b()) out.push_back({gamma_c, ladder_operator(space, Mode::b, false)});
    return out;
}

/// Spontaneous emission at rate Γ_a. ladder: i→g and e→i; lambda: i→g and i→e.
inline std::vector<DecayChannel> atomic_decay(const SystemParams& p, const HilbertSpace& space, double gamma_a) {
    if (gamma_a < 0) throw Error("decay rate must be >= 0");
    std::vector<DecayChannel> out;
    out.push_back({gamma_a, atomic_projector(space, Level::g, Level::i)});
    if (p.configuration == Configuration::ladder)
        out.push_back({gamma_a, atomic_projector(space, Level::i, Level::e)});
    else
        out.push_back({gamma_a, atomic_projector(space, Level::e, Level::i)});
    return out;
}

/// dρ/dt = -i[H,ρ] + Σ_k γ_k (L_k ρ L_k† - ½{L_k†L_k, ρ}).
inline Trajectory<DensityMatrix> evolve_lindblad(const TimeDependentHamiltonian& h,
                                                 const std::vector<DecayChannel>& decay, const DensityMatrix& rho0,
                                                 const EvolutionSpec& spec) {
    spec.validate();
    require_same_space(h.space(), rho0.space());
    struct Channel {
        double rate;
        SparseMatrix l, ld, ldl;
    };
    std::vector<Channel> ch;
    const Index n = rho0.space().dimension();
    SparseMatrix anti(n, n);  // Σ γ L†L / 2
    for (const auto& d : decay) {
        if (d.rate < 0) throw Error("decay rate must be >= 0");
        require_same_space(d.collapse.space(), rho0.space());
        if (d.rate == 0.0) continue;
        SparseMatrix l = d.collapse.entries();
        SparseMatrix ld = l.adjoint();
        SparseMatrix ldl = ld * l;
        anti += (0.5 * d.rate) * ldl;
        ch.push_back({d.rate, l, ld, ldl});
    }

    Trajectory<DensityMatrix> tr;
    tr.times = spec.sample_times();
    DenseMatrix hr(n, n), tmp(n, n);
    auto rhs = [&](double t, const DenseMatrix& rho, DenseMatrix& drho) {
        // X = -iHρ - Aρ; X + X† gives -i[H,ρ] - {A,ρ} for Hermitian ρ
        hr = h.apply_left(t, rho);
        drho = -I * hr;
        drho -= anti * rho;
        drho += drho.adjoint().eval();
        for (const auto& c : ch) {
            tmp = c.l * rho;
            drho += c.rate * (tmp * c.ld);
        }
    };
    DensityMatrix::Tolerances tol{1e-10, 1e-7, 1e-7};
    auto observe = [&](std::size_t, const DenseMatrix& rho) {
        DenseMatrix sym = 0.5 * (rho + rho.adjoint());
        const double tr_dev = std::abs(sym.trace().real() - 1.0);
        if (tr_dev > 1e-7) throw ConvergenceError("Lindblad trace drift beyond 1e-7", tr_dev);
        tr.states.emplace_back(rho0.space(), std::move(sym), tol);
    };
    detail::dopri5(rhs, rho0.entries(), tr.times, spec, observe);
    return tr;
}

/// (U_+ψ₀, U_-ψ₀) for the two quadratic branches of build_quadratic_cat.
inline std::pair<StateVector, StateVector> evolve_cat_branches(const SystemParams& p, const HilbertSpace& space,
                                                               const StateVector& psi0, double tau,
                                                               double rel_tol = 1e-10, double abs_tol = 1e-13) {
    detail::require_single_mode(space, "evolve_cat_branches");
    if (tau == 0.0) return {psi0, psi0};
    EvolutionSpec spec{0.0, tau, 2, rel_tol, abs_tol};
    auto plus = evolve_schrodinger(build_quadratic_cat(p, space, Sign::plus), psi0, spec).final_state();
    auto minus = evolve_schrodinger(build_quadratic_cat(p, space, Sign::minus), psi0, spec).final_state();
    return {std::move(plus), std::move(minus)};
}

}  // namespace cqed
