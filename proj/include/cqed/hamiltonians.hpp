#pragma once

// Hamiltonians of a driven three-level atom coupled to one or two cavity
// modes: exact lab-frame and rotating-frame models, the dressed-basis
// interaction picture, the second-order effective Hamiltonian and its
// regime-specific reductions (down-conversion, up-conversion, quadratic).
//
// Conventions (ħ = 1, angular frequencies in rad/s):
//   Ω = |Ω| e^{-iφ}, drive frequency ω = 2(ω0 - δ)
//   ladder: a on g↔i, b on i↔e;   lambda: a on g↔i, b on e↔i
//   |±> = (±e^{iφ/2}|g> + e^{-iφ/2}|e>)/√2
//   pair coupling κ = λ_a λ_b e^{iφ} (ladder) or λ_a λ_b* e^{iφ} (lambda)

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cqed/fockspace.hpp"

namespace cqed {

enum class Configuration { ladder, lambda };
enum class Regime { weak, strong };
enum class Subspace { i, pm };

struct SystemParams {
    cplx lambda_a{0.0, 0.0};
    cplx lambda_b{0.0, 0.0};
    double omega_mag = 0.0;
    double phi = 0.0;
    double delta_cap = 0.0;
    double delta_small = 0.0;
    double omega0 = 0.0;
    double omega_i = 0.0;
    std::optional<double> omega_g;  // lambda only; defaults to -omega0
    std::optional<double> omega_e;  // lambda only; defaults to +omega0
    double gamma_c = 0.0;
    double gamma_a = 0.0;
    Configuration configuration = Configuration::ladder;

    cplx omega_complex() const { return omega_mag * std::exp(-I * phi); }
    double drive_frequency() const { return 2.0 * (omega0 - delta_small); }

    double level_g() const { return omega_g.value_or(-omega0); }
    double level_e() const { return omega_e.value_or(omega0); }

    double mode_frequency_a() const {
        return configuration == Configuration::ladder ? omega0 + omega_i - delta_cap : omega_i + omega0 - delta_cap;
    }
    double mode_frequency_b() const {
        return configuration == Configuration::ladder ? omega0 - omega_i + delta_cap : omega_i - omega0 - delta_cap;
    }

    double coupling_sq_sum() const { return std::norm(lambda_a) + std::norm(lambda_b); }

    /// κ: λ_aλ_b e^{iφ} for down-conversion (ladder), λ_aλ_b* e^{iφ} for up-conversion (lambda).
    cplx pair_coupling() const {
        const cplx lb = configuration == Configuration::ladder ? lambda_b : std::conj(lambda_b);
        return lambda_a * lb * std::exp(I * phi);
    }

    void validate() const {
        if (omega_mag < 0) throw Error("omega_mag must be >= 0");
        if (gamma_c < 0 || gamma_a < 0) throw Error("decay rates must be >= 0");
    }
};

// ---------------------------------------------------------------------------

/// Σ_k amplitude_k e^{i frequency_k t} op_k. Terms are added in Hermitian pairs.
class TimeDependentHamiltonian {
public:
    struct Term {
        SparseMatrix op;
        cplx amplitude;
        double frequency;
    };

    explicit TimeDependentHamiltonian(HilbertSpace space)
        : space_(std::move(space)), constant_(space_.dimension(), space_.dimension()) {}

    const HilbertSpace& space() const noexcept { return space_; }
    const SparseMatrix& constant_part() const noexcept { return constant_; }
    const std::vector<Term>& oscillating_terms() const noexcept { return terms_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }
    bool is_time_independent() const noexcept { return terms_.empty(); }

    /// Adds amplitude·e^{iνt}·op without its conjugate partner; caller keeps H Hermitian.
    void add(const SparseMatrix& op, cplx amplitude = 1.0, double frequency = 0.0) {
        if (amplitude == cplx{}) return;
        if (frequency == 0.0) {
            constant_ += amplitude * op;
            constant_.prune(cplx{});
        } else {
            terms_.push_back({op, amplitude, frequency});
        }
    }

    /// Adds amplitude·e^{iνt}·op + h.c.
    void add_with_hc(const SparseMatrix& op, cplx amplitude, double frequency = 0.0) {
        add(op, amplitude, frequency);
        add(SparseMatrix(op.adjoint()), std::conj(amplitude), -frequency);
    }

    void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

    SparseMatrix matrix_at(double t) const {
        SparseMatrix m = constant_;
        for (const auto& term : terms_) m += (term.amplitude * std::exp(I * (term.frequency * t))) * term.op;
        return m;
    }

    /// Hermitian-checked operator at time t.
    OperatorMatrix evaluate(double t) const { return OperatorMatrix(space_, matrix_at(t), true); }

    void apply(double t, const Vector& in, Vector& out) const {
        out.noalias() = constant_ * in;
        for (const auto& term : terms_) out += (term.amplitude * std::exp(I * (term.frequency * t))) * (term.op * in);
    }

    template <class Dense>
    DenseMatrix apply_left(double t, const Dense& rho) const {
        DenseMatrix out = constant_ * rho;
        for (const auto& term : terms_) out += (term.amplitude * std::exp(I * (term.frequency * t))) * (term.op * rho);
        return out;
    }

private:
    HilbertSpace space_;
    SparseMatrix constant_;
    std::vector<Term> terms_;
    std::vector<std::string> warnings_;
};

// ---------------------------------------------------------------------------

namespace detail {

struct Ops {
    explicit Ops(const HilbertSpace& space, double phi) : space(space) {
        a = ladder_matrix(space, Mode::a, false);
        ad = ladder_matrix(space, Mode::a, true);
        if (space.has_mode_b()) {
            b = ladder_matrix(space, Mode::b, false);
            bd = ladder_matrix(space, Mode::b, true);
        }
        g = atomic_basis(Level::g);
        e = atomic_basis(Level::e);
        i = atomic_basis(Level::i);
        plus = dressed_vector(Sign::plus, phi);
        minus = dressed_vector(Sign::minus, phi);
    }

    SparseMatrix sigma(const AtomicVector& u, const AtomicVector& v) const { return atomic_outer(space, u, v); }
    const AtomicVector& dressed(Sign s) const { return s == Sign::plus ? plus : minus; }

    HilbertSpace space;
    SparseMatrix a, ad, b, bd;
    AtomicVector g, e, i, plus, minus;
};

inline void require_two_modes(const HilbertSpace& space, const char* who) {
    if (!space.has_mode_b()) throw DimensionError(std::string(who) + " requires a two-mode space");
}

inline void require_single_mode(const HilbertSpace& space, const char* who) {
    if (space.has_mode_b()) throw DimensionError(std::string(who) + " requires a single-mode space");
}

inline void require_nonzero(double x, const char* what) {
    if (std::abs(x) < 1e-300 || !std::isfinite(1.0 / x))
        throw SingularParameterError(std::string("vanishing denominator: ") + what);
}

struct FrameEnergies {
    double mode_a;  // δ_a
    double mode_b;  // δ_b
    double g, e, i;
};

/// Level and mode energies after the drive-frame rotation U = exp(-iωt G).
inline FrameEnergies rotating_energies(const SystemParams& p) {
    const double half = p.drive_frequency() / 2.0;
    FrameEnergies f{};
    f.i = p.omega_i;
    f.mode_a = p.mode_frequency_a() - half;
    if (p.configuration == Configuration::ladder) {
        f.mode_b = p.mode_frequency_b() - half;
        f.g = -p.omega0 + half;
        f.e = p.omega0 - half;
    } else {
        f.mode_b = p.mode_frequency_b() + half;
        f.g = p.level_g() + half;
        f.e = p.level_e() - half;
    }
    return f;
}

}  // namespace detail

/// Diagonal generator G of the drive frame, U(t) = exp(-i ω t G).
/// ladder: (a†a + b†b + σ_ee - σ_gg)/2; lambda: (a†a - b†b + σ_ee - σ_gg)/2.
inline Vector frame_generator_diagonal(const SystemParams& p, const HilbertSpace& space) {
    Vector d(space.dimension());
    const double sb = p.configuration == Configuration::ladder ? 0.5 : -0.5;
    for (Index k = 0; k < space.dimension(); ++k) {
        const auto lab = space.label(k);
        double atom = lab.atom == Level::e ? 0.5 : (lab.atom == Level::g ? -0.5 : 0.0);
        d(k) = 0.5 * lab.na + sb * lab.nb + atom;
    }
    return d;
}

/// ψ̃ = U(t)† ψ_lab.
inline Vector lab_to_rotating(const SystemParams& p, const Vector& psi_lab, const HilbertSpace& space, double t) {
    const Vector g = frame_generator_diagonal(p, space);
    Vector out = psi_lab;
    const double w = p.drive_frequency();
    for (Index k = 0; k < out.size(); ++k) out(k) *= std::exp(I * (w * t * g(k).real()));
    return out;
}

inline Vector rotating_to_lab(const SystemParams& p, const Vector& psi_rot, const HilbertSpace& space, double t) {
    return lab_to_rotating(p, psi_rot, space, -t);
}

namespace detail {

inline void add_cavity_coupling(TimeDependentHamiltonian& h, const SystemParams& p, const Ops& o) {
    // λ_a a σ_ig + λ_b b σ_ei (ladder) / λ_b b σ_ie (lambda), + h.c.
    h.add_with_hc(SparseMatrix(o.a * o.sigma(o.i, o.g)), p.lambda_a);
    if (p.configuration == Configuration::ladder)
        h.add_with_hc(SparseMatrix(o.b * o.sigma(o.e, o.i)), p.lambda_b);
    else
        h.add_with_hc(SparseMatrix(o.b * o.sigma(o.i, o.e)), p.lambda_b);
}

}  // namespace detail

/// H(t) = H0 + V(t) in the laboratory frame, drive Ω e^{-iωt} σ_eg + h.c.
inline TimeDependentHamiltonian build_exact_lab(const SystemParams& p, const HilbertSpace& space) {
    detail::require_two_modes(space, "build_exact_lab");
    p.validate();
    detail::Ops o(space, p.phi);
    TimeDependentHamiltonian h(space);
    h.add(SparseMatrix(o.ad * o.a), p.mode_frequency_a());
    h.add(SparseMatrix(o.bd * o.b), p.mode_frequency_b());
    if (p.configuration == Configuration::ladder) {
        h.add(o.sigma(o.e, o.e), p.omega0);
        h.add(o.sigma(o.g, o.g), -p.omega0);
    } else {
        h.add(o.sigma(o.g, o.g), p.level_g());
        h.add(o.sigma(o.e, o.e), p.level_e());
    }
    h.add(o.sigma(o.i, o.i), p.omega_i);
    detail::add_cavity_coupling(h, p, o);
    h.add_with_hc(o.sigma(o.e, o.g), p.omega_complex(), -p.drive_frequency());
    return h;
}

/// H̃ = U†HU - iU†U̇ for U = exp(-iωtG); time independent.
inline TimeDependentHamiltonian to_rotating_frame(const SystemParams& p, const HilbertSpace& space) {
    detail::require_two_modes(space, "to_rotating_frame");
    p.validate();
    detail::Ops o(space, p.phi);
    const auto f = detail::rotating_energies(p);
    TimeDependentHamiltonian h(space);
    h.add(SparseMatrix(o.ad * o.a), f.mode_a);
    h.add(SparseMatrix(o.bd * o.b), f.mode_b);
    h.add(o.sigma(o.g, o.g), f.g);
    h.add(o.sigma(o.e, o.e), f.e);
    h.add(o.sigma(o.i, o.i), f.i);
    detail::add_cavity_coupling(h, p, o);
    h.add_with_hc(o.sigma(o.e, o.g), p.omega_complex());
    return h;
}

/// H0' = δ_a a†a + δ_b b†b + ω_i σ_ii + ε̄(σ_gg + σ_ee) + |Ω|(σ_++ - σ_--):
/// the rotating-frame free part with the δ(σ_ee - σ_gg) term dropped.
/// ψ̃(t) = exp(-i H0' t) ψ_I(t).
inline OperatorMatrix interaction_frame_hamiltonian(const SystemParams& p, const HilbertSpace& space) {
    detail::require_two_modes(space, "interaction_frame_hamiltonian");
    detail::Ops o(space, p.phi);
    const auto f = detail::rotating_energies(p);
    const double mean = 0.5 * (f.g + f.e);
    SparseMatrix m = f.mode_a * SparseMatrix(o.ad * o.a) + f.mode_b * SparseMatrix(o.bd * o.b);
    m += cplx(f.i) * o.sigma(o.i, o.i);
    m += cplx(mean) * (o.sigma(o.g, o.g) + o.sigma(o.e, o.e));
    m += cplx(p.omega_mag) * (o.sigma(o.plus, o.plus) - o.sigma(o.minus, o.minus));
    m.prune(cplx{});
    return OperatorMatrix(space, m, true);
}

/// Dressed-basis interaction picture with respect to H0'. Each cavity term
/// oscillates at the Bohr frequency of the transition it drives, e.g.
/// a σ_{i±} at Δ ∓ |Ω| - δ for symmetric level energies.
inline TimeDependentHamiltonian build_interaction_picture(const SystemParams& p, const HilbertSpace& space) {
    detail::require_two_modes(space, "build_interaction_picture");
    p.validate();
    detail::Ops o(space, p.phi);
    const auto f = detail::rotating_energies(p);
    const double mean = 0.5 * (f.g + f.e);
    TimeDependentHamiltonian h(space);
    for (Sign s : {Sign::plus, Sign::minus}) {
        const AtomicVector& d = o.dressed(s);
        const double es = mean + sign_value(s) * p.omega_mag;
        // σ_ig = Σ_s <g|s> |i><s|
        h.add_with_hc(SparseMatrix(o.a * o.sigma(o.i, d)), p.lambda_a * d(0), f.i - es - f.mode_a);
        if (p.configuration == Configuration::ladder) {
            // σ_ei = Σ_s <s|e> |s><i|
            h.add_with_hc(SparseMatrix(o.b * o.sigma(d, o.i)), p.lambda_b * std::conj(d(1)), es - f.i - f.mode_b);
        } else {
            // σ_ie = Σ_s <e|s> |i><s|
            h.add_with_hc(SparseMatrix(o.b * o.sigma(o.i, d)), p.lambda_b * d(1), f.i - es - f.mode_b);
        }
    }
    if (std::abs(p.delta_small) >= 0.1 * p.omega_mag)
        h.add_warning("interaction picture assumes |delta| << |Omega|");
    return h;
}

// ---------------------------------------------------------------------------

struct EffectiveCouplings {
    // down-conversion, weak drive
    cplx xi_i, xi_plus, xi_minus, xi;
    // down-conversion, strong drive
    cplx zeta_i, zeta_plus, zeta_minus, zeta;
    // up-conversion, weak drive
    cplx gamma_i, gamma_plus, gamma_minus, gamma;
    // up-conversion, strong drive
    cplx eta_i, eta_plus, eta_minus;
    double chi = 0.0;
    /// 2|ζ|/χ; equals 1 on the stability boundary of χa†a + ζa†² + h.c.
    double critical_ratio = 0.0;
    double delta_i_adjust = 0.0;
    double delta_plus_adjust = 0.0;
    double delta_minus_adjust = 0.0;

    cplx xi_pm(Sign s, bool approximate = false) const {
        return approximate ? xi : (s == Sign::plus ? xi_plus : xi_minus);
    }
    cplx zeta_pm(Sign s, bool approximate = false) const {
        return approximate ? zeta : (s == Sign::plus ? zeta_plus : zeta_minus);
    }
    cplx gamma_pm(Sign s, bool approximate = false) const {
        return approximate ? gamma : (s == Sign::plus ? gamma_plus : gamma_minus);
    }
    cplx eta_pm(Sign s) const { return s == Sign::plus ? eta_plus : eta_minus; }
    double delta_adjust(Subspace sub, Sign s = Sign::plus) const {
        return sub == Subspace::i ? delta_i_adjust : (s == Sign::plus ? delta_plus_adjust : delta_minus_adjust);
    }
};

/// All coupling constants of the effective Hamiltonians. Denominators required
/// by `regime` must not vanish (SingularParameterError); quantities of the
/// other regime whose denominators vanish are returned as NaN.
/// `approximate` selects the 1/Δ forms for the weak-drive detuning adjustments.
inline EffectiveCouplings effective_couplings(const SystemParams& p, Regime regime, bool approximate = false) {
    const double D = p.delta_cap;
    const double W = p.omega_mag;
    if (regime == Regime::weak) {
        detail::require_nonzero(D, "Delta");
        detail::require_nonzero(D - W, "Delta - |Omega|");
        detail::require_nonzero(D + W, "Delta + |Omega|");
    } else {
        detail::require_nonzero(W, "|Omega|");
        detail::require_nonzero(W - D, "|Omega| - Delta");
        detail::require_nonzero(W + D, "|Omega| + Delta");
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto over = [&](cplx num, double den) -> cplx { return den == 0.0 ? cplx(nan, nan) : num / den; };
    auto rover = [&](double num, double den) -> double { return den == 0.0 ? nan : num / den; };

    SystemParams ladder = p;
    ladder.configuration = Configuration::ladder;
    SystemParams lambda = p;
    lambda.configuration = Configuration::lambda;
    const cplx k_pdc = ladder.pair_coupling();
    const cplx k_puc = lambda.pair_coupling();

    EffectiveCouplings c;
    c.xi_i = over(W * k_pdc, D * D);
    c.xi_plus = over(k_pdc, 2.0 * (D - W));
    c.xi_minus = over(k_pdc, 2.0 * (D + W));
    c.xi = over(k_pdc, 2.0 * D);

    c.zeta_i = over(k_pdc, W);
    c.zeta_plus = over(k_pdc, 2.0 * (W - D));
    c.zeta_minus = over(k_pdc, 2.0 * (W + D));
    c.zeta = over(k_pdc, 2.0 * W);
    c.chi = rover(p.coupling_sq_sum(), 2.0 * W);
    c.critical_ratio = rover(2.0 * std::abs(c.zeta), c.chi);

    c.gamma_i = over(W * k_puc, D * D);
    c.gamma_plus = over(k_puc, 2.0 * (D - W));
    c.gamma_minus = over(k_puc, 2.0 * (D + W));
    c.gamma = over(k_puc, 2.0 * D);

    c.eta_i = over(k_puc, W);
    c.eta_plus = over(-k_puc, 2.0 * W);
    c.eta_minus = over(k_puc, 2.0 * W);

    // Detuning that makes the pair term resonant in the Stark frame: 2δ = -(S_a ± S_b).
    const double la2 = std::norm(p.lambda_a), lb2 = std::norm(p.lambda_b);
    const double ii_den = approximate ? 2.0 * D : rover(2.0 * (D * D - W * W), D);
    const double pp_den = approximate ? 4.0 * D : 4.0 * (D - W);
    const double mm_den = approximate ? 4.0 * D : 4.0 * (D + W);
    if (p.configuration == Configuration::ladder) {
        c.delta_i_adjust = rover(-(la2 + lb2), ii_den);
        c.delta_plus_adjust = rover(la2 + lb2, pp_den);
        c.delta_minus_adjust = rover(la2 + lb2, mm_den);
    } else {
        c.delta_i_adjust = rover(lb2 - la2, ii_den);
        c.delta_plus_adjust = rover(la2 - lb2, pp_den);
        c.delta_minus_adjust = rover(la2 - lb2, mm_den);
    }
    return c;
}

inline std::vector<std::string> regime_warnings(const SystemParams& p, Regime regime) {
    std::vector<std::string> w;
    const double lam = std::max(std::abs(p.lambda_a), std::abs(p.lambda_b));
    if (regime == Regime::weak) {
        if (!(lam < p.omega_mag)) w.push_back("weak regime expects |lambda| < |Omega|");
        if (!(3.0 * p.omega_mag <= std::abs(p.delta_cap))) w.push_back("weak regime expects |Omega| << Delta");
        if (!(std::abs(p.delta_cap) >= 10.0 * lam * (1.0 - 1e-9))) w.push_back("weak regime expects Delta >~ 10|lambda|");
    } else {
        if (!(p.omega_mag >= 10.0 * lam * (1.0 - 1e-9))) w.push_back("strong regime expects |Omega| >~ 10|lambda|");
        if (!(p.omega_mag >= 3.0 * std::abs(p.delta_cap))) w.push_back("strong regime expects |Omega| >> Delta");
    }
    return w;
}

namespace detail {

/// ab (ladder) or ab† (lambda)
inline SparseMatrix pair_operator(const SystemParams& p, const Ops& o) {
    return p.configuration == Configuration::ladder ? SparseMatrix(o.a * o.b) : SparseMatrix(o.a * o.bd);
}

/// Number-operator (Stark) part of the second-order Hamiltonian.
inline SparseMatrix stark_matrix(const SystemParams& p, const Ops& o) {
    const double D = p.delta_cap, W = p.omega_mag;
    const double la2 = std::norm(p.lambda_a), lb2 = std::norm(p.lambda_b);
    const SparseMatrix na = o.ad * o.a;
    const SparseMatrix a_ad = o.a * o.ad;
    const SparseMatrix nb = o.bd * o.b;
    const SparseMatrix b_bd = o.b * o.bd;
    const bool ladder = p.configuration == Configuration::ladder;
    // σ_ii block: Δ(|λa|² aa† + |λb|² (b†b | bb†))/(Δ² - |Ω|²)
    SparseMatrix ii = (D / (D * D - W * W)) * (la2 * a_ad + lb2 * (ladder ? nb : b_bd));
    // σ_±± blocks: -(|λa|² a†a + |λb|² (bb† | b†b))/2(Δ ∓ |Ω|)
    SparseMatrix pm_modes = la2 * na + lb2 * (ladder ? b_bd : nb);
    SparseMatrix out = SparseMatrix(ii * o.sigma(o.i, o.i));
    out += SparseMatrix((-1.0 / (2.0 * (D - W))) * pm_modes * o.sigma(o.plus, o.plus));
    out += SparseMatrix((-1.0 / (2.0 * (D + W))) * pm_modes * o.sigma(o.minus, o.minus));
    out.prune(cplx{});
    return out;
}

}  // namespace detail

/// Stark part H_S of the second-order Hamiltonian; ψ_I(t) = exp(-i H_S t) ψ_S(t)
/// relates the interaction picture to the frame in which the weak-drive
/// effective Hamiltonians are time independent.
inline OperatorMatrix stark_hamiltonian(const SystemParams& p, const HilbertSpace& space) {
    detail::require_two_modes(space, "stark_hamiltonian");
    detail::require_nonzero(p.delta_cap * p.delta_cap - p.omega_mag * p.omega_mag, "Delta^2 - |Omega|^2");
    detail::Ops o(space, p.phi);
    SparseMatrix s = detail::stark_matrix(p, o);
    s = 0.5 * (s + SparseMatrix(s.adjoint()));
    return OperatorMatrix(space, s, true);
}

/// Closed-form second-order Hamiltonian in the interaction picture:
///   [Δ(|λa|²aa† + |λb|² n_b) + |Ω|P(t)] σ_ii/(Δ²-|Ω|²)
///   - [|λa|²a†a + |λb|² n_b' + P(t)] σ_++/2(Δ-|Ω|)
///   - [|λa|²a†a + |λb|² n_b' - P(t)] σ_--/2(Δ+|Ω|)
/// with P(t) = κ e^{-2iδt} ab + h.c. (ladder) or κ e^{-2iδt} ab† + h.c. (lambda).
inline TimeDependentHamiltonian build_effective_general(const SystemParams& p, const HilbertSpace& space) {
    detail::require_two_modes(space, "build_effective_general");
    p.validate();
    const double D = p.delta_cap, W = p.omega_mag;
    detail::require_nonzero(D * D - W * W, "Delta^2 - |Omega|^2");
    detail::Ops o(space, p.phi);
    TimeDependentHamiltonian h(space);
    h.add(detail::stark_matrix(p, o));
    const SparseMatrix pair = detail::pair_operator(p, o);
    const cplx k = p.pair_coupling();
    const double nu = -2.0 * p.delta_small;
    h.add_with_hc(SparseMatrix(pair * o.sigma(o.i, o.i)), k * (W / (D * D - W * W)), nu);
    h.add_with_hc(SparseMatrix(pair * o.sigma(o.plus, o.plus)), -k / (2.0 * (D - W)), nu);
    h.add_with_hc(SparseMatrix(pair * o.sigma(o.minus, o.minus)), k / (2.0 * (D + W)), nu);
    return h;
}

namespace detail {

inline TimeDependentHamiltonian build_two_mode_effective(const SystemParams& p, const HilbertSpace& space,
                                                         Regime regime, Subspace sub, bool approximate,
                                                         Configuration expected, const char* who) {
    require_two_modes(space, who);
    p.validate();
    if (p.configuration != expected)
        throw Error(std::string(who) + ": wrong atomic configuration for this process");
    const auto c = effective_couplings(p, regime, approximate);
    Ops o(space, p.phi);
    const bool pdc = expected == Configuration::ladder;
    const SparseMatrix pair = pair_operator(p, o);
    const SparseMatrix s_ii = o.sigma(o.i, o.i);
    const SparseMatrix s_pp = o.sigma(o.plus, o.plus);
    const SparseMatrix s_mm = o.sigma(o.minus, o.minus);

    TimeDependentHamiltonian h(space);
    for (auto& w : regime_warnings(p, regime)) h.add_warning(std::move(w));
    if (regime == Regime::strong && p.delta_small != 0.0)
        h.add_warning("strong regime assumes delta = 0; delta_small ignored");

    if (regime == Regime::weak) {
        if (sub == Subspace::i) {
            h.add_with_hc(SparseMatrix(pair * s_ii), pdc ? c.xi_i : c.gamma_i);
        } else {
            // (c_± pair + h.c.)(σ_-- - σ_++)
            const cplx cp = pdc ? c.xi_pm(Sign::plus, approximate) : c.gamma_pm(Sign::plus, approximate);
            const cplx cm = pdc ? c.xi_pm(Sign::minus, approximate) : c.gamma_pm(Sign::minus, approximate);
            h.add_with_hc(SparseMatrix(pair * s_pp), -cp);
            h.add_with_hc(SparseMatrix(pair * s_mm), cm);
        }
        return h;
    }

    if (sub == Subspace::i) {
        h.add_with_hc(SparseMatrix(pair * s_ii), -(pdc ? c.zeta_i : c.eta_i));
        return h;
    }
    // Stark term (|λa|² a†a + |λb|² n_b)(σ_++ - σ_--)/2|Ω|
    const double la2 = std::norm(p.lambda_a), lb2 = std::norm(p.lambda_b);
    const SparseMatrix nb = pdc ? SparseMatrix(o.b * o.bd) : SparseMatrix(o.bd * o.b);
    const SparseMatrix modes = la2 * SparseMatrix(o.ad * o.a) + lb2 * nb;
    h.add(SparseMatrix((1.0 / (2.0 * p.omega_mag)) * modes * SparseMatrix(s_pp - s_mm)));
    if (pdc) {
        h.add_with_hc(SparseMatrix(pair * s_pp), approximate ? c.zeta : c.zeta_plus);
        h.add_with_hc(SparseMatrix(pair * s_mm), approximate ? c.zeta : c.zeta_minus);
    } else {
        h.add_with_hc(SparseMatrix(pair * s_pp), -c.eta_plus);
        h.add_with_hc(SparseMatrix(pair * s_mm), c.eta_minus);
    }
    return h;
}

}  // namespace detail

/// Two-mode down-conversion Hamiltonians (ladder):
///   weak:   i  → (ξ_i ab + h.c.)σ_ii
///           pm → (ξ_± ab + h.c.)(σ_-- - σ_++)        [Stark frame]
///   strong: i  → -(ζ_i ab + h.c.)σ_ii
///           pm → Stark(σ_++ - σ_--)/2|Ω| + (ζ_± ab + h.c.)(σ_++ + σ_--)
inline TimeDependentHamiltonian build_effective_pdc(const SystemParams& p, const HilbertSpace& space, Regime regime,
                                                    Subspace sub, bool approximate = false) {
    return detail::build_two_mode_effective(p, space, regime, sub, approximate, Configuration::ladder,
                                            "build_effective_pdc");
}

/// Beam-splitter Hamiltonians (lambda):
///   weak:   i → (γ_i ab† + h.c.)σ_ii;  pm → (γ_± ab† + h.c.)(σ_-- - σ_++)   [Stark frame]
///   strong: i → -(η_i ab† + h.c.)σ_ii; pm → Stark + (η_± ab† + h.c.)(σ_-- - σ_++)
inline TimeDependentHamiltonian build_effective_puc(const SystemParams& p, const HilbertSpace& space, Regime regime,
                                                    Subspace sub, bool approximate = false) {
    return detail::build_two_mode_effective(p, space, regime, sub, approximate, Configuration::lambda,
                                            "build_effective_puc");
}

/// Degenerate down-conversion on a single-mode space, written with the
/// squeeze generator c a†² + c* a²:
///   weak pm:  (ξ_+ a†² + h.c.)σ_++ - (ξ_- a†² + h.c.)σ_--   (S(ξ) on |+>, S⁻¹ on |->)
///   weak i:   (ξ_i a†² + h.c.)σ_ii
///   strong i: (ζ_i a†² + h.c.)σ_ii
/// The strong pm case is the quadratic Hamiltonian of build_quadratic_cat.
inline TimeDependentHamiltonian build_degenerate_pdc(const SystemParams& p, const HilbertSpace& space, Regime regime,
                                                     Subspace sub, bool approximate = false) {
    detail::require_single_mode(space, "build_degenerate_pdc");
    p.validate();
    if (regime == Regime::strong && sub == Subspace::pm)
        throw Error("strong-drive dressed subspace is the quadratic (cat) Hamiltonian; use build_quadratic_cat");
    const auto c = effective_couplings(p, regime, approximate);
    detail::Ops o(space, p.phi);
    const SparseMatrix ad2 = o.ad * o.ad;
    TimeDependentHamiltonian h(space);
    for (auto& w : regime_warnings(p, regime)) h.add_warning(std::move(w));
    if (sub == Subspace::i) {
        h.add_with_hc(SparseMatrix(ad2 * o.sigma(o.i, o.i)), regime == Regime::weak ? c.xi_i : c.zeta_i);
    } else {
        h.add_with_hc(SparseMatrix(ad2 * o.sigma(o.plus, o.plus)), c.xi_pm(Sign::plus, approximate));
        h.add_with_hc(SparseMatrix(ad2 * o.sigma(o.minus, o.minus)), -c.xi_pm(Sign::minus, approximate));
    }
    return h;
}

/// Schrödinger-picture quadratic Hamiltonian of one dressed branch,
///   H_± = (ω ± χ) a†a + ζ e^{-2iωt} a†² + ζ* e^{2iωt} a²,
/// with ω = ω0 - δ (half the drive frequency) and ζ = κ/2|Ω|.
inline TimeDependentHamiltonian build_quadratic_cat(const SystemParams& p, const HilbertSpace& space, Sign branch) {
    detail::require_single_mode(space, "build_quadratic_cat");
    p.validate();
    const auto c = effective_couplings(p, Regime::strong, true);
    detail::Ops o(space, p.phi);
    const double w = p.drive_frequency() / 2.0;
    TimeDependentHamiltonian h(space);
    for (auto& msg : regime_warnings(p, Regime::strong)) h.add_warning(std::move(msg));
    h.add(SparseMatrix(o.ad * o.a), w + sign_value(branch) * c.chi);
    h.add_with_hc(SparseMatrix(o.ad * o.ad), c.zeta, -2.0 * w);
    return h;
}

}  // namespace cqed
