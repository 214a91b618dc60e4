#pragma once

// Composite Hilbert space of a three-level atom and up to two truncated
// bosonic modes, its states and elementary operators.
//
// Basis ordering is fixed: the atom index varies slowest, then mode a, then
// mode b. Atomic levels are ordered {g, e, i}.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "cqed/errors.hpp"

namespace cqed {

using cplx = std::complex<double>;
using Vector = Eigen::VectorXcd;
using DenseMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
using AtomicVector = Eigen::Vector3cd;
using AtomicMatrix = Eigen::Matrix3cd;
using Index = Eigen::Index;

inline constexpr cplx I{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

enum class Level { g = 0, e = 1, i = 2 };
enum class Mode { a, b };
enum class Sign { plus, minus };

inline double sign_value(Sign s) { return s == Sign::plus ? 1.0 : -1.0; }

class HilbertSpace {
public:
    explicit HilbertSpace(int n_max_a, std::optional<int> n_max_b = std::nullopt)
        : n_max_a_(n_max_a), n_max_b_(n_max_b) {
        if (n_max_a < 1) throw DimensionError("n_max_a must be >= 1");
        if (n_max_b && *n_max_b < 1) throw DimensionError("n_max_b must be >= 1 when present");
    }

    static HilbertSpace single_mode(int n_max) { return HilbertSpace(n_max); }
    static HilbertSpace two_mode(int n_max_a, int n_max_b) { return HilbertSpace(n_max_a, n_max_b); }

    int n_max_a() const noexcept { return n_max_a_; }
    std::optional<int> n_max_b() const noexcept { return n_max_b_; }
    bool has_mode_b() const noexcept { return n_max_b_.has_value(); }
    static constexpr int atom_dim() noexcept { return 3; }

    Index dim_a() const noexcept { return n_max_a_ + 1; }
    Index dim_b() const noexcept { return n_max_b_ ? *n_max_b_ + 1 : 1; }
    Index mode_dimension() const noexcept { return dim_a() * dim_b(); }
    Index dimension() const noexcept { return atom_dim() * mode_dimension(); }

    Index index(Level atom, int na, int nb = 0) const {
        if (na < 0 || na > n_max_a_ || nb < 0 || nb >= dim_b())
            throw DimensionError("Fock index outside truncated space");
        return static_cast<Index>(atom) * mode_dimension() + na * dim_b() + nb;
    }

    struct Label {
        Level atom;
        int na;
        int nb;
    };

    Label label(Index k) const {
        const Index m = mode_dimension();
        return {static_cast<Level>(k / m), static_cast<int>((k % m) / dim_b()),
                static_cast<int>(k % dim_b())};
    }

    friend bool operator==(const HilbertSpace&, const HilbertSpace&) = default;

private:
    int n_max_a_;
    std::optional<int> n_max_b_;
};

inline void require_same_space(const HilbertSpace& a, const HilbertSpace& b) {
    if (!(a == b)) throw DimensionError("Hilbert spaces differ");
}

// ---------------------------------------------------------------------------
// Atomic and single-mode building blocks

inline AtomicVector atomic_basis(Level k) {
    AtomicVector v = AtomicVector::Zero();
    v(static_cast<int>(k)) = 1.0;
    return v;
}

/// |±> = (±e^{iφ/2}|g> + e^{-iφ/2}|e>)/√2, eigenstates of Ωσ_eg + h.c. with
/// eigenvalues ±|Ω| for Ω = |Ω|e^{-iφ}.
inline AtomicVector dressed_vector(Sign s, double phi) {
    AtomicVector v = AtomicVector::Zero();
    v(0) = sign_value(s) * std::exp(I * (phi / 2.0)) / std::sqrt(2.0);
    v(1) = std::exp(-I * (phi / 2.0)) / std::sqrt(2.0);
    return v;
}

inline Vector fock_vector(int n_max, int n) {
    if (n < 0 || n > n_max) throw CutoffError("Fock state outside truncation", n);
    Vector v = Vector::Zero(n_max + 1);
    v(n) = 1.0;
    return v;
}

/// Poisson weight e^{-|α|²}|α|^{2n}/n!, evaluated in log space.
inline double poisson_weight(double mean, int n) {
    if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
    return std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
}

/// 1 - Σ_{n<=n_max} P(n) for a coherent state of amplitude α.
inline double coherent_residual(cplx alpha, int n_max) {
    const double mean = std::norm(alpha);
    if (mean == 0.0) return 0.0;
    // Sum the tail directly once past the peak so the residual keeps its relative accuracy.
    if (n_max > mean) {
        double tail = 0.0;
        for (int n = n_max + 1;; ++n) {
            const double w = poisson_weight(mean, n);
            tail += w;
            if (w < 1e-300 || w < tail * 1e-17) break;
        }
        return tail;
    }
    double head = 0.0;
    for (int n = 0; n <= n_max; ++n) head += poisson_weight(mean, n);
    return std::max(0.0, 1.0 - head);
}

inline int coherent_cutoff(cplx alpha, double residual = 1e-6) {
    int n = 1;
    while (coherent_residual(alpha, n) > residual) ++n;
    return n;
}

/// Smallest n_max >= 1 with tanh(r)^(2 n_max) <= residual.
inline int squeezed_vacuum_cutoff(double r, double residual = 1e-6) {
    const double t = std::tanh(std::abs(r));
    if (t == 0.0) return 1;
    const double n = std::log(residual) / (2.0 * std::log(t));
    return std::max(1, static_cast<int>(std::ceil(n - 1e-12)));
}

/// Coherent-state amplitudes on 0..n_max, renormalised after truncation.
inline Vector coherent_amplitudes(int n_max, cplx alpha, double residual = 1e-6) {
    const double res = coherent_residual(alpha, n_max);
    if (res > residual)
        throw CutoffError("coherent state truncation residual " + std::to_string(res) + " too large",
                          coherent_cutoff(alpha, residual));
    Vector v(n_max + 1);
    const double mean = std::norm(alpha);
    const double phase = std::arg(alpha);
    for (int n = 0; n <= n_max; ++n)
        v(n) = std::sqrt(poisson_weight(mean, n)) * std::exp(I * (phase * n));
    v /= v.norm();
    return v;
}

// ---------------------------------------------------------------------------
// States

class StateVector {
public:
    /// Throws unless ‖amplitudes‖₂ is within norm_tol of 1.
    StateVector(HilbertSpace space, Vector amplitudes, double norm_tol = 1e-9)
        : space_(std::move(space)), amplitudes_(std::move(amplitudes)) {
        if (amplitudes_.size() != space_.dimension())
            throw DimensionError("amplitude vector length does not match space dimension");
        const double n = amplitudes_.norm();
        if (std::abs(n - 1.0) > norm_tol)
            throw Error("state vector not normalised: norm = " + std::to_string(n));
    }

    /// Normalises the given amplitudes; throws ZeroVectorError for a null vector.
    static StateVector normalized(HilbertSpace space, Vector amplitudes) {
        const double n = amplitudes.norm();
        if (!(n > 1e-300)) throw ZeroVectorError("cannot normalise a zero vector");
        amplitudes /= n;
        return StateVector(std::move(space), std::move(amplitudes));
    }

    const HilbertSpace& space() const noexcept { return space_; }
    const Vector& amplitudes() const noexcept { return amplitudes_; }
    double norm() const { return amplitudes_.norm(); }
    cplx amplitude(Level atom, int na, int nb = 0) const { return amplitudes_(space_.index(atom, na, nb)); }

private:
    HilbertSpace space_;
    Vector amplitudes_;
};

inline cplx inner(const StateVector& bra, const StateVector& ket) {
    require_same_space(bra.space(), ket.space());
    return bra.amplitudes().dot(ket.amplitudes());
}

/// atom ⊗ mode_a (⊗ mode_b). Factors are used as given and the result normalised.
inline StateVector product_state(const HilbertSpace& space, const AtomicVector& atom,
                                 const Vector& mode_a, const std::optional<Vector>& mode_b = std::nullopt) {
    if (mode_a.size() != space.dim_a()) throw DimensionError("mode-a factor has wrong length");
    Vector b = Vector::Ones(1);
    if (space.has_mode_b()) {
        b = mode_b ? *mode_b : fock_vector(*space.n_max_b(), 0);
        if (b.size() != space.dim_b()) throw DimensionError("mode-b factor has wrong length");
    } else if (mode_b) {
        throw DimensionError("mode-b factor supplied for a single-mode space");
    }
    Vector psi(space.dimension());
    const Index m = space.mode_dimension();
    for (int k = 0; k < 3; ++k)
        for (Index na = 0; na < space.dim_a(); ++na)
            for (Index nb = 0; nb < space.dim_b(); ++nb)
                psi(k * m + na * space.dim_b() + nb) = atom(k) * mode_a(na) * b(nb);
    return StateVector::normalized(space, std::move(psi));
}

inline StateVector basis_state(const HilbertSpace& space, Level atom, int na, int nb = 0) {
    Vector psi = Vector::Zero(space.dimension());
    psi(space.index(atom, na, nb)) = 1.0;
    return StateVector(space, std::move(psi));
}

inline StateVector dressed_atomic_state(const HilbertSpace& space, Sign s, double phi) {
    return product_state(space, dressed_vector(s, phi), fock_vector(space.n_max_a(), 0));
}

/// Coherent state in `mode`, other mode in vacuum, atom in `atom` (default |g>).
inline StateVector coherent_state(const HilbertSpace& space, Mode mode, cplx alpha,
                                  const AtomicVector& atom = atomic_basis(Level::g)) {
    if (mode == Mode::a)
        return product_state(space, atom, coherent_amplitudes(space.n_max_a(), alpha));
    if (!space.has_mode_b()) throw DimensionError("mode b requested on a single-mode space");
    return product_state(space, atom, fock_vector(space.n_max_a(), 0),
                         coherent_amplitudes(*space.n_max_b(), alpha));
}

// ---------------------------------------------------------------------------
// Operators

class OperatorMatrix {
public:
    OperatorMatrix(HilbertSpace space, SparseMatrix entries, bool hermitian = false)
        : space_(std::move(space)), entries_(std::move(entries)), hermitian_(hermitian) {
        if (entries_.rows() != space_.dimension() || entries_.cols() != space_.dimension())
            throw DimensionError("operator shape does not match space dimension");
        entries_.makeCompressed();
        if (hermitian_) {
            const double dev = hermiticity_deviation();
            if (dev > 1e-12 * std::max(max_abs(), 1e-300))
                throw Error("operator flagged Hermitian deviates by " + std::to_string(dev));
        }
    }

    const HilbertSpace& space() const noexcept { return space_; }
    const SparseMatrix& entries() const noexcept { return entries_; }
    bool is_hermitian() const noexcept { return hermitian_; }

    double max_abs() const {
        double m = 0.0;
        for (Index k = 0; k < entries_.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(entries_, k); it; ++it) m = std::max(m, std::abs(it.value()));
        return m;
    }

    /// max |M - M†|
    double hermiticity_deviation() const {
        SparseMatrix diff = entries_ - SparseMatrix(entries_.adjoint());
        double m = 0.0;
        for (Index k = 0; k < diff.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(diff, k); it; ++it) m = std::max(m, std::abs(it.value()));
        return m;
    }

    OperatorMatrix adjoint() const { return OperatorMatrix(space_, SparseMatrix(entries_.adjoint()), hermitian_); }

    Vector apply(const Vector& v) const { return entries_ * v; }

    friend OperatorMatrix operator*(const OperatorMatrix& x, const OperatorMatrix& y) {
        require_same_space(x.space_, y.space_);
        return OperatorMatrix(x.space_, SparseMatrix(x.entries_ * y.entries_));
    }
    friend OperatorMatrix operator+(const OperatorMatrix& x, const OperatorMatrix& y) {
        require_same_space(x.space_, y.space_);
        return OperatorMatrix(x.space_, SparseMatrix(x.entries_ + y.entries_), x.hermitian_ && y.hermitian_);
    }
    friend OperatorMatrix operator-(const OperatorMatrix& x, const OperatorMatrix& y) {
        require_same_space(x.space_, y.space_);
        return OperatorMatrix(x.space_, SparseMatrix(x.entries_ - y.entries_), x.hermitian_ && y.hermitian_);
    }
    friend OperatorMatrix operator*(cplx s, const OperatorMatrix& x) {
        return OperatorMatrix(x.space_, SparseMatrix(s * x.entries_), x.hermitian_ && s.imag() == 0.0);
    }

private:
    HilbertSpace space_;
    SparseMatrix entries_;
    bool hermitian_;
};

namespace detail {

inline SparseMatrix sparse_identity(Index n) {
    SparseMatrix m(n, n);
    m.setIdentity();
    return m;
}

inline SparseMatrix annihilation_factor(int n_max) {
    std::vector<Eigen::Triplet<cplx>> t;
    for (int n = 1; n <= n_max; ++n) t.emplace_back(n - 1, n, std::sqrt(static_cast<double>(n)));
    SparseMatrix m(n_max + 1, n_max + 1);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

inline SparseMatrix dense_to_sparse(const AtomicMatrix& a) {
    std::vector<Eigen::Triplet<cplx>> t;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            if (a(r, c) != cplx{}) t.emplace_back(r, c, a(r, c));
    SparseMatrix m(3, 3);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

/// atom ⊗ mode_a ⊗ mode_b on the composite space.
inline SparseMatrix lift(const HilbertSpace& space, const SparseMatrix& atom, const SparseMatrix& mode_a,
                         const SparseMatrix& mode_b) {
    using Col = Eigen::SparseMatrix<cplx>;
    Col ab = Eigen::kroneckerProduct(Col(mode_a), Col(mode_b));
    Col full = Eigen::kroneckerProduct(Col(atom), ab);
    SparseMatrix out(full);
    out.prune(cplx{});
    if (out.rows() != space.dimension()) throw DimensionError("lifted operator has wrong size");
    return out;
}

}  // namespace detail

/// Raw sparse ladder matrix (a or a†) on the composite space.
inline SparseMatrix ladder_matrix(const HilbertSpace& space, Mode mode, bool dagger) {
    if (mode == Mode::b && !space.has_mode_b()) throw DimensionError("mode b requested on a single-mode space");
    SparseMatrix id_atom = detail::sparse_identity(3);
    SparseMatrix fa = mode == Mode::a ? detail::annihilation_factor(space.n_max_a())
                                      : detail::sparse_identity(space.dim_a());
    SparseMatrix fb = mode == Mode::b ? detail::annihilation_factor(*space.n_max_b())
                                      : detail::sparse_identity(space.dim_b());
    SparseMatrix m = detail::lift(space, id_atom, fa, fb);
    if (dagger) return SparseMatrix(m.adjoint());
    return m;
}

inline SparseMatrix identity_matrix(const HilbertSpace& space) { return detail::sparse_identity(space.dimension()); }

/// Arbitrary 3×3 atomic operator tensored with mode identities.
inline SparseMatrix atomic_matrix(const HilbertSpace& space, const AtomicMatrix& atom) {
    return detail::lift(space, detail::dense_to_sparse(atom), detail::sparse_identity(space.dim_a()),
                        detail::sparse_identity(space.dim_b()));
}

/// |u><v| on the atom.
inline SparseMatrix atomic_outer(const HilbertSpace& space, const AtomicVector& u, const AtomicVector& v) {
    return atomic_matrix(space, u * v.adjoint());
}

inline OperatorMatrix ladder_operator(const HilbertSpace& space, Mode mode, bool dagger) {
    return OperatorMatrix(space, ladder_matrix(space, mode, dagger));
}

inline OperatorMatrix number_operator(const HilbertSpace& space, Mode mode) {
    SparseMatrix n = ladder_matrix(space, mode, true) * ladder_matrix(space, mode, false);
    return OperatorMatrix(space, n, true);
}

/// σ_kl = |k><l| tensored with mode identities.
inline OperatorMatrix atomic_projector(const HilbertSpace& space, Level k, Level l) {
    return OperatorMatrix(space, atomic_outer(space, atomic_basis(k), atomic_basis(l)), k == l);
}

inline OperatorMatrix identity_operator(const HilbertSpace& space) {
    return OperatorMatrix(space, identity_matrix(space), true);
}

inline cplx expectation(const OperatorMatrix& op, const StateVector& psi) {
    require_same_space(op.space(), psi.space());
    return psi.amplitudes().dot(op.apply(psi.amplitudes()));
}

// ---------------------------------------------------------------------------
// Density matrices

class DensityMatrix {
public:
    struct Tolerances {
        double hermitian = 1e-12;
        double trace = 1e-9;
        double eigen_floor = 1e-9;
    };

    DensityMatrix(HilbertSpace space, DenseMatrix entries) : DensityMatrix(std::move(space), std::move(entries), Tolerances{}) {}

    DensityMatrix(HilbertSpace space, DenseMatrix entries, Tolerances tol)
        : space_(std::move(space)), entries_(std::move(entries)) {
        if (entries_.rows() != space_.dimension() || entries_.cols() != space_.dimension())
            throw DimensionError("density matrix shape does not match space dimension");
        const double herm = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
        if (herm > tol.hermitian) throw Error("density matrix not Hermitian: " + std::to_string(herm));
        const double tr = entries_.trace().real();
        if (std::abs(tr - 1.0) > tol.trace) throw Error("density matrix trace " + std::to_string(tr));
        const double lowest = min_eigenvalue();
        if (lowest < -tol.eigen_floor) throw Error("density matrix has negative eigenvalue " + std::to_string(lowest));
    }

    static DensityMatrix from_pure(const StateVector& psi) {
        const Vector& v = psi.amplitudes();
        DenseMatrix rho = v * v.adjoint();
        rho = 0.5 * (rho + rho.adjoint()).eval();
        return DensityMatrix(psi.space(), std::move(rho));
    }

    const HilbertSpace& space() const noexcept { return space_; }
    const DenseMatrix& entries() const noexcept { return entries_; }
    double trace() const { return entries_.trace().real(); }

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (entries_ + entries_.adjoint()), Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

    cplx expectation(const OperatorMatrix& op) const {
        require_same_space(op.space(), space_);
        return (op.entries() * entries_).trace();
    }

private:
    HilbertSpace space_;
    DenseMatrix entries_;
};

}  // namespace cqed
