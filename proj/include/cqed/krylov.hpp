#pragma once

// Propagators for exp(-iHt)v with Hermitian sparse H: Lanczos and Chebyshev.

#include <algorithm>
#include <cmath>
#include <vector>

#include "cqed/fockspace.hpp"

namespace cqed {

struct KrylovOptions {
    int max_dim = 30;
    /// Error budget for the whole propagation, relative to ‖v‖.
    double tol = 1e-12;
    long max_substeps = 2'000'000;
};

namespace detail {

inline constexpr double kEps = 2.220446049250313e-16;

inline double inf_norm(const SparseMatrix& h) {
    double best = 0.0;
    for (Index r = 0; r < h.outerSize(); ++r) {
        double row = 0.0;
        for (SparseMatrix::InnerIterator it(h, r); it; ++it) row += std::abs(it.value());
        best = std::max(best, row);
    }
    return best;
}

}  // namespace detail

/// exp(-i H t) v. H must be Hermitian; substeps are chosen adaptively so the
/// accumulated local error estimate stays below opts.tol·‖v‖.
inline Vector krylov_expmv(const SparseMatrix& h, const Vector& v, double t, const KrylovOptions& opts = {}) {
    if (h.rows() != h.cols() || h.cols() != v.size()) throw DimensionError("expmv: shape mismatch");
    const double beta0 = v.norm();
    if (t == 0.0 || beta0 == 0.0) return v;

    const Index n = v.size();
    const double hnorm = detail::inf_norm(h);
    if (hnorm == 0.0) return v;

    const int m_max = static_cast<int>(std::min<Index>(opts.max_dim, n));
    const double direction = t > 0 ? 1.0 : -1.0;
    const double total = std::abs(t);

    Vector w = v;
    double done = 0.0;
    double dt = std::min(total, 0.5 * m_max / hnorm);
    long steps = 0;

    std::vector<Vector> basis;
    basis.reserve(m_max + 2);
    std::vector<double> alpha, offdiag;

    while (done < total) {
        if (++steps > opts.max_substeps)
            throw ConvergenceError("Krylov propagation exceeded substep budget", done / total);

        const double beta = w.norm();
        basis.clear();
        alpha.clear();
        offdiag.clear();
        basis.push_back(w / beta);

        // Lanczos with full reorthogonalisation; one extra vector for the error estimate.
        bool breakdown = false;
        int m = 0;
        for (int j = 0; j <= m_max; ++j) {
            Vector u = h * basis[j];
            const double a = basis[j].dot(u).real();
            alpha.push_back(a);
            u -= a * basis[j];
            if (j > 0) u -= offdiag[j - 1] * basis[j - 1];
            for (int pass = 0; pass < 2; ++pass)
                for (int k = 0; k <= j; ++k) u -= basis[k].dot(u) * basis[k];
            const double b = u.norm();
            m = j + 1;
            if (b <= 1e-13 * hnorm) {
                breakdown = true;
                break;
            }
            if (j == m_max) break;
            offdiag.push_back(b);
            basis.push_back(u / b);
        }

        // m is the tridiagonal size used for the step (includes the extra vector when available).
        Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
        Eigen::VectorXd sub = m > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(offdiag.data(), m - 1))
                                    : Eigen::VectorXd();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        const Eigen::MatrixXd& q = es.eigenvectors();
        const Eigen::VectorXd& lam = es.eigenvalues();

        if (breakdown) dt = total - done;

        for (;;) {
            const double step = std::min(dt, total - done);
            Vector coeff(m);
            Vector phase(m);
            for (int k = 0; k < m; ++k) phase(k) = std::exp(-I * (direction * step * lam(k))) * q(0, k);
            coeff = q.cast<cplx>() * phase;

            const double err = breakdown ? 0.0 : beta * std::abs(coeff(m - 1));
            // proportional share of the budget, floored above round-off so long runs do not stall
            const double budget = std::max(opts.tol * beta0 * step / total, 64.0 * detail::kEps * beta0);
            if (err <= budget || step <= 1e-14 * total) {
                Vector next = Vector::Zero(n);
                for (int k = 0; k < m; ++k) next += coeff(k) * basis[k];
                w = beta * next;
                done += step;
                if (!breakdown) {
                    const double grow = err > 0 ? 0.9 * std::pow(budget / err, 1.0 / m) : 5.0;
                    dt = step * std::clamp(grow, 0.2, 5.0);
                }
                break;
            }
            dt = step * std::clamp(0.9 * std::pow(budget / err, 1.0 / m), 0.1, 0.9);
        }
    }
    return w;
}

namespace detail {

/// J_0(x) .. J_kmax(x) for x > 0 by Miller's backward recurrence, normalised with
/// J_0 + 2 Σ J_2k = 1.
inline std::vector<double> bessel_j_table(int kmax, double x) {
    const int start = kmax + 20 + static_cast<int>(std::sqrt(40.0 * (kmax + 1)));
    std::vector<double> j(start + 2, 0.0);
    j[start + 1] = 0.0;
    j[start] = 1e-280;
    for (int k = start; k >= 1; --k) {
        j[k - 1] = 2.0 * k / x * j[k] - j[k + 1];
        if (std::abs(j[k - 1]) > 1e250)
            for (int q = k - 1; q <= start; ++q) j[q] *= 1e-250;
    }
    double norm = j[0];
    for (int k = 2; k <= start; k += 2) norm += 2.0 * j[k];
    j.resize(kmax + 1);
    for (double& v : j) v /= norm;
    return j;
}

}  // namespace detail

/// exp(-i H t) v by a Chebyshev series on the Gershgorin interval of H. Costs about
/// (spectral half-width)·|t| products with H, no inner products, so it is the cheaper
/// choice for large stiff problems. Substeps keep the Bessel argument at most `chunk`.
inline Vector chebyshev_expmv(const SparseMatrix& h, const Vector& v, double t, double tol = 1e-12,
                              double chunk = 100.0) {
    if (h.rows() != h.cols() || h.cols() != v.size()) throw DimensionError("expmv: shape mismatch");
    if (t == 0.0 || v.norm() == 0.0) return v;
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (Index r = 0; r < h.outerSize(); ++r) {
        double centre = 0.0, radius = 0.0;
        for (SparseMatrix::InnerIterator it(h, r); it; ++it) {
            if (it.col() == r) centre = it.value().real();
            else radius += std::abs(it.value());
        }
        lo = first ? centre - radius : std::min(lo, centre - radius);
        hi = first ? centre + radius : std::max(hi, centre + radius);
        first = false;
    }
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    if (half == 0.0) return std::exp(-I * (mid * t)) * v;

    const long pieces = std::max<long>(1, static_cast<long>(std::ceil(half * std::abs(t) / chunk)));
    const double dt = t / static_cast<double>(pieces);
    const double x = half * std::abs(dt);
    const double sign = dt > 0 ? 1.0 : -1.0;
    int kmax = static_cast<int>(x + 10.0 * std::cbrt(x) + 30.0);
    const auto bj = detail::bessel_j_table(kmax, x);
    while (kmax > static_cast<int>(x) + 1 && std::abs(bj[kmax]) < 1e-3 * tol) --kmax;

    // (-i sign)^k pattern of the expansion coefficients
    std::vector<cplx> coeff(kmax + 1);
    for (int k = 0; k <= kmax; ++k) {
        cplx ph = std::pow(cplx(0.0, -sign), k);
        coeff[k] = (k == 0 ? 1.0 : 2.0) * bj[k] * ph;
    }
    const cplx global = std::exp(-I * (mid * dt));
    const double scale = 1.0 / half;

    Vector w = v;
    Vector t0(v.size()), t1(v.size()), t2(v.size()), acc(v.size());
    for (long p = 0; p < pieces; ++p) {
        t0 = w;
        t1.noalias() = h * w;
        t1 = scale * (t1 - mid * w);
        acc = coeff[0] * t0 + coeff[1] * t1;
        for (int k = 2; k <= kmax; ++k) {
            t2.noalias() = h * t1;
            t2 = (2.0 * scale) * (t2 - mid * t1) - t0;
            acc += coeff[k] * t2;
            t0.swap(t1);
            t1.swap(t2);
        }
        w = global * acc;
    }
    return w;
}

/// Picks Chebyshev for large problems with many oscillation periods, Lanczos otherwise.
inline Vector expmv(const SparseMatrix& h, const Vector& v, double t, const KrylovOptions& opts = {}) {
    const double phase = detail::inf_norm(h) * std::abs(t);
    if (v.size() > 2000 && phase > 10.0) return chebyshev_expmv(h, v, t, opts.tol);
    return krylov_expmv(h, v, t, opts);
}

}  // namespace cqed
