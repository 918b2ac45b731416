#pragma once

#include <cmath>
#include <vector>

#include "qest/measurements.hpp"
#include "qest/states.hpp"
#include "qest/types.hpp"

namespace qest {

/// Low-rank description of the weak-dephasing state: an orthonormal
/// basis of the invariant subspace (3 vectors at expansion order 2,
/// 5 at order 4) and the real symmetric matrix of the state in it.
/// The basis carries all the phase dependence; the reduced matrix all
/// the dephasing dependence.
struct ReducedSystem {
    int order = 2;
    std::vector<CVector> basis;  // orthonormal vectors in the (K+1)-dim support space
    RMatrix reduced;             // (order+1) x (order+1), real symmetric
    RVector eigenvalues;         // ascending; entries zeroed when consistent with 0
    RMatrix eigenvectors;        // columns, in the reduced basis

    /// Conjugates the reduced matrix back to the support basis.
    CMatrix to_support_basis() const {
        const int d = static_cast<int>(basis.empty() ? 0 : basis.front().size());
        CMatrix out = CMatrix::Zero(d, d);
        for (std::size_t i = 0; i < basis.size(); ++i)
            for (std::size_t j = 0; j < basis.size(); ++j)
                out += reduced(i, j) * (basis[i] * basis[j].adjoint());
        return out;
    }

    /// Rebuilds the state in the support basis from the retained
    /// (nonzero) eigenpairs.
    CMatrix eigen_reconstruction() const {
        const int d = static_cast<int>(basis.empty() ? 0 : basis.front().size());
        CMatrix out = CMatrix::Zero(d, d);
        for (int a = 0; a < eigenvalues.size(); ++a) {
            if (eigenvalues(a) == 0.0) continue;
            CVector e = CVector::Zero(d);
            for (std::size_t i = 0; i < basis.size(); ++i) e += eigenvectors(i, a) * basis[i];
            out += eigenvalues(a) * (e * e.adjoint());
        }
        return out;
    }
};

namespace detail {

inline double falling_product(int first, int count) {
    double p = 1.0;
    for (int j = 0; j < count; ++j) p *= static_cast<double>(first + j);
    return p;
}

/// Polynomial weight of the i-th closed-form basis vector (1-based) at
/// support position n. The vectors themselves are c_i(n) b_n e^{2 i phi n}.
inline double small_basis_weight(int K, int index, int n) {
    const double kk = static_cast<double>(K);
    const double x = static_cast<double>(n);
    const double s2 = std::sqrt(2.0);
    switch (index) {
    case 1:
        return 1.0;
    case 2:
        return 2.0 * s2 * (x - kk / 2.0) / std::sqrt(falling_product(K, 2));
    case 3:
        return 8.0 * s2 * ((x - kk / 2.0) * (x - kk / 2.0) - kk * (kk + 1.0) / 8.0) /
               std::sqrt(falling_product(K - 1, 4));
    case 4:
        return -s2 * (kk - 2.0 * x) * (2.0 + (kk - 3.0) * kk + 16.0 * x * (x - kk)) /
               std::sqrt(falling_product(K - 2, 6));
    case 5: {
        const double poly = kk * (kk - 1.0) * (kk - 2.0) * (kk - 3.0) -
                            32.0 * kk * (2.0 + (kk - 1.0) * kk) * x +
                            32.0 * (2.0 + kk * (5.0 * kk - 1.0)) * x * x -
                            256.0 * kk * x * x * x + 128.0 * x * x * x * x;
        return s2 * poly / std::sqrt(falling_product(K - 3, 8));
    }
    default:
        throw std::invalid_argument("small_basis_weight: index must be 1..5");
    }
}

} // namespace detail

/// The index-th (1-based) closed-form orthonormal basis vector of the
/// weak-dephasing subspace, as a vector over the (K+1)-dim support basis.
inline CVector small_basis_vector(int K, double phi, int index) {
    if (index < 1 || index > 5)
        throw std::invalid_argument("small_basis_vector: index must be 1..5");
    if (K + 1 < index)
        throw std::invalid_argument("small_basis_vector: fewer dimensions than vectors");
    const std::vector<double> b = hb_coefficients(K);
    CVector v(K + 1);
    for (int n = 0; n <= K; ++n)
        v(n) = detail::small_basis_weight(K, index, n) * b[n] * std::polar(1.0, 2.0 * phi * n);
    return v;
}

/// Orthonormal basis spanning the order-2 (3 vectors) or order-4
/// (5 vectors) invariant subspace. Closed forms, then one numerical
/// re-orthonormalisation pass to remove rounding drift.
inline std::vector<CVector> gram_schmidt_basis(int K, double phi, int order) {
    if (order != 2 && order != 4)
        throw std::invalid_argument("gram_schmidt_basis: order must be 2 or 4");
    const int count = order + 1;
    if (K + 1 < count)
        throw std::invalid_argument("gram_schmidt_basis: monomial vectors are linearly dependent");
    std::vector<CVector> vs;
    vs.reserve(count);
    for (int i = 1; i <= count; ++i) vs.push_back(small_basis_vector(K, phi, i));
    for (int i = 0; i < count; ++i) { // modified Gram-Schmidt
        for (int j = 0; j < i; ++j) vs[i] -= (vs[j].adjoint() * vs[i]).value() * vs[j];
        vs[i].normalize();
    }
    return vs;
}

/// Reduced matrix of the Taylor-expanded state in the closed-form basis.
/// For K+1 below the nominal basis size the missing vectors carry zero
/// weight in the reduced matrix and are simply absent from `basis`.
inline ReducedSystem reduced_density(int K, double delta, int order) {
    if (order != 2 && order != 4)
        throw std::invalid_argument("reduced_density: order must be 2 or 4");
    if (K < 1) throw std::invalid_argument("reduced_density: K must be >= 1");
    const double d2 = delta * delta;
    const double d4 = d2 * d2;
    const double kk = static_cast<double>(K);
    const double kk1 = kk * (kk + 1.0);
    const double s2 = std::sqrt(2.0);

    ReducedSystem sys;
    sys.order = order;
    const int n = order + 1;
    sys.reduced = RMatrix::Zero(n, n);
    if (order == 2) {
        const double b11 = 1.0 - 0.5 * d2 * kk1;
        const double b13 =
            -d2 / (4.0 * s2) * std::sqrt(std::max(0.0, detail::falling_product(K - 1, 4)));
        const double b22 = 0.5 * d2 * kk1;
        sys.reduced(0, 0) = b11;
        sys.reduced(0, 2) = sys.reduced(2, 0) = b13;
        sys.reduced(1, 1) = b22;
    } else {
        const double c11 = 1.0 + d2 / 32.0 * kk1 * (-16.0 + d2 * (-2.0 + 9.0 * kk1));
        const double c13 = std::sqrt(std::max(0.0, detail::falling_product(K - 1, 4))) /
                           (8.0 * s2) * (-2.0 * d2 + d4 * (-1.0 + 2.0 * kk1));
        const double c15 =
            d4 / (64.0 * s2) * std::sqrt(std::max(0.0, detail::falling_product(K - 3, 8)));
        const double c22 = -d2 / 8.0 * kk1 * (-4.0 + d2 * (-2.0 + 3.0 * kk1));
        const double c24 =
            -d4 / 16.0 * std::sqrt(std::max(0.0, kk1 * detail::falling_product(K - 2, 6)));
        const double c33 = 3.0 * d4 / 32.0 * detail::falling_product(K - 1, 4);
        sys.reduced(0, 0) = c11;
        sys.reduced(0, 2) = sys.reduced(2, 0) = c13;
        sys.reduced(0, 4) = sys.reduced(4, 0) = c15;
        sys.reduced(1, 1) = c22;
        sys.reduced(1, 3) = sys.reduced(3, 1) = c24;
        sys.reduced(2, 2) = c33;
    }
    const int count = std::min(n, K + 1);
    sys.basis.reserve(count);
    for (int i = 1; i <= count; ++i) sys.basis.push_back(small_basis_vector(K, 0.0, i));
    for (int i = 0; i < count; ++i) {
        for (int j = 0; j < i; ++j)
            sys.basis[i] -= (sys.basis[j].adjoint() * sys.basis[i]).value() * sys.basis[j];
        sys.basis[i].normalize();
    }
    return sys;
}

/// Eigensystem of the reduced matrix. Solved numerically; roots whose
/// magnitude is consistent with zero at the truncation order,
/// |E| <= 10 delta^{order+2}, are set to exactly zero.
inline ReducedSystem small_eigensystem(int K, double delta, int order) {
    ReducedSystem sys = reduced_density(K, delta, order);
    Eigen::SelfAdjointEigenSolver<RMatrix> es(sys.reduced);
    sys.eigenvalues = es.eigenvalues();
    sys.eigenvectors = es.eigenvectors();
    const double zero_scale = 10.0 * std::pow(delta, order + 2);
    for (int i = 0; i < sys.eigenvalues.size(); ++i)
        if (std::abs(sys.eigenvalues(i)) <= zero_scale) sys.eigenvalues(i) = 0.0;
    return sys;
}

/// Closed-form information matrix in the weak-dephasing regime:
/// H11 = q - q^2 delta^2 and H22 = q - q^2 delta^2 / 2 with q = 2K(K+1).
inline FisherMatrix qfi_small_delta(int K, double delta) {
    if (K < 1) throw std::invalid_argument("qfi_small_delta: K must be >= 1");
    if (delta < 0.0) throw std::invalid_argument("qfi_small_delta: delta must be >= 0");
    const double q = 2.0 * K * (K + 1.0);
    FisherMatrix h;
    h.phase = q - q * q * delta * delta;
    h.diffusion = q - 0.5 * q * q * delta * delta;
    h.cross = 0.0;
    return h;
}

/// Raw validity scale of the weak-dephasing expansion; the expansion
/// needs delta well below the returned value. The order-4 truncation
/// carries an extra 3/2 inside the square, hence the sqrt(2/3) factor.
inline double validity_small(int K, int order = 2) {
    if (K < 1) throw std::invalid_argument("validity_small: K must be >= 1");
    if (order == 2) return 1.0 / K;
    if (order == 4) return std::sqrt(2.0 / 3.0) / K;
    throw std::invalid_argument("validity_small: order must be 2 or 4");
}

/// The two ratios of the weak-dephasing joint bound, reported separately:
/// the phase share carries no delta factor, the diffusion share an
/// explicit delta^2, so a dephasing-independent family loses the
/// diffusion share as delta -> 0.
struct SmallTradeoffTerms {
    double phase_ratio = 0.0;     // F11 / H11 in the small-delta limit
    double diffusion_ratio = 0.0; // F22 / H22, explicit delta^2 prefactor
    double total() const { return phase_ratio + diffusion_ratio; }
};

/// Evaluates the closed-form weak-dephasing bound of a projector family
/// over the (K+1)-dim support basis at finite delta. Outcomes whose
/// limiting probability is below the floor are skipped.
inline SmallTradeoffTerms tradeoff_small(const ProjectivePOVM &povm, int K, double phi,
                                         double delta) {
    if (povm.dim() != K + 1)
        throw std::invalid_argument("tradeoff_small: POVM dimension must be K+1");
    if (completeness_error(povm.vectors) > 1e-6)
        throw std::invalid_argument("tradeoff_small: POVM is not complete");
    const std::vector<double> b = hb_coefficients(K);
    double phase_sum = 0.0, diff_sum = 0.0;
    for (int y = 0; y < povm.outcomes(); ++y) {
        // Moments of w_n exp(i u_n) with w_n = r_{y,n} b_n and
        // u_n = X_{y,n} - 2 phi n; the pair sums over (n, n') collapse
        // onto them.
        Complex p(0.0, 0.0), q(0.0, 0.0), t(0.0, 0.0);
        for (int n = 0; n <= K; ++n) {
            const Complex c = povm.vectors(n, y);
            const Complex z = std::abs(c) * b[n] *
                              std::polar(1.0, std::arg(c) - 2.0 * phi * n);
            p += z;
            q += static_cast<double>(n) * z;
            t += static_cast<double>(n) * static_cast<double>(n) * z;
        }
        const double denom = std::norm(p);
        if (denom < probability_floor) continue;
        const double s1 = 2.0 * (std::conj(q) * p).imag();
        const double s2 = 2.0 * (std::conj(t) * p).real() - 2.0 * std::norm(q);
        phase_sum += s1 * s1 / denom;
        diff_sum += s2 * s2 / denom;
    }
    const double q2k = 2.0 / (K * (K + 1.0));
    SmallTradeoffTerms out;
    out.phase_ratio = q2k * phase_sum;
    out.diffusion_ratio = q2k * 4.0 * delta * delta * diff_sum;
    return out;
}

} // namespace qest
