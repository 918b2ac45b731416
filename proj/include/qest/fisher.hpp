#pragma once

#include <array>
#include <cmath>

#include "qest/states.hpp"
#include "qest/types.hpp"

namespace qest {

/// Symmetric logarithmic derivatives for the two parameters, together
/// with the eigenvalue cutoff used by the pseudo-inverse solve.
struct SLDPair {
    CMatrix phase;     // L_1, conjugate to phi
    CMatrix diffusion; // L_2, conjugate to delta
    double cutoff_used = 0.0;
};

namespace detail {

inline void require_hermitian(const CMatrix &m, const char *who) {
    if (m.rows() != m.cols() || max_abs(m - m.adjoint()) > 1e-10)
        throw std::invalid_argument(std::string(who) + ": matrix is not Hermitian");
}

} // namespace detail

/// Solves L rho + rho L = 2 drho for Hermitian L by working in the
/// eigenbasis of rho. Eigenvalue pairs with E_m + E_n <= cutoff are
/// treated as the null space and the corresponding components of L are
/// set to zero (pseudo-inverse convention). A negative cutoff selects
/// the default 1e-12 * max eigenvalue.
///
/// Throws numerical_error if the residual of the solved equation,
/// restricted to the subspace where rho has weight above the cutoff,
/// exceeds 1e-8.
inline CMatrix solve_sld(const CMatrix &rho, const CMatrix &drho, double cutoff = -1.0) {
    detail::require_hermitian(rho, "solve_sld(rho)");
    detail::require_hermitian(drho, "solve_sld(drho)");
    if (rho.rows() != drho.rows())
        throw std::invalid_argument("solve_sld: rho and drho dimensions differ");

    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho);
    const RVector &evals = es.eigenvalues();
    const CMatrix &V = es.eigenvectors();
    const int d = static_cast<int>(evals.size());
    if (cutoff < 0.0) cutoff = 1e-12 * std::max(evals.maxCoeff(), 0.0);

    CMatrix m = V.adjoint() * drho * V;
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            const double s = evals(a) + evals(b);
            m(a, b) = (s > cutoff) ? 2.0 * m(a, b) / s : Complex(0.0, 0.0);
        }
    CMatrix L = V * m * V.adjoint();
    hermitize(L);

    // Residual on the populated subspace of rho.
    std::vector<int> kept;
    for (int a = 0; a < d; ++a)
        if (evals(a) > cutoff) kept.push_back(a);
    if (!kept.empty()) {
        CMatrix Vs(d, static_cast<int>(kept.size()));
        for (std::size_t c = 0; c < kept.size(); ++c) Vs.col(c) = V.col(kept[c]);
        const CMatrix resid = Vs.adjoint() * (L * rho + rho * L - 2.0 * drho) * Vs;
        const double r = max_abs(resid);
        if (r > 1e-8) throw numerical_error("solve_sld: residual above tolerance", r);
    }
    return L;
}

/// Both SLDs of the evolved probe at (phi, delta).
inline SLDPair sld_pair(const ProbeState &state, double phi, double delta, double cutoff = -1.0) {
    const DensityMatrix rho = evolve(state, phi, delta);
    const RhoDerivatives dr = state_derivatives(state, phi, delta);
    if (cutoff < 0.0) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.entries, Eigen::EigenvaluesOnly);
        cutoff = 1e-12 * std::max(es.eigenvalues().maxCoeff(), 0.0);
    }
    SLDPair out;
    out.phase = solve_sld(rho.entries, dr.phase, cutoff);
    out.diffusion = solve_sld(rho.entries, dr.diffusion, cutoff);
    out.cutoff_used = cutoff;
    return out;
}

namespace detail {

/// Variance of the particle-number label under |a_n|^2. Equals a quarter
/// of the pure-state phase information, and also the delta -> 0 limit of
/// a quarter of the diffusion information.
inline double label_variance(const ProbeState &state) {
    double mean = 0.0, second = 0.0;
    for (int i = 0; i < state.support_size(); ++i) {
        const double p = std::norm(state.support_amplitude(i));
        const double n = static_cast<double>(state.support[i]);
        mean += p * n;
        second += p * n * n;
    }
    return second - mean * mean;
}

} // namespace detail

/// Quantum Fisher information matrix of the evolved probe, from the SLD
/// solves: H_ij = Re Tr[rho L_i L_j].
///
/// For delta below 1e-6 the diffusion entry is the analytic limit
/// 4 Var(n); the direct solve degenerates there because both drho and
/// the populated part of the spectrum vanish together.
inline FisherMatrix qfi_matrix(const ProbeState &state, double phi, double delta,
                               double cutoff = -1.0) {
    if (delta < 0.0) throw std::invalid_argument("qfi_matrix: delta must be >= 0");
    const DensityMatrix rho = evolve(state, phi, delta);
    const RhoDerivatives dr = state_derivatives(state, phi, delta);

    FisherMatrix h;
    const CMatrix L1 = solve_sld(rho.entries, dr.phase, cutoff);
    h.phase = (rho.entries * L1 * L1).trace().real();
    if (delta < 1e-6) {
        h.diffusion = 4.0 * detail::label_variance(state);
        h.cross = 0.0;
    } else {
        const CMatrix L2 = solve_sld(rho.entries, dr.diffusion, cutoff);
        h.diffusion = (rho.entries * L2 * L2).trace().real();
        h.cross = (rho.entries * L1 * L2).trace().real();
    }
    return h;
}

/// Fisher information from an explicit eigensystem of rho and the
/// parameter derivatives of its eigenvalues and eigenvectors:
///
///   H_ij = sum_n dE_n^i dE_n^j / E_n
///        + 4 Re sum_{n,m} E_m (E_n-E_m)^2/(E_n+E_m)^2
///                          <e_n|de_m^i><de_m^j|e_n>
///
/// Terms with E_n + E_m <= cutoff (and single-sum terms with
/// E_n <= cutoff) are skipped.
inline FisherMatrix qfi_from_eigensystem(const RVector &eigenvalues, const CMatrix &eigenvectors,
                                         const std::array<RVector, 2> &deigenvalues,
                                         const std::array<CMatrix, 2> &deigenvectors,
                                         double cutoff = 0.0) {
    const int d = static_cast<int>(eigenvalues.size());
    if (eigenvectors.cols() != d || eigenvectors.rows() != d)
        throw std::invalid_argument("qfi_from_eigensystem: eigenvector matrix shape mismatch");
    for (int i = 0; i < 2; ++i)
        if (deigenvalues[i].size() != d || deigenvectors[i].rows() != eigenvectors.rows() ||
            deigenvectors[i].cols() != d)
            throw std::invalid_argument("qfi_from_eigensystem: derivative shape mismatch");
    if (eigenvalues.minCoeff() < -1e-10)
        throw std::invalid_argument("qfi_from_eigensystem: negative eigenvalue");
    if (max_abs(eigenvectors.adjoint() * eigenvectors - CMatrix::Identity(d, d)) > 1e-10)
        throw std::invalid_argument("qfi_from_eigensystem: eigenvectors not orthonormal");

    // overlaps(i)(n,m) = <e_n | d_i e_m>
    const CMatrix ov1 = eigenvectors.adjoint() * deigenvectors[0];
    const CMatrix ov2 = eigenvectors.adjoint() * deigenvectors[1];

    FisherMatrix h;
    Complex cross(0.0, 0.0);
    for (int n = 0; n < d; ++n) {
        if (eigenvalues(n) > cutoff) {
            h.phase += deigenvalues[0](n) * deigenvalues[0](n) / eigenvalues(n);
            h.diffusion += deigenvalues[1](n) * deigenvalues[1](n) / eigenvalues(n);
            cross += deigenvalues[0](n) * deigenvalues[1](n) / eigenvalues(n);
        }
        for (int m = 0; m < d; ++m) {
            const double s = eigenvalues(n) + eigenvalues(m);
            if (s <= cutoff || n == m) continue;
            const double w = eigenvalues(m) * (eigenvalues(n) - eigenvalues(m)) *
                             (eigenvalues(n) - eigenvalues(m)) / (s * s);
            h.phase += 4.0 * w * (ov1(n, m) * std::conj(ov1(n, m))).real();
            h.diffusion += 4.0 * w * (ov2(n, m) * std::conj(ov2(n, m))).real();
            cross += 4.0 * w * ov1(n, m) * std::conj(ov2(n, m));
        }
    }
    h.cross = cross.real();
    return h;
}

/// Magnitude of Tr[rho [L_1, L_2]], the saturability diagnostic for
/// jointly attaining both single-parameter bounds.
inline double weak_commutativity(const DensityMatrix &rho, const SLDPair &slds) {
    if (slds.phase.rows() != rho.dim() || slds.diffusion.rows() != rho.dim())
        throw std::invalid_argument("weak_commutativity: dimension mismatch");
    const Complex t =
        (rho.entries * (slds.phase * slds.diffusion - slds.diffusion * slds.phase)).trace();
    return std::abs(t);
}

} // namespace qest
