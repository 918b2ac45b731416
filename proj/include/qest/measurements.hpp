#pragma once

#include <cmath>
#include <numbers>

#include "qest/states.hpp"
#include "qest/types.hpp"

namespace qest {

/// Outcomes with probability below this floor are dropped from Fisher
/// information sums; their contribution has a removable singularity.
inline constexpr double probability_floor = 1e-14;

/// Complete family of orthonormal rank-1 projectors. Column y of
/// `vectors` is the outcome vector |v_y>; the family is square, so
/// completeness makes the matrix unitary.
struct ProjectivePOVM {
    CMatrix vectors;

    int dim() const { return static_cast<int>(vectors.rows()); }
    int outcomes() const { return static_cast<int>(vectors.cols()); }
};

/// Max-norm deviation of sum_y |v_y><v_y| from the identity.
inline double completeness_error(const CMatrix &vectors) {
    const int d = static_cast<int>(vectors.rows());
    return max_abs(vectors * vectors.adjoint() - CMatrix::Identity(d, d));
}

/// Validates a projector family. Deviations up to 1e-6 are repaired by
/// re-orthonormalisation (also forced by `reorthonormalize`); anything
/// worse is rejected.
inline ProjectivePOVM make_povm(const CMatrix &vectors, bool reorthonormalize = false) {
    if (vectors.rows() != vectors.cols())
        throw std::invalid_argument("make_povm: need exactly dim outcome vectors");
    const double dev = completeness_error(vectors);
    if (dev > 1e-6)
        throw std::invalid_argument("make_povm: completeness violated by " + std::to_string(dev));
    ProjectivePOVM povm{vectors};
    if (reorthonormalize || dev > 1e-10) {
        Eigen::HouseholderQR<CMatrix> qr(vectors);
        CMatrix q = qr.householderQ() * CMatrix::Identity(vectors.rows(), vectors.cols());
        const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (int j = 0; j < q.cols(); ++j) {
            const Complex rj = r(j, j);
            if (std::abs(rj) > 0.0) q.col(j) *= rj / std::abs(rj);
        }
        povm.vectors = q;
    }
    return povm;
}

/// Outcome distribution p_y = <v_y| rho |v_y>, clamped at zero.
inline RVector probabilities(const ProjectivePOVM &povm, const DensityMatrix &rho) {
    if (povm.dim() != rho.dim())
        throw std::invalid_argument("probabilities: dimension mismatch");
    RVector p(povm.outcomes());
    for (int y = 0; y < povm.outcomes(); ++y) {
        const auto v = povm.vectors.col(y);
        p(y) = std::max(0.0, (v.adjoint() * rho.entries * v).value().real());
    }
    return p;
}

/// Classical Fisher information of the outcome distribution,
/// F_ij = sum_y (d_i p_y)(d_j p_y) / p_y, with analytic derivatives of
/// the evolved state.
inline FisherMatrix classical_fisher(const ProjectivePOVM &povm, const ProbeState &state,
                                     double phi, double delta) {
    const DensityMatrix rho = evolve(state, phi, delta);
    if (povm.dim() != rho.dim())
        throw std::invalid_argument("classical_fisher: dimension mismatch");
    const RhoDerivatives dr = state_derivatives(state, phi, delta);
    FisherMatrix f;
    for (int y = 0; y < povm.outcomes(); ++y) {
        const auto v = povm.vectors.col(y);
        const double p = (v.adjoint() * rho.entries * v).value().real();
        if (p < probability_floor) continue;
        const double d1 = (v.adjoint() * dr.phase * v).value().real();
        const double d2 = (v.adjoint() * dr.diffusion * v).value().real();
        f.phase += d1 * d1 / p;
        f.diffusion += d2 * d2 / p;
        f.cross += d1 * d2 / p;
    }
    return f;
}

/// Joint-attainability figure of merit F11/H11 + F22/H22; at most 2,
/// reached only when both parameters are estimated at the quantum limit.
/// The cross entries do not enter: the quantum matrix is diagonal here.
inline double tradeoff(const FisherMatrix &f, const FisherMatrix &h) {
    if (h.phase <= 0.0 || h.diffusion <= 0.0)
        throw std::invalid_argument("tradeoff: quantum information diagonal must be positive");
    return f.phase / h.phase + f.diffusion / h.diffusion;
}

/// Phase-state measurement discretised to K+1 projective outcomes over
/// the even support basis: (v_y)_n = exp(i n y_m) / sqrt(K+1) with
/// y_m = 2 pi (m + 1/2) / (K+1).
///
/// The half-step grid offset keeps every outcome away from the symmetry
/// point of the zero-phase distribution; the aligned grid parks one
/// projector exactly there and its phase sensitivity collapses.
inline ProjectivePOVM canonical_phase_povm(int K) {
    if (K < 1) throw std::invalid_argument("canonical_phase_povm: K must be >= 1");
    const int d = K + 1;
    const double w = 1.0 / std::sqrt(static_cast<double>(d));
    CMatrix v(d, d);
    for (int m = 0; m < d; ++m) {
        const double y = 2.0 * std::numbers::pi * (m + 0.5) / d;
        for (int n = 0; n < d; ++n) v(n, m) = w * std::polar(1.0, n * y);
    }
    return ProjectivePOVM{std::move(v)};
}

} // namespace qest
