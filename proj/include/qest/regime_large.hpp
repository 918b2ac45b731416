#pragma once

#include <cmath>
#include <numbers>
#include <unordered_map>

#include "qest/fisher.hpp"
#include "qest/measurements.hpp"
#include "qest/states.hpp"
#include "qest/types.hpp"

namespace qest {

/// Closed-form summary of the strong-dephasing regime at one (state, delta).
struct LargeDeltaReport {
    double h11 = 0.0;
    double h22 = 0.0;
    double delta_threshold = 0.0; // validity onset for the chosen error budget
    double error_budget = 0.0;    // f, allowed relative truncation error
    double sum_A = 0.0;           // shared harmonic sum, at most 1/2
};

/// A = sum_n |a_n|^2 |a_{n-k}|^2 / (|a_n|^2 + |a_{n-k}|^2) over pairs of
/// support indices a step k apart. Bounded by 1/2 for any normalised
/// amplitude vector.
inline double offdiag_harmonic_sum(const ProbeState &state) {
    const int k = state.offdiag_step;
    std::unordered_map<int, int> pos;
    for (int i = 0; i < state.support_size(); ++i) pos[state.support[i]] = i;
    double a = 0.0;
    for (int i = 0; i < state.support_size(); ++i) {
        const auto it = pos.find(state.support[i] - k);
        if (it == pos.end()) continue;
        const double pn = std::norm(state.support_amplitude(i));
        const double pm = std::norm(state.support_amplitude(it->second));
        a += pn * pm / (pn + pm);
    }
    return a;
}

/// Closed-form information matrix in the strong-dephasing regime:
/// H11 = 4 k^2 x^{4k^2} A and H22 = k^2 delta^2 H11, with
/// x = exp(-delta^2/4).
inline FisherMatrix qfi_large_delta(const ProbeState &state, double delta) {
    if (delta <= 0.0) throw std::invalid_argument("qfi_large_delta: delta must be > 0");
    const double k = static_cast<double>(state.offdiag_step);
    const double a = offdiag_harmonic_sum(state);
    const double damp = std::exp(-k * k * delta * delta); // x^{4k^2}
    FisherMatrix h;
    h.phase = 4.0 * k * k * damp * a;
    h.diffusion = k * k * delta * delta * h.phase;
    h.cross = 0.0;
    return h;
}

/// Validity onset of the truncation for a generic probe with first
/// contributing off-diagonal k: delta >= sqrt(2/(k+1)^2 ln(2K/f)).
inline double delta_threshold(int K, int k, double f) {
    if (f <= 0.0 || f >= 1.0) throw std::invalid_argument("delta_threshold: f must be in (0,1)");
    if (K < 1 || k < 1) throw std::invalid_argument("delta_threshold: K and k must be >= 1");
    return detail::truncation_delta_scale(K, k, f);
}

/// Validity onset for the two-Fock-interference probe, whose first
/// neglected off-diagonal sits two steps out: delta >= sqrt(ln(K/f)/8).
inline double delta_threshold_hb(int K, double f) {
    if (f <= 0.0 || f >= 1.0)
        throw std::invalid_argument("delta_threshold_hb: f must be in (0,1)");
    if (K < 1) throw std::invalid_argument("delta_threshold_hb: K must be >= 1");
    return std::sqrt(0.125 * std::log(K / f));
}

/// Tighter, amplitude-aware validity onset. The neglected mass is bounded
/// by x^{2 d_min^2} * S with d_min the smallest contributing label
/// distance beyond k and S the total neglected amplitude product.
inline double delta_threshold(const ProbeState &state, double f) {
    if (f <= 0.0 || f >= 1.0) throw std::invalid_argument("delta_threshold: f must be in (0,1)");
    const int k = state.offdiag_step;
    int dmin = 0;
    double s = 0.0;
    for (int i = 0; i < state.support_size(); ++i)
        for (int j = 0; j < state.support_size(); ++j) {
            const int g = std::abs(state.support[i] - state.support[j]);
            if (g == 0 || g == k) continue;
            s += std::abs(state.support_amplitude(i)) * std::abs(state.support_amplitude(j));
            dmin = (dmin == 0) ? g : std::min(dmin, g);
        }
    if (dmin == 0 || s <= f) return 0.0; // nothing is ever neglected
    return std::sqrt(2.0 / (dmin * dmin) * std::log(s / f));
}

inline LargeDeltaReport large_delta_report(const ProbeState &state, double delta,
                                           double f = 0.05) {
    const FisherMatrix h = qfi_large_delta(state, delta);
    LargeDeltaReport rep;
    rep.h11 = h.phase;
    rep.h22 = h.diffusion;
    rep.sum_A = offdiag_harmonic_sum(state);
    rep.error_budget = f;
    rep.delta_threshold = delta_threshold(state, f);
    return rep;
}

/// Closed-form SLDs valid in the strong-dephasing regime. Both live on
/// the +-k off-diagonals only; in the phase-absorbed basis the phase SLD
/// is imaginary antisymmetric and the diffusion SLD real symmetric.
inline SLDPair sld_large_delta(const ProbeState &state, double phi, double delta) {
    if (delta <= 0.0) throw std::invalid_argument("sld_large_delta: delta must be > 0");
    const double k = static_cast<double>(state.offdiag_step);
    const double damp = std::exp(-0.5 * k * k * delta * delta); // x^{2k^2}
    const int d = state.support_size();
    SLDPair out;
    out.phase = CMatrix::Zero(d, d);
    out.diffusion = CMatrix::Zero(d, d);
    out.cutoff_used = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const int g = state.support[i] - state.support[j];
            if (std::abs(g) != state.offdiag_step) continue;
            const Complex amp =
                state.support_amplitude(i) * std::conj(state.support_amplitude(j));
            const double wsum = std::norm(state.support_amplitude(i)) +
                                std::norm(state.support_amplitude(j));
            const Complex base = amp / wsum * std::polar(damp, phi * g);
            out.phase(i, j) = Complex(0.0, 2.0 * g) * base;
            out.diffusion(i, j) = -2.0 * k * k * delta * base;
        }
    return out;
}

/// Projective family maximising the joint bound under strong dephasing:
/// equal magnitudes 1/sqrt(D) on the support and phases linear across
/// support positions, X_{y,j} = theta_j - 2 pi y j / D. The linear phase
/// makes the off-diagonal angle identical for every term of an outcome,
/// and the Fourier constants make the family complete.
inline ProjectivePOVM optimal_povm_large(const ProbeState &state) {
    if (!state.uniform_support())
        throw std::invalid_argument("optimal_povm_large: support gaps must all equal k");
    const int d = state.support_size();
    const double w = 1.0 / std::sqrt(static_cast<double>(d));
    CMatrix v(d, d);
    for (int y = 0; y < d; ++y)
        for (int j = 0; j < d; ++j) {
            const double theta = std::arg(state.support_amplitude(j));
            const double x = theta - 2.0 * std::numbers::pi * y * j / d;
            v(j, y) = w * std::polar(1.0, x);
        }
    return ProjectivePOVM{std::move(v)};
}

/// Joint information bound reached by optimal_povm_large under strong
/// dephasing: (sum |a_n||a_{n-k}|)^2 / A. Lies in (0, 2] and equals 2
/// exactly when all adjacent support magnitudes match.
inline double tradeoff_large_analytic(const ProbeState &state) {
    if (!state.uniform_support())
        throw std::invalid_argument("tradeoff_large_analytic: support gaps must all equal k");
    const int k = state.offdiag_step;
    std::unordered_map<int, int> pos;
    for (int i = 0; i < state.support_size(); ++i) pos[state.support[i]] = i;
    double num = 0.0;
    for (int i = 0; i < state.support_size(); ++i) {
        const auto it = pos.find(state.support[i] - k);
        if (it == pos.end()) continue;
        num += std::abs(state.support_amplitude(i)) *
               std::abs(state.support_amplitude(it->second));
    }
    const double a = offdiag_harmonic_sum(state);
    if (a <= 0.0)
        throw std::invalid_argument("tradeoff_large_analytic: no contributing off-diagonal");
    return num * num / a;
}

} // namespace qest
