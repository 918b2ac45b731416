#pragma once

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <utility>
#include <vector>

#include "qest/types.hpp"

namespace qest {

/// Pure two-mode state with fixed total particle number 2K,
/// |psi> = sum_n a_n |n, 2K-n>, n = 0..2K.
struct ProbeState {
    int half_number = 0;             // K; the total particle number is 2K
    std::vector<Complex> amplitudes; // a_n, indexed by n = 0..2K
    int offdiag_step = 1;            // k, gap to the first contributing off-diagonal
    std::vector<int> support;        // indices n with a_n != 0, ascending

    int support_size() const { return static_cast<int>(support.size()); }
    Complex support_amplitude(int i) const { return amplitudes[support[i]]; }

    /// True when consecutive support indices are all offdiag_step apart.
    bool uniform_support() const {
        for (std::size_t i = 1; i < support.size(); ++i)
            if (support[i] - support[i - 1] != offdiag_step) return false;
        return true;
    }
};

/// Mixed state over the support basis of the probe that produced it.
/// basis_labels[i] is the particle-number index n of basis vector i.
struct DensityMatrix {
    CMatrix entries;
    std::vector<int> basis_labels;
    double phi = 0.0;
    double delta = 0.0;

    int dim() const { return static_cast<int>(entries.rows()); }
};

/// Parameter derivatives of an evolved density matrix, in the same
/// support basis as the matrix itself.
struct RhoDerivatives {
    CMatrix phase;     // d rho / d phi
    CMatrix diffusion; // d rho / d delta
};

/// Interference coefficients of two equal Fock inputs: the state
/// sum_m b_m |2m, 2K-2m> with b_m = sqrt((2m)!(2K-2m)!)/(2^K m!(K-m)!).
/// Evaluated in log space so K up to a few thousand stays finite.
inline std::vector<double> hb_coefficients(int K) {
    if (K < 1) throw std::invalid_argument("hb_coefficients: K must be >= 1");
    std::vector<double> logs(K + 1);
    for (int m = 0; m <= K; ++m) {
        logs[m] = 0.5 * (std::lgamma(2.0 * m + 1.0) + std::lgamma(2.0 * (K - m) + 1.0)) -
                  K * std::log(2.0) - std::lgamma(m + 1.0) - std::lgamma(K - m + 1.0);
    }
    const double top = *std::max_element(logs.begin(), logs.end());
    std::vector<double> b(K + 1);
    double norm2 = 0.0;
    for (int m = 0; m <= K; ++m) {
        b[m] = std::exp(logs[m] - top);
        norm2 += b[m] * b[m];
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (double &v : b) v *= inv;
    return b;
}

/// Probe produced by interfering two K-particle Fock states; support on
/// even indices only, so the first contributing off-diagonal is k = 2.
inline ProbeState hb_state(int K) {
    if (K < 1) throw std::invalid_argument("hb_state: K must be >= 1");
    const std::vector<double> b = hb_coefficients(K);
    ProbeState s;
    s.half_number = K;
    s.offdiag_step = 2;
    s.amplitudes.assign(2 * K + 1, Complex(0.0, 0.0));
    s.support.resize(K + 1);
    for (int m = 0; m <= K; ++m) {
        s.amplitudes[2 * m] = b[m];
        s.support[m] = 2 * m;
    }
    return s;
}

/// General fixed-particle-number probe from an explicit amplitude list
/// a_0..a_2K (length 2K+1). Amplitudes are normalised; entries below
/// 1e-14 of the largest magnitude are treated as exact zeros.
inline ProbeState fpn_state(std::vector<Complex> amplitudes) {
    if (amplitudes.empty()) throw std::invalid_argument("fpn_state: empty amplitude list");
    if (amplitudes.size() % 2 == 0)
        throw std::invalid_argument("fpn_state: amplitude list must have odd length 2K+1");

    double norm2 = 0.0, top = 0.0;
    for (const Complex &a : amplitudes) {
        norm2 += std::norm(a);
        top = std::max(top, std::abs(a));
    }
    if (norm2 <= 0.0) throw std::invalid_argument("fpn_state: all amplitudes vanish");
    const double inv = 1.0 / std::sqrt(norm2);
    for (Complex &a : amplitudes) a *= inv;
    top *= inv;

    ProbeState s;
    s.half_number = static_cast<int>((amplitudes.size() - 1) / 2);
    s.amplitudes = std::move(amplitudes);
    for (int n = 0; n < static_cast<int>(s.amplitudes.size()); ++n) {
        if (std::abs(s.amplitudes[n]) > 1e-14 * top)
            s.support.push_back(n);
        else
            s.amplitudes[n] = Complex(0.0, 0.0);
    }
    int k = 0;
    for (std::size_t i = 1; i < s.support.size(); ++i) {
        const int gap = s.support[i] - s.support[i - 1];
        k = (k == 0) ? gap : std::min(k, gap);
    }
    s.offdiag_step = (k == 0) ? 1 : k;
    return s;
}

/// Evolved state after a phase shift phi and a collective Gaussian phase
/// kick of width delta: entry (i,j) over support labels (n, n') is
/// a_n conj(a_n') exp(i phi (n-n') - delta^2 (n-n')^2 / 2).
inline DensityMatrix evolve(const ProbeState &state, double phi, double delta) {
    if (delta < 0.0) throw std::invalid_argument("evolve: delta must be >= 0");
    const int d = state.support_size();
    DensityMatrix rho;
    rho.basis_labels = state.support;
    rho.phi = phi;
    rho.delta = delta;
    rho.entries.resize(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const double g = static_cast<double>(state.support[i] - state.support[j]);
            const Complex amp = state.support_amplitude(i) * std::conj(state.support_amplitude(j));
            rho.entries(i, j) =
                amp * std::polar(std::exp(-0.5 * delta * delta * g * g), phi * g);
        }
    }
    return rho;
}

/// Analytic derivatives of evolve() with respect to phi and delta.
inline RhoDerivatives state_derivatives(const ProbeState &state, double phi, double delta) {
    if (delta < 0.0) throw std::invalid_argument("state_derivatives: delta must be >= 0");
    const DensityMatrix rho = evolve(state, phi, delta);
    const int d = rho.dim();
    RhoDerivatives out;
    out.phase.resize(d, d);
    out.diffusion.resize(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const double g = static_cast<double>(rho.basis_labels[i] - rho.basis_labels[j]);
            out.phase(i, j) = Complex(0.0, g) * rho.entries(i, j);
            out.diffusion(i, j) = -delta * g * g * rho.entries(i, j);
        }
    }
    return out;
}

namespace detail {
/// Closed-form validity scale for keeping only the first contributing
/// off-diagonal: delta >= sqrt(2/(k+1)^2 ln(2K/f)).
inline double truncation_delta_scale(int K, int k, double f) {
    return std::sqrt(2.0 / ((k + 1.0) * (k + 1.0)) * std::log(2.0 * K / f));
}
} // namespace detail

/// Keeps only the main diagonal and the first contributing off-diagonal
/// (label distance offdiag_step) of the evolved state. Valid for strong
/// dephasing; below the validity scale a note is written to `warn`
/// (pass nullptr to silence) but the truncation is still returned.
inline DensityMatrix tridiagonal_approx(const ProbeState &state, double phi, double delta,
                                        std::ostream *warn = &std::cerr) {
    DensityMatrix rho = evolve(state, phi, delta);
    const int k = state.offdiag_step;
    const int d = rho.dim();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const int g = std::abs(rho.basis_labels[i] - rho.basis_labels[j]);
            if (g != 0 && g != k) rho.entries(i, j) = Complex(0.0, 0.0);
        }
    if (warn != nullptr && state.half_number >= 1) {
        const double scale = detail::truncation_delta_scale(state.half_number, k, 0.05);
        if (delta < scale)
            *warn << "tridiagonal_approx: delta " << delta << " below validity scale " << scale
                  << " (K=" << state.half_number << ", k=" << k << ")\n";
    }
    return rho;
}

/// Taylor expansion of the evolved two-Fock-interference state about
/// delta = 0, truncated at the given order (2 or 4) in delta. Matrix is
/// (K+1)-dimensional over the even support labels.
inline DensityMatrix taylor_small_delta(int K, double phi, double delta, int order) {
    if (order != 2 && order != 4)
        throw std::invalid_argument("taylor_small_delta: order must be 2 or 4");
    if (delta < 0.0) throw std::invalid_argument("taylor_small_delta: delta must be >= 0");
    const std::vector<double> b = hb_coefficients(K);
    DensityMatrix rho;
    rho.phi = phi;
    rho.delta = delta;
    rho.basis_labels.resize(K + 1);
    for (int m = 0; m <= K; ++m) rho.basis_labels[m] = 2 * m;
    rho.entries.resize(K + 1, K + 1);
    for (int i = 0; i <= K; ++i) {
        for (int j = 0; j <= K; ++j) {
            const double g = static_cast<double>(i - j);
            const double t = 2.0 * delta * delta * g * g;
            double series = 1.0 - t;
            if (order == 4) series += 0.5 * t * t;
            rho.entries(i, j) = b[i] * b[j] * series * std::polar(1.0, 2.0 * phi * g);
        }
    }
    return rho;
}

} // namespace qest
