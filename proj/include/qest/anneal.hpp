#pragma once

#include <cstdint>
#include <future>
#include <random>
#include <utility>
#include <vector>

#include "qest/fisher.hpp"
#include "qest/measurements.hpp"
#include "qest/regime_large.hpp"
#include "qest/states.hpp"
#include "qest/types.hpp"

namespace qest {

struct AnnealConfig {
    double initial_temperature = 0.1;
    double cooling_factor = 0.95;
    int steps_per_temperature = 200;
    int temperature_levels = 60;
    double initial_step_size = 0.3;
    double step_decay = 0.97;
    int restarts = 4;
    std::uint64_t seed = 0;

    void validate() const {
        if (initial_temperature <= 0.0)
            throw std::invalid_argument("AnnealConfig: initial_temperature must be > 0");
        if (cooling_factor <= 0.0 || cooling_factor >= 1.0)
            throw std::invalid_argument("AnnealConfig: cooling_factor must be in (0,1)");
        if (steps_per_temperature < 1 || temperature_levels < 1)
            throw std::invalid_argument("AnnealConfig: step and level counts must be >= 1");
        if (initial_step_size <= 0.0)
            throw std::invalid_argument("AnnealConfig: initial_step_size must be > 0");
        if (step_decay <= 0.0 || step_decay > 1.0)
            throw std::invalid_argument("AnnealConfig: step_decay must be in (0,1]");
        if (restarts < 0) throw std::invalid_argument("AnnealConfig: restarts must be >= 0");
    }
};

struct AnnealResult {
    double best_value = 0.0;
    ProjectivePOVM best_povm;
    std::vector<std::pair<std::int64_t, double>> history; // (evaluation index, new best)
    std::uint64_t seed = 0;
    std::int64_t evaluations = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Fixed stream split: each restart draws from its own generator.
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ stream));
}

inline CMatrix ginibre(int dim, std::mt19937_64 &rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    CMatrix z(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) z(i, j) = Complex(gauss(rng), gauss(rng));
    return z;
}

} // namespace detail

/// Columns of a Haar-distributed unitary: complex Gaussian matrix,
/// QR-orthonormalised, with the R-diagonal phases pushed into Q.
inline ProjectivePOVM random_povm(int dim, std::mt19937_64 &rng) {
    if (dim < 1) throw std::invalid_argument("random_povm: dim must be >= 1");
    const CMatrix z = detail::ginibre(dim, rng);
    Eigen::HouseholderQR<CMatrix> qr(z);
    CMatrix q = qr.householderQ() * CMatrix::Identity(dim, dim);
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < dim; ++j) {
        const Complex rj = r(j, j);
        if (std::abs(rj) > 0.0) q.col(j) *= rj / std::abs(rj);
    }
    return ProjectivePOVM{std::move(q)};
}

/// Rotates the whole frame by exp(i step G) with G a random Hermitian
/// direction of unit spectral scale. Unitary conjugation, so the family
/// stays complete for any step.
inline ProjectivePOVM perturb(const ProjectivePOVM &povm, double step, std::mt19937_64 &rng) {
    if (step <= 0.0) throw std::invalid_argument("perturb: step must be > 0");
    const int d = povm.dim();
    CMatrix g = detail::ginibre(d, rng);
    g = 0.5 * (g + g.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(g);
    const RVector ev = es.eigenvalues();
    const double scale = std::max(std::abs(ev(0)), std::abs(ev(d - 1)));
    CVector phases(d);
    for (int i = 0; i < d; ++i)
        phases(i) = std::polar(1.0, step * ev(i) / (scale > 0.0 ? scale : 1.0));
    const CMatrix rot = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    return ProjectivePOVM{povm.vectors * rot};
}

namespace detail {

/// Cached state data for repeated objective evaluations.
struct TradeoffObjective {
    CMatrix rho, drho_phase, drho_diffusion;
    double h_phase = 0.0, h_diffusion = 0.0;

    double operator()(const ProjectivePOVM &povm) const {
        double f1 = 0.0, f2 = 0.0;
        for (int y = 0; y < povm.outcomes(); ++y) {
            const auto v = povm.vectors.col(y);
            const double p = (v.adjoint() * rho * v).value().real();
            if (p < probability_floor) continue;
            const double d1 = (v.adjoint() * drho_phase * v).value().real();
            const double d2 = (v.adjoint() * drho_diffusion * v).value().real();
            f1 += d1 * d1 / p;
            f2 += d2 * d2 / p;
        }
        return f1 / h_phase + f2 / h_diffusion;
    }
};

struct RestartOutcome {
    double best = -1.0;
    ProjectivePOVM povm;
    std::vector<std::pair<std::int64_t, double>> history;
};

inline ProjectivePOVM offset_fourier_povm(int dim) {
    CMatrix v(dim, dim);
    const double w = 1.0 / std::sqrt(static_cast<double>(dim));
    for (int m = 0; m < dim; ++m)
        for (int n = 0; n < dim; ++n)
            v(n, m) = w * std::polar(1.0, 2.0 * std::numbers::pi * n * (m + 0.5) / dim);
    return ProjectivePOVM{std::move(v)};
}

} // namespace detail

/// Searches the space of projective measurements for the largest joint
/// information bound at fixed (state, delta), phase fixed at zero.
/// Metropolis acceptance exp((v'-v)/T) on the maximisation objective,
/// geometric cooling, the best value retained across all restarts.
/// Restart 0 starts from the strong-dephasing optimal family and
/// restart 1 from the offset Fourier family when available; the rest
/// start from Haar-random frames. Deterministic for a fixed seed.
inline AnnealResult optimize_tradeoff(const ProbeState &state, double delta,
                                      const AnnealConfig &config) {
    config.validate();
    if (delta < 0.0) throw std::invalid_argument("optimize_tradeoff: delta must be >= 0");

    detail::TradeoffObjective obj;
    {
        const DensityMatrix rho = evolve(state, 0.0, delta);
        const RhoDerivatives dr = state_derivatives(state, 0.0, delta);
        const FisherMatrix h = qfi_matrix(state, 0.0, delta);
        obj.rho = rho.entries;
        obj.drho_phase = dr.phase;
        obj.drho_diffusion = dr.diffusion;
        obj.h_phase = h.phase;
        obj.h_diffusion = h.diffusion;
    }
    if (obj.h_phase <= 0.0 || obj.h_diffusion <= 0.0)
        throw std::invalid_argument("optimize_tradeoff: quantum information vanished");

    const int dim = state.support_size();
    const bool anneal = config.restarts > 0;
    const int runs = anneal ? config.restarts : 1;
    const std::int64_t per_run =
        1 + (anneal ? static_cast<std::int64_t>(config.temperature_levels) *
                          config.steps_per_temperature
                    : 0);

    auto run_one = [&](int r) {
        std::mt19937_64 rng = detail::stream_rng(config.seed, static_cast<std::uint64_t>(r));
        ProjectivePOVM cur = random_povm(dim, rng);
        if (r == 0 && state.uniform_support() && dim > 1)
            cur = optimal_povm_large(state);
        else if (r == 1 && dim > 1)
            cur = detail::offset_fourier_povm(dim);

        detail::RestartOutcome out;
        std::int64_t idx = static_cast<std::int64_t>(r) * per_run;
        double v = obj(cur);
        out.best = v;
        out.povm = cur;
        out.history.emplace_back(idx, v);
        if (!anneal) return out;

        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double temp = config.initial_temperature;
        double step = config.initial_step_size;
        for (int level = 0; level < config.temperature_levels; ++level) {
            for (int s = 0; s < config.steps_per_temperature; ++s) {
                ++idx;
                const ProjectivePOVM cand = perturb(cur, step, rng);
                const double vc = obj(cand);
                if (vc > v || unit(rng) < std::exp((vc - v) / temp)) {
                    cur = cand;
                    v = vc;
                    if (v > out.best) {
                        out.best = v;
                        out.povm = cur;
                        out.history.emplace_back(idx, v);
                    }
                }
            }
            temp *= config.cooling_factor;
            step *= config.step_decay;
            cur = make_povm(cur.vectors, true); // kill accumulated unitary drift
        }
        return out;
    };

    std::vector<detail::RestartOutcome> outcomes(runs);
    if (runs > 1) {
        std::vector<std::future<detail::RestartOutcome>> futs;
        futs.reserve(runs);
        for (int r = 0; r < runs; ++r)
            futs.push_back(std::async(std::launch::async, run_one, r));
        for (int r = 0; r < runs; ++r) outcomes[r] = futs[r].get();
    } else {
        outcomes[0] = run_one(0);
    }

    AnnealResult result;
    result.seed = config.seed;
    result.evaluations = per_run * runs;
    int winner = 0;
    for (int r = 0; r < runs; ++r) {
        result.history.insert(result.history.end(), outcomes[r].history.begin(),
                              outcomes[r].history.end());
        if (outcomes[r].best > outcomes[winner].best) winner = r;
    }
    result.best_value = outcomes[winner].best;
    result.best_povm = make_povm(outcomes[winner].povm.vectors, true);
    return result;
}

} // namespace qest
