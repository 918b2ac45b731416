#include <catch_amalgamated.hpp>

#include <sstream>

#include "test_helpers.hpp"

using namespace qest;
using qtest::diff_max;
using qtest::random_probe;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("interference coefficients match the small-K closed forms", "[states]") {
    const auto b1 = hb_coefficients(1);
    CHECK_THAT(b1[0], WithinAbs(1.0 / std::sqrt(2.0), 1e-12));
    CHECK_THAT(b1[1], WithinAbs(1.0 / std::sqrt(2.0), 1e-12));

    const auto b2 = hb_coefficients(2);
    CHECK_THAT(b2[0], WithinAbs(std::sqrt(24.0) / 8.0, 1e-12));
    CHECK_THAT(b2[1], WithinAbs(0.5, 1e-12));
    CHECK_THAT(b2[2], WithinAbs(std::sqrt(24.0) / 8.0, 1e-12));
    CHECK_THAT(b2[0] * b2[0] + b2[1] * b2[1] + b2[2] * b2[2], WithinAbs(1.0, 1e-12));
}

TEST_CASE("interference coefficients are symmetric and normalised at large K", "[states]") {
    for (int K : {1, 2, 3, 7, 23, 137, 500, 1000, 2000}) {
        const auto b = hb_coefficients(K);
        double norm2 = 0.0;
        for (int m = 0; m <= K; ++m) {
            CHECK_THAT(b[m], WithinAbs(b[K - m], 1e-12));
            norm2 += b[m] * b[m];
        }
        CHECK_THAT(norm2, WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("probe constructors reject bad arguments", "[states]") {
    CHECK_THROWS_AS(hb_state(0), std::invalid_argument);
    CHECK_THROWS_AS(hb_state(-4), std::invalid_argument);
    CHECK_THROWS_AS(fpn_state({}), std::invalid_argument);
    CHECK_THROWS_AS(fpn_state({Complex(0, 0), Complex(0, 0), Complex(0, 0)}),
                    std::invalid_argument);
    CHECK_THROWS_AS(fpn_state({Complex(1, 0), Complex(1, 0)}), std::invalid_argument);
}

TEST_CASE("probe support and step are derived from the amplitudes", "[states]") {
    const ProbeState hb = hb_state(3);
    CHECK(hb.offdiag_step == 2);
    CHECK(hb.support == std::vector<int>{0, 2, 4, 6});
    CHECK(hb.uniform_support());

    const ProbeState s = fpn_state({Complex(1, 0), Complex(0, 0), Complex(0, 0),
                                    Complex(1, 0), Complex(0, 0), Complex(0, 0),
                                    Complex(1, 0)});
    CHECK(s.offdiag_step == 3);
    CHECK(s.support == std::vector<int>{0, 3, 6});

    const ProbeState mixed = fpn_state({Complex(1, 0), Complex(1, 0), Complex(0, 0),
                                        Complex(1, 0), Complex(0, 0)});
    CHECK(mixed.offdiag_step == 1);
    CHECK_FALSE(mixed.uniform_support());
}

TEST_CASE("evolve matches the two-level closed forms", "[states]") {
    const ProbeState s = hb_state(1);

    const DensityMatrix pure = evolve(s, 0.0, 0.0);
    REQUIRE(pure.dim() == 2);
    CHECK_THAT(diff_max(pure.entries, CMatrix::Constant(2, 2, 0.5)), WithinAbs(0.0, 1e-14));

    const double delta = 0.7;
    const DensityMatrix rho = evolve(s, 0.0, delta);
    const double off = 0.5 * std::exp(-2.0 * delta * delta);
    CHECK_THAT(rho.entries(0, 1).real(), WithinAbs(off, 1e-14));
    CHECK_THAT(rho.entries(0, 1).imag(), WithinAbs(0.0, 1e-14));
    CHECK_THAT(rho.entries(0, 0).real(), WithinAbs(0.5, 1e-14));

    CHECK_THROWS_AS(evolve(s, 0.0, -0.1), std::invalid_argument);
}

TEST_CASE("strong dephasing leaves only the populations", "[states]") {
    std::mt19937_64 rng(11);
    const ProbeState s = random_probe(6, rng);
    const DensityMatrix rho = evolve(s, 1.3, 50.0);
    for (int i = 0; i < rho.dim(); ++i)
        for (int j = 0; j < rho.dim(); ++j) {
            if (i == j) continue;
            CHECK(std::abs(rho.entries(i, j)) < 1e-300);
        }
    for (int i = 0; i < rho.dim(); ++i)
        CHECK_THAT(rho.entries(i, i).real(), WithinAbs(std::norm(s.support_amplitude(i)), 1e-14));
}

TEST_CASE("evolved states are Hermitian, unit trace, and positive", "[states]") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> phi_dist(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> delta_dist(0.0, 3.0);
    for (int trial = 0; trial < 60; ++trial) {
        const ProbeState s = (trial % 3 == 0) ? hb_state(1 + trial % 30)
                                              : random_probe(30, rng);
        const DensityMatrix rho = evolve(s, phi_dist(rng), delta_dist(rng));
        CHECK(max_abs(rho.entries - rho.entries.adjoint()) <= 1e-12);
        CHECK_THAT(rho.entries.trace().real(), WithinAbs(1.0, 1e-12));
        Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.entries, Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    }
}

TEST_CASE("analytic derivatives match the two-level closed forms", "[states]") {
    const ProbeState s = hb_state(1);
    const double delta = 0.6;
    const RhoDerivatives dr = state_derivatives(s, 0.0, delta);
    const double u = std::exp(-2.0 * delta * delta);

    CHECK_THAT(dr.phase(0, 1).imag(), WithinAbs(-u, 1e-14)); // (1/2)(-2i u)
    CHECK_THAT(dr.phase(0, 1).real(), WithinAbs(0.0, 1e-14));
    CHECK_THAT(dr.phase(0, 0).real(), WithinAbs(0.0, 1e-14));
    CHECK_THAT(dr.diffusion(0, 1).real(), WithinAbs(-2.0 * delta * u, 1e-14));
    CHECK_THAT(dr.diffusion(1, 0).real(), WithinAbs(-2.0 * delta * u, 1e-14));

    CHECK_THROWS_AS(state_derivatives(s, 0.0, -1.0), std::invalid_argument);
}

TEST_CASE("analytic derivatives match central finite differences", "[states]") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> phi_dist(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> delta_dist(0.05, 2.5);
    const double h = 1e-6;
    for (int trial = 0; trial < 25; ++trial) {
        const ProbeState s = random_probe(12, rng);
        const double phi = phi_dist(rng), delta = delta_dist(rng);
        const RhoDerivatives dr = state_derivatives(s, phi, delta);

        const CMatrix fd_phi =
            (evolve(s, phi + h, delta).entries - evolve(s, phi - h, delta).entries) / (2.0 * h);
        const CMatrix fd_delta =
            (evolve(s, phi, delta + h).entries - evolve(s, phi, delta - h).entries) / (2.0 * h);

        const double scale_phi = std::max(1.0, max_abs(dr.phase));
        const double scale_delta = std::max(1.0, max_abs(dr.diffusion));
        CHECK(diff_max(dr.phase, fd_phi) <= 1e-8 * scale_phi);
        CHECK(diff_max(dr.diffusion, fd_delta) <= 1e-8 * scale_delta);
    }
}

TEST_CASE("derivatives are traceless and real or imaginary in the phase-absorbed basis",
          "[states]") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 10; ++trial) {
        const ProbeState s = random_probe(10, rng);
        const double phi = 0.9, delta = 0.4;
        const RhoDerivatives dr = state_derivatives(s, phi, delta);
        CHECK_THAT(std::abs(dr.phase.trace()), WithinAbs(0.0, 1e-12));
        CHECK_THAT(std::abs(dr.diffusion.trace()), WithinAbs(0.0, 1e-12));

        // Absorb phi n + theta_n into the basis; what remains must be
        // purely imaginary (phase derivative) or purely real (diffusion).
        const int d = s.support_size();
        CVector absorb(d);
        for (int i = 0; i < d; ++i)
            absorb(i) = std::polar(1.0, -(phi * s.support[i] +
                                          std::arg(s.support_amplitude(i))));
        const CMatrix dphi_g = absorb.asDiagonal() * dr.phase *
                               absorb.conjugate().asDiagonal();
        const CMatrix ddelta_g = absorb.asDiagonal() * dr.diffusion *
                                 absorb.conjugate().asDiagonal();
        CHECK(dphi_g.real().cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(ddelta_g.imag().cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("tridiagonal truncation is exact for the two-level probe", "[states]") {
    const ProbeState s = hb_state(1);
    const DensityMatrix full = evolve(s, 0.4, 1.1);
    const DensityMatrix tri = tridiagonal_approx(s, 0.4, 1.1, nullptr);
    CHECK_THAT(diff_max(full.entries, tri.entries), WithinAbs(0.0, 0.0));
}

TEST_CASE("tridiagonal truncation zeroes exactly the far corners", "[states]") {
    const ProbeState s = hb_state(2);
    const double phi = 0.3, delta = 1.0;
    const DensityMatrix full = evolve(s, phi, delta);
    const DensityMatrix tri = tridiagonal_approx(s, phi, delta, nullptr);

    const auto b = hb_coefficients(2);
    const Complex corner = b[0] * b[2] *
                           std::polar(std::exp(-8.0 * delta * delta), -4.0 * phi);
    CHECK_THAT(std::abs(full.entries(0, 2) - corner), WithinAbs(0.0, 1e-14));
    CHECK(tri.entries(0, 2) == Complex(0.0, 0.0));
    CHECK(tri.entries(2, 0) == Complex(0.0, 0.0));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (std::abs(i - j) <= 1) CHECK(tri.entries(i, j) == full.entries(i, j));
}

TEST_CASE("tridiagonal truncation warns below its validity scale", "[states]") {
    const ProbeState s = hb_state(8);
    std::ostringstream sink;
    tridiagonal_approx(s, 0.0, 0.1, &sink);
    CHECK(sink.str().find("below validity scale") != std::string::npos);
    sink.str("");
    tridiagonal_approx(s, 0.0, 3.0, &sink);
    CHECK(sink.str().empty());
}

TEST_CASE("tridiagonal truncation discards bounded mass", "[states]") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> delta_dist(0.3, 2.5);
    for (int trial = 0; trial < 25; ++trial) {
        const ProbeState s = random_probe(15, rng);
        const double delta = delta_dist(rng);
        const CMatrix disc = evolve(s, 0.7, delta).entries -
                             tridiagonal_approx(s, 0.7, delta, nullptr).entries;
        const double mass = disc.cwiseAbs().sum();
        const double k1 = s.offdiag_step + 1.0;
        const double bound =
            2.0 * s.half_number * std::exp(-0.5 * k1 * k1 * delta * delta);
        CHECK(mass <= bound + 1e-14);
    }
}

TEST_CASE("small-dephasing Taylor form matches the closed 2x2 matrix", "[states]") {
    const double delta = 0.05;
    const DensityMatrix rho = taylor_small_delta(1, 0.0, delta, 2);
    CHECK_THAT(rho.entries(0, 0).real(), WithinAbs(0.5, 1e-14));
    CHECK_THAT(rho.entries(0, 1).real(), WithinAbs(0.5 * (1.0 - 2.0 * delta * delta), 1e-14));

    CHECK_THROWS_AS(taylor_small_delta(1, 0.0, 0.1, 3), std::invalid_argument);
    CHECK_THROWS_AS(taylor_small_delta(1, 0.0, -0.1, 2), std::invalid_argument);
}

TEST_CASE("Taylor form is exact at zero dephasing", "[states]") {
    for (int order : {2, 4}) {
        const DensityMatrix t = taylor_small_delta(5, 1.2, 0.0, order);
        const DensityMatrix e = evolve(hb_state(5), 1.2, 0.0);
        CHECK(diff_max(t.entries, e.entries) <= 1e-15);
    }
}

TEST_CASE("Taylor truncation error respects the next-term bound", "[states]") {
    const int K = 3;
    const double delta = 0.02;
    const CMatrix diff = taylor_small_delta(K, 0.5, delta, 4).entries -
                         evolve(hb_state(K), 0.5, delta).entries;
    // next exponential-series term: (2 delta^2 g^2)^3 / 3! = (4/3) delta^6 g^6
    for (int i = 0; i <= K; ++i)
        for (int j = 0; j <= K; ++j) {
            const double g = std::abs(i - j);
            CHECK(std::abs(diff(i, j)) <= (4.0 / 3.0) * std::pow(delta, 6) * std::pow(g, 6) +
                                              1e-16);
        }
}

TEST_CASE("Taylor error shrinks at the expansion order", "[states]") {
    std::mt19937_64 rng(37);
    std::uniform_int_distribution<int> pick_k(2, 10);
    for (int order : {2, 4}) {
        for (int trial = 0; trial < 5; ++trial) {
            const int K = pick_k(rng);
            const ProbeState s = hb_state(K);
            const double d0 = 0.02;
            const double e1 = diff_max(taylor_small_delta(K, 0.0, d0, order).entries,
                                       evolve(s, 0.0, d0).entries);
            const double e2 = diff_max(taylor_small_delta(K, 0.0, d0 / 2.0, order).entries,
                                       evolve(s, 0.0, d0 / 2.0).entries);
            const double gain = std::pow(2.0, order + 2) * (1.0 - 0.2);
            CHECK(e1 >= gain * e2);
        }
    }
}
