#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "sgblab/complex_tools.hpp"
#include "sgblab/scattering.hpp"

using namespace sgb;
using Catch::Approx;

namespace {
const CouplingParams kStd = make_coupling(0.75, 0.0625, 1.0);
}

TEST_CASE("argument principle on elementary functions") {
    Rectangle unit{-0.6, 0.6, -0.6, 0.6};
    auto cr = count_zeros_poles([](complexd z) { return z; }, unit);
    CHECK(cr.winding == 1);
    cr = count_zeros_poles([](complexd) { return complexd{-1.0, 0.0}; }, unit);
    CHECK(cr.winding == 0);
    cr = count_zeros_poles([](complexd z) { return 1.0 / ((z - 0.1) * (z + 0.2)); }, unit);
    CHECK(cr.winding == -2);
    cr = count_zeros_poles([](complexd z) { return z * z / (z - complexd{0.0, 0.3}); }, unit);
    CHECK(cr.winding == 1);
}

TEST_CASE("argument principle agrees with the exact atom lattice") {
    SMatrixFamily fam(kStd);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> width(0.4, 2.2), center(-1.0, 1.0);
    for (auto [k, l] : {std::pair{Species::b1, Species::b1}, {Species::b2, Species::b1},
                        {Species::b2, Species::b2}}) {
        const auto& c = fam.component(k, l);
        auto f = [&](complexd z) { return c.eval_unguarded(z); };
        int done = 0;
        for (int trial = 0; trial < 40 && done < 10; ++trial) {
            double lo = center(rng), hi = lo + width(rng);
            // keep the boundary off lattice points
            bool clean = true;
            for (const auto& p : c.lattice(lo - 0.2, hi + 0.2)) {
                double h = p.position.imag() / kPi;
                if (std::abs(h - lo) < 2e-3 || std::abs(h - hi) < 2e-3) clean = false;
            }
            if (!clean) continue;
            int expected = 0;
            for (const auto& p : c.lattice(lo, hi)) expected += p.order;
            Rectangle rect{-9.0, 9.0, kPi * lo, kPi * hi};
            auto cr = count_zeros_poles(f, rect, 512);
            CHECK(cr.winding == expected);
            ++done;
        }
        REQUIRE(done == 10);
    }
}

TEST_CASE("locate_poles refines hints and cross-checks the count") {
    SMatrixFamily fam(kStd);
    const double nu = kStd.nu;
    const auto& c11 = fam.component(Species::b1, Species::b1);
    Rectangle strip{-15.0, 15.0, 0.01, kPi - 0.01};
    auto f11 = [&](complexd z) { return c11.eval_unguarded(z); };
    auto poles = locate_poles(f11, strip, {complexd{0.02, 2.3}, complexd{-0.03, 0.8}});
    REQUIRE(poles.size() == 2);
    std::sort(poles.begin(), poles.end(),
              [](complexd a, complexd b) { return a.imag() < b.imag(); });
    CHECK(std::abs(poles[0] - kI * kPi * (1.0 - nu)) < 1e-8);
    CHECK(std::abs(poles[1] - kI * kPi * nu) < 1e-8);

    const auto& c21 = fam.component(Species::b2, Species::b1);
    auto f21 = [&](complexd z) { return c21.eval_unguarded(z); };
    auto poles21 = locate_poles(f21, strip, {complexd{0.0, 1.9}, complexd{0.0, 1.2}});
    REQUIRE(poles21.size() == 2);
    std::sort(poles21.begin(), poles21.end(),
              [](complexd a, complexd b) { return a.imag() < b.imag(); });
    CHECK(std::abs(poles21[0] - kI * kPi * nu / 2.0) < 1e-8);
    CHECK(std::abs(poles21[1] - kI * kPi * (1.0 - nu / 2.0)) < 1e-8);

    // the CDD factor alone has no pole in the physical strip: its winding
    // there is purely its four zeros, and it stays finite on a strip grid
    SMatrixFamily sg(kStd, true);
    auto cdd21 = [&](complexd z) { return c21.eval_unguarded(z) / sg.component(Species::b2, Species::b1).eval_unguarded(z); };
    auto cr = count_zeros_poles(cdd21, strip, 512);
    CHECK(cr.winding == 4);
    double worst = 0.0;
    for (int i = 0; i <= 40; ++i)
        for (int j = 1; j < 20; ++j)
            worst = std::max(worst, std::abs(cdd21(complexd{-8.0 + 0.4 * i, kPi * j / 20.0 + 0.013})));
    CHECK(worst < 50.0);

    // a hint that converges to no pole
    CHECK_THROWS_AS(locate_poles([](complexd) { return complexd{2.0, 0.0}; },
                                 Rectangle{-1.0, 1.0, -1.0, 1.0}, {complexd{0.0, 0.0}}),
                    NoConvergence);
}

TEST_CASE("numerical residue oracle") {
    complexd r = numerical_residue([](complexd z) { return 1.0 / (z - kI); }, kI, 1e-3);
    CHECK(std::abs(r - 1.0) < 1e-12);

    SMatrixFamily fam(kStd), sg(kStd, true);
    const double nu = kStd.nu;
    complexd r_sg = numerical_residue(
        [&](complexd z) { return sg.component(Species::b1, Species::b1).eval_unguarded(z); },
        kI * kPi * nu, 1e-3);
    CHECK(std::abs(r_sg - complexd{0.0, -2.0}) < 1e-9);

    for (auto [a, b, h] : {std::tuple{Species::b1, Species::b1, nu},
                           {Species::b1, Species::b1, 1.0 - nu},
                           {Species::b2, Species::b1, 1.0 - nu / 2.0},
                           {Species::b2, Species::b1, nu / 2.0}}) {
        const auto& c = fam.component(a, b);
        complexd closed = c.residue_at(kI * kPi * h);
        complexd numeric = numerical_residue(
            [&](complexd z) { return c.eval_unguarded(z); }, kI * kPi * h, 1.2e-3);
        CHECK(std::abs(closed - numeric) < 1e-9 * std::abs(closed));
    }
}

TEST_CASE("strip sup and the safe kappa bound") {
    SMatrixFamily fam(kStd);
    const auto& c21 = fam.component(Species::b2, Species::b1);
    double kappa_safe = c21.safe_strip_half_width();
    CHECK(kappa_safe == Approx(kPi * 0.0625));  // the smallest CDD atom

    auto f = [&](complexd z) { return c21.eval_unguarded(z); };
    double sup = strip_sup_checked(f, 0.8 * kappa_safe, kappa_safe);
    CHECK(std::isfinite(sup));
    CHECK(sup < 1e4);
    CHECK(strip_sup([](complexd) { return complexd{-1.0, 0.0}; }, 0.3) == Approx(1.0));
    CHECK_THROWS_AS(strip_sup_checked(f, 1.1 * kappa_safe, kappa_safe), KappaTooLarge);
}

TEST_CASE("contour shift bookkeeping") {
    // entire Gaussian: shift changes nothing
    auto gauss = [](complexd z) { return std::exp(-z * z); };
    CHECK(contour_shift_check(gauss, kI * kPi * 0.375, {}) < 1e-10);

    // Gaussian times S^{b1b1}: shifting past i pi (1 - nu) crosses the t-pole
    SMatrixFamily fam(kStd);
    const auto& c11 = fam.component(Species::b1, Species::b1);
    auto f = [&](complexd z) { return std::exp(-z * z) * c11.eval_unguarded(z); };
    complexd pole = kI * kPi * 0.25;
    complexd res = numerical_residue(f, pole, 1e-3);
    CHECK(contour_shift_check(f, kI * kPi * 0.5, {{pole, res}}) < 1e-8);
    CHECK(contour_shift_check(f, kI * kPi * 0.5, {}) > 1e-4);

    // a zero planted on the pole removes the residue term (the C_n mechanism)
    auto fz = [&](complexd z) { return std::exp(-z * z) * c11.eval_unguarded(z) * (z - pole); };
    CHECK(contour_shift_check(fz, kI * kPi * 0.5, {}) < 1e-8);

    auto slow = [](complexd z) { return 1.0 / (1.0 + z * z * z * z); };
    CHECK_THROWS_AS(contour_shift_check(slow, kI * 0.3, {}), DecayProbeFailed);
}
