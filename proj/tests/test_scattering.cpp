#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "sgblab/scattering.hpp"

using namespace sgb;
using Catch::Approx;

namespace {

const CouplingParams kStd = make_coupling(0.75, 0.0625, 1.0);

std::vector<complexd> random_points(std::uint64_t seed, int count, double im_max = 2.8) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> re(-3.0, 3.0), im(-im_max, im_max);
    std::vector<complexd> out;
    for (int i = 0; i < count; ++i) out.emplace_back(re(rng), im(rng));
    return out;
}

}  // namespace

TEST_CASE("coupling validation") {
    auto p = kStd;
    CHECK(p.nu_minus == Approx(0.1875));
    CHECK_THROWS_AS(make_coupling(0.85, 0.05, 1.0), RangeError);
    CHECK_THROWS_AS(make_coupling(0.60, 0.05, 1.0), RangeError);
    // (iii) fails: 2 - 5 nu / 2 = 0.125 < 0.2 shows up as (ii) on nu_minus
    CHECK_THROWS_AS(make_coupling(0.75, 0.2, 1.0), ConstraintViolation);
    CHECK_THROWS_AS(make_coupling(0.75, -0.01, 1.0), ConstraintViolation);
    CHECK_THROWS_AS(make_coupling(0.75, 0.0625, -1.0), RangeError);
    // window arithmetic: nu = 0.75 -> (0, 0.125); nu = 0.70 -> (0, 0.25)
    auto w = nu_plus_window(0.75);
    CHECK(w.first == Approx(0.0));
    CHECK(w.second == Approx(0.125));
    w = nu_plus_window(0.70);
    CHECK(w.first == Approx(0.0));
    CHECK(w.second == Approx(0.25).margin(1e-12));
}

TEST_CASE("breather masses and the fusion rule") {
    CHECK(mass(kStd, Species::b1) == Approx(2.0 * std::sin(0.375 * kPi)).epsilon(1e-14));
    CHECK(mass(kStd, Species::b2) == Approx(std::sqrt(2.0)).epsilon(1e-14));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> nu_draw(2.0 / 3.0 + 1e-3, 4.0 / 5.0 - 1e-3);
    for (int i = 0; i < 20; ++i) {
        double nu = nu_draw(rng);
        auto window = nu_plus_window(nu);
        auto p = make_coupling(nu, 0.5 * (window.first + window.second), 1.3);
        double m1 = mass(p, Species::b1), m2 = mass(p, Species::b2);
        double th_p = kPi * nu / 2.0;
        CHECK(std::abs(m2 - 2.0 * m1 * std::cos(th_p)) < 1e-13);
        CHECK(std::abs(m1 - (m1 * std::cos(kPi * (1.0 - nu)) + m2 * std::cos(th_p))) < 1e-13);
    }
}

TEST_CASE("atom factorization of the components") {
    SMatrixFamily fam(kStd);
    const auto& c11 = fam.component(Species::b1, Species::b1);
    const auto& c21 = fam.component(Species::b2, Species::b1);
    const auto& c22 = fam.component(Species::b2, Species::b2);

    CHECK(c11.atoms.size() == 5);  // 1 SG + 4 CDD
    CHECK(c21.atoms.size() == 6);  // 2 SG + 4 CDD after the (iv) cancellations
    CHECK(c22.atoms.size() == 11); // 3 SG + 8 CDD
    CHECK(c11.sign == 1.0);
    CHECK(c21.sign == 1.0);
    CHECK(c22.sign == 1.0);

    // value at zero (S7)
    CHECK(std::abs(c11.eval(complexd{0.0, 0.0}) - complexd{-1.0, 0.0}) < 1e-12);
    CHECK(std::abs(c22.eval(complexd{0.0, 0.0}) - complexd{-1.0, 0.0}) < 1e-12);

    // parity (S2): the (k,l) and (l,k) lookups return the same component
    const auto& c12 = fam.component(Species::b1, Species::b2);
    for (complexd z : random_points(5, 10))
        CHECK(std::abs(c12.eval(z) - c21.eval(z)) == 0.0);

    // bootstrap-shift construction matches pointwise products of shifts
    double s = kPi * kStd.nu / 2.0;
    for (complexd z : random_points(6, 10)) {
        complexd lhs = c21.eval(z);
        complexd rhs = c11.eval(z + kI * s) * c11.eval(z - kI * s);
        CHECK(std::abs(lhs - rhs) < 1e-12 * std::max(1.0, std::abs(lhs)));
        complexd lhs2 = c22.eval(z);
        complexd rhs2 = c21.eval(z + kI * s) * c21.eval(z - kI * s);
        CHECK(std::abs(lhs2 - rhs2) < 1e-11 * std::max(1.0, std::abs(lhs2)));
    }
}

TEST_CASE("component evaluation satisfies the pointwise axioms") {
    SMatrixFamily fam(kStd);
    auto pts = random_points(42, 12);
    for (auto [k, l] : {std::pair{Species::b1, Species::b1}, {Species::b2, Species::b1},
                        {Species::b2, Species::b2}}) {
        const auto& c = fam.component(k, l);
        for (complexd z : pts) {
            complexd v = c.eval(z);
            CHECK(std::abs(v * c.eval(-z) - 1.0) < 1e-11);                     // (S4)
            CHECK(std::abs(std::conj(c.eval(std::conj(z))) * v - 1.0) < 1e-11); // (S3)
            CHECK(std::abs(c.eval(kI * kPi - z) - v) < 1e-10 * std::max(1.0, std::abs(v)));  // (S5)
        }
        // modulus one on the real line
        for (int i = 0; i <= 200; ++i) {
            double th = -20.0 + 40.0 * i / 200.0;
            CHECK(std::abs(std::abs(c.eval(complexd{th, 0.0})) - 1.0) < 1e-12);
        }
        // 2 pi i periodicity (S1 meromorphy companion)
        for (complexd z : pts)
            CHECK(std::abs(c.eval(z + 2.0 * kPi * kI) - c.eval(z)) < 1e-11);
    }
}

TEST_CASE("pole guard") {
    SMatrixFamily fam(kStd);
    const auto& c11 = fam.component(Species::b1, Species::b1);
    CHECK_THROWS_AS(c11.eval(kI * (kPi * 0.75) + 1e-14), PoleProximity);
    CHECK_NOTHROW(c11.eval(kI * (kPi * 0.75) + 1e-6));
}

TEST_CASE("exact lattice in the physical strip") {
    SMatrixFamily fam(kStd);
    auto lat11 = fam.component(Species::b1, Species::b1).lattice(0.0, 1.0);
    std::vector<double> poles, zeros;
    for (const auto& p : lat11)
        (p.order < 0 ? poles : zeros).push_back(p.position.imag() / kPi);
    REQUIRE(poles.size() == 2);  // (S9)
    CHECK(poles[0] == Approx(0.25));
    CHECK(poles[1] == Approx(0.75));
    REQUIRE(zeros.size() == 4);  // the CDD atoms' strip zeros

    auto lat21 = fam.component(Species::b2, Species::b1).lattice(0.0, 1.0);
    std::vector<double> poles21;
    for (const auto& p : lat21)
        if (p.order < 0) poles21.push_back(p.position.imag() / kPi);
    REQUIRE(poles21.size() == 2);
    CHECK(poles21[0] == Approx(0.375));
    CHECK(poles21[1] == Approx(0.625));

    // b2b2 has a double pole at i pi (1 - nu): T_nu^2
    auto lat22 = fam.component(Species::b2, Species::b2).lattice(0.0, 1.0);
    bool found_double = false;
    for (const auto& p : lat22)
        if (p.order == -2 && std::abs(p.position.imag() / kPi - 0.25) < 1e-9) found_double = true;
    CHECK(found_double);
}

TEST_CASE("closed-form residues") {
    SMatrixFamily fam(kStd);
    SMatrixFamily sg(kStd, true);
    const double nu = kStd.nu;

    complexd r_sg = sg.component(Species::b1, Species::b1).residue_at(kI * kPi * nu);
    CHECK(std::abs(r_sg - 2.0 * kI * std::tan(kPi * nu)) < 1e-12);
    CHECK(std::abs(r_sg - complexd{0.0, -2.0}) < 1e-12);  // nu = 3/4

    complexd r = fam.component(Species::b1, Species::b1).residue_at(kI * kPi * nu);
    CHECK(r.imag() > 0.0);                       // (S10) restored by the CDD factor
    CHECK(std::abs(r.real()) < 1e-12 * std::abs(r));
    complexd rp = fam.component(Species::b1, Species::b1).residue_at(kI * kPi * (1.0 - nu));
    CHECK(std::abs(rp + r) < 1e-10);             // t-channel flips the sign

    // multiple atoms singular at a double pole
    CHECK_THROWS_AS(fam.component(Species::b2, Species::b2).residue_at(kI * kPi * (1.0 - nu)),
                    NotSimplePole);
}

TEST_CASE("fusion table") {
    auto table = fusion_table(kStd);
    const double nu = kStd.nu;
    REQUIRE(table.processes.size() == 3);
    CHECK_FALSE(table.is_fusion(Species::b2, Species::b2));
    CHECK(table.eta(Species::b2, Species::b2) == complexd{0.0, 0.0});

    const auto* p11 = table.find(Species::b1, Species::b1);
    REQUIRE(p11 != nullptr);
    CHECK(p11->product == Species::b2);
    CHECK(p11->fusion_angle() == Approx(kPi * nu));
    const auto* p12 = table.find(Species::b1, Species::b2);
    REQUIRE(p12 != nullptr);
    CHECK(p12->fusion_angle() == Approx(kPi * (1.0 - nu / 2.0)));
    CHECK(p12->theta_left == Approx(kPi * (1.0 - nu)));
    CHECK(p12->theta_right == Approx(kPi * nu / 2.0));

    // R^{b2}_{b1b1} = R^{b1}_{b1b2} = R^{b1}_{b2b1}; R' = -R; eta = i sqrt(2pi|R|)
    complexd r11 = table.R(Species::b1, Species::b1);
    CHECK(std::abs(r11 - table.R(Species::b1, Species::b2)) < 1e-10);
    CHECK(std::abs(r11 - table.R(Species::b2, Species::b1)) < 1e-10);
    CHECK(std::abs(table.Rprime(Species::b1, Species::b1) + r11) < 1e-10);
    complexd eta = table.eta(Species::b1, Species::b1);
    CHECK(std::abs(eta - kI * std::sqrt(2.0 * kPi * std::abs(r11))) < 1e-14);
    CHECK(std::abs(eta - table.eta(Species::b1, Species::b2)) < 1e-12);
    CHECK(std::abs(eta - table.eta(Species::b2, Species::b1)) < 1e-12);

    // fusion-angle identities: pi - theta^{bl}_{b1 bk} = theta^{bk}_{(b1 bl)}
    CHECK(kPi - p11->fusion_angle() == Approx(p12->theta_left));
    CHECK(kPi - p12->fusion_angle() == Approx(table.find(Species::b2, Species::b1)->theta_left));
}

TEST_CASE("bootstrap equation at random points") {
    SMatrixFamily fam(kStd);
    auto table = fusion_table(fam);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> re(-3.0, 3.0), im(-2.4, 2.4);
    auto S = [&](Species a, Species b, complexd z) { return fam.component(a, b).eval(z); };
    int checked = 0;
    for (int i = 0; i < 120 && checked < 50; ++i) {
        complexd z{re(rng), im(rng)};
        for (const auto& proc : table.processes) {
            for (Species mu : {Species::b1, Species::b2}) {
                complexd lhs, rhs;
                try {
                    lhs = S(proc.product, mu, z);
                    rhs = S(proc.left, mu, z + kI * proc.theta_left) *
                          S(proc.right, mu, z - kI * proc.theta_right);
                } catch (const PoleProximity&) {
                    continue;
                }
                CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(lhs)));
                ++checked;
            }
        }
    }
    REQUIRE(checked >= 50);
}

TEST_CASE("sg-only family keeps (S1)-(S8) but not the residue sign") {
    SMatrixFamily sg(kStd, true);
    CHECK(sg.component(Species::b1, Species::b1).atoms.size() == 1);
    for (complexd z : random_points(3, 8)) {
        complexd v = sg.component(Species::b2, Species::b1).eval(z);
        CHECK(std::abs(v * sg.component(Species::b2, Species::b1).eval(-z) - 1.0) < 1e-12);
        CHECK(std::abs(sg.component(Species::b2, Species::b1).eval(kI * kPi - z) - v) <
              1e-11 * std::max(1.0, std::abs(v)));
    }
    complexd r = sg.component(Species::b1, Species::b1).residue_at(kI * kPi * kStd.nu);
    CHECK(r.imag() < 0.0);
}
