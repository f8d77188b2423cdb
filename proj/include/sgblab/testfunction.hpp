#ifndef SGBLAB_TESTFUNCTION_HPP
#define SGBLAB_TESTFUNCTION_HPP

#include <cmath>

#include "sgblab/common.hpp"
#include "sgblab/scattering.hpp"

namespace sgb {

// ---------------------------------------------------------------------------
// Spacetime test functions: polynomial bumps h(u) = (1-u^2)^8 on [-1,1] in
// each light-cone coordinate x+- = x0 +- x1.  Their rapidity transforms
//
//   f^{+-}(zeta) = (1/2pi) int f(x) e^{+- i p(zeta).x} d^2x,
//   p(zeta).x    = (m/2)(e^zeta x^- + e^{-zeta} x^+),
//
// factorize into two one-dimensional integrals with the entire kernel
//   Hq(k) = int_{-1}^{1} (1-u^2)^8 e^{iku} du,
// evaluated from a Taylor series for |k| < 12 and the exact sin/cos closed
// form above, with exponential scaling so nothing overflows on complex k.
// ---------------------------------------------------------------------------

namespace bump {

inline constexpr double kH0 = 0.5990767402532109;  // Hq(0)
inline constexpr double kFactor = 20643840.0;

// e^{-|Im k|} * Hq(k)
inline complexd scaled_kernel(complexd k) {
    double s = std::abs(k.imag());
    if (std::abs(k) < 12.0) {
        complexd acc{kH0, 0.0}, term{kH0, 0.0};
        complexd k2 = k * k;
        for (int m = 1; m < 48; ++m) {
            term *= -k2 / ((2.0 * m) * (2.0 * m + 17.0));
            acc += term;
            if (std::abs(term) < 1e-18 * std::abs(acc)) break;
        }
        return acc * std::exp(-s);
    }
    complexd eip = std::exp(kI * k - s);   // |.| <= 1
    complexd eim = std::exp(-kI * k - s);  // |.| <= 1
    complexd sin_s = (eip - eim) / (2.0 * kI);
    complexd cos_s = (eip + eim) / 2.0;
    complexd k2 = k * k;
    complexd ps = (((k2 - 630.0) * k2 + 51975.0) * k2 - 945945.0) * k2 + 2027025.0;
    complexd pc = ((((36.0 * k2 - 6930.0) * k2 + 270270.0) * k2 - 2027025.0)) * k;
    complexd k17 = std::pow(k, 17);
    return kFactor * (ps * sin_s + pc * cos_s) / k17;
}

}  // namespace bump

enum class Wedge { Left, Right };

// One light-cone-axis-aligned bump: centre and radius per axis (a boost
// rescales the two axes differently, so radii are kept separate).
struct WedgeBump {
    double c_plus = 0.0, c_minus = 0.0;
    double r_plus = 0.5, r_minus = 0.5;
    complexd amplitude{1.0, 0.0};

    bool inside(Wedge w) const {
        if (w == Wedge::Left) return c_plus + r_plus < 0.0 && c_minus - r_minus > 0.0;
        return c_plus - r_plus > 0.0 && c_minus + r_minus < 0.0;
    }
};

// Two-component test function.  Only the b1 component is populated in this
// artifact (theorem hypothesis); the container supports both.
class WedgeTestFunction {
  public:
    WedgeTestFunction(Wedge w, const WedgeBump& b1_bump) : wedge_(w) {
        if (!b1_bump.inside(w)) throw RangeError("bump support leaves the declared wedge");
        bump_[0] = b1_bump;
        has_[0] = true;
    }

    // center given in (x0, x1), same radius on both light-cone axes
    static WedgeTestFunction from_center(Wedge w, double x0, double x1, double radius,
                                         complexd amplitude = complexd{1.0, 0.0}) {
        WedgeBump b;
        b.c_plus = x0 + x1;
        b.c_minus = x0 - x1;
        b.r_plus = b.r_minus = radius;
        b.amplitude = amplitude;
        return WedgeTestFunction(w, b);
    }

    Wedge wedge() const { return wedge_; }
    bool is_real() const { return has_[0] && bump_[0].amplitude.imag() == 0.0; }
    bool has_component(Species s) const { return has_[static_cast<std::size_t>(index_of(s) - 1)]; }
    const WedgeBump& component(Species s) const {
        return bump_[static_cast<std::size_t>(index_of(s) - 1)];
    }

    // f^{sign}_{b_s}(zeta) with the species mass m_s
    complexd transform(int sign, double mass_s, Species s, complexd zeta) const {
        std::size_t i = static_cast<std::size_t>(index_of(s) - 1);
        if (!has_[i]) return complexd{0.0, 0.0};
        const WedgeBump& b = bump_[i];
        double sg = sign >= 0 ? 1.0 : -1.0;
        complexd kp = sg * (mass_s / 2.0) * std::exp(-zeta);
        complexd km = sg * (mass_s / 2.0) * std::exp(zeta);
        complexd w = kI * (kp * b.c_plus + km * b.c_minus);
        double grow = std::abs(kp.imag()) * b.r_plus + std::abs(km.imag()) * b.r_minus;
        if (w.real() + grow < -690.0) return complexd{0.0, 0.0};
        if (w.real() + grow > 660.0)
            throw RangeError("test-function transform evaluated on its growing side");
        return b.amplitude * (b.r_plus * b.r_minus / (4.0 * kPi)) * std::exp(w + grow) *
               bump::scaled_kernel(kp * b.r_plus) * bump::scaled_kernel(km * b.r_minus);
    }

    // CPT partner f_j: (f_j)(x) = conj(f(-x)); bump stays real, support
    // reflects through the origin (swaps the wedge).
    WedgeTestFunction cpt() const {
        WedgeTestFunction out = *this;
        out.wedge_ = wedge_ == Wedge::Left ? Wedge::Right : Wedge::Left;
        for (std::size_t i = 0; i < 2; ++i) {
            if (!has_[i]) continue;
            out.bump_[i].c_plus = -bump_[i].c_plus;
            out.bump_[i].c_minus = -bump_[i].c_minus;
            out.bump_[i].amplitude = std::conj(bump_[i].amplitude);
        }
        return out;
    }

    // Poincare-transformed test function f_{(a, lambda)}(x) = f(L^-1 (x - a)).
    WedgeTestFunction transformed(double a0, double a1, double lambda) const {
        WedgeTestFunction out = *this;
        double ap = a0 + a1, am = a0 - a1;
        double ep = std::exp(lambda), em = std::exp(-lambda);
        for (std::size_t i = 0; i < 2; ++i) {
            if (!has_[i]) continue;
            out.bump_[i].c_plus = ep * bump_[i].c_plus + ap;
            out.bump_[i].c_minus = em * bump_[i].c_minus + am;
            out.bump_[i].r_plus = ep * bump_[i].r_plus;
            out.bump_[i].r_minus = em * bump_[i].r_minus;
        }
        return out;
    }

  private:
    Wedge wedge_;
    WedgeBump bump_[2]{};
    bool has_[2]{false, false};
};

// Spec-facing wrapper.
inline complexd transform_pm(const WedgeTestFunction& f, int sign, const CouplingParams& p,
                             Species s, complexd zeta) {
    return f.transform(sign, mass(p, s), s, zeta);
}

}  // namespace sgb

#endif
