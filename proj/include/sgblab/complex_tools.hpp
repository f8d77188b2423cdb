#ifndef SGBLAB_COMPLEX_TOOLS_HPP
#define SGBLAB_COMPLEX_TOOLS_HPP

#include <cmath>
#include <functional>

#include "sgblab/common.hpp"

// Generic complex-analysis numerics used as independent oracles against the
// exact atom lattices.  Everything here works on opaque evaluators and uses
// central differences, so no code path is shared with sgblab/scattering.hpp.

namespace sgb {

using Evaluator = std::function<complexd(complexd)>;

struct Rectangle {
    double re_min, re_max;
    double im_min, im_max;
    bool contains(complexd z) const {
        return z.real() > re_min && z.real() < re_max && z.imag() > im_min && z.imag() < im_max;
    }
};

struct ContourResult {
    int winding = 0;           // zeros minus poles, with multiplicity
    std::size_t boundary_samples = 0;
    double estimated_error = 0.0;
};

namespace detail {

inline complexd central_diff(const Evaluator& f, complexd z) {
    double h = 1e-6 * (1.0 + std::abs(z));
    return (f(z + h) - f(z - h)) / (2.0 * h);
}

// trapezoid along the straight segment [a, b] of f' / f
inline complexd log_derivative_segment(const Evaluator& f, complexd a, complexd b, std::size_t n) {
    complexd dz = (b - a) / static_cast<double>(n);
    std::vector<complexd> vals(n);
    for (std::size_t k = 0; k < n; ++k) {
        complexd z = a + (static_cast<double>(k) + 0.5) * dz;  // midpoint rule on the boundary
        complexd fz = f(z);
        if (std::abs(fz) < 1e-300) throw BoundaryHitsSingularity("f vanishes on the contour");
        if (!std::isfinite(fz.real()) || !std::isfinite(fz.imag()))
            throw BoundaryHitsSingularity("f singular on the contour");
        vals[k] = central_diff(f, z) / fz * dz;
    }
    return pairwise_sum(vals);
}

}  // namespace detail

inline ContourResult count_zeros_poles(const Evaluator& f, const Rectangle& rect,
                                       std::size_t samples = 256,
                                       const Tolerances& tol = default_tolerances()) {
    complexd c1{rect.re_min, rect.im_min}, c2{rect.re_max, rect.im_min};
    complexd c3{rect.re_max, rect.im_max}, c4{rect.re_min, rect.im_max};
    auto run = [&](std::size_t n) {
        complexd acc = detail::log_derivative_segment(f, c1, c2, n) +
                       detail::log_derivative_segment(f, c2, c3, n) +
                       detail::log_derivative_segment(f, c3, c4, n) +
                       detail::log_derivative_segment(f, c4, c1, n);
        return acc / (2.0 * kPi * kI);
    };
    complexd coarse = run(samples);
    complexd fine = run(2 * samples);
    ContourResult out;
    out.boundary_samples = 8 * samples;
    double w = fine.real();
    out.estimated_error = std::abs(fine - coarse) + std::abs(fine.imag());
    if (out.estimated_error > tol.winding_error ||
        std::abs(w - std::round(w)) > tol.winding_error)
        throw NonIntegerWinding("winding " + std::to_string(w) + " error " +
                                std::to_string(out.estimated_error));
    out.winding = static_cast<int>(std::llround(w));
    return out;
}

// Newton refinement of pole locations from hints, on 1/f.
inline std::vector<complexd> locate_poles(const Evaluator& f, const Rectangle& rect,
                                          const std::vector<complexd>& hints,
                                          const Tolerances& tol = default_tolerances()) {
    std::vector<complexd> found;
    for (complexd z : hints) {
        if (!rect.contains(z)) throw RangeError("pole hint outside rectangle");
        bool ok = false;
        for (int it = 0; it < 60; ++it) {
            complexd fz = f(z);
            if (std::abs(fz) > 1e280 || std::abs(1.0 / fz) < tol.newton_residual) {
                ok = true;
                break;
            }
            complexd g = 1.0 / fz;                      // zero of g at the pole
            complexd gp = detail::central_diff([&](complexd w) { return 1.0 / f(w); }, z);
            if (std::abs(gp) < 1e-300) break;
            complexd step = g / gp;
            if (std::abs(step) > 0.5) step *= 0.5 / std::abs(step);
            z -= step;
        }
        if (!ok) throw NoConvergence("Newton did not reach a pole from the given hint");
        bool dup = false;
        for (complexd p : found)
            if (std::abs(p - z) < tol.pole_dedup) dup = true;
        if (!dup) found.push_back(z);
    }
    // Cross-check each pole by the argument principle applied to 1/f on a
    // small surrounding box: a simple pole of f is a simple zero of 1/f.
    // (A single global winding cannot separate pole and zero counts when f
    // has zeros in the rectangle, which the scattering components do.)
    for (complexd p : found) {
        double r = 5e-3;
        Rectangle box{p.real() - r, p.real() + r, p.imag() - r, p.imag() + r};
        ContourResult cr = count_zeros_poles([&](complexd z) { return 1.0 / f(z); }, box, 96, tol);
        if (cr.winding != 1)
            throw CountMismatch("local 1/f winding at a located pole is " +
                                std::to_string(cr.winding) + ", expected 1");
    }
    return found;
}

// (1/2 pi i) * contour integral of f around a small circle (trapezoid rule,
// spectrally accurate).  Re-run at half radius must agree.
inline complexd numerical_residue(const Evaluator& f, complexd pole, double radius,
                                  std::size_t n = 256,
                                  const Tolerances& tol = default_tolerances()) {
    if (!(radius > 0.0)) throw EnclosureAmbiguous("radius must be positive");
    auto ring = [&](double r) {
        std::vector<complexd> vals(n);
        for (std::size_t k = 0; k < n; ++k) {
            double t = 2.0 * kPi * (static_cast<double>(k) + 0.5) / static_cast<double>(n);
            complexd w = r * std::exp(kI * t);
            vals[k] = f(pole + w) * w;  // f * dz/(2 pi i) with dz = i w dt
        }
        return pairwise_sum(vals) / static_cast<double>(n);
    };
    complexd full = ring(radius);
    complexd half = ring(radius / 2.0);
    double scale = std::max(std::abs(full), 1e-30);
    if (std::abs(full - half) / scale > 1e3 * tol.residue_rel)
        throw RadiusInstability("residue changed by " + std::to_string(std::abs(full - half) / scale) +
                                " under radius halving");
    return half;
}

// Sampled sup of |f| on R + i(-kappa, kappa); the caller must ensure kappa is
// below the first pole height (scattering components expose that bound).
inline double strip_sup(const Evaluator& f, double kappa, double re_max = 30.0,
                        std::size_t n_re = 241, std::size_t n_im = 21) {
    double sup = 0.0;
    for (std::size_t j = 0; j < n_im; ++j) {
        double y = -kappa + (2.0 * kappa) * (static_cast<double>(j) + 0.5) / static_cast<double>(n_im);
        for (std::size_t i = 0; i < n_re; ++i) {
            double x = -re_max + 2.0 * re_max * static_cast<double>(i) / static_cast<double>(n_re - 1);
            double v = std::abs(f(complexd{x, y}));
            if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
            sup = std::max(sup, v);
        }
    }
    return sup;
}

inline double strip_sup_checked(const Evaluator& f, double kappa, double safe_kappa,
                                double re_max = 30.0) {
    if (kappa >= safe_kappa)
        throw KappaTooLarge("kappa " + std::to_string(kappa) + " >= first pole height " +
                            std::to_string(safe_kappa));
    return strip_sup(f, kappa, re_max);
}

// | int_R f  -  int_{R+shift} f  -  2 pi i sum residues |.  The integrand must
// decay at |Re| -> infinity in the swept band; probed at Re = +-re_max.
inline double contour_shift_check(const Evaluator& f, complexd shift,
                                  const std::vector<std::pair<complexd, complexd>>& residues,
                                  double re_max = 30.0, std::size_t n = 2400,
                                  double decay_probe = 1e-12) {
    for (double x : {-re_max, re_max}) {
        for (double t : {0.0, 0.5, 1.0}) {
            complexd z = complexd{x, 0.0} + t * shift;
            if (std::abs(f(z)) > decay_probe)
                throw DecayProbeFailed("integrand does not decay at Re = " + std::to_string(x));
        }
    }
    auto line = [&](complexd base) {
        std::vector<complexd> vals(n);
        double h = 2.0 * re_max / static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k) {
            complexd z = base + complexd{-re_max + (static_cast<double>(k) + 0.5) * h, 0.0};
            vals[k] = f(z) * h;
        }
        return pairwise_sum(vals);
    };
    complexd diff = line(complexd{0.0, 0.0}) - line(shift);
    complexd res_sum{0.0, 0.0};
    for (const auto& [pole, res] : residues) res_sum += res;
    double orient = shift.imag() >= 0.0 ? 1.0 : -1.0;
    return std::abs(diff - orient * 2.0 * kPi * kI * res_sum);
}

}  // namespace sgb

#endif
