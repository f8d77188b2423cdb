#ifndef SGBLAB_COMMON_HPP
#define SGBLAB_COMMON_HPP

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgb {

using complexd = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr complexd kI{0.0, 1.0};

// ---------------------------------------------------------------------------
// Error hierarchy. Checks report; guards throw.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct RangeError : Error {
    explicit RangeError(const std::string& msg) : Error(msg) {}
};

struct ConstraintViolation : Error {
    // which = "i".."iv", the violated coupling condition
    ConstraintViolation(const std::string& which, const std::string& msg)
        : Error("condition (" + which + "): " + msg), condition(which) {}
    std::string condition;
};

struct PoleProximity : Error {
    PoleProximity(complexd where, complexd pole)
        : Error("evaluation within pole guard: zeta=(" + std::to_string(where.real()) + "," +
                std::to_string(where.imag()) + ") pole Im/pi=" + std::to_string(pole.imag() / kPi)),
          zeta(where), nearest_pole(pole) {}
    complexd zeta;
    complexd nearest_pole;
};

struct NotSimplePole : Error {
    explicit NotSimplePole(const std::string& msg) : Error(msg) {}
};

struct BoundaryHitsSingularity : Error {
    explicit BoundaryHitsSingularity(const std::string& msg) : Error(msg) {}
};
struct NonIntegerWinding : Error {
    explicit NonIntegerWinding(const std::string& msg) : Error(msg) {}
};
struct NoConvergence : Error {
    explicit NoConvergence(const std::string& msg) : Error(msg) {}
};
struct CountMismatch : Error {
    explicit CountMismatch(const std::string& msg) : Error(msg) {}
};
struct EnclosureAmbiguous : Error {
    explicit EnclosureAmbiguous(const std::string& msg) : Error(msg) {}
};
struct RadiusInstability : Error {
    explicit RadiusInstability(const std::string& msg) : Error(msg) {}
};
struct KappaTooLarge : Error {
    explicit KappaTooLarge(const std::string& msg) : Error(msg) {}
};
struct DecayProbeFailed : Error {
    explicit DecayProbeFailed(const std::string& msg) : Error(msg) {}
};
struct QuadratureNonConvergence : Error {
    explicit QuadratureNonConvergence(const std::string& msg) : Error(msg) {}
};
struct EvenBlockCount : Error {
    explicit EvenBlockCount(const std::string& msg) : Error(msg) {}
};
struct ShiftValidationFailed : Error {
    explicit ShiftValidationFailed(const std::string& msg) : Error(msg) {}
};

// ---------------------------------------------------------------------------
// Centralized tolerance configuration.  Defaults are the values the checks
// and the acceptance suite are pinned to; tests may tighten but not loosen.
// ---------------------------------------------------------------------------

struct Tolerances {
    double pole_guard = 1e-12;        // relative to 1+|zeta|
    double axiom = 1e-10;             // pointwise axiom residuals (S2)-(S7)
    double modulus_one = 1e-12;       // |S(theta)| = 1 on the real line
    double residue_rel = 1e-9;        // closed-form vs contour residue
    double winding_error = 0.25;      // max quadrature error before rounding
    double newton_residual = 1e-10;   // |1/f| at a located pole
    double pole_dedup = 1e-8;
    double quad_rel_1d = 1e-8;        // inner-product refinement targets
    double quad_rel_2d = 1e-6;
    double quad_rel_3d = 1e-4;
    double shift_check = 1e-8;        // contour-shift residual
    double hyperplane_guard = 1e-6;   // S-pole / C_n-zero pairing distance
};

inline const Tolerances& default_tolerances() {
    static const Tolerances t{};
    return t;
}

// Deterministic pairwise summation (order-independent up to fixed chunking).
inline complexd pairwise_sum(const std::vector<complexd>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo <= 8) {
        complexd acc{0.0, 0.0};
        for (std::size_t i = lo; i < hi; ++i) acc += v[i];
        return acc;
    }
    std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

inline complexd pairwise_sum(const std::vector<complexd>& v) {
    return v.empty() ? complexd{0.0, 0.0} : pairwise_sum(v, 0, v.size());
}

}  // namespace sgb

#endif
