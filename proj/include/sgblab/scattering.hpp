#ifndef SGBLAB_SCATTERING_HPP
#define SGBLAB_SCATTERING_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <utility>

#include "sgblab/common.hpp"

namespace sgb {

// ---------------------------------------------------------------------------
// Species and coupling parameters
// ---------------------------------------------------------------------------

enum class Species : int { b1 = 1, b2 = 2 };

inline int index_of(Species s) { return static_cast<int>(s); }
inline Species species_from_index(int k) {
    if (k != 1 && k != 2) throw RangeError("species index must be 1 or 2");
    return static_cast<Species>(k);
}
inline Species conjugate(Species s) { return s; }  // breathers are neutral
inline const char* name_of(Species s) { return s == Species::b1 ? "b1" : "b2"; }

struct CouplingParams {
    double nu;
    double nu_minus;
    double nu_plus;
    double mass;
};

// Feasible nu_plus window for a two-breather coupling nu: the intersection of
// (0, 1-nu) with (1-3nu/2, 2-5nu/2).  Empty unless 2/3 < nu < 4/5.
inline std::pair<double, double> nu_plus_window(double nu) {
    double lo = std::max(0.0, 1.0 - 1.5 * nu);
    double hi = std::min(1.0 - nu, 2.0 - 2.5 * nu);
    return {lo, hi};
}

inline void validate_block(double nu, double nu_minus, double nu_plus) {
    if (!(nu_minus > 0.0) || !(nu_plus > 0.0))
        throw ConstraintViolation("i", "nu_minus and nu_plus must be positive");
    if (!(nu_minus > 1.5 * nu - 1.0 && nu_minus < 0.5 * nu))
        throw ConstraintViolation("ii", "nu_minus outside (3nu/2-1, nu/2)");
    if (!(nu_plus < 1.0 - nu))
        throw ConstraintViolation("iii", "nu_plus outside (0, 1-nu)");
    if (std::abs(nu_minus + nu_plus - (1.0 - nu)) > 1e-12)
        throw ConstraintViolation("iv", "nu_minus + nu_plus != 1 - nu");
}

inline CouplingParams make_coupling(double nu, double nu_plus, double mass_param) {
    if (!(nu > 2.0 / 3.0 && nu < 4.0 / 5.0))
        throw RangeError("nu outside (2/3, 4/5): no two-breather CDD adjustment exists");
    if (!(mass_param > 0.0)) throw RangeError("mass parameter must be positive");
    double nu_minus = 1.0 - nu - nu_plus;  // condition (iv)
    validate_block(nu, nu_minus, nu_plus);
    return CouplingParams{nu, nu_minus, nu_plus, mass_param};
}

inline double mass(const CouplingParams& p, Species s) {
    int ell = index_of(s);
    return 2.0 * p.mass * std::sin(ell * p.nu * kPi / 2.0);
}

// ---------------------------------------------------------------------------
// Factor atoms.  Every S-matrix component is a finite product of these, so
// pole/zero lattices are exact and bootstrap shifts are parameter arithmetic.
//
//   SG  atom T_a(z) = tanh((z + i pi a)/2) / tanh((z - i pi a)/2)
//   CDD atom A_a(z) = sinh((z - i pi a)/2) / sinh((z + i pi a)/2)
//
// Both are 2 pi i periodic and invariant under a -> a + 2.
// ---------------------------------------------------------------------------

struct FactorAtom {
    enum class Kind { CDD, SG };
    Kind kind;
    double a;

    complexd eval(complexd z) const {
        const complexd ia = kI * (kPi * a);
        if (kind == Kind::SG)
            return std::tanh(0.5 * (z + ia)) / std::tanh(0.5 * (z - ia));
        return std::sinh(0.5 * (z - ia)) / std::sinh(0.5 * (z + ia));
    }

    // Pole positions within one period, as multiples of i pi (Im in (-1, 1]).
    //   SG : poles at {a, 1-a},   zeros at {-a, a-1}  (mod 2)
    //   CDD: pole  at {-a},       zero  at {a}        (mod 2)
    std::array<double, 2> pole_heights() const {
        if (kind == Kind::SG) return {reduce_mod2(a), reduce_mod2(1.0 - a)};
        return {reduce_mod2(-a), std::numeric_limits<double>::quiet_NaN()};
    }
    std::array<double, 2> zero_heights() const {
        if (kind == Kind::SG) return {reduce_mod2(-a), reduce_mod2(a - 1.0)};
        return {reduce_mod2(a), std::numeric_limits<double>::quiet_NaN()};
    }

    // Residue of the atom itself at one of its simple poles.
    complexd residue_at(complexd pole) const {
        double h = pole.imag() / kPi;  // pole = Re + i pi h, Re must be ~0 mod nothing
        if (kind == Kind::SG) {
            if (same_height(h, a)) return 2.0 * kI * std::tan(kPi * a);
            if (same_height(h, 1.0 - a)) return -2.0 * kI * std::tan(kPi * a);
        } else {
            if (same_height(h, -a)) return -2.0 * kI * std::sin(kPi * a);
        }
        throw NotSimplePole("atom has no pole at Im/pi = " + std::to_string(h));
    }

    bool is_singular_at(complexd z, double dist) const {
        for (double h : pole_heights()) {
            if (std::isnan(h)) continue;
            if (std::abs(periodic_distance(z, h)) < dist) return true;
        }
        return false;
    }

    // distance from z to the lattice line {i pi h + 2 pi i k, k integer} joined
    // with the real direction (poles are isolated points on Re = anything? no:
    // poles are points i pi h + 2 pi i k; distance in C).
    static double periodic_distance(complexd z, double h) {
        double im = z.imag() - kPi * h;
        im = std::remainder(im, 2.0 * kPi);
        return std::hypot(z.real(), im);
    }

    static double reduce_mod2(double x) {
        double r = std::remainder(x, 2.0);  // (-1, 1]
        if (r <= -1.0) r += 2.0;
        return r;
    }
    static bool same_height(double h, double a_) {
        return std::abs(std::remainder(h - a_, 2.0)) < 1e-9;
    }
};

// ---------------------------------------------------------------------------
// S-matrix component: product of atoms times a tracked sign.
// ---------------------------------------------------------------------------

struct LatticePoint {
    complexd position;  // within the requested window, Re = 0
    int order;          // > 0 zero of that order, < 0 pole
};

struct SMatrixComponent {
    Species left, right;           // unordered pair; (k,l) and (l,k) share atoms
    std::vector<FactorAtom> atoms;
    double sign = 1.0;             // from mod-2 reduction of shift products
    double pole_guard = 1e-12;

    complexd eval_unguarded(complexd z) const {
        complexd acc{sign, 0.0};
        for (const auto& at : atoms) acc *= at.eval(z);
        return acc;
    }

    complexd eval(complexd z) const {
        double guard = pole_guard * (1.0 + std::abs(z));
        for (const auto& at : atoms) {
            for (double h : at.pole_heights()) {
                if (std::isnan(h)) continue;
                if (FactorAtom::periodic_distance(z, h) < guard)
                    throw PoleProximity(z, kI * (kPi * h));
            }
        }
        return eval_unguarded(z);
    }

    // Exact pole/zero lattice restricted to Im z/pi in (im_lo, im_hi), Re = 0.
    // Coincident heights are merged; cancelled pole/zero pairs drop out.
    std::vector<LatticePoint> lattice(double im_lo, double im_hi) const {
        std::map<long long, int> orders;  // key: height snapped to 1e-12 grid
        auto add = [&](double h, int delta) {
            for (double base : {h, h + 2.0, h - 2.0, h + 4.0, h - 4.0}) {
                if (base > im_lo - 1e-12 && base < im_hi + 1e-12) {
                    long long key = static_cast<long long>(std::llround(base * 1e12));
                    orders[key] += delta;
                }
            }
        };
        for (const auto& at : atoms) {
            for (double h : at.pole_heights())
                if (!std::isnan(h)) add(h, -1);
            for (double h : at.zero_heights())
                if (!std::isnan(h)) add(h, +1);
        }
        std::vector<LatticePoint> out;
        for (auto& [key, ord] : orders) {
            if (ord == 0) continue;
            double h = static_cast<double>(key) * 1e-12;
            if (h <= im_lo + 1e-12 || h >= im_hi - 1e-12) continue;
            out.push_back({kI * (kPi * h), ord});
        }
        std::sort(out.begin(), out.end(),
                  [](const LatticePoint& x, const LatticePoint& y) { return x.position.imag() < y.position.imag(); });
        return out;
    }

    // Largest kappa such that R + i(-kappa, kappa) is free of poles.
    double safe_strip_half_width() const {
        double best = kPi;  // nothing can be further than the crossing image
        for (const auto& at : atoms) {
            for (double h : at.pole_heights()) {
                if (std::isnan(h)) continue;
                double d = std::min(std::abs(h), std::abs(2.0 - std::abs(h))) * kPi;
                best = std::min(best, d);
            }
        }
        return best;
    }

    // Residue at a simple pole: exactly one atom singular there, the rest are
    // evaluated at the point.
    complexd residue_at(complexd pole) const {
        const double probe = 1e-7;
        int singular = -1;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            if (atoms[i].is_singular_at(pole, probe)) {
                if (singular >= 0)
                    throw NotSimplePole("two atoms singular at Im/pi = " +
                                        std::to_string(pole.imag() / kPi));
                singular = static_cast<int>(i);
            }
        }
        if (singular < 0)
            throw NotSimplePole("no atom singular at Im/pi = " + std::to_string(pole.imag() / kPi));
        complexd res = atoms[static_cast<std::size_t>(singular)].residue_at(pole);
        complexd rest{sign, 0.0};
        for (std::size_t i = 0; i < atoms.size(); ++i)
            if (i != static_cast<std::size_t>(singular)) rest *= atoms[i].eval(pole);
        return res * rest;
    }
};

// ---------------------------------------------------------------------------
// Bootstrap shift products on atom lists.
//
// For both kinds,  X_a(z + i pi s) X_a(z - i pi s) = X_{a-s}(z) X_{a+s}(z),
// so the fusion shift acts by parameter splitting.  Parameters are reduced
// mod 2 (exact for both kinds); an atom reduced to a = 1 is the constant -1
// for CDD (sign tracked on the component) and +1 for SG; exact +-a pairs of
// one kind cancel.
// ---------------------------------------------------------------------------

namespace detail {

inline void normalize_atoms(std::vector<FactorAtom>& atoms, double& sign) {
    std::vector<FactorAtom> keep;
    for (auto at : atoms) {
        at.a = FactorAtom::reduce_mod2(at.a);
        if (std::abs(at.a) < 1e-13) continue;  // unit atom
        if (std::abs(at.a - 1.0) < 1e-13) {
            if (at.kind == FactorAtom::Kind::CDD) sign = -sign;  // A_1 = -1
            continue;                                            // T_1 = +1
        }
        keep.push_back(at);
    }
    // cancel exact inverse pairs (a, -a) of the same kind
    std::vector<bool> dead(keep.size(), false);
    for (std::size_t i = 0; i < keep.size(); ++i) {
        if (dead[i]) continue;
        for (std::size_t j = i + 1; j < keep.size(); ++j) {
            if (dead[j] || keep[j].kind != keep[i].kind) continue;
            if (std::abs(FactorAtom::reduce_mod2(keep[i].a + keep[j].a)) < 1e-12) {
                dead[i] = dead[j] = true;
                break;
            }
        }
    }
    atoms.clear();
    for (std::size_t i = 0; i < keep.size(); ++i)
        if (!dead[i]) atoms.push_back(keep[i]);
}

inline std::vector<FactorAtom> shift_product(const std::vector<FactorAtom>& atoms, double s,
                                             double& sign) {
    std::vector<FactorAtom> out;
    out.reserve(2 * atoms.size());
    for (const auto& at : atoms) {
        out.push_back({at.kind, at.a - s});
        out.push_back({at.kind, at.a + s});
    }
    normalize_atoms(out, sign);
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// The S-matrix family: S = S_SG * prod_j S_CDD(block_j).  The default model
// has one block (nu_minus, nu_plus); Remark-style multi-CDD models pass an
// odd number of blocks.  sg_only drops the CDD factors (negative control).
// ---------------------------------------------------------------------------

struct CddBlock {
    double nu_minus;
    double nu_plus;
};

class SMatrixFamily {
  public:
    SMatrixFamily(const CouplingParams& params, bool sg_only = false,
                  std::vector<CddBlock> blocks = {}, const Tolerances& tol = default_tolerances())
        : params_(params), sg_only_(sg_only), tol_(tol) {
        if (blocks.empty()) blocks.push_back({params.nu_minus, params.nu_plus});
        blocks_ = std::move(blocks);
        build();
    }

    const CouplingParams& params() const { return params_; }
    bool sg_only() const { return sg_only_; }
    const std::vector<CddBlock>& blocks() const { return blocks_; }

    const SMatrixComponent& component(Species k, Species l) const {
        int idx = index_of(k) + index_of(l);  // 2, 3, 4
        return comps_[static_cast<std::size_t>(idx - 2)];
    }

    complexd eval(Species k, Species l, complexd z) const { return component(k, l).eval(z); }

    // Smallest pole-free strip half-width around the real line over all
    // components; the quadrature layer derives trapezoid steps from this.
    double safe_strip_half_width() const {
        double best = kPi;
        for (const auto& c : comps_) best = std::min(best, c.safe_strip_half_width());
        return best;
    }

  private:
    void build() {
        const double nu = params_.nu;
        std::vector<FactorAtom> b11;
        b11.push_back({FactorAtom::Kind::SG, nu});
        if (!sg_only_) {
            for (const auto& blk : blocks_) {
                b11.push_back({FactorAtom::Kind::CDD, nu - blk.nu_minus});
                b11.push_back({FactorAtom::Kind::CDD, nu + blk.nu_plus});
                b11.push_back({FactorAtom::Kind::CDD, 1.0 - nu + blk.nu_minus});
                b11.push_back({FactorAtom::Kind::CDD, 1.0 - nu - blk.nu_plus});
            }
        }
        double s11 = 1.0, s21 = 1.0, s22 = 1.0;
        detail::normalize_atoms(b11, s11);
        auto b21 = detail::shift_product(b11, nu / 2.0, s21);
        s21 *= s11 * s11;
        auto b22 = detail::shift_product(b21, nu / 2.0, s22);
        s22 *= s21 * s21;
        comps_[0] = SMatrixComponent{Species::b1, Species::b1, b11, s11, tol_.pole_guard};
        comps_[1] = SMatrixComponent{Species::b1, Species::b2, b21, s21, tol_.pole_guard};
        comps_[2] = SMatrixComponent{Species::b2, Species::b2, b22, s22, tol_.pole_guard};
    }

    CouplingParams params_;
    bool sg_only_;
    std::vector<CddBlock> blocks_;
    Tolerances tol_;
    std::array<SMatrixComponent, 3> comps_;
};

inline SMatrixComponent atoms(const CouplingParams& params, Species k, Species l) {
    return SMatrixFamily(params).component(k, l);
}

inline complexd s_eval(const SMatrixComponent& c, complexd zeta) { return c.eval(zeta); }
inline complexd residue_closed_form(const SMatrixComponent& c, complexd pole) {
    return c.residue_at(pole);
}

// ---------------------------------------------------------------------------
// Fusion table
// ---------------------------------------------------------------------------

struct FusionProcess {
    Species left, right, product;
    double theta_left;    // theta^{gamma}_{(alpha beta)}
    double theta_right;   // theta^{gamma}_{(beta alpha)}
    double fusion_angle() const { return theta_left + theta_right; }
};

struct FusionTable {
    std::vector<FusionProcess> processes;
    // keyed by (left,right) index pair
    complexd residue[3][3];        // R^{gamma}_{alpha beta}
    complexd t_residue[3][3];      // R' = -R
    complexd intertwiner[3][3];    // eta^{gamma}_{alpha beta}; 0 for non-fusions

    const FusionProcess* find(Species a, Species b) const {
        for (const auto& p : processes)
            if (p.left == a && p.right == b) return &p;
        return nullptr;  // "not a fusion"
    }
    bool is_fusion(Species a, Species b) const { return find(a, b) != nullptr; }

    complexd R(Species a, Species b) const { return residue[index_of(a)][index_of(b)]; }
    complexd Rprime(Species a, Species b) const { return t_residue[index_of(a)][index_of(b)]; }
    complexd eta(Species a, Species b) const { return intertwiner[index_of(a)][index_of(b)]; }
};

inline FusionTable fusion_table(const SMatrixFamily& family) {
    const double nu = family.params().nu;
    FusionTable t{};
    t.processes = {
        {Species::b1, Species::b1, Species::b2, kPi * nu / 2.0, kPi * nu / 2.0},
        {Species::b2, Species::b1, Species::b1, kPi * nu / 2.0, kPi * (1.0 - nu)},
        {Species::b1, Species::b2, Species::b1, kPi * (1.0 - nu), kPi * nu / 2.0},
    };
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            t.residue[a][b] = t.t_residue[a][b] = t.intertwiner[a][b] = complexd{0.0, 0.0};
        }
    for (const auto& p : t.processes) {
        const auto& comp = family.component(p.left, p.right);
        complexd pole = kI * p.fusion_angle();
        complexd r = comp.residue_at(pole);
        complexd rp = comp.residue_at(kI * kPi - pole);
        int a = index_of(p.left), b = index_of(p.right);
        t.residue[a][b] = r;
        t.t_residue[a][b] = rp;
        t.intertwiner[a][b] = kI * std::sqrt(2.0 * kPi * std::abs(r));
    }
    return t;
}

inline FusionTable fusion_table(const CouplingParams& params) {
    return fusion_table(SMatrixFamily(params));
}

}  // namespace sgb

#endif
