#ifndef SGBLAB_FOCK_HPP
#define SGBLAB_FOCK_HPP

#include <array>
#include <memory>
#include <numeric>
#include <random>

#include "sgblab/common.hpp"
#include "sgblab/quadrature.hpp"
#include "sgblab/scattering.hpp"
#include "sgblab/testfunction.hpp"

namespace sgb {

// ---------------------------------------------------------------------------
// Shared model context: the S-matrix family, its fusion data, the C_n zero
// set, and quadrature defaults derived from the family's pole-free strip.
// ---------------------------------------------------------------------------

struct Model {
    CouplingParams params;
    std::shared_ptr<const SMatrixFamily> S;
    FusionTable fusion;
    Tolerances tol;
    std::array<double, 4> lambdas;  // C_n zeros / pi: scaled by pi below
    double strip;                   // pole-free half-width around the real line
    double quad_half_width = 10.0;

    double mass_of(int k) const { return mass(params, species_from_index(k)); }

    const SMatrixComponent& comp(int k, int l) const {
        return S->component(species_from_index(k), species_from_index(l));
    }

    QuadratureSpec spec_for(double tol_target) const {
        return QuadratureSpec::for_tolerance(strip, tol_target, quad_half_width);
    }
};

using ModelPtr = std::shared_ptr<const Model>;

inline ModelPtr make_model(const CouplingParams& p, bool sg_only = false,
                           std::vector<CddBlock> blocks = {},
                           const Tolerances& tol = default_tolerances()) {
    auto fam = std::make_shared<SMatrixFamily>(p, sg_only, std::move(blocks), tol);
    auto m = std::make_shared<Model>();
    m->params = p;
    m->S = fam;
    m->fusion = fusion_table(*fam);
    m->tol = tol;
    m->lambdas = {0.0, kPi * (1.0 - p.nu), kPi * (1.5 * p.nu - 1.0), kPi * p.nu / 2.0};
    m->strip = fam->safe_strip_half_width();
    return m;
}

// C_n factor: symmetric, bounded by 1 on the reals, zeros at the S poles the
// commutator proof crosses.
inline complexd cn_factor(const Model& m, const std::vector<complexd>& th) {
    complexd acc{1.0, 0.0};
    const complexd two_pi_i = 2.0 * kPi * kI;
    for (double lam : m.lambdas) {
        complexd il = kI * lam;
        for (std::size_t j = 0; j < th.size(); ++j)
            for (std::size_t k = j + 1; k < th.size(); ++k) {
                complexd d = th[k] - th[j];
                acc *= (d - il) * (-d - il) / ((d - two_pi_i) * (-d - two_pi_i));
            }
    }
    return acc;
}

inline complexd cn_factor(const Model& m, std::initializer_list<complexd> th) {
    return cn_factor(m, std::vector<complexd>(th));
}

// ---------------------------------------------------------------------------
// Permutation tables with inversion lists (validated against the generator
// composition of D_n in the unit tests).
// ---------------------------------------------------------------------------

namespace perm {

struct Entry {
    std::vector<int> sigma;                    // slot p reads input index sigma[p]
    std::vector<std::pair<int, int>> inv;      // inverted index pairs (a < b)
};

inline const std::vector<Entry>& table(int n) {
    static std::array<std::vector<Entry>, 6> cache;
    auto& slot = cache[static_cast<std::size_t>(n)];
    if (!slot.empty()) return slot;
    std::vector<int> s(static_cast<std::size_t>(n));
    std::iota(s.begin(), s.end(), 0);
    do {
        Entry e;
        e.sigma = s;
        std::vector<int> pos(static_cast<std::size_t>(n));
        for (int p = 0; p < n; ++p) pos[static_cast<std::size_t>(s[static_cast<std::size_t>(p)])] = p;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                if (pos[static_cast<std::size_t>(a)] > pos[static_cast<std::size_t>(b)])
                    e.inv.emplace_back(a, b);
        slot.push_back(std::move(e));
    } while (std::next_permutation(s.begin(), s.end()));
    return slot;
}

}  // namespace perm

// ---------------------------------------------------------------------------
// One-particle wavefunctions
// ---------------------------------------------------------------------------

struct Wave {
    virtual ~Wave() = default;
    virtual complexd eval(int k, complexd th) const = 0;
};
using WavePtr = std::shared_ptr<const Wave>;

struct OneParticleProfile {
    Species species = Species::b1;
    double center = 0.0;
    double width = 1.0;
    complexd amplitude{1.0, 0.0};

    complexd eval(complexd th) const {
        complexd u = th - center;
        return amplitude * std::exp(-u * u / (2.0 * width * width));
    }
};

inline OneParticleProfile make_profile(Species s, double center, double width,
                                       complexd amplitude = complexd{1.0, 0.0}) {
    if (!(width >= 0.2 && width <= 5.0))
        throw RangeError("profile width outside [0.2, 5]: strip growth unbounded");
    return OneParticleProfile{s, center, width, amplitude};
}

struct ProfileWave final : Wave {
    OneParticleProfile p;
    explicit ProfileWave(OneParticleProfile pr) : p(pr) {}
    complexd eval(int k, complexd th) const override {
        return k == index_of(p.species) ? p.eval(th) : complexd{0.0, 0.0};
    }
};

// f^{sign} of a wedge test function, with the per-species mass baked in.
struct TransformWave final : Wave {
    WedgeTestFunction f;
    int sign;
    CouplingParams params;
    TransformWave(WedgeTestFunction fn, int sg, const CouplingParams& p)
        : f(std::move(fn)), sign(sg), params(p) {}
    complexd eval(int k, complexd th) const override {
        return f.transform(sign, mass(params, species_from_index(k)), species_from_index(k), th);
    }
};

// J_1 h = conj . h . conj  (the antiunitary one-particle CPT action)
struct ConjWave final : Wave {
    WavePtr inner;
    explicit ConjWave(WavePtr w) : inner(std::move(w)) {}
    complexd eval(int k, complexd th) const override {
        return std::conj(inner->eval(k, std::conj(th)));
    }
};

// U_1(a, lambda) h = e^{i p_k(th) . a} h(th - lambda)
struct BoostedWave final : Wave {
    WavePtr inner;
    double a0, a1, lambda;
    CouplingParams params;
    BoostedWave(WavePtr w, double a0_, double a1_, double lam, const CouplingParams& p)
        : inner(std::move(w)), a0(a0_), a1(a1_), lambda(lam), params(p) {}
    complexd eval(int k, complexd th) const override {
        double mk = mass(params, species_from_index(k));
        complexd phase = kI * mk * (std::cosh(th) * a0 - std::sinh(th) * a1);
        return std::exp(phase) * inner->eval(k, th - lambda);
    }
};

// ---------------------------------------------------------------------------
// n-particle functions.  All concrete types below are S-symmetric by
// construction except SymTensorFn with symmetrized = false (pre-projection
// products, used by the symmetrize() tests).
// ---------------------------------------------------------------------------

class NFunction {
  public:
    explicit NFunction(int n) : n_(n) {}
    virtual ~NFunction() = default;
    int particles() const { return n_; }
    virtual complexd eval(const std::vector<int>& kk, const std::vector<complexd>& th) const = 0;

  private:
    int n_;
};
using NFunctionPtr = std::shared_ptr<const NFunction>;

namespace detail {

// Near-pole retries evaluate the full expression on a small circle around the
// offending variable; depth-capped so averaging cannot recurse.
inline int& guard_depth() {
    thread_local int depth = 0;
    return depth;
}

struct GuardScope {
    GuardScope() { ++guard_depth(); }
    ~GuardScope() { --guard_depth(); }
};

}  // namespace detail

class SymTensorFn final : public NFunction {
  public:
    struct Term {
        complexd coeff{1.0, 0.0};
        std::vector<std::pair<int, WavePtr>> factors;  // (species index, wave)
    };

    SymTensorFn(ModelPtr m, std::vector<Term> terms, bool symmetrized, bool cn_applied)
        : NFunction(terms.empty() ? 0 : static_cast<int>(terms.front().factors.size())),
          model_(std::move(m)),
          terms_(std::move(terms)),
          symmetrized_(symmetrized),
          cn_applied_(cn_applied) {}

    bool symmetrized() const { return symmetrized_; }
    bool cn_applied() const { return cn_applied_; }
    const std::vector<Term>& terms() const { return terms_; }
    ModelPtr model() const { return model_; }

    std::shared_ptr<SymTensorFn> with_flags(bool symmetrized, bool cn) const {
        return std::make_shared<SymTensorFn>(model_, terms_, symmetrized, cn);
    }

    complexd eval(const std::vector<int>& kk, const std::vector<complexd>& th) const override {
        int n = particles();
        // proximity pass: any pairwise S factor evaluated by the projector on
        // a near-pole argument forces the circle-averaged path
        if (symmetrized_ && n > 1 && detail::guard_depth() == 0) {
            for (int a = 0; a < n; ++a)
                for (int b = a + 1; b < n; ++b) {
                    const auto& comp = model_->comp(kk[static_cast<std::size_t>(a)],
                                                    kk[static_cast<std::size_t>(b)]);
                    complexd d = th[static_cast<std::size_t>(b)] - th[static_cast<std::size_t>(a)];
                    for (const auto& at : comp.atoms) {
                        if (at.is_singular_at(d, model_->tol.hyperplane_guard)) {
                            detail::GuardScope scope;
                            auto thc = th;
                            return circle_average(
                                [&](complexd z) {
                                    thc[static_cast<std::size_t>(b)] = z;
                                    return eval_impl(kk, thc);
                                },
                                th[static_cast<std::size_t>(b)], 1e-4);
                        }
                    }
                }
        }
        return eval_impl(kk, th);
    }

  private:
    complexd eval_impl(const std::vector<int>& kk, const std::vector<complexd>& th) const {
        int n = particles();
        complexd total{0.0, 0.0};
        for (const auto& term : terms_) {
            complexd acc{0.0, 0.0};
            if (!symmetrized_) {
                complexd prod = term.coeff;
                for (int p = 0; p < n && prod != complexd{0.0, 0.0}; ++p)
                    prod *= term.factors[static_cast<std::size_t>(p)].second->eval(
                        kk[static_cast<std::size_t>(p)], th[static_cast<std::size_t>(p)]);
                acc = prod;
            } else {
                for (const auto& pe : perm::table(n)) {
                    complexd prod = term.coeff;
                    for (int p = 0; p < n; ++p) {
                        int slot = pe.sigma[static_cast<std::size_t>(p)];
                        prod *= term.factors[static_cast<std::size_t>(p)].second->eval(
                            kk[static_cast<std::size_t>(slot)], th[static_cast<std::size_t>(slot)]);
                        if (prod == complexd{0.0, 0.0}) break;
                    }
                    if (prod == complexd{0.0, 0.0}) continue;
                    for (const auto& [a, b] : pe.inv)
                        prod *= model_->comp(kk[static_cast<std::size_t>(a)], kk[static_cast<std::size_t>(b)])
                                    .eval_unguarded(th[static_cast<std::size_t>(b)] -
                                                    th[static_cast<std::size_t>(a)]);
                    acc += prod;
                }
                acc /= static_cast<double>(perm::table(n).size());
            }
            total += acc;
        }
        if (cn_applied_ && n > 1) total *= cn_factor(*model_, th);
        return total;
    }

    ModelPtr model_;
    std::vector<Term> terms_;
    bool symmetrized_;
    bool cn_applied_;
};

// D_n(tau_j): transposition action, used by the symmetry tests.
class TranspositionFn final : public NFunction {
  public:
    TranspositionFn(ModelPtr m, NFunctionPtr base, int j)
        : NFunction(base->particles()), model_(std::move(m)), base_(std::move(base)), j_(j) {
        if (j_ < 0 || j_ + 1 >= particles()) throw RangeError("transposition index out of range");
    }
    complexd eval(const std::vector<int>& kk, const std::vector<complexd>& th) const override {
        auto kk2 = kk;
        auto th2 = th;
        std::swap(kk2[static_cast<std::size_t>(j_)], kk2[static_cast<std::size_t>(j_ + 1)]);
        std::swap(th2[static_cast<std::size_t>(j_)], th2[static_cast<std::size_t>(j_ + 1)]);
        complexd s = model_->comp(kk[static_cast<std::size_t>(j_)], kk[static_cast<std::size_t>(j_ + 1)])
                         .eval(th[static_cast<std::size_t>(j_ + 1)] - th[static_cast<std::size_t>(j_)]);
        return s * base_->eval(kk2, th2);
    }

  private:
    ModelPtr model_;
    NFunctionPtr base_;
    int j_;
};

// J_n: reverse the slots and conjugate (antiunitary), analytic continuation
// via conj . eval . conj.
class CptFn final : public NFunction {
  public:
    explicit CptFn(NFunctionPtr base) : NFunction(base->particles()), base_(std::move(base)) {}
    complexd eval(const std::vector<int>& kk, const std::vector<complexd>& th) const override {
        std::vector<int> kr(kk.rbegin(), kk.rend());
        std::vector<complexd> tr(th.size());
        for (std::size_t i = 0; i < th.size(); ++i) tr[i] = std::conj(th[th.size() - 1 - i]);
        return std::conj(base_->eval(kr, tr));
    }
    NFunctionPtr base() const { return base_; }

  private:
    NFunctionPtr base_;
};

class PoincareFn final : public NFunction {
  public:
    PoincareFn(ModelPtr m, NFunctionPtr base, double a0, double a1, double lambda)
        : NFunction(base->particles()), model_(std::move(m)), base_(std::move(base)), a0_(a0), a1_(a1),
          lam_(lambda) {}
    complexd eval(const std::vector<int>& kk, const std::vector<complexd>& th) const override {
        complexd phase{0.0, 0.0};
        for (std::size_t l = 0; l < th.size(); ++l) {
            double mk = model_->mass_of(kk[l]);
            phase += kI * mk * (std::cosh(th[l]) * a0_ - std::sinh(th[l]) * a1_);
        }
        std::vector<complexd> shifted(th.size());
        for (std::size_t l = 0; l < th.size(); ++l) shifted[l] = th[l] - lam_;
        return std::exp(phase) * base_->eval(kk, shifted);
    }

  private:
    ModelPtr model_;
    NFunctionPtr base_;
    double a0_, a1_, lam_;
};

class ScaledSumFn final : public NFunction {
  public:
    ScaledSumFn(int n, std::vector<std::pair<complexd, NFunctionPtr>> parts)
        : NFunction(n), parts_(std::move(parts)) {}
    complexd eval(const std::vector<int>& kk, const std::vector<complexd>& th) const override {
        complexd acc{0.0, 0.0};
        for (const auto& [c, f] : parts_) acc += c * f->eval(kk, th);
        return acc;
    }

  private:
    std::vector<std::pair<complexd, NFunctionPtr>> parts_;
};

class OneWaveFn final : public NFunction {
  public:
    explicit OneWaveFn(WavePtr w, complexd scale = complexd{1.0, 0.0})
        : NFunction(1), w_(std::move(w)), scale_(scale) {}
    complexd eval(const std::vector<int>& kk, const std::vector<complexd>& th) const override {
        return scale_ * w_->eval(kk[0], th[0]);
    }

  private:
    WavePtr w_;
    complexd scale_;
};

// z^dagger(w) on an S-symmetric base: the (n+1)-slot insertion sum
//   (1/sqrt(n+1)) sum_i  prod_{j<i} S^{(k_j k_i)}(th_i - th_j)  w(k_i, th_i)
//                        base(kk \ i, th \ i).
class InsertFn final : public NFunction {
  public:
    InsertFn(ModelPtr m, NFunctionPtr base, WavePtr w)
        : NFunction(base->particles() + 1), model_(std::move(m)), base_(std::move(base)),
          w_(std::move(w)) {}
    complexd eval(const std::vector<int>& kk, const std::vector<complexd>& th) const override {
        int n = particles();
        complexd acc{0.0, 0.0};
        std::vector<int> kr(static_cast<std::size_t>(n - 1));
        std::vector<complexd> tr(static_cast<std::size_t>(n - 1));
        for (int i = 0; i < n; ++i) {
            complexd wi = w_->eval(kk[static_cast<std::size_t>(i)], th[static_cast<std::size_t>(i)]);
            if (wi == complexd{0.0, 0.0}) continue;
            complexd chain{1.0, 0.0};
            for (int j = 0; j < i; ++j)
                chain *= model_->comp(kk[static_cast<std::size_t>(j)], kk[static_cast<std::size_t>(i)])
                             .eval_unguarded(th[static_cast<std::size_t>(i)] -
                                             th[static_cast<std::size_t>(j)]);
            int idx = 0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                kr[static_cast<std::size_t>(idx)] = kk[static_cast<std::size_t>(j)];
                tr[static_cast<std::size_t>(idx)] = th[static_cast<std::size_t>(j)];
                ++idx;
            }
            acc += chain * wi * base_->eval(kr, tr);
        }
        return acc / std::sqrt(static_cast<double>(n));
    }

  private:
    ModelPtr model_;
    NFunctionPtr base_;
    WavePtr w_;
};

// z(w): one-variable contraction, quadrature over the real line.
class ContractFn final : public NFunction {
  public:
    ContractFn(ModelPtr m, NFunctionPtr base, WavePtr w)
        : NFunction(base->particles() - 1), model_(std::move(m)), base_(std::move(base)),
          w_(std::move(w)), grid_(model_->spec_for(model_->tol.quad_rel_1d * 0.01).axis(7)) {}
    complexd eval(const std::vector<int>& kk, const std::vector<complexd>& th) const override {
        int nb = base_->particles();
        std::vector<int> kf(static_cast<std::size_t>(nb));
        std::vector<complexd> tf(static_cast<std::size_t>(nb));
        std::copy(kk.begin(), kk.end(), kf.begin() + 1);
        std::copy(th.begin(), th.end(), tf.begin() + 1);
        std::vector<complexd> vals(grid_.nodes.size());
        complexd acc{0.0, 0.0};
        for (int l = 1; l <= 2; ++l) {
            kf[0] = l;
            for (std::size_t q = 0; q < grid_.nodes.size(); ++q) {
                tf[0] = grid_.nodes[q];
                vals[q] = std::conj(w_->eval(l, grid_.nodes[q])) * base_->eval(kf, tf);
            }
            acc += pairwise_sum(vals);
        }
        return acc * grid_.weight * std::sqrt(static_cast<double>(nb));
    }

  private:
    ModelPtr model_;
    NFunctionPtr base_;
    WavePtr w_;
    LineGrid grid_;
};

// ---------------------------------------------------------------------------
// Graded vectors
// ---------------------------------------------------------------------------

class FockVector {
  public:
    explicit FockVector(ModelPtr m) : model_(std::move(m)) {}

    ModelPtr model() const { return model_; }
    complexd& vacuum() { return vacuum_; }
    complexd vacuum() const { return vacuum_; }
    int max_grade() const { return static_cast<int>(grades_.size()); }

    NFunctionPtr grade(int n) const {
        if (n < 1 || n > static_cast<int>(grades_.size())) return nullptr;
        return grades_[static_cast<std::size_t>(n - 1)];
    }
    void set_grade(int n, NFunctionPtr f) {
        if (n < 1) throw RangeError("grade must be >= 1");
        if (static_cast<int>(grades_.size()) < n) grades_.resize(static_cast<std::size_t>(n));
        grades_[static_cast<std::size_t>(n - 1)] = std::move(f);
    }

    FockVector& operator+=(const FockVector& other) {
        vacuum_ += other.vacuum_;
        for (int n = 1; n <= other.max_grade(); ++n) {
            auto g = other.grade(n);
            if (!g) continue;
            if (!grade(n))
                set_grade(n, g);
            else
                set_grade(n, std::make_shared<ScaledSumFn>(
                                 n, std::vector<std::pair<complexd, NFunctionPtr>>{
                                        {complexd{1.0, 0.0}, grade(n)}, {complexd{1.0, 0.0}, g}}));
        }
        return *this;
    }

  private:
    ModelPtr model_;
    complexd vacuum_{0.0, 0.0};
    std::vector<NFunctionPtr> grades_;
};

// ---------------------------------------------------------------------------
// Construction and certification of D_0 vectors
// ---------------------------------------------------------------------------

inline std::shared_ptr<SymTensorFn> tensor_state(ModelPtr m,
                                                 const std::vector<OneParticleProfile>& profiles,
                                                 complexd coeff = complexd{1.0, 0.0}) {
    SymTensorFn::Term t;
    t.coeff = coeff;
    for (const auto& p : profiles) t.factors.emplace_back(index_of(p.species), std::make_shared<ProfileWave>(p));
    return std::make_shared<SymTensorFn>(m, std::vector<SymTensorFn::Term>{t}, false, false);
}

inline std::shared_ptr<SymTensorFn> symmetrize(const SymTensorFn& f) {
    if (f.particles() > 4) throw RangeError("particle-number truncation is n <= 4");
    return f.with_flags(true, f.cn_applied());
}

struct D0Certificate {
    double max_symmetry_residual = 0.0;
    double max_zero_residual = 0.0;
    bool finite_everywhere = true;
};

// Spot-checks of the Eq.-style domain conditions: S-symmetry at real points,
// vanishing at the lowered-orientation coincidence hyperplanes (the ones the
// commutator proof crosses), finiteness inside the poly-strip.
inline D0Certificate certify_d0(const ModelPtr& m, const NFunctionPtr& f, std::uint64_t seed,
                                int samples = 20) {
    D0Certificate cert;
    int n = f->particles();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> real_pt(-2.5, 2.5);
    std::uniform_int_distribution<int> spec(1, 2);
    if (n == 0) return cert;
    auto random_component = [&](std::vector<int>& kk) {
        for (auto& k : kk) k = spec(rng);
    };
    std::vector<int> kk(static_cast<std::size_t>(n));
    std::vector<complexd> th(static_cast<std::size_t>(n));
    // (a) S-symmetry under every adjacent transposition
    for (int s = 0; s < samples && n > 1; ++s) {
        random_component(kk);
        for (auto& t : th) t = real_pt(rng);
        for (int j = 0; j + 1 < n; ++j) {
            TranspositionFn tf(m, f, j);
            complexd lhs = f->eval(kk, th);
            complexd rhs = tf.eval(kk, th);
            double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-12});
            cert.max_symmetry_residual =
                std::max(cert.max_symmetry_residual, std::abs(lhs - rhs) / scale);
        }
    }
    // (b) zeros at theta_b = theta_a - i lambda (later slot lowered)
    for (int s = 0; s < samples && n > 1; ++s) {
        random_component(kk);
        for (auto& t : th) t = real_pt(rng);
        int a = std::uniform_int_distribution<int>(0, n - 2)(rng);
        int b = std::uniform_int_distribution<int>(a + 1, n - 1)(rng);
        for (double lam : m->lambdas) {
            auto probe = th;
            probe[static_cast<std::size_t>(b)] = probe[static_cast<std::size_t>(a)] - kI * lam;
            complexd v0 = f->eval(kk, probe);
            probe[static_cast<std::size_t>(b)] += 0.35;
            complexd vref = f->eval(kk, probe);
            double scale = std::max(std::abs(vref), 1e-10);
            cert.max_zero_residual = std::max(cert.max_zero_residual, std::abs(v0) / scale);
        }
    }
    // (c) finite at random points of the open poly-strip
    std::uniform_real_distribution<double> im_pt(-0.95, 0.95);
    for (int s = 0; s < samples; ++s) {
        random_component(kk);
        for (auto& t : th)
            t = complexd{real_pt(rng), im_pt(rng) * m->params.nu * kPi / 2.0};
        complexd v = f->eval(kk, th);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) cert.finite_everywhere = false;
    }
    return cert;
}

inline FockVector make_d0_vector(ModelPtr m, const std::vector<OneParticleProfile>& profiles,
                                 std::uint64_t certification_seed = 1234,
                                 double zero_tol = 1e-10) {
    FockVector v(m);
    if (profiles.empty()) {
        v.vacuum() = complexd{1.0, 0.0};
        return v;
    }
    if (profiles.size() > 4) throw RangeError("particle-number truncation is n <= 4");
    auto fn = tensor_state(m, profiles)->with_flags(true, true);
    auto cert = certify_d0(m, fn, certification_seed, 12);
    if (!cert.finite_everywhere)
        throw PoleProximity(complexd{0.0, 0.0}, complexd{0.0, 0.0});
    if (cert.max_symmetry_residual > 1e-9 || cert.max_zero_residual > zero_tol)
        throw Error("D0 certification failed: symmetry " +
                    std::to_string(cert.max_symmetry_residual) + ", zeros " +
                    std::to_string(cert.max_zero_residual));
    v.set_grade(static_cast<int>(profiles.size()), fn);
    return v;
}

// ---------------------------------------------------------------------------
// ZF operators and the basic unitary/antiunitary actions
// ---------------------------------------------------------------------------

inline FockVector apply_zdag(const WavePtr& w, const FockVector& v) {
    FockVector out(v.model());
    if (v.vacuum() != complexd{0.0, 0.0})
        out.set_grade(1, std::make_shared<OneWaveFn>(w, v.vacuum()));
    for (int n = 1; n <= v.max_grade(); ++n) {
        if (!v.grade(n)) continue;
        if (n >= 4) throw RangeError("z^dagger beyond the n <= 4 truncation");
        auto created = std::make_shared<InsertFn>(v.model(), v.grade(n), w);
        if (out.grade(n + 1))
            out.set_grade(n + 1, std::make_shared<ScaledSumFn>(
                                     n + 1, std::vector<std::pair<complexd, NFunctionPtr>>{
                                                {complexd{1.0, 0.0}, out.grade(n + 1)},
                                                {complexd{1.0, 0.0}, created}}));
        else
            out.set_grade(n + 1, created);
    }
    return out;
}

inline FockVector apply_z(const WavePtr& w, const FockVector& v) {
    FockVector out(v.model());
    for (int n = 1; n <= v.max_grade(); ++n) {
        if (!v.grade(n)) continue;
        if (n == 1) {
            // scalar result: quadrature of conj(w) against the 1-particle part
            auto spec = v.model()->spec_for(v.model()->tol.quad_rel_1d * 0.01);
            LineGrid g = spec.axis(3);
            complexd acc{0.0, 0.0};
            for (int l = 1; l <= 2; ++l) {
                std::vector<complexd> vals(g.nodes.size());
                for (std::size_t q = 0; q < g.nodes.size(); ++q)
                    vals[q] = std::conj(w->eval(l, g.nodes[q])) *
                              v.grade(1)->eval({l}, {complexd{g.nodes[q], 0.0}});
                acc += pairwise_sum(vals);
            }
            out.vacuum() += acc * g.weight;
        } else {
            out.set_grade(n - 1, std::make_shared<ContractFn>(v.model(), v.grade(n), w));
        }
    }
    return out;
}

inline FockVector apply_cpt(const FockVector& v) {
    FockVector out(v.model());
    out.vacuum() = std::conj(v.vacuum());
    for (int n = 1; n <= v.max_grade(); ++n)
        if (v.grade(n)) out.set_grade(n, std::make_shared<CptFn>(v.grade(n)));
    return out;
}

// z'(w) = J z(J_1 w) J,   z'^dagger(w) = J z^dagger(J_1 w) J
inline FockVector apply_zprime(const WavePtr& w, const FockVector& v) {
    return apply_cpt(apply_z(std::make_shared<ConjWave>(w), apply_cpt(v)));
}
inline FockVector apply_zprime_dag(const WavePtr& w, const FockVector& v) {
    return apply_cpt(apply_zdag(std::make_shared<ConjWave>(w), apply_cpt(v)));
}

inline FockVector apply_poincare(double a0, double a1, double lambda, const FockVector& v) {
    FockVector out(v.model());
    out.vacuum() = v.vacuum();
    for (int n = 1; n <= v.max_grade(); ++n)
        if (v.grade(n))
            out.set_grade(n, std::make_shared<PoincareFn>(v.model(), v.grade(n), a0, a1, lambda));
    return out;
}

// ---------------------------------------------------------------------------
// Inner products: tensor trapezoid over the species-resolved components.
// ---------------------------------------------------------------------------

inline const std::vector<std::vector<int>>& species_combos(int n) {
    static std::array<std::vector<std::vector<int>>, 6> cache;
    auto& slot = cache[static_cast<std::size_t>(n)];
    if (!slot.empty() || n == 0) return slot;
    std::size_t total = static_cast<std::size_t>(1) << n;
    for (std::size_t mask = 0; mask < total; ++mask) {
        std::vector<int> kk(static_cast<std::size_t>(n));
        for (int b = 0; b < n; ++b) kk[static_cast<std::size_t>(b)] = ((mask >> b) & 1) ? 2 : 1;
        slot.push_back(std::move(kk));
    }
    return slot;
}

inline complexd ip_grade(const NFunctionPtr& a, const NFunctionPtr& b, const QuadratureSpec& spec) {
    int n = a->particles();
    if (n != b->particles()) throw RangeError("inner product of mismatched gradings");
    std::vector<LineGrid> axes;
    for (int d = 0; d < n; ++d) axes.push_back(spec.axis(d));
    complexd acc{0.0, 0.0};
    std::vector<complexd> th(static_cast<std::size_t>(n));
    for (const auto& kk : species_combos(n)) {
        acc += tensor_integrate(axes, [&](const std::vector<double>& pt) {
            std::vector<complexd> tc(pt.size());
            for (std::size_t i = 0; i < pt.size(); ++i) tc[i] = complexd{pt[i], 0.0};
            return std::conj(a->eval(kk, tc)) * b->eval(kk, tc);
        });
    }
    return acc;
}

inline complexd inner_product(const FockVector& a, const FockVector& b, const QuadratureSpec& spec) {
    complexd acc = std::conj(a.vacuum()) * b.vacuum();
    int top = std::max(a.max_grade(), b.max_grade());
    for (int n = 1; n <= top; ++n) {
        auto ga = a.grade(n);
        auto gb = b.grade(n);
        if (ga && gb) acc += ip_grade(ga, gb, spec);
    }
    return acc;
}

inline complexd inner_product(const FockVector& a, const FockVector& b) {
    double target = 1e-8;
    int top = std::max(a.max_grade(), b.max_grade());
    if (top >= 2) target = 1e-7;
    if (top >= 3) target = 1e-5;
    return inner_product(a, b, a.model()->spec_for(target));
}

}  // namespace sgb

#endif
