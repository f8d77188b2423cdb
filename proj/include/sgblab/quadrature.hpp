#ifndef SGBLAB_QUADRATURE_HPP
#define SGBLAB_QUADRATURE_HPP

#include <cmath>
#include <functional>
#include <thread>
#include <vector>

#include "sgblab/common.hpp"

namespace sgb {

// ---------------------------------------------------------------------------
// Real-line grids.  Integrands here are analytic in a strip of half-width d
// around R and decay at least like a Gaussian, so the offset trapezoid rule
// converges like exp(-2 pi d / h).  Each tensor axis gets a distinct
// irrational jitter so node coordinates never collide across dimensions
// (S-factor poles sit on coincidence hyperplanes).
// ---------------------------------------------------------------------------

struct LineGrid {
    std::vector<double> nodes;
    double weight = 0.0;  // uniform trapezoid weight (= step)
};

inline LineGrid make_line_grid(double half_width, double step, int axis) {
    static const double golden = 0.6180339887498949;
    double jitter = step * (std::fmod(golden * static_cast<double>(axis + 1), 1.0) - 0.5) * 0.5;
    LineGrid g;
    g.weight = step;
    long long n = static_cast<long long>(std::floor((half_width) / step));
    for (long long k = -n; k <= n; ++k)
        g.nodes.push_back(static_cast<double>(k) * step + jitter);
    return g;
}

// Step choice: trapezoid error ~ exp(-2 pi d / h) -> h = 2 pi d / log(1/tol),
// capped for smooth integrands.
inline double step_for(double strip_half_width, double tol) {
    double h = 2.0 * kPi * strip_half_width / std::log(1.0 / tol);
    return std::min(h, 0.22);
}

struct QuadratureSpec {
    double half_width = 10.0;   // |theta_j| truncation
    double step = 0.12;
    double strip = 0.19;        // analyticity half-width the step was derived from
    static QuadratureSpec for_tolerance(double strip_half_width, double tol, double half_width) {
        QuadratureSpec q;
        q.strip = strip_half_width;
        q.step = step_for(strip_half_width, tol);
        q.half_width = half_width;
        return q;
    }
    QuadratureSpec refined() const {
        QuadratureSpec q = *this;
        q.step *= 0.5;
        return q;
    }
    LineGrid axis(int i) const { return make_line_grid(half_width, step, i); }
};

// ---------------------------------------------------------------------------
// Deterministic parallel fill of tensor-grid arrays.  Values land in fixed
// slots, reduction is pairwise: results do not depend on thread scheduling.
// ---------------------------------------------------------------------------

inline void parallel_fill(std::size_t n, const std::function<void(std::size_t, std::size_t)>& work) {
    unsigned hw = std::thread::hardware_concurrency();
    std::size_t nthreads = std::max(1u, hw);
    if (n < 4096 || nthreads == 1) {
        work(0, n);
        return;
    }
    std::vector<std::thread> pool;
    std::size_t chunk = (n + nthreads - 1) / nthreads;
    for (std::size_t t = 0; t < nthreads; ++t) {
        std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
}

// n-dimensional tensor trapezoid of an integrand given per-axis grids.
// The integrand receives the node coordinates; summation is pairwise.
template <typename F>
complexd tensor_integrate(const std::vector<LineGrid>& axes, F&& integrand) {
    std::size_t total = 1;
    for (const auto& a : axes) total *= a.nodes.size();
    double w = 1.0;
    for (const auto& a : axes) w *= a.weight;
    std::vector<complexd> vals(total);
    std::size_t dim = axes.size();
    parallel_fill(total, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> pt(dim);
        for (std::size_t idx = lo; idx < hi; ++idx) {
            std::size_t rem = idx;
            for (std::size_t d = 0; d < dim; ++d) {
                const auto& nodes = axes[d].nodes;
                pt[d] = nodes[rem % nodes.size()];
                rem /= nodes.size();
            }
            vals[idx] = integrand(pt);
        }
    });
    return pairwise_sum(vals) * w;
}

// 1-D convenience wrapper with refinement until relative agreement.
template <typename F>
complexd integrate_line(F&& f, QuadratureSpec spec, double rel_tol, double abs_floor = 1e-14) {
    LineGrid g = spec.axis(0);
    auto run = [&](const LineGrid& grid) {
        std::vector<complexd> vals(grid.nodes.size());
        for (std::size_t i = 0; i < grid.nodes.size(); ++i) vals[i] = f(grid.nodes[i]);
        return pairwise_sum(vals) * grid.weight;
    };
    complexd coarse = run(g);
    for (int it = 0; it < 3; ++it) {
        spec = spec.refined();
        complexd fine = run(spec.axis(0));
        double scale = std::max({std::abs(fine), std::abs(coarse), abs_floor});
        if (std::abs(fine - coarse) / scale < rel_tol) return fine;
        coarse = fine;
    }
    throw QuadratureNonConvergence("1-D line integral did not settle to requested tolerance");
}

// Gauss-Legendre nodes/weights on [-1, 1] (Newton on Legendre polynomials).
inline void gauss_legendre(std::size_t n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double xi = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double p0 = 0.0, p1 = 0.0;
        for (int it = 0; it < 100; ++it) {
            p0 = 1.0;
            p1 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * static_cast<double>(j) + 1.0) * xi * p1 - static_cast<double>(j) * p2) /
                     (static_cast<double>(j) + 1.0);
            }
            double dp = static_cast<double>(n) * (xi * p0 - p1) / (xi * xi - 1.0);
            double step = p0 / dp;
            xi -= step;
            if (std::abs(step) < 1e-15) break;
        }
        p0 = 1.0;
        p1 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * static_cast<double>(j) + 1.0) * xi * p1 - static_cast<double>(j) * p2) /
                 (static_cast<double>(j) + 1.0);
        }
        double dp = static_cast<double>(n) * (xi * p0 - p1) / (xi * xi - 1.0);
        x[i] = -xi;
        x[n - 1 - i] = xi;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
    }
}

// Average of an analytic function over a small circle: the value at the
// centre.  Used to evaluate removable singularities (S pole against a
// certified zero) without forming 0 * inf.
template <typename F>
complexd circle_average(F&& f, complexd center, double radius, std::size_t n = 16) {
    std::vector<complexd> vals(n);
    for (std::size_t k = 0; k < n; ++k) {
        double t = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
        vals[k] = f(center + radius * std::exp(kI * t));
    }
    return pairwise_sum(vals) / static_cast<double>(n);
}

}  // namespace sgb

#endif
