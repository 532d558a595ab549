#pragma once

// Monte Carlo probes of the geometry behind the k-WTA activation: dense
// discontinuities under perpendicular perturbation, pattern disjointness for
// well-spread points, the constructive label-fitting vector, discontinuity
// jump magnitude as a function of sparsity, piecewise-affinity checks, loss
// landscapes and a 1D regression demo.
//
// All trials are independent: trial i uses Rng(seed + i), so any parallel
// partition of the trial range merges to identical aggregates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kwtalab/io.hpp"
#include "kwtalab/kwta.hpp"
#include "kwtalab/nn.hpp"
#include "kwtalab/tensor.hpp"
#include "kwtalab/training.hpp"

namespace kwtalab {

// ---------------------------------------------------------------------------
// configs and reports

struct DenseTrialConfig {
    std::size_t m = 8;      // input dimension
    std::size_t l = 1024;   // layer width
    double gamma = 0.3;
    double beta = 0.25;     // squared perpendicular ratio d^2(x,x')/||x||^2
    std::size_t trials = 1000;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(gamma > 0.0) || !(gamma < 0.48))
            throw std::invalid_argument("dense trial: gamma must lie in (0, 0.48)");
        if (!(beta > 0.0) || !(beta < 1.0))
            throw std::invalid_argument("dense trial: beta must lie in (0, 1)");
        if (m < 2 || l < m) throw std::invalid_argument("dense trial: need l >= m >= 2");
        if (static_cast<std::size_t>(gamma * static_cast<double>(l)) < 1)
            throw std::invalid_argument("dense trial: gamma*l < 1 (k would clamp)");
        if (trials == 0) throw std::invalid_argument("dense trial: trials must be >= 1");
    }
};

struct DisjointTrialConfig {
    std::size_t m = 16;
    std::size_t l = 16384;
    std::size_t k = 4;
    std::size_t n_points = 10;
    double alpha = 0.5;     // pairwise cosine bound
    std::size_t trials = 100;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(alpha >= 0.5) || !(alpha < 1.0))
            throw std::invalid_argument("disjoint trial: alpha must lie in [0.5, 1)");
        if (n_points < 1) throw std::invalid_argument("disjoint trial: need N >= 1");
        if (m < 2 || l < 1 || k < 1 || k > l)
            throw std::invalid_argument("disjoint trial: bad m/l/k");
        if (trials == 0) throw std::invalid_argument("disjoint trial: trials must be >= 1");
    }
};

struct TrialRow {
    std::size_t trial;
    bool success;
    double aux;  // dense: pattern symmetric-difference size; disjoint: mean intersection size
};

struct TrialReport {
    std::size_t trials = 0;
    std::size_t successes = 0;
    double fraction = 0.0;
    double aux_mean = 0.0;
    double aux_max = 0.0;
    std::uint64_t seed = 0;
    std::vector<TrialRow> rows;

    void finalize() {
        trials = rows.size();
        successes = 0;
        double sum = 0.0;
        aux_max = 0.0;
        for (const auto& r : rows) {
            if (r.success) ++successes;
            sum += r.aux;
            aux_max = std::max(aux_max, r.aux);
        }
        fraction = trials ? static_cast<double>(successes) / static_cast<double>(trials) : 0.0;
        aux_mean = trials ? sum / static_cast<double>(trials) : 0.0;
    }
};

// ---------------------------------------------------------------------------
// perturbation geometry

/// x' = x + sqrt(beta)*||x||*x_perp with x_perp a uniform unit vector in the
/// hyperplane orthogonal to x, so d^2(x,x')/||x||^2 = beta exactly.
inline Tensor perpendicular_perturb(const Tensor& x, double beta, Rng& rng) {
    const std::size_t m = x.size();
    if (m < 2) throw std::invalid_argument("perpendicular_perturb: no orthogonal direction in R^1");
    if (!(beta > 0.0)) throw std::invalid_argument("perpendicular_perturb: beta must be > 0");
    const double xn = norm2(x);
    if (xn == 0.0) throw std::invalid_argument("perpendicular_perturb: x must be nonzero");
    Tensor perp({m});
    for (int attempt = 0; attempt < 64; ++attempt) {
        for (std::size_t i = 0; i < m; ++i) perp[i] = rng.gaussian(0.0, 1.0);
        const double proj = dot(perp, x) / (xn * xn);
        for (std::size_t i = 0; i < m; ++i) perp[i] -= proj * x[i];
        const double pn = norm2(perp);
        if (pn > 1e-12) {
            const double scale = std::sqrt(beta) * xn / pn;
            Tensor out = x;
            for (std::size_t i = 0; i < m; ++i) out[i] += scale * perp[i];
            return out;
        }
    }
    throw std::runtime_error("perpendicular_perturb: degenerate orthogonal draw");
}

namespace detail {

inline Tensor random_unit_vector(std::size_t m, Rng& rng) {
    Tensor x({m});
    double n = 0.0;
    do {
        for (std::size_t i = 0; i < m; ++i) x[i] = rng.gaussian(0.0, 1.0);
        n = norm2(x);
    } while (n < 1e-12);
    for (std::size_t i = 0; i < m; ++i) x[i] /= n;
    return x;
}

inline std::size_t pattern_symmetric_difference(const ActivationPattern& a,
                                                const ActivationPattern& b) {
    std::vector<std::size_t> diff;
    std::set_symmetric_difference(a.indices.begin(), a.indices.end(), b.indices.begin(),
                                  b.indices.end(), std::back_inserter(diff));
    return diff.size();
}

inline std::size_t pattern_intersection_size(const ActivationPattern& a,
                                             const ActivationPattern& b) {
    std::vector<std::size_t> both;
    std::set_intersection(a.indices.begin(), a.indices.end(), b.indices.begin(), b.indices.end(),
                          std::back_inserter(both));
    return both.size();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// theorem trials

/// Per trial: W ~ N(0, 1/l), b = 0, random unit x, perpendicular x'.
/// Success iff the k-WTA patterns of Wx and Wx' differ.
inline TrialReport dense_discontinuity_trial(const DenseTrialConfig& cfg) {
    cfg.validate();
    const std::size_t k = k_from_gamma(cfg.gamma, cfg.l);
    TrialReport rep;
    rep.seed = cfg.seed;
    rep.rows.resize(cfg.trials);
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        Rng rng = Rng::for_trial(cfg.seed, t);
        Tensor w = gaussian_matrix(cfg.l, cfg.m, 1.0 / static_cast<double>(cfg.l), rng);
        Tensor x = detail::random_unit_vector(cfg.m, rng);
        Tensor xp = perpendicular_perturb(x, cfg.beta, rng);
        ActivationPattern a = activation_pattern(matvec(w, x), k);
        ActivationPattern b = activation_pattern(matvec(w, xp), k);
        const std::size_t diff = detail::pattern_symmetric_difference(a, b);
        rep.rows[t] = {t, diff != 0, static_cast<double>(diff)};
    }
    rep.finalize();
    return rep;
}

namespace detail {

/// Rejection-sample N unit vectors with pairwise cosine <= alpha.
inline std::vector<Tensor> admissible_points(std::size_t n, std::size_t m, double alpha, Rng& rng,
                                             std::size_t retry_budget = 100000) {
    std::vector<Tensor> pts;
    pts.reserve(n);
    // When n <= m a randomly-rotated regular simplex gives pairwise cosine
    // exactly -1/(n-1), the most-spread admissible set (any cosine <= alpha
    // qualifies; alpha only upper-bounds it). Rejection sampling below stays
    // as the general fallback but accepts cosines near alpha, which wastes
    // most of the width on correlated pairs.
    if (n >= 2 && n <= m && -1.0 / static_cast<double>(n - 1) <= alpha) {
        std::vector<Tensor> basis;
        basis.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            Tensor v = random_unit_vector(m, rng);
            for (const Tensor& p : basis) axpy(v, -dot(v, p), p);
            const double nv = norm2(v);
            if (nv < 1e-8) {  // degenerate draw; fall back to rejection
                basis.clear();
                break;
            }
            for (std::size_t j = 0; j < m; ++j) v[j] /= nv;
            basis.push_back(std::move(v));
        }
        if (basis.size() == n) {
            Tensor centroid({m});
            for (std::size_t j = 0; j < m; ++j) {
                centroid[j] = 0.0;
                for (std::size_t i = 0; i < n; ++i) centroid[j] += basis[i][j];
                centroid[j] /= std::sqrt(static_cast<double>(n));
            }
            for (std::size_t i = 0; i < n; ++i) {
                Tensor x = basis[i];
                axpy(x, -1.0 / std::sqrt(static_cast<double>(n)), centroid);
                const double nx = norm2(x);
                for (std::size_t j = 0; j < m; ++j) x[j] /= nx;
                pts.push_back(std::move(x));
            }
            return pts;
        }
    }
    for (std::size_t tries = 0; pts.size() < n; ++tries) {
        if (tries >= retry_budget)
            throw std::invalid_argument(
                "disjoint trial: could not find admissible points within retry budget "
                "(alpha too small for N, m)");
        Tensor cand = random_unit_vector(m, rng);
        bool ok = true;
        for (const Tensor& p : pts)
            if (dot(cand, p) > alpha) {
                ok = false;
                break;
            }
        if (ok) pts.push_back(std::move(cand));
    }
    return pts;
}

}  // namespace detail

/// Per trial: W ~ N(0, 1/l) and N admissible points; success iff every
/// pairwise k-WTA pattern intersection is empty.
inline TrialReport disjoint_pattern_trial(const DisjointTrialConfig& cfg) {
    cfg.validate();
    TrialReport rep;
    rep.seed = cfg.seed;
    rep.rows.resize(cfg.trials);
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        Rng rng = Rng::for_trial(cfg.seed, t);
        std::vector<Tensor> pts = detail::admissible_points(cfg.n_points, cfg.m, cfg.alpha, rng);
        Tensor w = gaussian_matrix(cfg.l, cfg.m, 1.0 / static_cast<double>(cfg.l), rng);
        std::vector<ActivationPattern> pats;
        pats.reserve(cfg.n_points);
        for (const Tensor& p : pts) pats.push_back(activation_pattern(matvec(w, p), cfg.k));
        std::size_t overlap_sum = 0, pairs = 0;
        bool all_disjoint = true;
        for (std::size_t i = 0; i < pats.size(); ++i)
            for (std::size_t j = i + 1; j < pats.size(); ++j) {
                const std::size_t inter = detail::pattern_intersection_size(pats[i], pats[j]);
                overlap_sum += inter;
                ++pairs;
                if (inter != 0) all_disjoint = false;
            }
        const double mean_inter =
            pairs ? static_cast<double>(overlap_sum) / static_cast<double>(pairs) : 0.0;
        rep.rows[t] = {t, all_disjoint, mean_inter};
    }
    rep.finalize();
    return rep;
}

/// Constructive label fitting: with pairwise-disjoint patterns, put all the
/// mass on one representative winning coordinate per point, v_t = z_i/(W_t x_i).
inline Tensor fit_labels(const Tensor& w, const std::vector<Tensor>& xs,
                         const std::vector<double>& zs, std::size_t k) {
    if (xs.size() != zs.size()) throw std::invalid_argument("fit_labels: xs/zs length mismatch");
    const std::size_t l = w.dim(0);
    std::vector<Tensor> acts;
    std::vector<ActivationPattern> pats;
    for (const Tensor& x : xs) {
        Tensor y = matvec(w, x);
        pats.push_back(activation_pattern(y, k));
        acts.push_back(std::move(y));
    }
    for (std::size_t i = 0; i < pats.size(); ++i)
        for (std::size_t j = i + 1; j < pats.size(); ++j)
            if (detail::pattern_intersection_size(pats[i], pats[j]) != 0)
                throw std::invalid_argument(
                    "fit_labels: activation patterns are not pairwise disjoint (enlarge l)");
    Tensor v({l});
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (zs[i] == 0.0) continue;  // zero rows need no support
        std::size_t best = pats[i].indices.front();
        for (std::size_t idx : pats[i].indices)
            if (std::abs(acts[i][idx]) > std::abs(acts[i][best])) best = idx;
        if (acts[i][best] == 0.0)
            throw std::invalid_argument("fit_labels: representative pre-activation is zero");
        v[best] = zs[i] / acts[i][best];
    }
    return v;
}

// ---------------------------------------------------------------------------
// discontinuity jumps

struct JumpReport {
    bool found = false;
    double t = 0.0;             // crossing location along the ray
    std::size_t leaving = 0;    // index dropped from the winner set
    std::size_t entering = 0;   // index that joins it
    double x_star = 0.0;        // common pre-activation value at the swap
    double bracket_gap = 0.0;   // |y_i - y_j| at the reported t
    double jump_norm = 0.0;     // ||(col_j - col_i) * x_star|| of the downstream matrix
};

/// Scan x(t) = x + t*u for the smallest t in (0, t_max] where the k-WTA
/// pattern of W*x(t) changes by exactly one swapped pair, then bisect the
/// boundary to `tol`. The per-unit downstream jump is (W_j - W_i)*x*; when a
/// downstream matrix is given its column difference scales the reported
/// jump norm, otherwise jump_norm = |x*|.
inline JumpReport measure_jump(const Tensor& w, const Tensor& x, const Tensor& u, double gamma,
                               double t_max = 1.0, std::size_t n_scan = 512, double tol = 1e-10,
                               const Tensor* downstream = nullptr) {
    if (!x.same_shape(u)) throw std::invalid_argument("measure_jump: x/u shape mismatch");
    if (!(t_max > 0.0) || n_scan < 2) throw std::invalid_argument("measure_jump: bad scan range");
    const std::size_t l = w.dim(0);
    const std::size_t k = k_from_gamma(gamma, l);
    JumpReport rep;
    if (k == l) return rep;  // all indices always active: no pattern boundary exists
    auto pattern_at = [&](double t) {
        Tensor xt = x;
        axpy(xt, t, u);
        return activation_pattern(matvec(w, xt), k);
    };
    ActivationPattern prev = pattern_at(0.0);
    double lo = 0.0;
    for (std::size_t s = 1; s <= n_scan; ++s) {
        const double hi = t_max * static_cast<double>(s) / static_cast<double>(n_scan);
        ActivationPattern cur = pattern_at(hi);
        if (cur.indices == prev.indices) {
            lo = hi;
            continue;
        }
        // bisect the first boundary inside (lo, hi]
        double a = lo, b = hi;
        ActivationPattern pa = prev;
        while (b - a > tol) {
            const double mid = 0.5 * (a + b);
            ActivationPattern pm = pattern_at(mid);
            if (pm.indices == pa.indices) {
                a = mid;
            } else {
                b = mid;
            }
        }
        ActivationPattern pb = pattern_at(b);
        std::vector<std::size_t> left, entered;
        std::set_difference(pa.indices.begin(), pa.indices.end(), pb.indices.begin(),
                            pb.indices.end(), std::back_inserter(left));
        std::set_difference(pb.indices.begin(), pb.indices.end(), pa.indices.begin(),
                            pa.indices.end(), std::back_inserter(entered));
        if (left.size() != 1 || entered.size() != 1) {
            // not a single swap (grazing multi-crossing); keep scanning past it
            prev = std::move(pb);
            lo = b;
            continue;
        }
        rep.found = true;
        rep.t = 0.5 * (a + b);
        rep.leaving = left[0];
        rep.entering = entered[0];
        Tensor xt = x;
        axpy(xt, rep.t, u);
        Tensor y = matvec(w, xt);
        rep.x_star = 0.5 * (y[rep.leaving] + y[rep.entering]);
        rep.bracket_gap = std::abs(y[rep.leaving] - y[rep.entering]);
        if (downstream) {
            double s2 = 0.0;
            for (std::size_t r = 0; r < downstream->dim(0); ++r) {
                const double d = downstream->at2(r, rep.entering) - downstream->at2(r, rep.leaving);
                s2 += d * d;
            }
            rep.jump_norm = std::sqrt(s2) * std::abs(rep.x_star);
        } else {
            rep.jump_norm = std::abs(rep.x_star);
        }
        return rep;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// piecewise affinity

struct AffineCheckResult {
    bool region_too_thin = false;
    double max_defect = 0.0;   // max ||f(x+h1+h2)-f(x+h1)-f(x+h2)+f(x)||_inf / probe_scale
    std::size_t retained = 0;
    std::size_t discarded = 0;  // probes that left the linear region
};

namespace detail {

inline bool same_region(const Model& m, const ForwardTrace& a, const ForwardTrace& b) {
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        if (m.layers[i].kind == LayerKind::kwta) {
            if (a.patterns[i]->indices != b.patterns[i]->indices) return false;
        } else if (m.layers[i].kind == LayerKind::relu) {
            const Tensor& ia = a.inputs[i];
            const Tensor& ib = b.inputs[i];
            for (std::size_t j = 0; j < ia.size(); ++j)
                if ((ia[j] > 0.0) != (ib[j] > 0.0)) return false;
        }
    }
    return true;
}

}  // namespace detail

/// Second-difference test of local affinity: within one activation region
/// f(x+h1+h2) - f(x+h1) - f(x+h2) + f(x) must vanish.
inline AffineCheckResult affine_region_check(const Model& m, const Tensor& x,
                                             std::size_t n_probes, double probe_scale, Rng& rng) {
    if (n_probes == 0 || !(probe_scale > 0.0))
        throw std::invalid_argument("affine_region_check: bad probe parameters");
    ForwardTrace base = forward(m, x);
    AffineCheckResult res;
    const std::size_t n = x.size();
    for (std::size_t p = 0; p < n_probes; ++p) {
        Tensor h1 = detail::random_unit_vector(n, rng).reshaped(x.shape());
        Tensor h2 = detail::random_unit_vector(n, rng).reshaped(x.shape());
        for (std::size_t i = 0; i < n; ++i) {
            h1[i] *= probe_scale;
            h2[i] *= probe_scale;
        }
        Tensor x1 = add(x, h1), x2 = add(x, h2), x12 = add(x1, h2);
        ForwardTrace t1 = forward(m, x1), t2 = forward(m, x2), t12 = forward(m, x12);
        if (!detail::same_region(m, base, t1) || !detail::same_region(m, base, t2) ||
            !detail::same_region(m, base, t12)) {
            ++res.discarded;
            continue;
        }
        double defect = 0.0;
        for (std::size_t i = 0; i < base.logits.size(); ++i)
            defect = std::max(defect, std::abs(t12.logits[i] - t1.logits[i] - t2.logits[i] +
                                               base.logits[i]));
        res.max_defect = std::max(res.max_defect, defect / probe_scale);
        ++res.retained;
    }
    res.region_too_thin = res.retained == 0;
    return res;
}

// ---------------------------------------------------------------------------
// Bernoulli example

/// Binary data points with i.i.d. Bernoulli(p) entries; success iff all
/// pairwise k-WTA patterns differ. The admissible range for p is
/// (100*log10(N)/m, 1/2]; the source analysis leaves the logarithm base
/// unstated and its own worked example sits at p = 1/2, so we read the
/// bound base-10 with a closed upper end.
inline TrialReport bernoulli_experiment(std::size_t n_points, std::size_t m, double p,
                                        std::size_t l, double gamma, std::size_t trials,
                                        std::uint64_t seed) {
    const double p_lo = 100.0 * std::log10(static_cast<double>(n_points)) / static_cast<double>(m);
    if (!(p > p_lo) || p > 0.5)
        throw std::invalid_argument("bernoulli: p must lie in (100*log10(N)/m, 0.5]; lower bound " +
                                    fmt_double(p_lo));
    if (!(gamma > 0.0) || !(gamma < 0.48))
        throw std::invalid_argument("bernoulli: gamma must lie in (0, 0.48)");
    if (n_points < 2 || m < 1 || l < 1 || trials == 0)
        throw std::invalid_argument("bernoulli: bad N/m/l/trials");
    const std::size_t k = k_from_gamma(gamma, l);
    TrialReport rep;
    rep.seed = seed;
    rep.rows.resize(trials);
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng = Rng::for_trial(seed, t);
        std::vector<Tensor> pts;
        std::size_t budget = 100000;
        while (pts.size() < n_points) {
            if (budget-- == 0)
                throw std::invalid_argument("bernoulli: duplicate-resampling budget exhausted");
            Tensor cand({m});
            for (std::size_t i = 0; i < m; ++i)
                cand[i] = rng.uniform(0.0, 1.0) < p ? 1.0 : 0.0;
            bool dup = false;
            for (const Tensor& q : pts)
                if (std::equal(cand.data(), cand.data() + m, q.data())) {
                    dup = true;
                    break;
                }
            if (!dup) pts.push_back(std::move(cand));
        }
        Tensor w = gaussian_matrix(l, m, 1.0 / static_cast<double>(l), rng);
        std::vector<ActivationPattern> pats;
        for (const Tensor& q : pts) pats.push_back(activation_pattern(matvec(w, q), k));
        bool all_distinct = true;
        std::size_t min_diff = l;
        for (std::size_t i = 0; i < pats.size() && all_distinct; ++i)
            for (std::size_t j = i + 1; j < pats.size(); ++j) {
                const std::size_t d = detail::pattern_symmetric_difference(pats[i], pats[j]);
                min_diff = std::min(min_diff, d);
                if (d == 0) {
                    all_distinct = false;
                    break;
                }
            }
        rep.rows[t] = {t, all_distinct, static_cast<double>(min_diff)};
    }
    rep.finalize();
    return rep;
}

// ---------------------------------------------------------------------------
// loss landscape

struct LandscapeGrid {
    std::size_t samples_per_axis = 0;
    double range_eps = 0.0;
    bool gradient_fallback = false;  // zero gradient at x: g1 drawn at random
    std::vector<double> eps;         // axis values, length samples_per_axis
    std::vector<double> loss;        // row-major [i*samples + j] at (eps[i], eps[j])

    double at(std::size_t i, std::size_t j) const { return loss[i * samples_per_axis + j]; }
};

/// Loss over x + e1*g1 + e2*g2 with g1 the normalized sign-gradient direction
/// and g2 a random unit direction orthogonalized against g1.
inline LandscapeGrid loss_landscape(const Model& m, const Tensor& x, std::size_t y,
                                    double range_eps, std::size_t samples_per_axis, Rng& rng) {
    if (samples_per_axis < 1 || !(range_eps >= 0.0))
        throw std::invalid_argument("loss_landscape: bad grid parameters");
    LandscapeGrid grid;
    grid.samples_per_axis = samples_per_axis;
    grid.range_eps = range_eps;

    ForwardTrace tr = forward(m, x);
    LossGrad lg = softmax_cross_entropy(tr.logits, y);
    Gradients g = backward(m, tr, lg.grad);
    Tensor g1(x.shape());
    bool nonzero = false;
    for (std::size_t i = 0; i < g1.size(); ++i) {
        g1[i] = g.input[i] > 0.0 ? 1.0 : (g.input[i] < 0.0 ? -1.0 : 0.0);
        nonzero = nonzero || g1[i] != 0.0;
    }
    if (!nonzero) {
        grid.gradient_fallback = true;
        g1 = detail::random_unit_vector(x.size(), rng).reshaped(x.shape());
    }
    double n1 = norm2(g1);
    for (std::size_t i = 0; i < g1.size(); ++i) g1[i] /= n1;

    Tensor g2(x.shape());
    double n2 = 0.0;
    do {
        g2 = detail::random_unit_vector(x.size(), rng).reshaped(x.shape());
        const double proj = dot(g2, g1);
        axpy(g2, -proj, g1);
        n2 = norm2(g2);
    } while (n2 < 1e-9);
    for (std::size_t i = 0; i < g2.size(); ++i) g2[i] /= n2;

    grid.eps.resize(samples_per_axis);
    if (samples_per_axis == 1) {
        grid.eps[0] = 0.0;
    } else {
        for (std::size_t i = 0; i < samples_per_axis; ++i)
            grid.eps[i] = -range_eps + 2.0 * range_eps * static_cast<double>(i) /
                                           static_cast<double>(samples_per_axis - 1);
    }
    grid.loss.resize(samples_per_axis * samples_per_axis);
    for (std::size_t i = 0; i < samples_per_axis; ++i)
        for (std::size_t j = 0; j < samples_per_axis; ++j) {
            Tensor xp = x;
            axpy(xp, grid.eps[i], g1);
            axpy(xp, grid.eps[j], g2);
            grid.loss[i * samples_per_axis + j] =
                softmax_cross_entropy(forward(m, xp).logits, y).loss;
        }
    return grid;
}

/// Non-smoothness proxy: count adjacent cell pairs where the 5-point discrete
/// Laplacian of the loss grid changes sign.
inline std::size_t laplacian_sign_changes(const LandscapeGrid& grid) {
    const std::size_t s = grid.samples_per_axis;
    if (s < 3) return 0;
    std::vector<double> lap((s - 2) * (s - 2));
    for (std::size_t i = 1; i + 1 < s; ++i)
        for (std::size_t j = 1; j + 1 < s; ++j)
            lap[(i - 1) * (s - 2) + (j - 1)] = grid.at(i + 1, j) + grid.at(i - 1, j) +
                                               grid.at(i, j + 1) + grid.at(i, j - 1) -
                                               4.0 * grid.at(i, j);
    auto sgn = [](double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); };
    std::size_t changes = 0;
    const std::size_t w = s - 2;
    for (std::size_t i = 0; i < w; ++i)
        for (std::size_t j = 0; j < w; ++j) {
            const int c = sgn(lap[i * w + j]);
            if (j + 1 < w && c * sgn(lap[i * w + j + 1]) < 0) ++changes;
            if (i + 1 < w && c * sgn(lap[(i + 1) * w + j]) < 0) ++changes;
        }
    return changes;
}

// ---------------------------------------------------------------------------
// 1D regression demo

struct Fit1dResult {
    std::vector<double> ts;     // dense evaluation grid
    std::vector<double> preds;  // model output over the grid
    std::size_t jump_count = 0;
    double threshold = 0.0;     // 5x median adjacent delta
    double train_loss = 0.0;    // final mean squared error
};

/// Train a scalar-in/scalar-out kwta MLP on (t, v) pairs with squared loss,
/// then count adjacent-sample jumps of the fitted curve on a dense grid.
inline Fit1dResult fit_1d_demo(const std::vector<std::pair<double, double>>& samples,
                               double gamma, std::size_t width, const TrainConfig& cfg,
                               std::size_t n_grid = 512) {
    if (samples.size() < 2) throw std::invalid_argument("fit_1d_demo: need >= 2 samples");
    cfg.validate();
    Rng rng(cfg.seed);
    Model m = build_model({LayerSpec::dense(1, width), LayerSpec::kwta(gamma),
                           LayerSpec::dense(width, width), LayerSpec::kwta(gamma),
                           LayerSpec::dense(width, 1)},
                          {1}, rng, "fit1d");
    std::vector<LayerParams> velocity;
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    double last_loss = 0.0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng.engine());
        const double lr = cfg.lr_at(epoch);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            std::vector<LayerParams> grads = detail::zero_like_params(m);
            const double inv = 1.0 / static_cast<double>(end - start);
            for (std::size_t bi = start; bi < end; ++bi) {
                const auto& [t, v] = samples[order[bi]];
                Tensor x({1});
                x[0] = t;
                ForwardTrace tr = forward(m, x);
                const double err = tr.logits[0] - v;
                loss_sum += err * err;
                Tensor lgrad({1});
                lgrad[0] = 2.0 * err;
                Gradients g = backward(m, tr, lgrad);
                detail::accumulate_params(grads, g.params, inv);
            }
            sgd_step(m.params, grads, velocity, lr, cfg.momentum);
            ++m.version;
        }
        last_loss = loss_sum / static_cast<double>(samples.size());
    }

    auto [lo_it, hi_it] = std::minmax_element(
        samples.begin(), samples.end(),
        [](const auto& a, const auto& b) { return a.first < b.first; });
    const double t_lo = lo_it->first, t_hi = hi_it->first;
    Fit1dResult res;
    res.train_loss = last_loss;
    res.ts.resize(n_grid);
    res.preds.resize(n_grid);
    for (std::size_t i = 0; i < n_grid; ++i) {
        res.ts[i] = t_lo + (t_hi - t_lo) * static_cast<double>(i) / static_cast<double>(n_grid - 1);
        Tensor x({1});
        x[0] = res.ts[i];
        res.preds[i] = forward(m, x).logits[0];
    }
    std::vector<double> deltas(n_grid - 1);
    for (std::size_t i = 0; i + 1 < n_grid; ++i)
        deltas[i] = std::abs(res.preds[i + 1] - res.preds[i]);
    std::vector<double> sorted = deltas;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double median = sorted[sorted.size() / 2];
    res.threshold = std::max(5.0 * median, 1e-12);
    for (double d : deltas)
        if (d > res.threshold) ++res.jump_count;
    return res;
}

// ---------------------------------------------------------------------------
// CSV emission (shared verbatim by the CLI and the acceptance binary so that
// re-runs with equal seeds produce byte-identical artifacts)

inline void write_trial_csv(std::ostream& os, const TrialReport& rep, const std::string& aux_name) {
    CsvWriter csv(os);
    csv.header({"trial", "success", aux_name});
    for (const auto& r : rep.rows)
        csv.line({CsvWriter::cell(r.trial), CsvWriter::cell(r.success), CsvWriter::cell(r.aux)});
    csv.line({"summary", CsvWriter::cell(rep.fraction), CsvWriter::cell(rep.aux_mean)});
}

inline void write_jump_csv(std::ostream& os, const std::vector<std::pair<double, JumpReport>>& rows,
                           const std::vector<std::pair<double, double>>& gamma_means) {
    CsvWriter csv(os);
    csv.header({"gamma", "found", "t", "leaving", "entering", "x_star", "jump_norm"});
    for (const auto& [g, r] : rows)
        csv.line({CsvWriter::cell(g), CsvWriter::cell(r.found), CsvWriter::cell(r.t),
                  CsvWriter::cell(r.leaving), CsvWriter::cell(r.entering),
                  CsvWriter::cell(r.x_star), CsvWriter::cell(r.jump_norm)});
    for (const auto& [g, mean] : gamma_means)
        csv.line({"summary", CsvWriter::cell(g), CsvWriter::cell(mean)});
}

inline void write_landscape_csv(std::ostream& os, const LandscapeGrid& grid) {
    CsvWriter csv(os);
    csv.header({"eps1", "eps2", "loss"});
    for (std::size_t i = 0; i < grid.samples_per_axis; ++i)
        for (std::size_t j = 0; j < grid.samples_per_axis; ++j)
            csv.line({CsvWriter::cell(grid.eps[i]), CsvWriter::cell(grid.eps[j]),
                      CsvWriter::cell(grid.at(i, j))});
}

/// Mean |x*| over `n_crossings` random rays for each gamma; rows carry every
/// crossing, summaries one mean per gamma. Used by the jump-vs-sparsity sweep.
inline std::pair<std::vector<std::pair<double, JumpReport>>,
                 std::vector<std::pair<double, double>>>
jump_sweep(const std::vector<double>& gammas, std::size_t l, std::size_t m,
           std::size_t n_crossings, std::uint64_t seed) {
    std::vector<std::pair<double, JumpReport>> rows;
    std::vector<std::pair<double, double>> means;
    for (double g : gammas) {
        double sum = 0.0;
        std::size_t found = 0;
        for (std::size_t c = 0; found < n_crossings; ++c) {
            if (c > 100 * n_crossings + 1000)
                throw std::runtime_error("jump_sweep: crossing budget exhausted at gamma " +
                                         fmt_double(g));
            Rng rng = Rng::for_trial(seed + static_cast<std::uint64_t>(g * 1e6), c);
            Tensor w = gaussian_matrix(l, m, 1.0 / static_cast<double>(l), rng);
            Tensor x = detail::random_unit_vector(m, rng);
            Tensor u = detail::random_unit_vector(m, rng);
            JumpReport r = measure_jump(w, x, u, g, 1.0, 256);
            if (!r.found) continue;
            rows.emplace_back(g, r);
            sum += std::abs(r.x_star);
            ++found;
        }
        means.emplace_back(g, sum / static_cast<double>(n_crossings));
    }
    return {std::move(rows), std::move(means)};
}

}  // namespace kwtalab
