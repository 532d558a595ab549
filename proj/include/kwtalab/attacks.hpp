#pragma once

// White-box gradient attacks (FGSM, PGD, momentum), the Gaussian-noise
// brute-force attack, transfer attack and robust-accuracy evaluation.
// All attacks are untargeted, operate in the l-inf ball of radius epsilon
// and clamp results into [0,1]. At k-WTA discontinuities the attacker
// consumes whatever backward() returns (the tie-broken mask gradient).

#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <thread>
#include <vector>

#include "kwtalab/data.hpp"
#include "kwtalab/nn.hpp"

namespace kwtalab {

enum class AttackFamily { none, fgsm, pgd, mifgsm, gaussian_noise };

inline const char* attack_family_name(AttackFamily f) {
    switch (f) {
        case AttackFamily::none: return "none";
        case AttackFamily::fgsm: return "fgsm";
        case AttackFamily::pgd: return "pgd";
        case AttackFamily::mifgsm: return "mifgsm";
        case AttackFamily::gaussian_noise: return "gaussian_noise";
    }
    return "?";
}

struct AttackConfig {
    AttackFamily family = AttackFamily::pgd;
    double epsilon = 0.3;      // l-inf budget in normalized pixel units
    int steps = 20;
    double step_size = 0.0;    // 0 means the epsilon/10 default
    bool random_init = true;
    double decay = 1.0;        // mifgsm only
    int n_samples = 1000;      // gaussian_noise only
    double noise_sigma = 0.0;  // gaussian_noise; 0 means the epsilon/2 default
    double clamp_lo = 0.0;
    double clamp_hi = 1.0;

    double effective_step() const { return step_size > 0.0 ? step_size : epsilon / 10.0; }
    double effective_sigma() const { return noise_sigma > 0.0 ? noise_sigma : epsilon / 2.0; }

    void validate() const {
        if (epsilon < 0.0) throw std::invalid_argument("attack: epsilon must be >= 0");
        if (family == AttackFamily::pgd || family == AttackFamily::mifgsm) {
            if (steps < 1) throw std::invalid_argument("attack: steps must be >= 1");
        }
        if (family == AttackFamily::mifgsm && decay < 0.0)
            throw std::invalid_argument("attack: decay must be >= 0");
        if (family == AttackFamily::gaussian_noise && n_samples < 1)
            throw std::invalid_argument("attack: n_samples must be >= 1");
    }
};

struct AttackResult {
    Tensor x_adv;
    bool success = false;  // predicted label differs from the true label
    int steps_used = 0;
    double final_loss = 0.0;
    std::size_t adv_pred = 0;
};

namespace detail {

inline double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

inline void clamp_into(Tensor& x, double lo, double hi) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::min(hi, std::max(lo, x[i]));
}

// project onto the l-inf epsilon ball around origin_x, then into [lo, hi]
inline void project(Tensor& x, const Tensor& origin_x, double eps, double lo, double hi) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = std::min(origin_x[i] + eps, std::max(origin_x[i] - eps, x[i]));
        x[i] = std::min(hi, std::max(lo, x[i]));
    }
}

inline LossGrad loss_input_grad(const Model& m, const Tensor& x, std::size_t y) {
    ForwardTrace tr = forward(m, x);
    LossGrad lg = softmax_cross_entropy(tr.logits, y);
    Gradients g = backward(m, tr, lg.grad);
    return {lg.loss, std::move(g.input)};
}

inline AttackResult finish(const Model& m, Tensor x_adv, std::size_t y, int steps_used) {
    AttackResult r;
    ForwardTrace tr = forward(m, x_adv);
    r.final_loss = softmax_cross_entropy(tr.logits, y).loss;
    r.adv_pred = argmax(tr.logits);
    r.success = r.adv_pred != y;
    r.steps_used = steps_used;
    r.x_adv = std::move(x_adv);
    return r;
}

// sign-step iteration shared by fgsm / pgd / mifgsm
inline AttackResult signed_gradient_attack(const Model& m, const Tensor& x, std::size_t y,
                                           const AttackConfig& cfg, int steps, double step,
                                           bool random_init, bool momentum, Rng* rng) {
    Tensor x_adv = x;
    if (random_init) {
        for (std::size_t i = 0; i < x_adv.size(); ++i)
            x_adv[i] += rng->uniform(-cfg.epsilon, cfg.epsilon);
        project(x_adv, x, cfg.epsilon, cfg.clamp_lo, cfg.clamp_hi);
    }
    Tensor g_acc(x.shape());
    for (int t = 0; t < steps; ++t) {
        LossGrad lg = loss_input_grad(m, x_adv, y);
        const Tensor* dir = &lg.grad;
        if (momentum) {
            double l1 = 0.0;
            for (std::size_t i = 0; i < lg.grad.size(); ++i) l1 += std::abs(lg.grad[i]);
            const double inv = l1 > 0.0 ? 1.0 / l1 : 1.0;
            for (std::size_t i = 0; i < g_acc.size(); ++i)
                g_acc[i] = cfg.decay * g_acc[i] + lg.grad[i] * inv;
            dir = &g_acc;
        }
        for (std::size_t i = 0; i < x_adv.size(); ++i) x_adv[i] += step * sign((*dir)[i]);
        project(x_adv, x, cfg.epsilon, cfg.clamp_lo, cfg.clamp_hi);
    }
    return finish(m, std::move(x_adv), y, steps);
}

}  // namespace detail

/// x' = clamp(x + eps * sign(grad_x L)); exactly one gradient evaluation.
inline AttackResult fgsm(const Model& m, const Tensor& x, std::size_t y, const AttackConfig& cfg) {
    cfg.validate();
    return detail::signed_gradient_attack(m, x, y, cfg, 1, cfg.epsilon, false, false, nullptr);
}

/// Iterated signed-gradient steps projected onto the eps ball around x.
/// With steps=1, no random init and step_size=eps this is bit-identical
/// to fgsm.
inline AttackResult pgd(const Model& m, const Tensor& x, std::size_t y, const AttackConfig& cfg,
                        Rng& rng) {
    cfg.validate();
    return detail::signed_gradient_attack(m, x, y, cfg, cfg.steps, cfg.effective_step(),
                                          cfg.random_init, false, &rng);
}

/// Momentum-accumulated variant: g <- decay*g + grad/||grad||_1, then a
/// signed step; same projection contract as pgd.
inline AttackResult mifgsm(const Model& m, const Tensor& x, std::size_t y, const AttackConfig& cfg,
                           Rng& rng) {
    cfg.validate();
    return detail::signed_gradient_attack(m, x, y, cfg, cfg.steps, cfg.effective_step(),
                                          cfg.random_init, true, &rng);
}

/// Brute-force noise search: n_samples Gaussian perturbations clipped to the
/// eps ball and [0,1]; returns the first label-flipping sample, otherwise
/// the max-loss one.
inline AttackResult gaussian_noise_attack(const Model& m, const Tensor& x, std::size_t y,
                                          const AttackConfig& cfg, Rng& rng) {
    cfg.validate();
    const double sigma = cfg.effective_sigma();
    Tensor best = x;
    double best_loss = -1.0;
    for (int s = 0; s < cfg.n_samples; ++s) {
        Tensor cand = x;
        if (sigma > 0.0)
            for (std::size_t i = 0; i < cand.size(); ++i) cand[i] += rng.gaussian(0.0, sigma);
        detail::project(cand, x, cfg.epsilon, cfg.clamp_lo, cfg.clamp_hi);
        ForwardTrace tr = forward(m, cand);
        const double loss = softmax_cross_entropy(tr.logits, y).loss;
        if (argmax(tr.logits) != y) {
            AttackResult r;
            r.x_adv = std::move(cand);
            r.success = true;
            r.steps_used = s + 1;
            r.final_loss = loss;
            r.adv_pred = argmax(forward(m, r.x_adv).logits);
            return r;
        }
        if (loss > best_loss) {
            best_loss = loss;
            best = std::move(cand);
        }
    }
    return detail::finish(m, std::move(best), y, cfg.n_samples);
}

/// Runs the configured attack on one example. Per-example seeds keep batch
/// evaluation deterministic under any thread count.
inline AttackResult run_attack(const Model& m, const Tensor& x, std::size_t y,
                               const AttackConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    switch (cfg.family) {
        case AttackFamily::none: {
            return detail::finish(m, x, y, 0);
        }
        case AttackFamily::fgsm:
            return fgsm(m, x, y, cfg);
        case AttackFamily::pgd:
            return pgd(m, x, y, cfg, rng);
        case AttackFamily::mifgsm:
            return mifgsm(m, x, y, cfg, rng);
        case AttackFamily::gaussian_noise:
            return gaussian_noise_attack(m, x, y, cfg, rng);
    }
    throw std::logic_error("unreachable");
}

struct ExampleOutcome {
    std::size_t index;
    int true_label;
    std::size_t clean_pred;
    std::size_t adv_pred;
    double linf;
    bool success;
};

struct EvalReport {
    double robust_accuracy = 0.0;
    double standard_accuracy = 0.0;
    std::vector<ExampleOutcome> rows;
};

namespace detail {

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const unsigned used = std::min<unsigned>(threads, static_cast<unsigned>(n));
    for (unsigned t = 0; t < used; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace detail

/// Per-example attack over a labeled dataset. Deterministic given `seed`
/// regardless of the thread count (example i always uses seed + i).
inline EvalReport evaluate_robust_accuracy(const Model& m, const Dataset& ds,
                                           const AttackConfig& cfg, std::uint64_t seed,
                                           unsigned threads = 1) {
    if (ds.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
    cfg.validate();
    EvalReport rep;
    rep.rows.resize(ds.size());
    std::atomic<std::size_t> clean_ok{0}, adv_ok{0};
    detail::parallel_for(ds.size(), threads, [&](std::size_t i) {
        const Tensor x = ds.example(i);
        const auto y = static_cast<std::size_t>(ds.labels[i]);
        const std::size_t clean_pred = predict(m, x);
        AttackResult r = run_attack(m, x, y, cfg, seed + i);
        rep.rows[i] = {i, ds.labels[i], clean_pred, r.adv_pred, linf_distance(r.x_adv, x),
                       r.success};
        if (clean_pred == y) clean_ok.fetch_add(1);
        if (r.adv_pred == y) adv_ok.fetch_add(1);
    });
    rep.standard_accuracy = static_cast<double>(clean_ok) / static_cast<double>(ds.size());
    rep.robust_accuracy = static_cast<double>(adv_ok) / static_cast<double>(ds.size());
    return rep;
}

/// Black-box transfer: craft on `source` (white-box), evaluate on `target`;
/// target gradients are never queried.
inline EvalReport transfer_attack(const Model& source, const Model& target, const Dataset& ds,
                                  const AttackConfig& cfg, std::uint64_t seed,
                                  unsigned threads = 1) {
    if (ds.size() == 0) throw std::invalid_argument("transfer_attack: empty dataset");
    if (source.input_shape != target.input_shape)
        throw std::invalid_argument("transfer_attack: model input shapes differ");
    cfg.validate();
    EvalReport rep;
    rep.rows.resize(ds.size());
    std::atomic<std::size_t> clean_ok{0}, adv_ok{0};
    detail::parallel_for(ds.size(), threads, [&](std::size_t i) {
        const Tensor x = ds.example(i);
        const auto y = static_cast<std::size_t>(ds.labels[i]);
        AttackResult crafted = run_attack(source, x, y, cfg, seed + i);
        const std::size_t clean_pred = predict(target, x);
        const std::size_t adv_pred = predict(target, crafted.x_adv);
        rep.rows[i] = {i, ds.labels[i], clean_pred, adv_pred, linf_distance(crafted.x_adv, x),
                       adv_pred != y};
        if (clean_pred == y) clean_ok.fetch_add(1);
        if (adv_pred == y) adv_ok.fetch_add(1);
    });
    rep.standard_accuracy = static_cast<double>(clean_ok) / static_cast<double>(ds.size());
    rep.robust_accuracy = static_cast<double>(adv_ok) / static_cast<double>(ds.size());
    return rep;
}

}  // namespace kwtalab
