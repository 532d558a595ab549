#pragma once

// SGD with classical momentum, standard training, incremental sparsity
// fine-tuning and PGD adversarial training. One training run has a single
// writer of the parameters; per-example gradient work inside a batch may
// fan out to threads (chunk-ordered reduction, deterministic for a fixed
// thread count; --threads 1 is the bit-reproducible mode).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "kwtalab/attacks.hpp"
#include "kwtalab/data.hpp"
#include "kwtalab/nn.hpp"

namespace kwtalab {

struct TrainConfig {
    std::size_t epochs = 20;
    std::size_t batch_size = 128;
    std::vector<std::pair<std::size_t, double>> lr_schedule = {{0, 0.01}};
    double momentum = 0.9;
    std::uint64_t seed = 0;
    unsigned threads = 1;

    void validate() const {
        if (lr_schedule.empty()) throw std::invalid_argument("train: empty lr schedule");
        for (std::size_t i = 0; i < lr_schedule.size(); ++i) {
            if (lr_schedule[i].second < 0.0)
                throw std::invalid_argument("train: negative learning rate");
            if (i > 0 && lr_schedule[i].first <= lr_schedule[i - 1].first)
                throw std::invalid_argument("train: lr breakpoints must be strictly increasing");
        }
        if (momentum < 0.0 || momentum >= 1.0)
            throw std::invalid_argument("train: momentum must be in [0,1)");
        if (batch_size == 0) throw std::invalid_argument("train: batch_size must be >= 1");
    }

    double lr_at(std::size_t epoch) const {
        double lr = lr_schedule.front().second;
        for (const auto& [e, v] : lr_schedule)
            if (e <= epoch) lr = v;
        return lr;
    }
};

struct FinetuneSchedule {
    double gamma_start;
    double gamma_end;
    double delta = 0.005;
    std::size_t epochs_per_step = 2;

    void validate() const {
        if (!(gamma_start > 0.0) || gamma_start > 1.0 || !(gamma_end > 0.0) ||
            gamma_end > gamma_start)
            throw std::invalid_argument("finetune: need gamma_start >= gamma_end > 0");
        if (!(delta > 0.0)) throw std::invalid_argument("finetune: delta must be positive");
    }
};

struct EpochMetrics {
    std::size_t epoch;
    std::string split;
    double loss;
    double accuracy;
    double gamma;
};

struct TrainReport {
    std::vector<EpochMetrics> epochs;
    std::vector<double> batch_losses;  // per-update loss sequence
};

namespace detail {

inline std::vector<LayerParams> zero_like_params(const Model& m) {
    std::vector<LayerParams> out(m.params.size());
    for (std::size_t i = 0; i < m.params.size(); ++i) {
        if (!m.params[i].present) continue;
        out[i].present = true;
        out[i].weights = Tensor(m.params[i].weights.shape());
        out[i].bias = Tensor(m.params[i].bias.shape());
    }
    return out;
}

inline void accumulate_params(std::vector<LayerParams>& acc, const std::vector<LayerParams>& g,
                              double scale) {
    for (std::size_t i = 0; i < acc.size(); ++i) {
        if (!acc[i].present) continue;
        axpy(acc[i].weights, scale, g[i].weights);
        axpy(acc[i].bias, scale, g[i].bias);
    }
}

}  // namespace detail

/// Classical momentum update: v <- mu*v - lr*g; p <- p + v (in place).
inline void sgd_step(std::vector<LayerParams>& params, const std::vector<LayerParams>& grads,
                     std::vector<LayerParams>& velocity, double lr, double momentum) {
    if (params.size() != grads.size())
        throw std::invalid_argument("sgd_step: layer count mismatch");
    if (velocity.empty()) velocity.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i].present) continue;
        if (!params[i].weights.same_shape(grads[i].weights) ||
            !params[i].bias.same_shape(grads[i].bias))
            throw std::invalid_argument("sgd_step: gradient shape mismatch at layer " +
                                        std::to_string(i));
        if (!velocity[i].present) {
            velocity[i].present = true;
            velocity[i].weights = Tensor(params[i].weights.shape());
            velocity[i].bias = Tensor(params[i].bias.shape());
        }
        for (std::size_t j = 0; j < params[i].weights.size(); ++j) {
            double& v = velocity[i].weights[j];
            v = momentum * v - lr * grads[i].weights[j];
            params[i].weights[j] += v;
        }
        for (std::size_t j = 0; j < params[i].bias.size(); ++j) {
            double& v = velocity[i].bias[j];
            v = momentum * v - lr * grads[i].bias[j];
            params[i].bias[j] += v;
        }
    }
}

namespace detail {

struct BatchStats {
    double loss_sum = 0.0;
    std::size_t correct = 0;
};

// Mean gradient over one batch; per-example work optionally threaded with a
// fixed chunk-ordered reduction.
inline BatchStats batch_gradient(const Model& m, const Dataset& ds,
                                 const std::vector<std::size_t>& batch,
                                 const AttackConfig* adv, std::uint64_t adv_seed_base,
                                 unsigned threads, std::vector<LayerParams>& grad_out) {
    const std::size_t n = batch.size();
    const unsigned used = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    std::vector<std::vector<LayerParams>> partial(used);
    std::vector<BatchStats> stats(used);
    auto work = [&](unsigned t) {
        const std::size_t lo = n * t / used, hi = n * (t + 1) / used;
        partial[t] = zero_like_params(m);
        for (std::size_t bi = lo; bi < hi; ++bi) {
            const std::size_t i = batch[bi];
            Tensor x = ds.example(i);
            const auto y = static_cast<std::size_t>(ds.labels[i]);
            if (adv) x = run_attack(m, x, y, *adv, adv_seed_base + i).x_adv;
            ForwardTrace tr = forward(m, x);
            LossGrad lg = softmax_cross_entropy(tr.logits, y);
            Gradients g = backward(m, tr, lg.grad);
            accumulate_params(partial[t], g.params, 1.0);
            stats[t].loss_sum += lg.loss;
            if (argmax(tr.logits) == y) ++stats[t].correct;
        }
    };
    if (used == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < used; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }
    grad_out = zero_like_params(m);
    BatchStats total;
    const double inv = 1.0 / static_cast<double>(n);
    for (unsigned t = 0; t < used; ++t) {
        accumulate_params(grad_out, partial[t], inv);
        total.loss_sum += stats[t].loss_sum;
        total.correct += stats[t].correct;
    }
    return total;
}

inline TrainReport train_loop(Model& m, const Dataset& ds, const TrainConfig& cfg,
                              const AttackConfig* adv, std::size_t epoch_offset,
                              std::vector<LayerParams>& velocity, Rng& shuffle_rng) {
    if (ds.size() == 0) throw std::invalid_argument("train: empty dataset");
    cfg.validate();
    if (adv) adv->validate();
    TrainReport rep;
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::uint64_t adv_seed = cfg.seed * 1000003ull + 17;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cfg.lr_at(epoch_offset + epoch);
        std::shuffle(order.begin(), order.end(), shuffle_rng.engine());
        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            std::vector<std::size_t> batch(order.begin() + start, order.begin() + end);
            std::vector<LayerParams> grads;
            BatchStats st = batch_gradient(m, ds, batch, adv, adv_seed, cfg.threads, grads);
            sgd_step(m.params, grads, velocity, lr, cfg.momentum);
            ++m.version;
            loss_sum += st.loss_sum;
            correct += st.correct;
            rep.batch_losses.push_back(st.loss_sum / static_cast<double>(batch.size()));
        }
        adv_seed += ds.size();  // fresh adversarial examples every epoch
        rep.epochs.push_back({epoch_offset + epoch, "train",
                              loss_sum / static_cast<double>(ds.size()),
                              static_cast<double>(correct) / static_cast<double>(ds.size()),
                              m.gamma()});
    }
    return rep;
}

}  // namespace detail

/// Plain minibatch SGD; deterministic given cfg.seed (and a fixed thread
/// count). Returns per-epoch train loss/accuracy.
inline TrainReport train_standard(Model& m, const Dataset& ds, const TrainConfig& cfg) {
    Rng shuffle_rng(cfg.seed);
    std::vector<LayerParams> velocity;
    return detail::train_loop(m, ds, cfg, nullptr, 0, velocity, shuffle_rng);
}

/// Min-max training: every minibatch is replaced by attack-perturbed
/// examples crafted against the current weights.
inline TrainReport train_adversarial(Model& m, const Dataset& ds, const AttackConfig& attack,
                                     const TrainConfig& cfg) {
    Rng shuffle_rng(cfg.seed);
    std::vector<LayerParams> velocity;
    return detail::train_loop(m, ds, cfg, &attack, 0, velocity, shuffle_rng);
}

/// Iterative sparsity fine-tuning: lower gamma on all kwta layers in
/// lock-step by `delta` every `epochs_per_step` epochs until gamma_end.
inline TrainReport finetune_sparsity(Model& m, const Dataset& ds, const FinetuneSchedule& sched,
                                     const TrainConfig& cfg) {
    sched.validate();
    if (!m.has_kwta()) throw std::invalid_argument("finetune: model has no kwta layers");
    if (std::abs(m.gamma() - sched.gamma_start) > 1e-12)
        throw std::invalid_argument("finetune: model gamma does not match gamma_start");
    Rng shuffle_rng(cfg.seed);
    std::vector<LayerParams> velocity;
    TrainReport rep;
    double gamma = sched.gamma_start;
    std::size_t epoch_offset = 0;
    TrainConfig step_cfg = cfg;
    step_cfg.epochs = sched.epochs_per_step;
    while (gamma > sched.gamma_end + 1e-12) {
        gamma = std::max(gamma - sched.delta, sched.gamma_end);
        m.set_gamma(gamma);
        TrainReport r = detail::train_loop(m, ds, step_cfg, nullptr, epoch_offset, velocity,
                                           shuffle_rng);
        epoch_offset += sched.epochs_per_step;
        rep.epochs.insert(rep.epochs.end(), r.epochs.begin(), r.epochs.end());
        rep.batch_losses.insert(rep.batch_losses.end(), r.batch_losses.begin(),
                                r.batch_losses.end());
    }
    m.set_gamma(sched.gamma_end);  // exact final value
    return rep;
}

}  // namespace kwtalab
