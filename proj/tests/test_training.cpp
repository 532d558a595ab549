#include <catch2/catch_amalgamated.hpp>

#include "kwtalab/training.hpp"

using namespace kwtalab;

namespace {

Model tiny_mlp(double gamma, std::uint64_t seed, std::size_t in = 2, std::size_t classes = 2) {
    Rng rng(seed);
    return build_model({LayerSpec::flatten(), LayerSpec::dense(in, 16), LayerSpec::kwta(gamma),
                        LayerSpec::dense(16, classes)},
                       {1, 1, in}, rng);
}

// Tiny dataset with pixel values in [0,1] so attack clamping is a no-op
// concern, labels arbitrary but learnable.
Dataset unit_square_dataset(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Dataset ds;
    ds.images = Tensor({n, 1, 1, 2});
    ds.labels.resize(n);
    ds.classes = 2;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = rng.uniform(0.0, 1.0), b = rng.uniform(0.0, 1.0);
        ds.images.data()[2 * i] = a;
        ds.images.data()[2 * i + 1] = b;
        ds.labels[i] = a > b ? 1 : 0;
    }
    return ds;
}

bool params_equal(const Model& a, const Model& b) {
    for (std::size_t i = 0; i < a.params.size(); ++i) {
        if (a.params[i].present != b.params[i].present) return false;
        if (!a.params[i].present) continue;
        if (!(a.params[i].weights == b.params[i].weights)) return false;
        if (!(a.params[i].bias == b.params[i].bias)) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("config validation") {
    TrainConfig cfg;
    cfg.lr_schedule = {{0, 0.1}, {5, 0.01}};
    cfg.validate();
    REQUIRE(cfg.lr_at(0) == 0.1);
    REQUIRE(cfg.lr_at(4) == 0.1);
    REQUIRE(cfg.lr_at(5) == 0.01);
    REQUIRE(cfg.lr_at(100) == 0.01);

    cfg.lr_schedule = {{0, 0.1}, {0, 0.2}};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.lr_schedule = {{0, -1.0}};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.lr_schedule = {{0, 0.1}};
    cfg.momentum = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("sgd_step applies classical momentum") {
    Rng rng(1);
    Model m = build_model({LayerSpec::dense(1, 1)}, {1}, rng);
    m.params[0].weights[0] = 1.0;
    std::vector<LayerParams> grads = detail::zero_like_params(m);
    grads[0].weights[0] = 2.0;
    std::vector<LayerParams> velocity;
    sgd_step(m.params, grads, velocity, 0.1, 0.9);
    // v = -0.2, p = 0.8
    REQUIRE(m.params[0].weights[0] == Catch::Approx(0.8));
    sgd_step(m.params, grads, velocity, 0.1, 0.9);
    // v = 0.9*(-0.2) - 0.2 = -0.38, p = 0.42
    REQUIRE(m.params[0].weights[0] == Catch::Approx(0.42));
}

TEST_CASE("standard training learns a separable problem") {
    Dataset ds = unit_square_dataset(256, 7);
    Model m = tiny_mlp(0.5, 7);
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.batch_size = 32;
    cfg.lr_schedule = {{0, 0.05}};
    cfg.seed = 7;
    TrainReport rep = train_standard(m, ds, cfg);
    REQUIRE(rep.epochs.size() == 30);
    REQUIRE(rep.epochs.back().accuracy > 0.95);
    REQUIRE(rep.epochs.back().loss < rep.epochs.front().loss);
    REQUIRE(rep.epochs.back().gamma == 0.5);
}

TEST_CASE("training is deterministic for a fixed seed") {
    Dataset ds = unit_square_dataset(64, 3);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 16;
    cfg.seed = 11;
    Model a = tiny_mlp(0.5, 3), b = tiny_mlp(0.5, 3);
    train_standard(a, ds, cfg);
    train_standard(b, ds, cfg);
    REQUIRE(params_equal(a, b));
}

TEST_CASE("finetune lowers gamma in lock-step, two epochs per step") {
    Dataset ds = unit_square_dataset(64, 5);
    Model m = tiny_mlp(0.2, 5);
    FinetuneSchedule sched{0.2, 0.19, 0.005, 2};
    TrainConfig cfg;
    cfg.epochs = 0;  // ignored; schedule drives epoch count
    cfg.batch_size = 16;
    cfg.seed = 5;
    TrainReport rep = finetune_sparsity(m, ds, sched, cfg);
    // two fine-tune stages of two epochs each
    REQUIRE(rep.epochs.size() == 4);
    REQUIRE(rep.epochs[0].gamma == Catch::Approx(0.195));
    REQUIRE(rep.epochs[1].gamma == Catch::Approx(0.195));
    REQUIRE(rep.epochs[2].gamma == Catch::Approx(0.19));
    REQUIRE(rep.epochs[3].gamma == Catch::Approx(0.19));
    REQUIRE(m.gamma() == 0.19);
}

TEST_CASE("finetune with gamma_start == gamma_end runs zero stages") {
    Dataset ds = unit_square_dataset(32, 6);
    Model m = tiny_mlp(0.2, 6);
    FinetuneSchedule sched{0.2, 0.2, 0.005, 2};
    TrainConfig cfg;
    cfg.batch_size = 16;
    TrainReport rep = finetune_sparsity(m, ds, sched, cfg);
    REQUIRE(rep.epochs.empty());
    REQUIRE(m.gamma() == 0.2);
}

TEST_CASE("finetune requires kwta layers and a matching start gamma") {
    Dataset ds = unit_square_dataset(32, 8);
    Rng rng(8);
    Model relu_m = build_model({LayerSpec::flatten(), LayerSpec::dense(2, 8), LayerSpec::relu(),
                                LayerSpec::dense(8, 2)},
                               {1, 1, 2}, rng);
    TrainConfig cfg;
    cfg.batch_size = 16;
    FinetuneSchedule sched{0.2, 0.1, 0.005, 2};
    CHECK_THROWS_AS(finetune_sparsity(relu_m, ds, sched, cfg), std::invalid_argument);

    Model wrong_gamma = tiny_mlp(0.3, 8);
    CHECK_THROWS_AS(finetune_sparsity(wrong_gamma, ds, sched, cfg), std::invalid_argument);

    FinetuneSchedule bad{0.1, 0.2, 0.005, 2};  // end above start
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("adversarial training with eps=0 matches the standard trajectory") {
    Dataset ds = unit_square_dataset(64, 9);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 16;
    cfg.seed = 13;
    Model a = tiny_mlp(0.5, 9), b = tiny_mlp(0.5, 9);
    AttackConfig atk;
    atk.family = AttackFamily::pgd;
    atk.epsilon = 0.0;
    atk.steps = 5;
    train_standard(a, ds, cfg);
    train_adversarial(b, ds, atk, cfg);
    REQUIRE(params_equal(a, b));
}

TEST_CASE("adversarial training with eps>0 still learns") {
    Dataset ds = unit_square_dataset(128, 10);
    Model m = tiny_mlp(0.5, 10);
    AttackConfig atk;
    atk.family = AttackFamily::fgsm;
    atk.epsilon = 0.05;
    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.batch_size = 32;
    cfg.lr_schedule = {{0, 0.05}};
    cfg.seed = 10;
    TrainReport rep = train_adversarial(m, ds, atk, cfg);
    REQUIRE(rep.epochs.back().loss < rep.epochs.front().loss);
}

TEST_CASE("empty dataset and zero batch size are rejected") {
    Dataset ds;  // size 0
    Model m = tiny_mlp(0.5, 1);
    TrainConfig cfg;
    CHECK_THROWS_AS(train_standard(m, ds, cfg), std::invalid_argument);
    Dataset ok = unit_square_dataset(8, 1);
    cfg.batch_size = 0;
    CHECK_THROWS_AS(train_standard(m, ok, cfg), std::invalid_argument);
}
