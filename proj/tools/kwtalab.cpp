// Command-line laboratory: training, attacks, theorem Monte Carlo sweeps,
// loss landscapes and the 1-D fit demo. Every command writes its CSVs under
// --out together with a JSON manifest; a re-run with the manifest's seed in
// --threads 1 mode reproduces the CSVs byte for byte.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kwtalab/attacks.hpp"
#include "kwtalab/data.hpp"
#include "kwtalab/io.hpp"
#include "kwtalab/presets.hpp"
#include "kwtalab/theorylab.hpp"
#include "kwtalab/training.hpp"

namespace fs = std::filesystem;
using namespace kwtalab;

namespace {

std::string default_data_dir() {
    if (const char* env = std::getenv("KWTALAB_DATA_DIR")) return env;
    return "/root/data/mnist";
}

std::string idx_path(const std::string& dir, const std::string& stem) {
    for (const char* suffix : {"", ".gz"}) {
        const std::string p = dir + "/" + stem + suffix;
        if (fs::exists(p)) return p;
    }
    throw std::runtime_error("dataset file not found: " + dir + "/" + stem + "[.gz]");
}

Dataset load_mnist(const std::string& dir, bool train) {
    const std::string img = train ? "train-images-idx3-ubyte" : "t10k-images-idx3-ubyte";
    const std::string lab = train ? "train-labels-idx1-ubyte" : "t10k-labels-idx1-ubyte";
    Dataset ds = load_idx(idx_path(dir, img), idx_path(dir, lab));
    ds.name = "mnist";
    ds.split = train ? "train" : "test";
    return ds;
}

void write_metrics_csv(const std::string& path, const std::vector<EpochMetrics>& rows) {
    auto f = open_out(path);
    CsvWriter csv(f);
    csv.header({"epoch", "split", "loss", "accuracy", "gamma"});
    for (const auto& r : rows)
        csv.line({CsvWriter::cell(r.epoch), r.split, CsvWriter::cell(r.loss),
                  CsvWriter::cell(r.accuracy), CsvWriter::cell(r.gamma)});
}

void write_eval_csv(const std::string& path, const EvalReport& rep) {
    auto f = open_out(path);
    CsvWriter csv(f);
    csv.header({"index", "true_label", "clean_pred", "adv_pred", "linf", "success"});
    for (const auto& r : rep.rows)
        csv.line({CsvWriter::cell(r.index), CsvWriter::cell(r.true_label),
                  CsvWriter::cell(r.clean_pred), CsvWriter::cell(r.adv_pred),
                  CsvWriter::cell(r.linf), CsvWriter::cell(r.success)});
    csv.line({"summary", "A_std", CsvWriter::cell(rep.standard_accuracy), "A_rob",
              CsvWriter::cell(rep.robust_accuracy), ""});
}

AttackFamily parse_family(const std::string& name) {
    if (name == "none") return AttackFamily::none;
    if (name == "fgsm") return AttackFamily::fgsm;
    if (name == "pgd") return AttackFamily::pgd;
    if (name == "mifgsm") return AttackFamily::mifgsm;
    if (name == "gaussian") return AttackFamily::gaussian_noise;
    throw CLI::ValidationError("--attack", "unknown attack family: " + name);
}

struct CommonOpts {
    std::string out_dir = "out";
    std::string data_dir = default_data_dir();
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--out", c.out_dir, "output directory");
    cmd->add_option("--data-dir", c.data_dir, "MNIST IDX directory (env KWTALAB_DATA_DIR)");
    cmd->add_option("--seed", c.seed, "base RNG seed");
    cmd->add_option("--threads", c.threads, "worker threads (1 = bit-reproducible)")
        ->check(CLI::PositiveNumber);
}

void finish_manifest(const CommonOpts& c, const std::string& command, nlohmann::json params,
                     const std::vector<std::string>& outputs,
                     std::chrono::steady_clock::time_point started) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    params["wall_clock_seconds"] = secs;
    write_manifest(c.out_dir + "/" + command + ".manifest.json", command, params, c.seed,
                   c.threads, outputs);
}

// ---------------------------------------------------------------------------

int cmd_train(const CommonOpts& c, const std::string& preset, const std::string& activation,
              double gamma, std::size_t epochs, std::size_t batch, double lr, double momentum,
              std::size_t subset_n, const std::string& finetune, bool adv_train,
              const std::string& attack_name, double eps, int steps, double step_size,
              const std::string& model_out) {
    const auto t0 = std::chrono::steady_clock::now();
    Dataset train_ds = load_mnist(c.data_dir, true);
    if (subset_n > 0) train_ds = subset(train_ds, subset_n, c.seed);

    Rng rng(c.seed);
    Model m = make_preset(preset, activation, gamma, rng);
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.batch_size = batch;
    cfg.lr_schedule = {{0, lr}};
    cfg.momentum = momentum;
    cfg.seed = c.seed;
    cfg.threads = c.threads;

    TrainReport rep;
    if (!finetune.empty()) {
        if (activation != "kwta")
            throw CLI::ValidationError("--finetune", "requires --activation kwta");
        FinetuneSchedule sched;
        if (std::sscanf(finetune.c_str(), "%lf:%lf:%lf", &sched.gamma_start, &sched.gamma_end,
                        &sched.delta) != 3)
            throw CLI::ValidationError("--finetune", "expected gamma0:gamma1:delta");
        m.set_gamma(sched.gamma_start);
        rep = finetune_sparsity(m, train_ds, sched, cfg);
    } else if (adv_train) {
        AttackConfig atk;
        atk.family = parse_family(attack_name);
        atk.epsilon = eps;
        atk.steps = steps;
        atk.step_size = step_size;
        rep = train_adversarial(m, train_ds, atk, cfg);
    } else {
        rep = train_standard(m, train_ds, cfg);
    }

    fs::create_directories(c.out_dir);
    const std::string model_path =
        model_out.empty() ? c.out_dir + "/" + preset + "-" + activation + ".model" : model_out;
    save_model(m, model_path);
    const std::string metrics_path = c.out_dir + "/train_metrics.csv";
    write_metrics_csv(metrics_path, rep.epochs);
    std::cout << "model: " << model_path << "\n";
    if (!rep.epochs.empty())
        std::cout << "final train accuracy: " << rep.epochs.back().accuracy << "\n";

    nlohmann::json params{{"preset", preset},       {"activation", activation},
                          {"gamma", gamma},         {"epochs", epochs},
                          {"batch_size", batch},    {"lr", lr},
                          {"momentum", momentum},   {"subset", subset_n},
                          {"finetune", finetune},   {"adv_train", adv_train}};
    finish_manifest(c, "train", params, {model_path, metrics_path}, t0);
    return 0;
}

int cmd_attack(const CommonOpts& c, const std::string& model_path, const std::string& attack_name,
               double eps, int steps, double step_size, bool no_random_init,
               const std::string& transfer_source, std::size_t subset_n) {
    const auto t0 = std::chrono::steady_clock::now();
    Model target = load_model(model_path);
    Dataset test_ds = load_mnist(c.data_dir, false);
    if (subset_n > 0) test_ds = subset(test_ds, subset_n, c.seed);

    AttackConfig atk;
    atk.family = parse_family(attack_name);
    atk.epsilon = eps;
    atk.steps = steps;
    atk.step_size = step_size;
    atk.random_init = !no_random_init;

    EvalReport rep;
    if (!transfer_source.empty()) {
        Model source = load_model(transfer_source);
        const std::uint64_t target_grads_before = target.grad_calls->load();
        rep = transfer_attack(source, target, test_ds, atk, c.seed, c.threads);
        if (target.grad_calls->load() != target_grads_before)
            throw std::runtime_error("transfer attack queried target gradients");
    } else {
        rep = evaluate_robust_accuracy(target, test_ds, atk, c.seed, c.threads);
    }

    fs::create_directories(c.out_dir);
    const std::string csv_path = c.out_dir + "/attack.csv";
    write_eval_csv(csv_path, rep);
    std::cout << "A_std " << rep.standard_accuracy << "  A_rob " << rep.robust_accuracy << "\n";

    nlohmann::json params{{"model", model_path},   {"attack", attack_name},
                          {"eps", eps},            {"steps", steps},
                          {"step_size", step_size}, {"random_init", !no_random_init},
                          {"transfer_source", transfer_source}, {"subset", subset_n}};
    finish_manifest(c, "attack", params, {csv_path}, t0);
    return 0;
}

int cmd_theory_dense(const CommonOpts& c, std::size_t m, double gamma, double beta,
                     const std::vector<std::size_t>& ls, std::size_t trials) {
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(c.out_dir);
    std::vector<std::string> outputs;
    const std::string summary_path = c.out_dir + "/dense_summary.csv";
    auto sf = open_out(summary_path);
    CsvWriter summary(sf);
    summary.header({"l", "trials", "successes", "fraction"});
    for (std::size_t l : ls) {
        DenseTrialConfig cfg{m, l, gamma, beta, trials, c.seed};
        TrialReport rep = dense_discontinuity_trial(cfg);
        const std::string path = c.out_dir + "/dense_l" + std::to_string(l) + ".csv";
        auto f = open_out(path);
        write_trial_csv(f, rep, "pattern_diff");
        outputs.push_back(path);
        summary.line({CsvWriter::cell(l), CsvWriter::cell(rep.trials),
                      CsvWriter::cell(rep.successes), CsvWriter::cell(rep.fraction)});
        std::cout << "l=" << l << " fraction=" << rep.fraction << "\n";
    }
    outputs.push_back(summary_path);
    nlohmann::json params{{"m", m}, {"gamma", gamma}, {"beta", beta}, {"l", ls}, {"trials", trials}};
    finish_manifest(c, "theory-dense", params, outputs, t0);
    return 0;
}

int cmd_theory_disjoint(const CommonOpts& c, std::size_t m, std::size_t l, std::size_t k,
                        std::size_t n, double alpha, std::size_t trials) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!(alpha >= 0.5) || !(alpha < 1.0))
        throw CLI::ValidationError("--alpha", "must lie in [0.5, 1)");
    DisjointTrialConfig cfg{m, l, k, n, alpha, trials, c.seed};
    TrialReport rep = disjoint_pattern_trial(cfg);
    fs::create_directories(c.out_dir);
    const std::string path = c.out_dir + "/disjoint.csv";
    auto f = open_out(path);
    write_trial_csv(f, rep, "mean_intersection");
    std::cout << "disjoint fraction=" << rep.fraction << "\n";
    nlohmann::json params{{"m", m},     {"l", l},         {"k", k},
                          {"n", n},     {"alpha", alpha}, {"trials", trials}};
    finish_manifest(c, "theory-disjoint", params, {path}, t0);
    return 0;
}

int cmd_theory_jump(const CommonOpts& c, const std::vector<double>& gammas, std::size_t l,
                    std::size_t m, std::size_t crossings) {
    const auto t0 = std::chrono::steady_clock::now();
    auto [rows, means] = jump_sweep(gammas, l, m, crossings, c.seed);
    fs::create_directories(c.out_dir);
    const std::string path = c.out_dir + "/jump.csv";
    auto f = open_out(path);
    write_jump_csv(f, rows, means);
    for (const auto& [g, mean] : means) std::cout << "gamma=" << g << " mean|x*|=" << mean << "\n";
    nlohmann::json params{{"gammas", gammas}, {"l", l}, {"m", m}, {"crossings", crossings}};
    finish_manifest(c, "theory-jump", params, {path}, t0);
    return 0;
}

int cmd_theory_bernoulli(const CommonOpts& c, std::size_t n, std::size_t m, double p,
                         std::size_t l, double gamma, std::size_t trials) {
    const auto t0 = std::chrono::steady_clock::now();
    TrialReport rep = bernoulli_experiment(n, m, p, l, gamma, trials, c.seed);
    fs::create_directories(c.out_dir);
    const std::string path = c.out_dir + "/bernoulli.csv";
    auto f = open_out(path);
    write_trial_csv(f, rep, "min_pattern_diff");
    std::cout << "all-distinct fraction=" << rep.fraction << "\n";
    nlohmann::json params{{"n", n}, {"m", m}, {"p", p}, {"l", l}, {"gamma", gamma},
                          {"trials", trials}};
    finish_manifest(c, "theory-bernoulli", params, {path}, t0);
    return 0;
}

int cmd_theory_fitlabels(const CommonOpts& c, std::size_t m, std::size_t n, std::size_t l,
                         std::size_t k, double alpha, std::size_t trials) {
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(c.out_dir);
    const std::string path = c.out_dir + "/fitlabels.csv";
    auto f = open_out(path);
    CsvWriter csv(f);
    csv.header({"trial", "disjoint", "max_abs_error"});
    std::size_t exact = 0, disjoint_trials = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng = Rng::for_trial(c.seed, t);
        auto pts = kwtalab::detail::admissible_points(n, m, alpha, rng);
        Tensor w = gaussian_matrix(l, m, 1.0 / static_cast<double>(l), rng);
        std::vector<double> zs(n);
        for (double& z : zs) z = rng.uniform(-1.0, 1.0);
        double max_err = 0.0;
        bool disjoint = true;
        try {
            Tensor v = fit_labels(w, pts, zs, k);
            ++disjoint_trials;
            for (std::size_t i = 0; i < n; ++i) {
                const Tensor phi = kwta_forward(matvec(w, pts[i]), k);
                max_err = std::max(max_err, std::abs(dot(v, phi) - zs[i]));
            }
            if (max_err <= 1e-9) ++exact;
        } catch (const std::invalid_argument&) {
            disjoint = false;
        }
        csv.line({CsvWriter::cell(t), CsvWriter::cell(disjoint), CsvWriter::cell(max_err)});
    }
    csv.line({"summary", CsvWriter::cell(disjoint_trials), CsvWriter::cell(exact)});
    std::cout << "disjoint trials: " << disjoint_trials << "  exact fits: " << exact << "\n";
    nlohmann::json params{{"m", m}, {"n", n}, {"l", l}, {"k", k}, {"alpha", alpha},
                          {"trials", trials}};
    finish_manifest(c, "theory-fitlabels", params, {path}, t0);
    return 0;
}

int cmd_landscape(const CommonOpts& c, const std::string& model_path, std::size_t index,
                  double range_eps, std::size_t samples) {
    const auto t0 = std::chrono::steady_clock::now();
    Model m = load_model(model_path);
    Dataset test_ds = load_mnist(c.data_dir, false);
    if (index >= test_ds.size()) throw std::runtime_error("landscape: example index out of range");
    Rng rng(c.seed);
    LandscapeGrid grid = loss_landscape(m, test_ds.example(index),
                                        static_cast<std::size_t>(test_ds.labels[index]), range_eps,
                                        samples, rng);
    fs::create_directories(c.out_dir);
    const std::string path = c.out_dir + "/landscape.csv";
    auto f = open_out(path);
    write_landscape_csv(f, grid);
    std::cout << "rows: " << samples * samples
              << "  laplacian sign changes: " << laplacian_sign_changes(grid) << "\n";
    if (grid.gradient_fallback) std::cout << "note: zero gradient at x, g1 drawn at random\n";
    nlohmann::json params{{"model", model_path}, {"index", index}, {"range", range_eps},
                          {"samples", samples}};
    finish_manifest(c, "landscape", params, {path}, t0);
    return 0;
}

int cmd_fit1d(const CommonOpts& c, double gamma, std::size_t width, std::size_t epochs, double lr,
              std::size_t n_samples) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(c.seed);
    auto raw = synthetic_1d([](double t) { return std::sin(2.0 * M_PI * t); }, n_samples, 0.0, 1.0,
                            rng);
    std::vector<std::pair<double, double>> samples;
    samples.reserve(raw.size());
    for (const auto& s : raw) samples.emplace_back(s.t, s.value);
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.batch_size = samples.size();
    cfg.lr_schedule = {{0, lr}};
    cfg.momentum = 0.9;
    cfg.seed = c.seed;
    Fit1dResult res = fit_1d_demo(samples, gamma, width, cfg);

    fs::create_directories(c.out_dir);
    const std::string path = c.out_dir + "/fit1d.csv";
    auto f = open_out(path);
    CsvWriter csv(f);
    csv.header({"t", "prediction"});
    for (std::size_t i = 0; i < res.ts.size(); ++i)
        csv.line({CsvWriter::cell(res.ts[i]), CsvWriter::cell(res.preds[i])});
    csv.line({"summary_jumps", CsvWriter::cell(res.jump_count)});
    std::cout << "jumps: " << res.jump_count << "  threshold: " << res.threshold
              << "  train mse: " << res.train_loss << "\n";
    nlohmann::json params{{"gamma", gamma}, {"width", width}, {"epochs", epochs}, {"lr", lr},
                          {"n_samples", n_samples}};
    finish_manifest(c, "fit1d", params, {path}, t0);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"k-WTA laboratory: training, attacks and theorem Monte Carlo"};
    app.require_subcommand(1);

    CommonOpts c;

    // train
    auto* train = app.add_subcommand("train", "train an MNIST model");
    add_common(train, c);
    std::string preset = "mnist-cnn", activation = "kwta", finetune, attack_name = "pgd";
    std::string model_out;
    double gamma = 0.08, lr = 0.01, momentum = 0.9, eps = 0.3, step_size = 0.0;
    std::size_t epochs = 20, batch = 128, subset_n = 0, width = 128, n_samples = 64;
    int steps = 20;
    bool adv_train = false, no_random_init = false, gamma_set = false;
    train->add_option("--preset", preset, "mnist-cnn | mnist-mlp");
    train->add_option("--activation", activation, "relu | kwta");
    train->add_option("--gamma", gamma, "kwta sparsity ratio")
        ->check(CLI::Range(1e-9, 1.0))
        ->each([&](const std::string&) { gamma_set = true; });
    train->add_option("--epochs", epochs);
    train->add_option("--batch-size", batch);
    train->add_option("--lr", lr);
    train->add_option("--momentum", momentum);
    train->add_option("--subset", subset_n, "train on a seeded subset of this size");
    train->add_option("--finetune", finetune, "gamma0:gamma1:delta incremental schedule");
    train->add_flag("--adv-train", adv_train, "train on per-batch adversarial examples");
    train->add_option("--attack", attack_name, "adversarial-training attack family");
    train->add_option("--eps", eps);
    train->add_option("--steps", steps);
    train->add_option("--step-size", step_size);
    train->add_option("--model-out", model_out);
    train->callback([&] {
        if (activation == "relu" && gamma_set)
            throw CLI::ValidationError("--gamma", "only applies to --activation kwta");
        cmd_train(c, preset, activation, gamma, epochs, batch, lr, momentum, subset_n, finetune,
                  adv_train, attack_name, eps, steps, step_size, model_out);
    });

    // attack
    auto* attack = app.add_subcommand("attack", "evaluate robust accuracy of a saved model");
    add_common(attack, c);
    std::string model_path, transfer_source;
    attack->add_option("--model", model_path)->required();
    attack->add_option("--attack", attack_name, "none|fgsm|pgd|mifgsm|gaussian");
    attack->add_option("--eps", eps);
    attack->add_option("--steps", steps);
    attack->add_option("--step-size", step_size, "0 = eps/10 default");
    attack->add_flag("--no-random-init", no_random_init);
    attack->add_option("--transfer-source", transfer_source,
                       "craft on this model instead (black-box transfer)");
    attack->add_option("--subset", subset_n, "evaluate on a seeded test subset");
    attack->callback([&] {
        cmd_attack(c, model_path, attack_name, eps, steps, step_size, no_random_init,
                   transfer_source, subset_n);
    });

    // theory
    auto* theory = app.add_subcommand("theory", "theorem Monte Carlo sweeps");
    theory->require_subcommand(1);

    auto* dense = theory->add_subcommand("dense", "perpendicular-perturbation pattern changes");
    add_common(dense, c);
    std::size_t t_m = 8, trials = 1000, crossings = 200;
    double beta = 0.25, alpha = 0.5, t_gamma = 0.3, p = 0.5;
    std::vector<std::size_t> ls = {64, 256, 1024, 4096};
    std::vector<double> gammas = {0.05, 0.1, 0.2, 0.4};
    dense->add_option("--m", t_m);
    dense->add_option("--gamma", t_gamma);
    dense->add_option("--beta", beta);
    dense->add_option("--l", ls)->delimiter(',');
    dense->add_option("--trials", trials);
    dense->callback([&] { cmd_theory_dense(c, t_m, t_gamma, beta, ls, trials); });

    auto* disjoint = theory->add_subcommand("disjoint", "pattern disjointness for spread points");
    add_common(disjoint, c);
    std::size_t dj_m = 16, dj_l = 16384, dj_k = 4, dj_n = 10, dj_trials = 100;
    disjoint->add_option("--m", dj_m);
    disjoint->add_option("--l", dj_l);
    disjoint->add_option("--k", dj_k);
    disjoint->add_option("--n", dj_n);
    disjoint->add_option("--alpha", alpha);
    disjoint->add_option("--trials", dj_trials);
    disjoint->callback([&] { cmd_theory_disjoint(c, dj_m, dj_l, dj_k, dj_n, alpha, dj_trials); });

    auto* jump = theory->add_subcommand("jump", "discontinuity jump vs sparsity");
    add_common(jump, c);
    std::size_t j_l = 512, j_m = 32;
    jump->add_option("--gammas", gammas)->delimiter(',');
    jump->add_option("--l", j_l);
    jump->add_option("--m", j_m);
    jump->add_option("--crossings", crossings);
    jump->callback([&] { cmd_theory_jump(c, gammas, j_l, j_m, crossings); });

    auto* bern = theory->add_subcommand("bernoulli", "binary-data pattern distinctness");
    add_common(bern, c);
    std::size_t b_n = 8, b_m = 256, b_l = 8192, b_trials = 50;
    double b_gamma = 0.2;
    bern->add_option("--n", b_n);
    bern->add_option("--m", b_m);
    bern->add_option("--p", p);
    bern->add_option("--l", b_l);
    bern->add_option("--gamma", b_gamma);
    bern->add_option("--trials", b_trials);
    bern->callback([&] { cmd_theory_bernoulli(c, b_n, b_m, p, b_l, b_gamma, b_trials); });

    auto* fitlab = theory->add_subcommand("fitlabels", "constructive label-fitting check");
    add_common(fitlab, c);
    std::size_t fl_m = 16, fl_n = 8, fl_l = 16384, fl_k = 4, fl_trials = 20;
    fitlab->add_option("--m", fl_m);
    fitlab->add_option("--n", fl_n);
    fitlab->add_option("--l", fl_l);
    fitlab->add_option("--k", fl_k);
    fitlab->add_option("--alpha", alpha);
    fitlab->add_option("--trials", fl_trials);
    fitlab->callback([&] { cmd_theory_fitlabels(c, fl_m, fl_n, fl_l, fl_k, alpha, fl_trials); });

    // landscape
    auto* landscape = app.add_subcommand("landscape", "loss-landscape grid around one example");
    add_common(landscape, c);
    std::size_t index = 0, samples = 50;
    double range_eps = 0.04;
    landscape->add_option("--model", model_path)->required();
    landscape->add_option("--index", index, "test-set example index");
    landscape->add_option("--range", range_eps);
    landscape->add_option("--samples", samples, "samples per axis");
    landscape->callback([&] { cmd_landscape(c, model_path, index, range_eps, samples); });

    // fit1d
    auto* fit1d = app.add_subcommand("fit1d", "1-D regression discontinuity demo");
    add_common(fit1d, c);
    double f_gamma = 0.15, f_lr = 0.05;
    std::size_t f_epochs = 3000;
    fit1d->add_option("--gamma", f_gamma);
    fit1d->add_option("--width", width);
    fit1d->add_option("--epochs", f_epochs);
    fit1d->add_option("--lr", f_lr);
    fit1d->add_option("--n-samples", n_samples);
    fit1d->callback([&] { cmd_fit1d(c, f_gamma, width, f_epochs, f_lr, n_samples); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;  // 2 on usage error, 0 on --help
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
