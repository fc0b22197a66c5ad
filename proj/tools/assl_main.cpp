#include "assl/error.hpp"
#include "assl/experiment.hpp"
#include "assl/gradcheck.hpp"
#include "assl/kernels.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>

namespace {

int cmd_run(const std::string& config_path, const std::optional<std::uint64_t>& seed,
            const std::optional<std::string>& out_dir) {
    using namespace assl::experiment;
    ExperimentConfig cfg = load_config(config_path);
    if (seed) cfg.seeds = {*seed};
    if (out_dir) cfg.output_dir = *out_dir;
    cfg.validate();

    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentResult result = run_experiment(cfg);
    emit(result, cfg.output_dir);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::printf("%-14s %6s %10s\n", "strategy", "seeds", "final_acc");
    const auto summary = analyze_directory(cfg.output_dir);
    for (const auto& [name, acc] : summary.mean_final_accuracy) {
        std::printf("%-14s %6zu %10.4f\n", name.c_str(), cfg.seeds.size(), acc);
    }
    int failed = 0;
    for (const auto& run : result.runs) {
        if (!run.error.empty()) {
            ++failed;
            std::fprintf(stderr, "seed %llu %s: %s\n", static_cast<unsigned long long>(run.seed),
                         std::string(assl::acquisition::to_string(run.strategy)).c_str(), run.error.c_str());
        }
    }
    std::printf("wrote %s in %.1f s (kernels: %s)\n", cfg.output_dir.c_str(), secs,
                std::string(assl::kernels::active().name).c_str());
    return failed ? 2 : 0;
}

int cmd_analyze(const std::string& dir) {
    const auto summary = assl::experiment::analyze_directory(dir);
    for (const auto& [seed, rho] : summary.ti_correlation) {
        std::printf("seed %llu: spearman(TI, mean u) = %s\n", static_cast<unsigned long long>(seed),
                    rho ? std::to_string(*rho).c_str() : "n/a");
    }
    std::printf("pairwise column means (lower is better):\n");
    for (std::size_t i = 0; i < summary.pairwise.strategies.size(); ++i) {
        std::printf("  %-14s %.3f\n", summary.pairwise.strategies[i].c_str(), summary.pairwise.column_means[i]);
    }
    return 0;
}

int cmd_gradcheck(std::size_t instances, std::uint64_t seed, double step, double tolerance) {
    using namespace assl::nn;
    double worst = 0.0;
    for (std::size_t i = 0; i < instances; ++i) {
        const auto inst = random_instance(assl::derive_seed(seed, "gradcheck", i));
        const auto batch = inst.batch();
        const auto analytic = backward(inst.params, batch);
        const auto numeric = finite_difference_gradients(inst.params, batch, step);
        const auto r = compare_gradients(analytic, numeric);
        worst = std::max(worst, r.rel_error);
        std::printf("instance %2zu  params %4zu  batch %zu  rel_err %.3e  max_abs %.2e  %s\n", i,
                    r.parameters, batch.size(), r.rel_error, r.max_abs_error,
                    r.rel_error < tolerance ? "ok" : "FAIL");
    }
    std::printf("worst relative error %.3e (tolerance %.1e)\n", worst, tolerance);
    return worst < tolerance ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Active semi-supervised learning laboratory"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    run->add_option("--config", config_path, "Config file (or a previous run's manifest.json)")
        ->required()
        ->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Run only this master seed");
    run->add_option("--out", out_dir, "Output directory");

    auto* analyze = app.add_subcommand("analyze", "Recompute analysis CSVs from a run directory");
    std::string in_dir;
    analyze->add_option("--in", in_dir, "Run directory")->required()->check(CLI::ExistingDirectory);

    auto* grad = app.add_subcommand("gradcheck", "Compare backprop against central finite differences");
    std::size_t instances = 20;
    std::uint64_t grad_seed = 0;
    double step = 1e-6;
    double tolerance = 1e-6;
    grad->add_option("--instances", instances, "Random networks to check");
    grad->add_option("--seed", grad_seed, "Seed for the random instances");
    grad->add_option("--step", step, "Finite-difference step");
    grad->add_option("--tolerance", tolerance, "Maximum relative error");

    auto* gen = app.add_subcommand("generate", "Write the (standardized) dataset of a config as CSV");
    std::string gen_config, gen_out;
    std::uint64_t gen_seed = 0;
    gen->add_option("--config", gen_config, "Config file")->required()->check(CLI::ExistingFile);
    gen->add_option("--seed", gen_seed, "Master seed");
    gen->add_option("--out", gen_out, "Output CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config_path, seed, out_dir);
        if (*analyze) return cmd_analyze(in_dir);
        if (*grad) return cmd_gradcheck(instances, grad_seed, step, tolerance);
        if (*gen) {
            const auto cfg = assl::experiment::load_config(gen_config);
            assl::data::write_csv(assl::experiment::build_dataset(cfg, gen_seed), gen_out);
            return 0;
        }
    } catch (const assl::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
