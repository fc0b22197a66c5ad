#include "assl/experiment.hpp"

#include "assl/csv.hpp"
#include "assl/error.hpp"
#include "assl/kernels.hpp"
#include "assl/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace assl::experiment {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kManifestFormat = "assl-run";
constexpr const char* kVersion = "1.0.0";

// ---- config parsing ------------------------------------------------------

class ObjectReader {
public:
    ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            out = it->template get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(where_ + "." + key + ": " + e.what());
        }
    }

    const json* child(const char* key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
        }
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

// ---- small file helpers --------------------------------------------------

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + path.string());
    f << content;
    if (!f) throw IoError("write failed: " + path.string());
}

void make_dirs(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw InputError("missing column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    }
};

Table read_table(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read " + path.string());
    Table t;
    std::string line;
    if (!std::getline(f, line)) throw InputError(path.string() + " is empty");
    for (auto field : csv::split(line)) t.header.emplace_back(field);
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<std::string> row;
        for (auto field : csv::split(line)) row.emplace_back(field);
        if (row.size() != t.header.size()) {
            throw InputError(path.string() + ": row with " + std::to_string(row.size()) + " fields");
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::string seed_dir(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

std::string optional_real(const std::optional<double>& v) { return v ? csv::real(*v) : ""; }

}  // namespace

// ---- config --------------------------------------------------------------

void ExperimentConfig::validate() const {
    if (pools.rounds < 1) throw ConfigError("rounds must be >= 1");
    if (pools.acquire < 1) throw ConfigError("K (acquire) must be >= 1");
    if (dataset.size < 10 * dataset.num_classes) {
        throw ConfigError("dataset size must be at least 10 per class");
    }
    if (pools.n_init < dataset.num_classes) throw ConfigError("n_init must be >= number of classes");
    if (pools.n_init + pools.n_test >= dataset.size) {
        throw ConfigError("n_init + n_test must be below the dataset size");
    }
    const std::size_t pool = dataset.size - pools.n_test;
    if (pools.n_init + pools.rounds * pools.acquire > pool) {
        throw ConfigError("n_init + rounds * K exceeds the labeled+unlabeled pool");
    }
    ssl.validate();
    const std::size_t first_unlabeled = pool - pools.n_init;
    const std::size_t last_unlabeled = first_unlabeled - (pools.rounds - 1) * pools.acquire;
    if (last_unlabeled < ssl.unlabeled_batch()) {
        throw ConfigError("unlabeled pool in the last round is smaller than mu * B");
    }
    if (ssl.steps * ssl.unlabeled_batch() < first_unlabeled) {
        throw ConfigError("steps * mu * B must cover the unlabeled pool at least once per round");
    }
    for (std::size_t h : hidden) {
        if (h == 0) throw ConfigError("hidden layer of width 0");
    }
    if (!(tracker.alpha > 0.0 && tracker.alpha <= 1.0)) throw ConfigError("alpha must be in (0, 1]");
    if (tracker.c_u < 0.0 || tracker.c_i < 0.0) throw ConfigError("UCB constants must be >= 0");
    if (strategies.empty()) throw ConfigError("no strategies");
    if (std::set(strategies.begin(), strategies.end()).size() != strategies.size()) {
        throw ConfigError("duplicate strategy");
    }
    if (seeds.empty()) throw ConfigError("no seeds");
    if (std::set(seeds.begin(), seeds.end()).size() != seeds.size()) {
        throw ConfigError("duplicate seed");
    }
}

json to_json(const ExperimentConfig& cfg) {
    json strategies = json::array();
    for (auto s : cfg.strategies) strategies.push_back(std::string(acquisition::to_string(s)));
    return json{
        {"dataset",
         {{"kind", std::string(data::to_string(cfg.dataset.kind))},
          {"size", cfg.dataset.size},
          {"classes", cfg.dataset.num_classes},
          {"noise", cfg.dataset.noise},
          {"spread", cfg.dataset.spread},
          {"centers", cfg.dataset.centers},
          {"standardize", cfg.standardize}}},
        {"pools",
         {{"n_init", cfg.pools.n_init},
          {"n_test", cfg.pools.n_test},
          {"acquire", cfg.pools.acquire},
          {"rounds", cfg.pools.rounds},
          {"stratified", cfg.pools.stratified}}},
        {"ssl",
         {{"steps", cfg.ssl.steps},
          {"labeled_batch", cfg.ssl.labeled_batch},
          {"unlabeled_ratio", cfg.ssl.unlabeled_ratio},
          {"threshold", cfg.ssl.threshold},
          {"unsup_weight", cfg.ssl.unsup_weight},
          {"lr", cfg.ssl.lr},
          {"momentum", cfg.ssl.momentum},
          {"init", std::string(ssl::to_string(cfg.ssl.init))},
          {"augment_labeled", cfg.ssl.augment_labeled},
          {"weak_sigma", cfg.ssl.weak.sigma},
          {"strong_sigma", cfg.ssl.strong.sigma},
          {"strong_scale_min", cfg.ssl.strong.scale_min},
          {"strong_scale_max", cfg.ssl.strong.scale_max},
          {"strong_drop_prob", cfg.ssl.strong.drop_prob}}},
        {"snapshot_interval", cfg.ssl.snapshot_interval},
        {"model", {{"hidden", cfg.hidden}}},
        {"tracker",
         {{"alpha", cfg.tracker.alpha},
          {"c_u", cfg.tracker.c_u},
          {"c_i", cfg.tracker.c_i},
          {"variance", cfg.tracker.order == tracker::VarianceOrder::PostUpdateMean ? "post" : "pre"},
          {"carry_over", cfg.carry_tracker}}},
        {"strategies", strategies},
        {"seeds", cfg.seeds},
        {"diverse_mode", cfg.diverse_mode == acquisition::DiverseMode::Lloyd ? "lloyd" : "seeding"},
        {"output_dir", cfg.output_dir},
        {"event_log", cfg.event_log},
        {"threads", cfg.threads},
    };
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    ObjectReader top(j, "config");
    if (const json* d = top.child("dataset")) {
        ObjectReader r(*d, "dataset");
        std::string kind(data::to_string(cfg.dataset.kind));
        r.get("kind", kind);
        cfg.dataset.kind = data::parse_generator(kind);
        r.get("size", cfg.dataset.size);
        r.get("classes", cfg.dataset.num_classes);
        r.get("noise", cfg.dataset.noise);
        r.get("spread", cfg.dataset.spread);
        r.get("centers", cfg.dataset.centers);
        r.get("standardize", cfg.standardize);
        r.finish();
    }
    if (const json* p = top.child("pools")) {
        ObjectReader r(*p, "pools");
        r.get("n_init", cfg.pools.n_init);
        r.get("n_test", cfg.pools.n_test);
        r.get("acquire", cfg.pools.acquire);
        r.get("rounds", cfg.pools.rounds);
        r.get("stratified", cfg.pools.stratified);
        r.finish();
    }
    if (const json* s = top.child("ssl")) {
        ObjectReader r(*s, "ssl");
        r.get("steps", cfg.ssl.steps);
        r.get("labeled_batch", cfg.ssl.labeled_batch);
        r.get("unlabeled_ratio", cfg.ssl.unlabeled_ratio);
        r.get("threshold", cfg.ssl.threshold);
        r.get("unsup_weight", cfg.ssl.unsup_weight);
        r.get("lr", cfg.ssl.lr);
        r.get("momentum", cfg.ssl.momentum);
        std::string init(ssl::to_string(cfg.ssl.init));
        r.get("init", init);
        cfg.ssl.init = ssl::parse_init_mode(init);
        r.get("augment_labeled", cfg.ssl.augment_labeled);
        r.get("weak_sigma", cfg.ssl.weak.sigma);
        r.get("strong_sigma", cfg.ssl.strong.sigma);
        r.get("strong_scale_min", cfg.ssl.strong.scale_min);
        r.get("strong_scale_max", cfg.ssl.strong.scale_max);
        r.get("strong_drop_prob", cfg.ssl.strong.drop_prob);
        r.finish();
    }
    top.get("snapshot_interval", cfg.ssl.snapshot_interval);
    if (const json* m = top.child("model")) {
        ObjectReader r(*m, "model");
        r.get("hidden", cfg.hidden);
        r.finish();
    }
    if (const json* t = top.child("tracker")) {
        ObjectReader r(*t, "tracker");
        r.get("alpha", cfg.tracker.alpha);
        r.get("c_u", cfg.tracker.c_u);
        r.get("c_i", cfg.tracker.c_i);
        std::string variance = "post";
        r.get("variance", variance);
        if (variance == "post") cfg.tracker.order = tracker::VarianceOrder::PostUpdateMean;
        else if (variance == "pre") cfg.tracker.order = tracker::VarianceOrder::PreUpdateMean;
        else throw ConfigError("tracker.variance must be 'post' or 'pre'");
        r.get("carry_over", cfg.carry_tracker);
        r.finish();
    }
    if (const json* s = top.child("strategies")) {
        if (!s->is_array()) throw ConfigError("strategies must be an array");
        cfg.strategies.clear();
        for (const auto& name : *s) {
            if (!name.is_string()) throw ConfigError("strategy names must be strings");
            cfg.strategies.push_back(acquisition::parse_strategy(name.get<std::string>()));
        }
    }
    top.get("seeds", cfg.seeds);
    std::string diverse = "lloyd";
    top.get("diverse_mode", diverse);
    if (diverse == "lloyd") cfg.diverse_mode = acquisition::DiverseMode::Lloyd;
    else if (diverse == "seeding") cfg.diverse_mode = acquisition::DiverseMode::SeedingOnly;
    else throw ConfigError("diverse_mode must be 'lloyd' or 'seeding'");
    top.get("output_dir", cfg.output_dir);
    top.get("event_log", cfg.event_log);
    top.get("threads", cfg.threads);
    top.finish();
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read " + path.string());
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    if (j.is_object() && j.value("format", "") == kManifestFormat) return config_from_json(j.at("config"));
    return config_from_json(j);
}

// ---- runs ----------------------------------------------------------------

std::vector<RoundReport> ExperimentResult::reports() const {
    std::vector<RoundReport> out;
    for (const auto& run : runs) out.insert(out.end(), run.reports.begin(), run.reports.end());
    return out;
}

data::Dataset build_dataset(const ExperimentConfig& cfg, std::uint64_t seed) {
    data::Dataset ds = data::generate(cfg.dataset, derive_seed(seed, "dataset"));
    if (cfg.standardize) data::standardize(ds);
    return ds;
}

RunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed,
                     acquisition::Strategy strategy) {
    cfg.validate();
    using acquisition::Strategy;
    RunResult run;
    run.seed = seed;
    run.strategy = strategy;

    const data::Dataset dataset = build_dataset(cfg, seed);
    data::SamplePools pools = data::split_pools(dataset, cfg.pools.n_init, cfg.pools.n_test,
                                                derive_seed(seed, "pools"), cfg.pools.stratified);
    nn::Architecture arch;
    arch.input_dim = dataset.dim();
    arch.hidden = cfg.hidden;
    arch.num_classes = dataset.num_classes();
    const nn::ModelParams initial = nn::init_params(arch, derive_seed(seed, "init"));
    nn::ModelParams params = initial;
    tracker::TrackerStore tracker(dataset.size(), cfg.tracker);
    const std::size_t k = arch.num_classes;

    for (std::size_t round = 0; round < cfg.pools.rounds; ++round) {
        if (round == 0 || !cfg.carry_tracker) tracker.reset(pools.unlabeled);
        const nn::ModelParams& start =
            (round == 0 || cfg.ssl.init == ssl::InitMode::RandInit) ? initial : params;

        RoundArtifacts artifacts;
        std::ostringstream events;
        ssl::EventObserver observer;
        if (cfg.event_log) {
            events << "round,step,sample_id";
            for (std::size_t c = 0; c < k; ++c) events << ",probs_w" << c;
            for (std::size_t c = 0; c < k; ++c) events << ",probs_s" << c;
            events << '\n';
            observer = [&events, round](const tracker::PredictionEvent& e) {
                events << round << ',' << e.global_step << ',' << e.sample_id;
                for (double p : e.probs_weak) events << ',' << csv::real(p);
                for (double p : e.probs_strong) events << ',' << csv::real(p);
                events << '\n';
            };
        }

        ssl::RoundResult trained;
        try {
            trained = ssl::train_round(start, pools, dataset, cfg.ssl, tracker,
                                       derive_seed(seed, "train", round), observer);
        } catch (const TrainingError& e) {
            run.error = "round " + std::to_string(round) + ": " + e.what();
            break;
        }
        run.round_start.push_back(start);
        params = trained.params;
        run.round_final.push_back(params);
        artifacts.scores = tracker.snapshot();
        artifacts.samples = analysis::summarize(trained.snapshots, cfg.ssl.threshold);
        artifacts.event_log = events.str();
        if (round == 0) {
            run.first_round_snapshots = trained.snapshots;
        }

        RoundReport report;
        report.round = round;
        report.strategy = strategy;
        report.seed = seed;
        report.accuracy = trained.metrics.test_accuracy;
        report.labeled = pools.labeled.size();
        report.unlabeled = pools.unlabeled.size();
        report.training = trained.metrics;

        Rng rng = make_rng(derive_seed(derive_seed(seed, "acquire", round), acquisition::to_string(strategy)));
        const std::size_t K = cfg.pools.acquire;
        const auto forwards_before = nn::forward_pass_count();
        const auto t0 = std::chrono::steady_clock::now();
        switch (strategy) {
            case Strategy::Ours:
                report.acquired = acquisition::acquire_topk_score(tracker, pools.unlabeled, K);
                break;
            case Strategy::OursDiv: {
                const auto emb = acquisition::compute_embeddings(params, dataset, pools.unlabeled);
                acquisition::DiverseOptions opts;
                opts.mode = cfg.diverse_mode;
                report.acquired = acquisition::acquire_diverse(tracker, pools.unlabeled, emb, K, rng, opts);
                break;
            }
            case Strategy::Random:
                report.acquired = acquisition::acquire_random(pools.unlabeled, K, rng);
                break;
            case Strategy::Entropy:
                report.acquired = acquisition::acquire_entropy(params, dataset, pools.unlabeled, K);
                break;
            case Strategy::Margin:
                report.acquired = acquisition::acquire_margin(params, dataset, pools.unlabeled, K);
                break;
            case Strategy::SnapshotEl2n:
                report.acquired = acquisition::acquire_snapshot_el2n(params, dataset, pools.unlabeled, K);
                break;
            case Strategy::Coreset: {
                std::vector<int> both = pools.labeled;
                both.insert(both.end(), pools.unlabeled.begin(), pools.unlabeled.end());
                const auto emb = acquisition::compute_embeddings(params, dataset, both);
                report.acquired = acquisition::acquire_coreset(emb, pools.labeled, pools.unlabeled, K);
                break;
            }
        }
        const auto t1 = std::chrono::steady_clock::now();
        report.acquisition_seconds = std::chrono::duration<double>(t1 - t0).count();
        report.acquisition_forward_passes = nn::forward_pass_count() - forwards_before;

        pools.acquire(report.acquired.ids);
        tracker.remove(report.acquired.ids);
        run.reports.push_back(std::move(report));
        run.rounds.push_back(std::move(artifacts));
    }
    return run;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentResult result;
    result.config = cfg;
    for (auto seed : cfg.seeds) result.datasets.push_back(build_dataset(cfg, seed));

    struct Task {
        std::uint64_t seed;
        acquisition::Strategy strategy;
    };
    std::vector<Task> tasks;
    for (auto seed : cfg.seeds)
        for (auto s : cfg.strategies) tasks.push_back({seed, s});
    result.runs.resize(tasks.size());

    std::size_t workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, tasks.size());
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> failures(tasks.size());
    auto work = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                result.runs[i] = run_single(cfg, tasks[i].seed, tasks[i].strategy);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);
    return result;
}

// ---- emission ------------------------------------------------------------

void emit(const ExperimentResult& result, const fs::path& out) {
    const auto& cfg = result.config;
    make_dirs(out);

    std::ostringstream rounds;
    rounds << "round,strategy,seed,accuracy,labeled,unlabeled,mask_rate,sup_loss,unsup_loss,"
              "acquisition_forward_passes\n";
    for (const auto& r : result.reports()) {
        rounds << r.round << ',' << acquisition::to_string(r.strategy) << ',' << r.seed << ','
               << csv::real(r.accuracy) << ',' << r.labeled << ',' << r.unlabeled << ','
               << csv::real(r.training.mask_rate) << ',' << csv::real(r.training.mean_sup_loss) << ','
               << csv::real(r.training.mean_unsup_loss) << ',' << r.acquisition_forward_passes << '\n';
    }
    write_file(out / "rounds.csv", rounds.str());

    for (std::size_t s = 0; s < result.datasets.size(); ++s) {
        const fs::path dir = out / seed_dir(cfg.seeds[s]);
        make_dirs(dir);
        std::ostringstream ds;
        data::write_csv(result.datasets[s], ds);
        write_file(dir / "dataset.csv", ds.str());
    }

    json errors = json::array();
    json timing = json::array();
    std::set<std::uint64_t> snapshot_written;
    for (const auto& run : result.runs) {
        const std::string name(acquisition::to_string(run.strategy));
        const fs::path dir = out / seed_dir(run.seed) / name;
        make_dirs(dir);
        if (!run.error.empty()) errors.push_back({{"seed", run.seed}, {"strategy", name}, {"message", run.error}});

        if (!snapshot_written.count(run.seed) && run.first_round_snapshots.num_snapshots() > 0) {
            snapshot_written.insert(run.seed);
            const auto& series = run.first_round_snapshots;
            std::ostringstream snap;
            snap << "snapshot,step,sample_id,label,uncertainty,max_prob\n";
            for (std::size_t t = 0; t < series.num_snapshots(); ++t) {
                for (std::size_t i = 0; i < series.num_samples(); ++i) {
                    snap << t << ',' << series.steps()[t] << ',' << series.ids()[i] << ','
                         << series.label(t, i) << ',' << csv::real(series.uncertainty(t, i)) << ','
                         << csv::real(series.max_prob(t, i)) << '\n';
                }
            }
            write_file(out / seed_dir(run.seed) / "snapshots_round0.csv", snap.str());
        }

        std::ostringstream acq;
        acq << "round,strategy,rank,sample_id,score\n";
        for (const auto& r : run.reports) {
            for (std::size_t i = 0; i < r.acquired.ids.size(); ++i) {
                acq << r.round << ',' << name << ',' << i << ',' << r.acquired.ids[i] << ','
                    << csv::real(r.acquired.scores[i]) << '\n';
            }
            timing.push_back({{"seed", run.seed},
                              {"strategy", name},
                              {"round", r.round},
                              {"acquisition_seconds", r.acquisition_seconds}});
        }
        write_file(dir / "acquisitions.csv", acq.str());

        for (std::size_t round = 0; round < run.rounds.size(); ++round) {
            const auto& art = run.rounds[round];
            std::ostringstream scores;
            tracker::write_scores_csv(art.scores, scores);
            write_file(dir / ("scores_round" + std::to_string(round) + ".csv"), scores.str());

            std::ostringstream samples;
            samples << "sample_id,ti,mean_uncertainty,pseudo_count\n";
            for (const auto& s : art.samples) {
                samples << s.sample_id << ',' << s.ti << ',' << csv::real(s.mean_uncertainty) << ','
                        << s.pseudo_count << '\n';
            }
            write_file(dir / ("samples_round" + std::to_string(round) + ".csv"), samples.str());
            if (!art.event_log.empty()) {
                write_file(dir / ("events_round" + std::to_string(round) + ".csv"), art.event_log);
            }
        }
    }

    json strategies = json::array();
    for (auto s : cfg.strategies) strategies.push_back(std::string(acquisition::to_string(s)));
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    const json manifest{
        {"format", kManifestFormat},
        {"version", kVersion},
        {"kernel_isa", std::string(kernels::active().name)},
        {"config", to_json(cfg)},
        {"seeds", cfg.seeds},
        {"strategies", strategies},
        {"errors", errors},
        {"created_at", stamp},
        {"timing", timing},
    };
    write_file(out / "manifest.json", manifest.dump(2) + "\n");

    analyze_directory(out);
}

// ---- analysis from disk --------------------------------------------------

AnalysisSummary analyze_directory(const fs::path& dir) {
    const ExperimentConfig cfg = load_config(dir / "manifest.json");
    AnalysisSummary summary;

    std::ostringstream profile, ti_corr, spearman_series;
    profile << "seed,ti,count,mean_u,std_u\n";
    ti_corr << "seed,spearman\n";
    spearman_series << "seed,pair,step_prev,step_cur,spearman\n";
    for (auto seed : cfg.seeds) {
        const fs::path path = dir / seed_dir(seed) / "snapshots_round0.csv";
        if (!fs::exists(path)) continue;
        const Table t = read_table(path);
        const std::size_t c_snap = t.column("snapshot"), c_step = t.column("step"),
                          c_id = t.column("sample_id"), c_label = t.column("label"),
                          c_u = t.column("uncertainty"), c_max = t.column("max_prob");
        std::vector<int> ids;
        for (const auto& row : t.rows) {
            if (csv::parse_int(row[c_snap]) != 0) break;
            ids.push_back(static_cast<int>(csv::parse_int(row[c_id])));
        }
        analysis::SnapshotSeries series(ids);
        for (std::size_t start = 0; start < t.rows.size(); start += ids.size()) {
            if (start + ids.size() > t.rows.size()) throw InputError(path.string() + " is truncated");
            std::vector<int> labels;
            std::vector<double> u, mx;
            for (std::size_t i = 0; i < ids.size(); ++i) {
                const auto& row = t.rows[start + i];
                if (csv::parse_int(row[c_id]) != ids[i]) throw InputError(path.string() + ": misaligned ids");
                labels.push_back(static_cast<int>(csv::parse_int(row[c_label])));
                u.push_back(csv::parse_real(row[c_u]));
                mx.push_back(csv::parse_real(row[c_max]));
            }
            series.add(static_cast<std::uint64_t>(csv::parse_int(t.rows[start][c_step])), labels, u, mx);
        }

        const auto summaries = analysis::summarize(series, cfg.ssl.threshold);
        const auto groups = analysis::ti_uncertainty_profile(summaries);
        for (const auto& g : groups) {
            profile << seed << ',' << g.ti << ',' << g.count << ',' << csv::real(g.mean_u) << ','
                    << csv::real(g.std_u) << '\n';
        }
        summary.ti_profile[seed] = groups;
        const auto rho = analysis::ti_uncertainty_correlation(summaries);
        summary.ti_correlation[seed] = rho;
        ti_corr << seed << ',' << optional_real(rho) << '\n';

        const auto pairs = analysis::consecutive_rank_correlations(series);
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            spearman_series << seed << ',' << p << ',' << series.steps()[p] << ','
                            << series.steps()[p + 1] << ',' << optional_real(pairs[p]) << '\n';
        }
        summary.snapshot_correlations[seed] = pairs;
    }
    write_file(dir / "ti_profile.csv", profile.str());
    write_file(dir / "ti_correlation.csv", ti_corr.str());
    write_file(dir / "spearman_series.csv", spearman_series.str());

    std::ostringstream pseudo;
    pseudo << "seed,strategy,round,sorted_by,top_frac,ratio\n";
    constexpr double kFractions[] = {0.01, 0.05, 0.10};
    for (auto seed : cfg.seeds) {
        for (auto strategy : cfg.strategies) {
            const std::string name(acquisition::to_string(strategy));
            const fs::path run_dir = dir / seed_dir(seed) / name;
            for (std::size_t round = 0;; ++round) {
                const fs::path samples_path = run_dir / ("samples_round" + std::to_string(round) + ".csv");
                const fs::path scores_path = run_dir / ("scores_round" + std::to_string(round) + ".csv");
                if (!fs::exists(samples_path) || !fs::exists(scores_path)) break;
                const Table samples = read_table(samples_path);
                const Table scores = read_table(scores_path);
                std::map<int, bool> flags;
                const std::size_t s_id = samples.column("sample_id"), s_count = samples.column("pseudo_count");
                for (const auto& row : samples.rows) {
                    flags[static_cast<int>(csv::parse_int(row[s_id]))] = csv::parse_int(row[s_count]) > 0;
                }
                std::map<int, double> by_inconsistency, by_uncertainty;
                const std::size_t c_id = scores.column("sample_id"), c_i = scores.column("i_ucb"),
                                  c_u = scores.column("u_ucb");
                for (const auto& row : scores.rows) {
                    const int id = static_cast<int>(csv::parse_int(row[c_id]));
                    by_inconsistency[id] = csv::parse_real(row[c_i]);
                    by_uncertainty[id] = csv::parse_real(row[c_u]);
                }
                for (const auto& [label, table] :
                     {std::pair{"inconsistency", &by_inconsistency}, std::pair{"uncertainty", &by_uncertainty}}) {
                    for (double frac : kFractions) {
                        const double ratio = analysis::pseudo_labeled_ratio(flags, *table, frac);
                        pseudo << seed << ',' << name << ',' << round << ',' << label << ','
                               << csv::real(frac) << ',' << csv::real(ratio) << '\n';
                        summary.pseudo_ratios.push_back({seed, name, round, label, frac, ratio});
                    }
                }
            }
        }
    }
    write_file(dir / "pseudo_ratio.csv", pseudo.str());

    // Final-round accuracy per (strategy, seed); settings = dataset x seed.
    const Table rounds = read_table(dir / "rounds.csv");
    const std::size_t c_round = rounds.column("round"), c_strategy = rounds.column("strategy"),
                      c_seed = rounds.column("seed"), c_acc = rounds.column("accuracy");
    std::map<std::string, std::map<std::string, std::pair<long long, double>>> last;
    std::map<std::pair<std::string, long long>, std::vector<double>> curve;
    const std::string kind(data::to_string(cfg.dataset.kind));
    for (const auto& row : rounds.rows) {
        const std::string setting = kind + "/seed_" + row[c_seed];
        const long long round = csv::parse_int(row[c_round]);
        const double acc = csv::parse_real(row[c_acc]);
        auto& per_setting = last[row[c_strategy]];
        const auto it = per_setting.find(setting);
        if (it == per_setting.end() || round >= it->second.first) per_setting[setting] = {round, acc};
        curve[{row[c_strategy], round}].push_back(acc);
    }
    std::vector<analysis::StrategyResults> results;
    for (auto strategy : cfg.strategies) {
        const std::string name(acquisition::to_string(strategy));
        analysis::StrategyResults r;
        r.strategy = name;
        double sum = 0.0;
        for (const auto& [setting, value] : last[name]) {
            r.accuracy_by_setting[setting] = value.second;
            sum += value.second;
        }
        if (!r.accuracy_by_setting.empty()) {
            summary.mean_final_accuracy[name] = sum / static_cast<double>(r.accuracy_by_setting.size());
        }
        results.push_back(std::move(r));
    }
    summary.pairwise = analysis::pairwise_matrix(results);

    std::ostringstream matrix;
    matrix << "strategy";
    for (const auto& n : summary.pairwise.strategies) matrix << ',' << n;
    matrix << '\n';
    for (std::size_t i = 0; i < summary.pairwise.strategies.size(); ++i) {
        matrix << summary.pairwise.strategies[i];
        for (int w : summary.pairwise.wins[i]) matrix << ',' << w;
        matrix << '\n';
    }
    matrix << "column_mean";
    for (double m : summary.pairwise.column_means) matrix << ',' << csv::real(m);
    matrix << '\n';
    write_file(dir / "pairwise_matrix.csv", matrix.str());

    std::ostringstream acc_curve;
    acc_curve << "strategy,round,mean_accuracy,std_accuracy,runs\n";
    for (auto strategy : cfg.strategies) {
        const std::string name(acquisition::to_string(strategy));
        for (long long round = 0;; ++round) {
            const auto it = curve.find({name, round});
            if (it == curve.end()) break;
            const auto& v = it->second;
            const double n = static_cast<double>(v.size());
            double mean = 0.0, ss = 0.0;
            for (double a : v) mean += a;
            mean /= n;
            for (double a : v) ss += (a - mean) * (a - mean);
            acc_curve << name << ',' << round << ',' << csv::real(mean) << ','
                      << csv::real(std::sqrt(ss / n)) << ',' << v.size() << '\n';
        }
    }
    write_file(dir / "accuracy_curve.csv", acc_curve.str());
    return summary;
}

}  // namespace assl::experiment
