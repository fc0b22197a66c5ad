#include "assl/data.hpp"

#include "assl/csv.hpp"
#include "assl/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace assl::data {

std::string_view to_string(GeneratorKind kind) {
    switch (kind) {
        case GeneratorKind::Blobs: return "blobs";
        case GeneratorKind::TwoMoons: return "two_moons";
        case GeneratorKind::Rings: return "rings";
    }
    return "unknown";
}

GeneratorKind parse_generator(std::string_view name) {
    if (name == "blobs") return GeneratorKind::Blobs;
    if (name == "two_moons" || name == "moons") return GeneratorKind::TwoMoons;
    if (name == "rings") return GeneratorKind::Rings;
    throw ConfigError("unknown dataset generator '" + std::string(name) + "'");
}

std::size_t Dataset::num_classes() const {
    int max_y = -1;
    for (const auto& s : points) max_y = std::max(max_y, s.y);
    return static_cast<std::size_t>(max_y + 1);
}

void Dataset::validate() const {
    const std::size_t k = num_classes();
    std::vector<std::size_t> counts(k, 0);
    const std::size_t d = dim();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& s = points[i];
        if (s.id != static_cast<int>(i)) throw InputError("dataset ids must be 0..n-1 in order");
        if (s.y < 0) throw InputError("negative class label");
        if (s.x.size() != d) throw InputError("inconsistent feature dimension");
        ++counts[static_cast<std::size_t>(s.y)];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) throw InputError("class " + std::to_string(c) + " is empty");
    }
}

Dataset generate(const GeneratorSpec& spec, std::uint64_t seed) {
    const std::size_t k = spec.num_classes;
    if (k < 2) throw ConfigError("need at least two classes");
    if (spec.size < 10 * k) throw ConfigError("dataset size must be at least 10 per class");
    if (!(spec.noise >= 0.0)) throw ConfigError("noise must be non-negative");
    if (spec.kind == GeneratorKind::TwoMoons && k != 2) {
        throw ConfigError("two_moons has exactly two classes");
    }

    std::vector<std::vector<double>> centers = spec.centers;
    if (spec.kind == GeneratorKind::Blobs) {
        if (centers.empty()) {
            for (std::size_t c = 0; c < k; ++c) {
                const double a = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(k);
                centers.push_back({spec.spread * std::cos(a), spec.spread * std::sin(a)});
            }
        }
        if (centers.size() != k) throw ConfigError("blobs: need one centre per class");
        for (const auto& c : centers) {
            if (c.empty() || c.size() != centers.front().size()) {
                throw ConfigError("blobs: centres must share a non-zero dimension");
            }
        }
    }

    Rng rng = make_rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    std::uniform_real_distribution<double> full_angle(0.0, 2.0 * std::numbers::pi);

    Dataset ds;
    ds.spec = spec;
    ds.spec.centers = centers;
    ds.seed = seed;
    ds.points.reserve(spec.size);
    for (std::size_t i = 0; i < spec.size; ++i) {
        Sample s;
        s.id = static_cast<int>(i);
        s.y = static_cast<int>(i % k);
        switch (spec.kind) {
            case GeneratorKind::Blobs:
                s.x = centers[static_cast<std::size_t>(s.y)];
                break;
            case GeneratorKind::TwoMoons: {
                const double t = angle(rng);
                if (s.y == 0) s.x = {std::cos(t), std::sin(t)};
                else s.x = {1.0 - std::cos(t), 0.5 - std::sin(t)};
                break;
            }
            case GeneratorKind::Rings: {
                const double t = full_angle(rng);
                const double r = static_cast<double>(s.y + 1);
                s.x = {r * std::cos(t), r * std::sin(t)};
                break;
            }
        }
        if (spec.noise > 0.0) {
            for (double& v : s.x) v += spec.noise * noise(rng);
        }
        ds.points.push_back(std::move(s));
    }
    return ds;
}

void standardize(Dataset& dataset) {
    const std::size_t d = dataset.dim();
    const double n = static_cast<double>(dataset.size());
    if (n == 0) return;
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (const auto& s : dataset.points) mean += s.x[j];
        mean /= n;
        double var = 0.0;
        for (const auto& s : dataset.points) var += (s.x[j] - mean) * (s.x[j] - mean);
        const double sd = std::sqrt(var / n);
        const double inv = sd > 0.0 ? 1.0 / sd : 1.0;
        for (auto& s : dataset.points) s.x[j] = (s.x[j] - mean) * inv;
    }
}

void augment_weak(std::span<const double> x, const WeakAugment& cfg, Rng& rng,
                  std::vector<double>& out) {
    out.assign(x.begin(), x.end());
    if (cfg.sigma == 0.0) return;
    std::normal_distribution<double> jitter(0.0, cfg.sigma);
    for (double& v : out) v += jitter(rng);
}

std::vector<double> augment_weak(std::span<const double> x, const WeakAugment& cfg, Rng& rng) {
    std::vector<double> out;
    augment_weak(x, cfg, rng, out);
    return out;
}

void augment_strong(std::span<const double> x, const StrongAugment& cfg, Rng& rng,
                    std::vector<double>& out) {
    out.assign(x.begin(), x.end());
    if (cfg.sigma > 0.0) {
        std::normal_distribution<double> jitter(0.0, cfg.sigma);
        for (double& v : out) v += jitter(rng);
    }
    if (cfg.scale_min != 1.0 || cfg.scale_max != 1.0) {
        std::uniform_real_distribution<double> scale(cfg.scale_min, cfg.scale_max);
        for (double& v : out) v *= scale(rng);
    }
    if (cfg.drop_prob > 0.0 && !out.empty()) {
        std::bernoulli_distribution drop(cfg.drop_prob);
        if (drop(rng)) {
            std::uniform_int_distribution<std::size_t> which(0, out.size() - 1);
            out[which(rng)] = 0.0;
        }
    }
}

std::vector<double> augment_strong(std::span<const double> x, const StrongAugment& cfg, Rng& rng) {
    std::vector<double> out;
    augment_strong(x, cfg, rng, out);
    return out;
}

void SamplePools::acquire(std::span<const int> ids) {
    std::vector<int> picked(ids.begin(), ids.end());
    std::sort(picked.begin(), picked.end());
    if (std::adjacent_find(picked.begin(), picked.end()) != picked.end()) {
        throw InputError("acquired ids contain duplicates");
    }
    if (!std::includes(unlabeled.begin(), unlabeled.end(), picked.begin(), picked.end())) {
        throw InputError("acquired id is not in the unlabeled pool");
    }
    std::vector<int> remaining;
    remaining.reserve(unlabeled.size() - picked.size());
    std::set_difference(unlabeled.begin(), unlabeled.end(), picked.begin(), picked.end(),
                        std::back_inserter(remaining));
    unlabeled = std::move(remaining);
    std::vector<int> grown;
    grown.reserve(labeled.size() + picked.size());
    std::merge(labeled.begin(), labeled.end(), picked.begin(), picked.end(),
               std::back_inserter(grown));
    labeled = std::move(grown);
}

void SamplePools::validate(std::size_t dataset_size) const {
    std::vector<int> seen(dataset_size, 0);
    for (const auto* list : {&labeled, &unlabeled, &test}) {
        for (int id : *list) {
            if (id < 0 || static_cast<std::size_t>(id) >= dataset_size) {
                throw InputError("pool id out of range");
            }
            if (seen[static_cast<std::size_t>(id)]++) throw InputError("pools overlap");
        }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
        throw InputError("pools do not cover the dataset");
    }
}

SamplePools split_pools(const Dataset& dataset, std::size_t n_init, std::size_t n_test,
                        std::uint64_t seed, bool stratified) {
    const std::size_t n = dataset.size();
    const std::size_t k = dataset.num_classes();
    if (n_init + n_test >= n) throw ConfigError("n_init + n_test must be below the dataset size");
    if (n_init < k) throw ConfigError("n_init must be at least the number of classes");

    Rng rng = make_rng(seed);
    std::vector<int> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
    std::shuffle(order.begin(), order.end(), rng);

    SamplePools pools;
    std::vector<char> taken(n, 0);
    if (stratified) {
        std::vector<char> have(k, 0);
        for (int id : order) {
            const auto c = static_cast<std::size_t>(dataset.at(id).y);
            if (!have[c]) {
                have[c] = 1;
                taken[static_cast<std::size_t>(id)] = 1;
                pools.labeled.push_back(id);
            }
        }
    }
    for (int id : order) {
        if (pools.labeled.size() >= n_init) break;
        if (!taken[static_cast<std::size_t>(id)]) {
            taken[static_cast<std::size_t>(id)] = 1;
            pools.labeled.push_back(id);
        }
    }
    for (int id : order) {
        if (taken[static_cast<std::size_t>(id)]) continue;
        if (pools.test.size() < n_test) pools.test.push_back(id);
        else pools.unlabeled.push_back(id);
    }
    std::sort(pools.labeled.begin(), pools.labeled.end());
    std::sort(pools.unlabeled.begin(), pools.unlabeled.end());
    std::sort(pools.test.begin(), pools.test.end());
    return pools;
}

void write_csv(const Dataset& dataset, std::ostream& out) {
    out << "id";
    for (std::size_t j = 0; j < dataset.dim(); ++j) out << ",x" << j;
    out << ",y\n";
    for (const auto& s : dataset.points) {
        out << s.id;
        for (double v : s.x) out << ',' << csv::real(v);
        out << ',' << s.y << '\n';
    }
}

void write_csv(const Dataset& dataset, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path);
    write_csv(dataset, f);
    if (!f) throw IoError("write failed: " + path);
}

Dataset read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InputError("dataset CSV is empty");
    const auto header = csv::split(line);
    if (header.size() < 3 || header.front() != "id" || header.back() != "y") {
        throw InputError("dataset CSV header must be id,x0,...,y");
    }
    const std::size_t d = header.size() - 2;
    Dataset ds;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = csv::split(line);
        if (fields.size() != d + 2) throw InputError("dataset CSV row has wrong field count");
        Sample s;
        s.id = static_cast<int>(csv::parse_int(fields[0]));
        s.x.reserve(d);
        for (std::size_t j = 0; j < d; ++j) s.x.push_back(csv::parse_real(fields[j + 1]));
        s.y = static_cast<int>(csv::parse_int(fields[d + 1]));
        ds.points.push_back(std::move(s));
    }
    ds.validate();
    ds.spec.size = ds.size();
    ds.spec.num_classes = ds.num_classes();
    return ds;
}

Dataset read_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read " + path);
    return read_csv(f);
}

}  // namespace assl::data
