#pragma once

#include "assl/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace assl::data {

enum class GeneratorKind { Blobs, TwoMoons, Rings };

std::string_view to_string(GeneratorKind kind);
/// Accepts "blobs", "two_moons"/"moons", "rings". Throws ConfigError otherwise.
GeneratorKind parse_generator(std::string_view name);

struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::TwoMoons;
    std::size_t size = 2000;
    std::size_t num_classes = 2;
    double noise = 0.2;
    /// Blobs only: explicit centres (one per class). Empty = evenly spaced on
    /// a circle of radius `spread`.
    std::vector<std::vector<double>> centers;
    double spread = 5.0;
};

struct Sample {
    int id = 0;
    std::vector<double> x;
    int y = 0;

    bool operator==(const Sample&) const = default;
};

struct Dataset {
    std::vector<Sample> points;  // points[i].id == i
    GeneratorSpec spec;
    std::uint64_t seed = 0;

    std::size_t size() const { return points.size(); }
    std::size_t dim() const { return points.empty() ? 0 : points.front().x.size(); }
    std::size_t num_classes() const;
    const Sample& at(int id) const { return points.at(static_cast<std::size_t>(id)); }

    /// Throws InputError unless ids are 0..n-1 and every class 0..k-1 occurs.
    void validate() const;
};

/// Labels are assigned round-robin (sample i belongs to class i mod k), so
/// class counts differ by at most one.
Dataset generate(const GeneratorSpec& spec, std::uint64_t seed);

/// Shift and scale every feature to zero mean, unit variance (population).
void standardize(Dataset& dataset);

struct WeakAugment {
    double sigma = 0.05;
};

struct StrongAugment {
    double sigma = 0.2;
    double scale_min = 0.7;
    double scale_max = 1.3;
    double drop_prob = 0.2;
};

/// x + N(0, sigma^2 I).
void augment_weak(std::span<const double> x, const WeakAugment& cfg, Rng& rng,
                  std::vector<double>& out);
std::vector<double> augment_weak(std::span<const double> x, const WeakAugment& cfg, Rng& rng);

/// Gaussian jitter, then per-coordinate scaling in [scale_min, scale_max],
/// then with probability drop_prob one random coordinate set to zero.
void augment_strong(std::span<const double> x, const StrongAugment& cfg, Rng& rng,
                    std::vector<double>& out);
std::vector<double> augment_strong(std::span<const double> x, const StrongAugment& cfg, Rng& rng);

/// Labeled / unlabeled / test partition of dataset ids. Each list is sorted.
struct SamplePools {
    std::vector<int> labeled;
    std::vector<int> unlabeled;
    std::vector<int> test;

    /// Moves `ids` from unlabeled to labeled. Throws InputError if an id is
    /// not currently unlabeled or appears twice.
    void acquire(std::span<const int> ids);

    /// Throws InputError unless the lists are disjoint and cover 0..n-1.
    void validate(std::size_t dataset_size) const;

    bool operator==(const SamplePools&) const = default;
};

/// Random test set and initial labeled set; with `stratified`, the labeled set
/// starts with one random sample per class before filling at random.
SamplePools split_pools(const Dataset& dataset, std::size_t n_init, std::size_t n_test,
                        std::uint64_t seed, bool stratified = true);

/// CSV with header `id,x0,x1,...,y`.
void write_csv(const Dataset& dataset, std::ostream& out);
void write_csv(const Dataset& dataset, const std::string& path);
Dataset read_csv(std::istream& in);
Dataset read_csv(const std::string& path);

}  // namespace assl::data
