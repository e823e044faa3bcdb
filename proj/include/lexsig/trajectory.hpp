#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lexsig/signatures.hpp"

namespace lexsig {

struct TrajectoryPoint {
    std::int64_t step = 0;
    double value = 0.0;

    bool operator==(const TrajectoryPoint&) const = default;
};

// One signature's values over the checkpoints of one training run.
struct Trajectory {
    std::string word;
    SignatureKind kind;
    std::int64_t seed = 0;
    std::vector<TrajectoryPoint> points;  // strictly increasing steps
    std::int64_t total_steps = 0;

    std::vector<double> values() const;
    // Throws unless steps are strictly increasing and end at total_steps.
    void validate() const;
};

// Centered moving average; near the ends the window is cut to the points
// that exist. `window` must be odd.
Trajectory smooth_moving_average(const Trajectory& traj, std::size_t window);

double max_spread(std::span<const double> values);

// Smallest index t with at least `min_tail` points in values[t..] whose
// max pairwise spread is below epsilon. One right-to-left pass.
std::optional<std::size_t> cauchy_index(std::span<const double> values, double epsilon, std::size_t min_tail = 2);

struct AoAResult {
    std::string word;
    SignatureKind kind;
    std::int64_t seed = 0;
    double epsilon = 0.0;
    bool converged = false;
    std::optional<std::int64_t> aoa_step;
    std::optional<double> aoa_normalized;  // index / (points - 1)
    std::size_t window = 1;
};

AoAResult extract_aoa_cauchy(const Trajectory& traj, double epsilon, std::size_t min_tail = 2);

struct SweepCell {
    SignatureKind kind;
    double epsilon = 0.0;
    std::size_t words = 0;
    std::size_t non_converged = 0;
    double fraction_non_converged = 0.0;
};

// A word fails for a kind when any of its seeds fails.
std::vector<SweepCell> convergence_sweep(const std::vector<Trajectory>& trajs, const std::vector<double>& epsilons,
                                         std::size_t min_tail = 2);

struct AggregatedAoA {
    std::string word;
    SignatureKind kind;
    double aoa = 0.0;
    std::size_t seeds = 0;
};

struct SeedAggregation {
    std::vector<AggregatedAoA> values;
    std::vector<std::pair<std::string, SignatureKind>> excluded;
};

// Mean normalized AoA per (word, kind) over seeds; words that fail to
// converge in any seed are excluded and listed.
SeedAggregation aggregate_seeds(const std::vector<AoAResult>& results);

// Non-increasing or non-decreasing, allowing steps against the trend of at
// most `tolerance`.
bool is_monotone(std::span<const double> values, double tolerance = 0.0);

// Groups signature values into trajectories by (word, kind, seed).
std::vector<Trajectory> build_trajectories(const std::vector<SignatureValue>& values);

// CSV `word,family,polarity,seed,step,value`.
void write_trajectories(std::ostream& out, const std::vector<Trajectory>& trajs);
std::vector<Trajectory> read_trajectories(const std::filesystem::path& path);

// CSV `word,family,polarity,seed,epsilon,converged,aoa_step,aoa_normalized`.
void write_aoa_header(std::ostream& out);
void write_aoa_row(std::ostream& out, const AoAResult& r);
std::vector<AoAResult> read_aoa(const std::filesystem::path& path);

}  // namespace lexsig
