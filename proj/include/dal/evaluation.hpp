#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dal/dataset.hpp"
#include "dal/random.hpp"

namespace dal {

/// Mean relative error in percent: mean(|A - P| / A) * 100.
double mre(std::span<const double> actual, std::span<const double> predicted);

/// Vargha-Delaney effect size: P(x > y) + 0.5 * P(x == y) over all pairs.
double a12(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> values);
/// Linear-interpolation quantile (q in [0, 1]) of an unsorted sample.
double quantile(std::span<const double> values, double q);
double median(std::span<const double> values);
double interquartile_range(std::span<const double> values);

/// Two-sided bootstrap test for a difference of means: both samples are
/// shifted onto the pooled mean, resampled, and the share of resampled mean
/// differences at least as large as the observed one is the p-value.
bool bootstrap_differs(std::span<const double> x, std::span<const double> y, std::size_t resamples,
                       double confidence, Rng& rng);

struct ScottKnottOptions {
  std::size_t bootstrap_resamples = 1000;
  double confidence = 0.99;
  double min_effect = 0.6;
  std::uint64_t seed = 0x5C077;
};

struct RankEntry {
  std::string approach;
  std::size_t rank = 1;
  double median = 0.0;
  double iqr = 0.0;
  double mean = 0.0;
};

struct RankTable {
  std::vector<RankEntry> entries;  // ordered by median, as ranked

  const RankEntry& at(const std::string& approach) const;
  std::size_t rank_count() const;
};

RankTable scott_knott(const std::map<std::string, std::vector<double>>& results, const ScottKnottOptions& options = {});

/// Trains on `train` and predicts every row of `test`.
using FitPredict = std::function<std::vector<double>(const TrainingSet& train, const std::vector<Row>& test,
                                                     std::uint64_t seed)>;

struct Approach {
  std::string name;
  FitPredict fit_predict;
};

struct NamedDataset {
  std::string name;
  Dataset data;
  MixedSizeTable mixed_sizes;
};

struct ExperimentOptions {
  std::vector<SizeTier> tiers;
  std::optional<std::size_t> explicit_size;  // replaces tiers when set
  std::size_t repeats = 30;
  std::uint64_t master_seed = 0;
  std::size_t jobs = 1;
  ScottKnottOptions ranking;
};

struct RunResult {
  std::string approach;
  std::string system;
  std::string size_label;
  std::size_t run_index = 0;
  double mre_percent = 0.0;
};

struct CellSummary {
  std::string system;
  std::string size_label;
  std::size_t training_size = 0;
  std::string approach;
  std::size_t rank = 1;
  double median = 0.0;
  double iqr = 0.0;
};

struct EvaluationReport {
  std::vector<RunResult> runs;
  std::vector<CellSummary> cells;
};

/// For every (dataset, size, run) one split is drawn and shared by all
/// approaches; MREs are ranked with Scott-Knott per (dataset, size).
EvaluationReport run_experiment(const std::vector<NamedDataset>& datasets, const std::vector<Approach>& approaches,
                                const ExperimentOptions& options);

void write_report_csv(std::ostream& out, const EvaluationReport& report);
void write_report_text(std::ostream& out, const EvaluationReport& report);
void write_runs_csv(std::ostream& out, const EvaluationReport& report);

}  // namespace dal
