#include "dal/evaluation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "dal/error.hpp"
#include "dal/parallel.hpp"

namespace dal {

double mre(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size()) throw Error(ErrorCode::LengthMismatch, "actual and predicted differ in length");
  if (actual.empty()) throw Error(ErrorCode::LengthMismatch, "MRE of an empty sequence");
  double sum = 0.0;
  for (std::size_t t = 0; t < actual.size(); ++t) {
    if (!(actual[t] > 0.0)) throw Error(ErrorCode::NonPositiveActual, "actual performance must be positive");
    sum += std::abs(actual[t] - predicted[t]) / actual[t];
  }
  return sum / static_cast<double>(actual.size()) * 100.0;
}

double a12(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw Error(ErrorCode::EmptyGroup, "A12 needs two non-empty groups");
  double wins = 0.0, ties = 0.0;
  for (double a : x) {
    for (double b : y) {
      if (a > b) wins += 1.0;
      else if (a == b) ties += 1.0;
    }
  }
  return (wins + 0.5 * ties) / (static_cast<double>(x.size()) * static_cast<double>(y.size()));
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::EmptyGroup, "quantile of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double median(std::span<const double> values) { return quantile(values, 0.5); }

double interquartile_range(std::span<const double> values) { return quantile(values, 0.75) - quantile(values, 0.25); }

bool bootstrap_differs(std::span<const double> x, std::span<const double> y, std::size_t resamples,
                       double confidence, Rng& rng) {
  if (x.empty() || y.empty()) throw Error(ErrorCode::EmptyGroup, "bootstrap needs two non-empty groups");
  const double mx = mean(x), my = mean(y);
  const double pooled = (mx * static_cast<double>(x.size()) + my * static_cast<double>(y.size())) /
                        static_cast<double>(x.size() + y.size());
  const double observed = std::abs(mx - my);
  std::vector<double> xs(x.size()), ys(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) xs[i] = x[i] - mx + pooled;
  for (std::size_t i = 0; i < y.size(); ++i) ys[i] = y[i] - my + pooled;

  std::size_t extreme = 0;
  for (std::size_t b = 0; b < resamples; ++b) {
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) sx += xs[uniform_index(rng, xs.size())];
    for (std::size_t i = 0; i < ys.size(); ++i) sy += ys[uniform_index(rng, ys.size())];
    const double diff = std::abs(sx / static_cast<double>(xs.size()) - sy / static_cast<double>(ys.size()));
    if (diff >= observed) ++extreme;
  }
  const double p = static_cast<double>(extreme) / static_cast<double>(resamples);
  return p < 1.0 - confidence;
}

const RankEntry& RankTable::at(const std::string& approach) const {
  for (const auto& e : entries) {
    if (e.approach == approach) return e;
  }
  throw Error(ErrorCode::EmptyGroup, "no ranking for approach '" + approach + "'");
}

std::size_t RankTable::rank_count() const {
  std::size_t m = 0;
  for (const auto& e : entries) m = std::max(m, e.rank);
  return m;
}

namespace {

struct Treatment {
  std::string name;
  const std::vector<double>* values;
  double median;
};

std::vector<double> pool(std::span<const Treatment> part) {
  std::vector<double> all;
  for (const auto& t : part) all.insert(all.end(), t.values->begin(), t.values->end());
  return all;
}

void split_groups(std::span<const Treatment> sorted, std::size_t lo, std::size_t hi, const ScottKnottOptions& options,
                  std::vector<std::pair<std::size_t, std::size_t>>& groups) {
  if (hi - lo < 2) {
    groups.emplace_back(lo, hi);
    return;
  }
  const auto whole = pool(sorted.subspan(lo, hi - lo));
  const double mu = mean(whole);
  const double n = static_cast<double>(whole.size());

  std::size_t best_cut = lo + 1;
  double best_delta = -1.0;
  for (std::size_t cut = lo + 1; cut < hi; ++cut) {
    const auto l1 = pool(sorted.subspan(lo, cut - lo));
    const auto l2 = pool(sorted.subspan(cut, hi - cut));
    const double d1 = mean(l1) - mu, d2 = mean(l2) - mu;
    const double delta = static_cast<double>(l1.size()) / n * d1 * d1 + static_cast<double>(l2.size()) / n * d2 * d2;
    if (delta > best_delta) {
      best_delta = delta;
      best_cut = cut;
    }
  }

  const auto l1 = pool(sorted.subspan(lo, best_cut - lo));
  const auto l2 = pool(sorted.subspan(best_cut, hi - best_cut));
  Rng rng(derive_seed(options.seed, {lo, hi}));
  const double effect = a12(l1, l2);
  const bool large_effect = std::max(effect, 1.0 - effect) >= options.min_effect;
  if (large_effect && bootstrap_differs(l1, l2, options.bootstrap_resamples, options.confidence, rng)) {
    split_groups(sorted, lo, best_cut, options, groups);
    split_groups(sorted, best_cut, hi, options, groups);
  } else {
    groups.emplace_back(lo, hi);
  }
}

}  // namespace

RankTable scott_knott(const std::map<std::string, std::vector<double>>& results, const ScottKnottOptions& options) {
  if (results.empty()) throw Error(ErrorCode::TooFewResults, "no approaches to rank");
  std::vector<Treatment> sorted;
  for (const auto& [name, values] : results) {
    if (values.size() < 2) throw Error(ErrorCode::TooFewResults, "approach '" + name + "' has fewer than 2 results");
    sorted.push_back({name, &values, median(values)});
  }
  std::stable_sort(sorted.begin(), sorted.end(), [](const Treatment& a, const Treatment& b) {
    return a.median < b.median || (a.median == b.median && a.name < b.name);
  });

  std::vector<std::pair<std::size_t, std::size_t>> groups;
  split_groups(sorted, 0, sorted.size(), options, groups);

  std::vector<std::pair<double, std::size_t>> by_mean;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto values = pool(std::span(sorted).subspan(groups[g].first, groups[g].second - groups[g].first));
    by_mean.emplace_back(mean(values), g);
  }
  std::stable_sort(by_mean.begin(), by_mean.end());
  std::vector<std::size_t> group_rank(groups.size());
  for (std::size_t r = 0; r < by_mean.size(); ++r) group_rank[by_mean[r].second] = r + 1;

  RankTable table;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t i = groups[g].first; i < groups[g].second; ++i) {
      const auto& t = sorted[i];
      table.entries.push_back({t.name, group_rank[g], t.median, interquartile_range(*t.values), mean(*t.values)});
    }
  }
  return table;
}

EvaluationReport run_experiment(const std::vector<NamedDataset>& datasets, const std::vector<Approach>& approaches,
                                const ExperimentOptions& options) {
  if (approaches.empty()) throw Error(ErrorCode::InvalidConfig, "no approaches to evaluate");
  if (options.repeats == 0) throw Error(ErrorCode::InvalidConfig, "repeats must be positive");
  EvaluationReport report;
  for (std::size_t ds = 0; ds < datasets.size(); ++ds) {
    const auto& named = datasets[ds];
    std::vector<std::pair<std::string, std::size_t>> sizes;
    if (options.explicit_size) {
      sizes.emplace_back("n" + std::to_string(*options.explicit_size), *options.explicit_size);
    } else {
      for (SizeTier tier : options.tiers) {
        const MixedSizeTable* table = named.mixed_sizes.empty() ? nullptr : &named.mixed_sizes;
        sizes.emplace_back(tier_label(tier), training_size(named.data, tier, table));
      }
    }
    for (std::size_t s = 0; s < sizes.size(); ++s) {
      const auto& [label, size] = sizes[s];
      // runs[r][a]
      std::vector<std::vector<double>> mres(options.repeats, std::vector<double>(approaches.size()));
      parallel_for(options.repeats, options.jobs, [&](std::size_t r) {
        const std::uint64_t run_seed = derive_seed(options.master_seed, {ds, size, r});
        const SplitPlan plan = sample_split(named.data, size, run_seed, label);
        const TrainingSet train = named.data.slice(plan.train_indices);
        const TrainingSet test = named.data.slice(plan.test_indices);
        for (std::size_t a = 0; a < approaches.size(); ++a) {
          const auto predicted = approaches[a].fit_predict(train, test.features, run_seed);
          mres[r][a] = mre(test.targets, predicted);
        }
      });

      std::map<std::string, std::vector<double>> by_approach;
      for (std::size_t a = 0; a < approaches.size(); ++a) {
        auto& column = by_approach[approaches[a].name];
        for (std::size_t r = 0; r < options.repeats; ++r) {
          column.push_back(mres[r][a]);
          report.runs.push_back({approaches[a].name, named.name, label, r, mres[r][a]});
        }
      }
      if (options.repeats >= 2) {
        const RankTable ranks = scott_knott(by_approach, options.ranking);
        for (const auto& e : ranks.entries) {
          report.cells.push_back({named.name, label, size, e.approach, e.rank, e.median, e.iqr});
        }
      } else {
        for (const auto& [name, values] : by_approach) {
          report.cells.push_back({named.name, label, size, name, 1, median(values), interquartile_range(values)});
        }
      }
    }
  }
  return report;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void write_report_csv(std::ostream& out, const EvaluationReport& report) {
  out << "system,size_label,training_size,approach,rank,median_mre,iqr_mre\n";
  for (const auto& c : report.cells) {
    out << c.system << ',' << c.size_label << ',' << c.training_size << ',' << c.approach << ',' << c.rank << ','
        << fixed(c.median, 6) << ',' << fixed(c.iqr, 6) << '\n';
  }
}

void write_report_text(std::ostream& out, const EvaluationReport& report) {
  std::vector<std::array<std::string, 5>> rows;
  rows.push_back({"system", "size", "approach", "rank", "Med (IQR)"});
  for (const auto& c : report.cells) {
    rows.push_back({c.system, c.size_label + " (" + std::to_string(c.training_size) + ")", c.approach,
                    std::to_string(c.rank), fixed(c.median, 2) + " (" + fixed(c.iqr, 2) + ")"});
  }
  std::array<std::size_t, 5> width{};
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) width[k] = std::max(width[k], r[k].size());
  }
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t k = 0; k < r.size(); ++k) {
      line += r[k];
      if (k + 1 < r.size()) line += std::string(width[k] - r[k].size() + 2, ' ');
    }
    out << line << '\n';
  }
}

void write_runs_csv(std::ostream& out, const EvaluationReport& report) {
  out << "system,size_label,approach,run,mre_percent\n";
  for (const auto& r : report.runs) {
    out << r.system << ',' << r.size_label << ',' << r.approach << ',' << r.run_index << ',' << fixed(r.mre_percent, 9)
        << '\n';
  }
}

}  // namespace dal
