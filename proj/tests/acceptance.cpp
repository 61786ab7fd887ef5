// Acceptance suite: one line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <unistd.h>

#include "cli_runner.hpp"
#include "dal/assign.hpp"
#include "dal/depth_adapt.hpp"
#include "dal/evaluation.hpp"
#include "dal/parallel.hpp"
#include "dal/pipeline.hpp"
#include "dal/synth.hpp"
#include "support.hpp"

using namespace dal;
using namespace dal::testing;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition && ok) {
      ok = false;
      detail = what;
    }
  }
};

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

std::string fmt(double v, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

Outcome mu_hv_arithmetic() {
  Outcome o;
  const ReferencePoint unit{1.0, 0.0};
  auto from_areas = [](std::initializer_list<double> areas) {
    std::vector<ObjectivePoint> pts;
    for (double a : areas) pts.push_back({0.0, -a});
    return pts;
  };
  const double d1 = mu_hv(from_areas({83951.55, 18216.65}), unit);
  const double d2 = mu_hv(from_areas({131212.91, 30873.60, 5862.67, 1014.70}), unit);
  o.require(std::abs(d1 - 51084.10) <= 0.005, "d=1 mean " + fmt(d1, 12));
  o.require(std::abs(d2 - 42240.97) <= 0.005, "d=2 mean " + fmt(d2, 12));

  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> h(0.0, 5e4);
  std::uniform_int_distribution<int> n(1, 200), k(1, 16);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<ObjectivePoint> pts(k(rng));
    for (auto& p : pts) p = {h(rng), -double(n(rng))};
    const ReferencePoint ref = nadir_reference(pts);
    long double total = 0.0L;
    for (const auto& p : pts) total += ((long double)ref.h - p.h) * ((long double)ref.z - p.z);
    worst = std::max(worst, rel_diff(mu_hv(pts, ref), double(total / pts.size())));
  }
  o.require(worst <= 1e-9, "oracle relative gap " + fmt(worst));
  if (o.ok) o.detail = "51084.10 / 42240.97 reproduced; oracle gap " + fmt(worst, 2);
  return o;
}

Outcome depth_selection() {
  Outcome o;
  const std::vector<DepthScore> scores{{1, 56411.36, 2}, {2, 118013.45, 3}, {3, 54755.69, 5}, {4, 33827.60, 8}};
  const std::size_t d = scores[select_depth(scores)].d;
  o.require(d == 2, "selected d=" + std::to_string(d));
  if (o.ok) o.detail = "d=2 selected";
  return o;
}

Outcome split_optimality() {
  Outcome o;
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<std::size_t> n(8, 50), p(1, 6);
  std::size_t splits = 0;
  for (int ds = 0; ds < 50; ++ds) {
    const RandomData data = random_set(rng, n(rng), p(rng));
    const CartTree tree = train_cart(data.features, data.targets);
    for (const auto& node : tree.nodes()) {
      const std::vector<std::size_t> idx(node.sample_indices.begin(), node.sample_indices.end());
      const auto oracle = brute_force_split(data.features, data.targets, idx, 2);
      if (node.is_leaf()) {
        const bool pure = subset_mse(data.targets, idx) == 0.0;
        o.require(!oracle || pure || idx.size() < 4, "leaf left a valid split unexplored");
        continue;
      }
      ++splits;
      o.require(oracle.has_value(), "split where enumeration finds none");
      if (!oracle) continue;
      const long double chosen =
          oracle_split_loss(data.features, data.targets, idx, node.split->option_index, node.split->threshold);
      o.require(chosen == oracle->loss, "dataset " + std::to_string(ds) + ": loss above the minimum");
    }
  }
  if (o.ok) o.detail = std::to_string(splits) + " splits at the exhaustive minimum";
  return o;
}

Outcome division_bounds() {
  Outcome o;
  std::mt19937_64 rng(404);
  std::size_t checked = 0;
  for (int t = 0; t < 30; ++t) {
    const RandomData data = random_set(rng, 60, 5);
    const CartTree tree = train_cart(data.features, data.targets);
    for (std::size_t d = 1; d <= tree.max_depth(); ++d) {
      const std::size_t min_samples = 2 + t % 4;
      const DivisionSet set = extract_divisions(tree, d, min_samples);
      ++checked;
      o.require(set.premerge_count >= d + 1 && set.premerge_count <= (std::size_t{1} << d),
                "pre-merge count " + std::to_string(set.premerge_count) + " at d=" + std::to_string(d));
      for (const auto& div : set.divisions) {
        o.require(div.sample_indices.size() >= min_samples, "division below min_samples");
      }
    }
  }
  if (o.ok) o.detail = std::to_string(checked) + " (tree, d) pairs within [d+1, 2^d]";
  return o;
}

TrainingSet bimodal_train(std::uint64_t seed, std::size_t size, std::vector<Row>* test = nullptr) {
  const auto g = generate(bimodal_spec(seed), 1000);
  const SplitPlan plan = sample_split(g.dataset, size, seed);
  if (test) {
    for (auto i : plan.test_indices) test->push_back(g.dataset.samples()[i].options);
  }
  return g.dataset.slice(plan.train_indices);
}

Outcome depth_zero() {
  Outcome o;
  std::vector<Row> test;
  const TrainingSet train = bimodal_train(5, 150, &test);
  for (const auto& spec : {LocalModelSpec::linear(), LocalModelSpec::cart_local(), LocalModelSpec::regularized_net()}) {
    FitOptions options;
    options.seed = 55;
    options.d_override = 0;
    const DalModel model = fit(train, spec, options);
    const auto lone = train_local(train, spec, 55);
    bool same = true;
    for (const auto& row : test) same = same && predict(model, row) == predict_local(lone, row);
    for (const auto& row : train.features) same = same && predict(model, row) == predict_local(lone, row);
    o.require(same, to_string(spec.kind) + " differs from the lone model");
  }
  if (o.ok) o.detail = "linear, cart, net bitwise equal";
  return o;
}

Outcome division_isolation() {
  Outcome o;
  std::vector<Row> test;
  TrainingSet train = bimodal_train(6, 300, &test);
  for (const auto& spec : {LocalModelSpec::linear(), LocalModelSpec::cart_local()}) {
    FitOptions options;
    options.seed = 66;
    options.d_override = 2;
    const DalModel model = fit(train, spec, options);
    const std::size_t k = model.divisions.divisions.size();
    o.require(k >= 2, "need at least two divisions");
    if (k < 2) break;
    for (std::size_t target = 0; target < k; ++target) {
      DalModel changed = model;
      const Division& div = model.divisions.divisions[target];
      std::vector<Row> x;
      std::vector<double> y;
      for (auto i : div.sample_indices) {
        x.push_back(train.features[i]);
        y.push_back(train.targets[i] * 1.7 + 13.0);
      }
      changed.local_models[target] = train_local(x, y, spec, division_seed(options.seed, target));
      o.require(!(changed.local_models[target] == model.local_models[target]), "perturbation had no effect");
      std::size_t others = 0;
      for (const auto& row : test) {
        if (assign_division(model.classifier, row) == target) continue;
        ++others;
        o.require(predict(changed, row) == predict(model, row), "another division's prediction moved");
      }
      o.require(others > 0, "no test rows outside the perturbed division");
    }
  }
  if (o.ok) o.detail = "untouched divisions bitwise stable";
  return o;
}

Outcome metric_oracles() {
  Outcome o;
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> u(0.01, 1e4);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> a(1 + t % 97), p(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = u(rng);
      p[i] = u(rng);
    }
    long double acc = 0.0L;
    for (std::size_t i = a.size(); i-- > 0;) acc += std::fabs((long double)a[i] - p[i]) / a[i];
    worst = std::max(worst, rel_diff(mre(a, p), double(100.0L * acc / a.size())));
  }
  o.require(worst <= 1e-9, "mre oracle gap " + fmt(worst));

  const std::vector<double> x{1, 2, 3}, y{2, 3, 4};
  double enumerated = 0.0;
  for (double a : x) {
    for (double b : y) enumerated += a > b ? 1.0 : a == b ? 0.5 : 0.0;
  }
  enumerated /= 9.0;
  const double value = a12(x, y);
  o.require(value == enumerated, "a12 " + fmt(value) + " vs enumeration " + fmt(enumerated));
  o.require(value == 2.0 / 9.0, "a12 " + fmt(value) + " is not 2/9");

  const std::vector<double> base_a{120, 33, 4.5, 980}, base_p{100, 40, 4.4, 1000};
  const double reference = mre(base_a, base_p);
  for (int t = 0; t < 100; ++t) {
    const double c = std::exp(std::uniform_real_distribution<double>(-20, 20)(rng));
    std::vector<double> ca(base_a), cp(base_p);
    for (auto& v : ca) v *= c;
    for (auto& v : cp) v *= c;
    o.require(rel_diff(mre(ca, cp), reference) <= 1e-12, "scale invariance broken at c=" + fmt(c));
  }
  if (o.ok) o.detail = "mre gap " + fmt(worst, 2) + "; a12 = 2/9 by pair enumeration (P(x>y)+0.5P(x=y))";
  return o;
}

Outcome scott_knott_ranks() {
  Outcome o;
  auto sample = [](std::mt19937_64& rng, double mu) {
    std::normal_distribution<double> dist(mu, 0.05);
    std::vector<double> v(30);
    for (auto& x : v) x = dist(rng);
    return v;
  };
  std::mt19937_64 rng(808);
  const RankTable table = scott_knott({{"mu3", sample(rng, 3)}, {"mu1", sample(rng, 1)}, {"mu2", sample(rng, 2)}});
  o.require(table.at("mu1").rank == 1 && table.at("mu2").rank == 2 && table.at("mu3").rank == 3,
            "separated groups not ranked 1/2/3");
  int single = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    std::mt19937_64 g(9000 + trial);
    ScottKnottOptions options;
    options.seed = trial;
    single += scott_knott({{"a", sample(g, 2)}, {"b", sample(g, 2)}, {"c", sample(g, 2)}}, options).rank_count() == 1;
  }
  o.require(single >= 95, std::to_string(single) + "/100 single-rank trials");
  if (o.ok) o.detail = "ranks 1/2/3; identical groups one rank in " + std::to_string(single) + "/100";
  return o;
}

Outcome smote_contract() {
  Outcome o;
  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::uniform_int_distribution<int> bit(0, 1);
  PseudoLabeledSet set;
  set.class_count = 2;
  for (int i = 0; i < 18; ++i) {
    set.features.push_back({double(bit(rng)), u(rng), double(bit(rng)), std::round(u(rng))});
    set.labels.push_back(i < 14 ? 0 : 1);
  }
  const std::vector<bool> binary{true, false, true, false};
  const BalancedSet out = smote_balance(set, binary, 5, 17);
  o.require(out.class_counts() == std::vector<std::size_t>{14, 14}, "class sizes not (14, 14)");
  for (const auto& s : out.synthetic) {
    const Row& r = out.features[s.row];
    const Row& a = set.features[s.base];
    const Row& b = set.features[s.neighbor];
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (binary[j]) {
        o.require(r[j] == 0.0 || r[j] == 1.0, "binary feature left {0,1}");
      } else {
        o.require(r[j] >= std::min(a[j], b[j]) && r[j] <= std::max(a[j], b[j]), "numeric feature off the segment");
      }
    }
  }
  if (o.ok) o.detail = "(14, 4) -> (14, 14); " + std::to_string(out.synthetic.size()) + " synthetic rows on segments";
  return o;
}

Outcome end_to_end() {
  Outcome o;
  const auto g = generate(bimodal_spec(2024), 1000);
  const LocalModelSpec spec = LocalModelSpec::linear();
  std::mutex guard;
  std::vector<std::size_t> chosen;
  auto dal_linear = [&](const TrainingSet& train, const std::vector<Row>& test, std::uint64_t seed) {
    FitOptions options;
    options.seed = seed;
    const DalModel model = fit(train, spec, options);
    {
      std::lock_guard lock(guard);
      chosen.push_back(model.chosen_d);
    }
    std::vector<double> out;
    for (const auto& row : test) out.push_back(predict(model, row));
    return out;
  };
  auto global_linear = [&](const TrainingSet& train, const std::vector<Row>& test, std::uint64_t seed) {
    const auto model = train_local(train, spec, seed);
    std::vector<double> out;
    for (const auto& row : test) out.push_back(predict_local(model, row));
    return out;
  };
  ExperimentOptions options;
  options.explicit_size = 300;
  options.repeats = 30;
  options.master_seed = 7;
  options.jobs = default_jobs();
  const auto report = run_experiment({{"bimodal", g.dataset, {}}}, {{"dal", dal_linear}, {"global", global_linear}}, options);
  double dal_median = 0.0, global_median = 0.0;
  for (const auto& c : report.cells) (c.approach == "dal" ? dal_median : global_median) = c.median;
  const auto deep = std::count_if(chosen.begin(), chosen.end(), [](std::size_t d) { return d >= 1; });
  o.require(dal_median < global_median, "median MRE " + fmt(dal_median) + " vs " + fmt(global_median));
  o.require(chosen.size() == 30 && deep >= 25, "d>=1 in " + std::to_string(deep) + "/30 runs");
  if (o.ok) {
    o.detail = "median MRE " + fmt(dal_median, 4) + "% vs " + fmt(global_median, 4) + "%; d>=1 in " +
               std::to_string(deep) + "/30";
  }
  return o;
}

Outcome cli_determinism() {
  Outcome o;
  ScratchDir dir("acceptance");
  auto ok = [&](const std::string& args) {
    const auto r = run_dal(args, dir);
    o.require(r.status == 0, "dal " + args + " exited " + std::to_string(r.status) + ": " + r.err);
  };
  ok("synth --seed 5 --samples 600 --out " + dir / "data.csv");
  const std::string fit = "fit --data " + dir / "data.csv" + " --size 200 --model net --seed 3 --out ";
  ok(fit + dir / "one.dal");
  ok(fit + dir / "two.dal");
  o.require(slurp(dir / "one.dal") == slurp(dir / "two.dal"), "model files differ");
  const std::string exp = "experiment --data " + dir / "data.csv" +
                          " --approaches dal-linear,global-linear,dal-cart --size 100 --repeats 10 --seed 9 --out ";
  ok(exp + dir / "r1.csv --text " + dir / "r1.txt");
  ok(exp + dir / "r2.csv --text " + dir / "r2.txt");
  o.require(slurp(dir / "r1.csv") == slurp(dir / "r2.csv"), "CSV reports differ");
  o.require(slurp(dir / "r1.txt") == slurp(dir / "r2.txt"), "text reports differ");
  o.require(!slurp(dir / "one.dal").empty() && !slurp(dir / "r1.csv").empty(), "empty outputs");
  if (o.ok) o.detail = "model files and reports byte-identical";
  return o;
}

Outcome gradient_check() {
  Outcome o;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) worst = std::max(worst, net_gradient_error(1200 + seed, 1e-5));
  o.require(worst < 1e-4, "max relative error " + fmt(worst));
  if (o.ok) o.detail = "max relative error " + fmt(worst, 2);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "mu-HV arithmetic", 1.0, mu_hv_arithmetic},
      {2, "depth selection", 1.0, depth_selection},
      {3, "CART split optimality", 10.0, split_optimality},
      {4, "division-count bound", 5.0, division_bounds},
      {5, "d=0 degeneration", 30.0, depth_zero},
      {6, "division isolation", 10.0, division_isolation},
      {7, "MRE and A12 oracles", 2.0, metric_oracles},
      {8, "Scott-Knott ranking", 30.0, scott_knott_ranks},
      {9, "SMOTE contract", 1.0, smote_contract},
      {10, "end-to-end bimodal landscape", 120.0, end_to_end},
      {11, "CLI determinism", 120.0, cli_determinism},
      {12, "network gradient check", 10.0, gradient_check},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (outcome.ok && seconds > c.limit_seconds) {
      outcome = {false, "took " + fmt(seconds, 3) + " s"};
    }
    failures += !outcome.ok;
    std::printf("%s criterion %2d  %-30s %7.2f s (limit %g s)  %s\n", outcome.ok ? "PASS" : "FAIL", c.id, c.name,
                seconds, c.limit_seconds, outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
