#include "dal/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "dal/dataset.hpp"
#include "dal/error.hpp"
#include "dal/parallel.hpp"
#include "dal/pipeline.hpp"
#include "dal/run_config.hpp"
#include "dal/synth.hpp"

namespace dal {

std::optional<Approach> make_builtin_approach(const std::string& name, LocalModelKind default_kind) {
  auto build = [&](bool divided, LocalModelKind kind, std::optional<std::size_t> depth) -> Approach {
    const LocalModelSpec spec = LocalModelSpec::of_kind(kind);
    if (!divided) {
      return {name, [spec](const TrainingSet& train, const std::vector<Row>& test, std::uint64_t seed) {
                auto model = train_local(train, spec, seed);
                std::vector<double> out;
                out.reserve(test.size());
                for (const auto& row : test) out.push_back(predict_local(model, row));
                return out;
              }};
    }
    return {name, [spec, depth](const TrainingSet& train, const std::vector<Row>& test, std::uint64_t seed) {
              FitOptions options;
              options.seed = seed;
              options.d_override = depth;
              auto model = fit(train, spec, options);
              std::vector<double> out;
              out.reserve(test.size());
              for (const auto& row : test) out.push_back(predict(model, row));
              return out;
            }};
  };

  if (name == "dal") return build(true, default_kind, std::nullopt);
  if (name == "global") return build(false, default_kind, std::nullopt);
  if (name == "dal-d0") return build(true, default_kind, std::size_t{0});
  for (const std::string prefix : {"dal-", "global-"}) {
    if (name.rfind(prefix, 0) == 0) {
      auto kind = parse_local_model_kind(name.substr(prefix.size()));
      if (kind) return build(prefix == "dal-", *kind, std::nullopt);
    }
  }
  return std::nullopt;
}

void write_depth_table(std::ostream& out, std::span<const DepthScore> scores, std::size_t chosen, TableFormat format) {
  if (format == TableFormat::Csv) {
    out << "d,division_count,mu_hv,chosen\n";
    for (std::size_t i = 0; i < scores.size(); ++i) {
      out << scores[i].d << ',' << scores[i].division_count << ',' << format_real(scores[i].mu_hv) << ','
          << (i == chosen ? 1 : 0) << '\n';
    }
    return;
  }
  std::vector<std::array<std::string, 4>> rows{{"d", "divisions", "mu_hv", "chosen"}};
  for (std::size_t i = 0; i < scores.size(); ++i) {
    std::ostringstream mu;
    mu << std::fixed << std::setprecision(2) << scores[i].mu_hv;
    rows.push_back({std::to_string(scores[i].d), std::to_string(scores[i].division_count), mu.str(),
                    i == chosen ? "*" : ""});
  }
  std::array<std::size_t, 4> width{};
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < 4; ++k) width[k] = std::max(width[k], r[k].size());
  }
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t k = 0; k < 4; ++k) {
      line += std::string(width[k] - r[k].size(), ' ') + r[k];
      if (k < 3) line += "  ";
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }
}

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> model;
  std::size_t jobs = default_jobs();
  RunConfigFile config;

  void load() {
    if (!config_path.empty()) config = load_run_config(config_path);
  }
  std::uint64_t resolved_seed() const { return seed.value_or(config.seed.value_or(0)); }
  LocalModelSpec resolved_spec() const {
    const std::string name = model.value_or(config.model.value_or("linear"));
    auto kind = parse_local_model_kind(name);
    if (!kind) throw Error(ErrorCode::InvalidConfig, "unknown local model '" + name + "' (expected linear, cart or net)");
    return LocalModelSpec::of_kind(*kind);
  }
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "Run-configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags.seed, "Random seed");
  cmd->add_option("--model", flags.model, "Local model: linear, cart or net");
  cmd->add_option("--jobs", flags.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

struct SizeFlags {
  std::optional<std::size_t> size;
  std::optional<std::string> tier;
};

void add_size(CLI::App* cmd, SizeFlags& flags) {
  auto* size = cmd->add_option("--size", flags.size, "Explicit training sample count");
  auto* tier = cmd->add_option("--tier", flags.tier, "Training size tier S1..S5");
  size->excludes(tier);
}

std::size_t resolve_size(const SizeFlags& flags, const Dataset& data, const RunConfigFile& config) {
  if (flags.size) return *flags.size;
  if (!flags.tier) throw Error(ErrorCode::InvalidConfig, "one of --size or --tier is required");
  auto tier = parse_tier(*flags.tier);
  if (!tier) throw Error(ErrorCode::InvalidConfig, "unknown tier '" + *flags.tier + "'");
  return training_size(data, *tier, config.mixed_sizes.empty() ? nullptr : &config.mixed_sizes);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  return out;
}

struct FitCommand {
  std::string data;
  std::string out_path;
  std::optional<std::size_t> depth;
  SizeFlags size;
  CommonFlags common;

  int run(std::ostream& out, std::ostream& err) {
    common.load();
    const Dataset dataset = load_dataset(data);
    const std::size_t n = resolve_size(size, dataset, common.config);
    const std::uint64_t seed = common.resolved_seed();
    const SplitPlan plan = sample_split(dataset, n, seed);
    FitOptions options;
    options.seed = seed;
    options.d_override = depth;
    options.jobs = common.jobs;
    err << "fitting on " << plan.train_indices.size() << " of " << dataset.size() << " samples\n";
    const DalModel model = fit(dataset.slice(plan.train_indices), common.resolved_spec(), options);
    {
      auto file = open_output(out_path);
      write_model(file, model);
    }
    out << "d=" << model.chosen_d << ", divisions=" << model.divisions.divisions.size() << '\n';
    for (const auto& div : model.divisions.divisions) {
      out << "division " << div.label << ": size=" << div.sample_indices.size() << " h=" << format_real(div.h)
          << " z=" << format_real(div.z) << '\n';
    }
    return 0;
  }
};

struct PredictCommand {
  std::string model_path;
  std::string query_path;
  std::string out_path;

  int run(std::ostream& out, std::ostream&) {
    const DalModel model = load_model(model_path);
    const QueryTable query = load_query(query_path);
    if (query.header != model.option_names) {
      throw Error(ErrorCode::DimensionMismatch, "query columns do not match the model's options (expected " +
                                                    std::to_string(model.option_names.size()) + " option columns)");
    }
    std::ostringstream buffer;
    for (const auto& h : query.header) buffer << h << ',';
    buffer << "predicted\n";
    for (const auto& row : query.rows) {
      for (double v : row) buffer << format_real(v) << ',';
      buffer << format_real(predict(model, row)) << '\n';
    }
    if (out_path.empty()) {
      out << buffer.str();
    } else {
      auto file = open_output(out_path);
      file << buffer.str();
    }
    return 0;
  }
};

struct AdaptCommand {
  std::string data;
  std::string format = "text";
  SizeFlags size;
  CommonFlags common;

  int run(std::ostream& out, std::ostream&) {
    common.load();
    const Dataset dataset = load_dataset(data);
    TrainingSet train;
    if (size.size || size.tier) {
      const SplitPlan plan = sample_split(dataset, resolve_size(size, dataset, common.config), common.resolved_seed());
      train = dataset.slice(plan.train_indices);
    } else {
      train = dataset.all();
    }
    const auto spec = common.resolved_spec();
    const CartTree tree = train_cart(train);
    const DepthAdaptation adaptation = adapt_depth(tree, train.targets, spec.min_samples);
    const TableFormat fmt = format == "csv" ? TableFormat::Csv : TableFormat::Text;
    write_depth_table(out, adaptation.scores, adaptation.chosen, fmt);
    if (tree.max_depth() == 0) out << "# tree has no splits\n";
    return 0;
  }
};

struct ExperimentCommand {
  std::vector<std::string> data;
  std::string approaches = "dal,global";
  std::string tiers = "S1";
  std::optional<std::size_t> explicit_size;
  std::optional<std::size_t> repeats;
  std::string out_path;
  std::string text_path;
  std::string runs_path;
  CommonFlags common;

  int run(std::ostream& out, std::ostream& err) {
    common.load();
    ExperimentOptions options;
    options.repeats = repeats.value_or(common.config.repeats.value_or(30));
    options.master_seed = common.resolved_seed();
    options.jobs = common.jobs;
    options.explicit_size = explicit_size;
    std::stringstream tier_list(tiers);
    for (std::string item; std::getline(tier_list, item, ',');) {
      auto tier = parse_tier(item);
      if (!tier) throw Error(ErrorCode::InvalidConfig, "unknown tier '" + item + "'");
      options.tiers.push_back(*tier);
    }

    const LocalModelKind kind = common.resolved_spec().kind;
    std::vector<Approach> list;
    std::stringstream approach_list(approaches);
    for (std::string item; std::getline(approach_list, item, ',');) {
      auto approach = make_builtin_approach(item, kind);
      if (!approach) throw Error(ErrorCode::InvalidConfig, "unknown approach '" + item + "'");
      list.push_back(std::move(*approach));
    }

    std::vector<NamedDataset> datasets;
    for (const auto& path : data) {
      datasets.push_back({std::filesystem::path(path).stem().string(), load_dataset(path), common.config.mixed_sizes});
    }
    err << "running " << options.repeats << " repeats over " << datasets.size() << " dataset(s)\n";
    const EvaluationReport report = run_experiment(datasets, list, options);

    if (!out_path.empty()) {
      auto file = open_output(out_path);
      write_report_csv(file, report);
    }
    if (!text_path.empty()) {
      auto file = open_output(text_path);
      write_report_text(file, report);
    }
    if (!runs_path.empty()) {
      auto file = open_output(runs_path);
      write_runs_csv(file, report);
    }
    if (out_path.empty()) write_report_text(out, report);
    return 0;
  }
};

struct SynthCommand {
  std::size_t modes = 2;
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  double spread_fraction = 0.02;
  std::string out_path;

  int run(std::ostream& out, std::ostream&) {
    LandscapeSpec spec = bimodal_spec(seed);
    spec.mode_count = modes;
    const std::size_t bits = selector_bits(modes);
    spec.binary_count = bits + 2;
    spec.inert_option_count = 4;
    spec.option_count = bits + 2 + spec.inert_option_count;
    spec.mode_base.clear();
    spec.mode_spread.clear();
    for (std::size_t m = 0; m < modes; ++m) {
      spec.mode_base.push_back(1000.0 + 4000.0 * static_cast<double>(m));
      spec.mode_spread.push_back(spread_fraction * 4000.0);
    }
    const auto generated = generate(spec, samples);
    if (out_path.empty()) {
      write_dataset(out, generated.dataset);
    } else {
      save_dataset(out_path, generated.dataset);
    }
    return 0;
  }
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Divide-and-learn configuration performance modeling"};
  app.name("dal");
  app.require_subcommand(1);

  FitCommand fit_cmd;
  auto* fit_app = app.add_subcommand("fit", "Train a model and write it to a file");
  fit_app->add_option("--data", fit_cmd.data, "Dataset CSV")->required();
  fit_app->add_option("--out", fit_cmd.out_path, "Model file to write")->required();
  fit_app->add_option("--depth", fit_cmd.depth, "Fix the division depth instead of adapting it");
  add_size(fit_app, fit_cmd.size);
  add_common(fit_app, fit_cmd.common);

  PredictCommand predict_cmd;
  auto* predict_app = app.add_subcommand("predict", "Predict performance for configurations in a CSV");
  predict_app->add_option("--model-file", predict_cmd.model_path, "Model written by fit")->required();
  predict_app->add_option("--query", predict_cmd.query_path, "CSV of options (same header as training)")->required();
  predict_app->add_option("--out", predict_cmd.out_path, "Output CSV (default: standard output)");

  AdaptCommand adapt_cmd;
  auto* adapt_app = app.add_subcommand("adapt", "Show the averaged hypervolume for every candidate depth");
  adapt_app->add_option("--data", adapt_cmd.data, "Dataset CSV")->required();
  adapt_app->add_option("--format", adapt_cmd.format, "csv or text")->check(CLI::IsMember({"csv", "text"}));
  add_size(adapt_app, adapt_cmd.size);
  add_common(adapt_app, adapt_cmd.common);

  ExperimentCommand exp_cmd;
  auto* exp_app = app.add_subcommand("experiment", "Repeated train/test evaluation with Scott-Knott ranking");
  exp_app->add_option("--data", exp_cmd.data, "Dataset CSV (repeatable)")->required();
  exp_app->add_option("--approaches", exp_cmd.approaches, "Comma-separated approaches");
  exp_app->add_option("--tiers", exp_cmd.tiers, "Comma-separated tiers S1..S5");
  exp_app->add_option("--size", exp_cmd.explicit_size, "Explicit training size (replaces tiers)");
  exp_app->add_option("--repeats", exp_cmd.repeats, "Runs per cell (default 30)")->check(CLI::PositiveNumber);
  exp_app->add_option("--out", exp_cmd.out_path, "Report CSV");
  exp_app->add_option("--text", exp_cmd.text_path, "Aligned-text report");
  exp_app->add_option("--runs", exp_cmd.runs_path, "Per-run MRE CSV");
  add_common(exp_app, exp_cmd.common);

  SynthCommand synth_cmd;
  auto* synth_app = app.add_subcommand("synth", "Generate a synthetic multimodal landscape");
  synth_app->add_option("--modes", synth_cmd.modes, "Number of modes")->check(CLI::Range(2, 64));
  synth_app->add_option("--samples", synth_cmd.samples, "Number of configurations");
  synth_app->add_option("--seed", synth_cmd.seed, "Random seed");
  synth_app->add_option("--spread-fraction", synth_cmd.spread_fraction, "Noise spread as a fraction of the mode gap")
      ->check(CLI::Range(0.0, 0.1));
  synth_app->add_option("--out", synth_cmd.out_path, "Output CSV (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error:" << to_string(ErrorCode::InvalidConfig) << ": " << e.what() << '\n';
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return exit_status(ErrorCode::InvalidConfig);
  }

  try {
    if (*fit_app) return fit_cmd.run(out, err);
    if (*predict_app) return predict_cmd.run(out, err);
    if (*adapt_app) return adapt_cmd.run(out, err);
    if (*exp_app) return exp_cmd.run(out, err);
    if (*synth_app) return synth_cmd.run(out, err);
  } catch (const Error& e) {
    err << "error:" << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_status(e.code());
  } catch (const std::exception& e) {
    err << "error:Internal: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace dal
