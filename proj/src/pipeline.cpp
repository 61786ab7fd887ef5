#include "dal/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <ostream>
#include <sstream>

#include "dal/document.hpp"
#include "dal/error.hpp"
#include "dal/parallel.hpp"

namespace dal {

namespace {

constexpr std::string_view kModelVersion = "1";

std::string encode_name(const std::string& name) {
  if (name.empty()) return "%";
  std::string out;
  for (char c : name) {
    if (c == '%' || std::isspace(static_cast<unsigned char>(c))) {
      static constexpr char hex[] = "0123456789ABCDEF";
      out += '%';
      out += hex[(static_cast<unsigned char>(c) >> 4) & 0xF];
      out += hex[static_cast<unsigned char>(c) & 0xF];
    } else {
      out += c;
    }
  }
  return out;
}

std::string decode_name(const std::string& token) {
  if (token == "%") return {};
  std::string out;
  for (std::size_t i = 0; i < token.size(); ++i) {
    if (token[i] != '%') {
      out += token[i];
      continue;
    }
    if (i + 2 >= token.size()) throw Error(ErrorCode::CorruptDocument, "bad escape in name");
    try {
      out += static_cast<char>(std::stoi(token.substr(i + 1, 2), nullptr, 16));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::CorruptDocument, "bad escape in name");
    }
    i += 2;
  }
  return out;
}

}  // namespace

DalModel fit(const TrainingSet& train, const LocalModelSpec& spec, const FitOptions& options) {
  if (train.size() == 0) throw Error(ErrorCode::EmptyTrainingSet, "no training samples");
  if (train.size() < spec.min_samples) {
    throw Error(ErrorCode::InsufficientSamples, "training set of " + std::to_string(train.size()) +
                                                    " samples is smaller than the local model minimum " +
                                                    std::to_string(spec.min_samples));
  }

  DalModel model;
  model.spec = spec;
  model.seed = options.seed;
  for (const auto& o : train.options) model.option_names.push_back(o.name);

  // dividing
  model.tree = train_cart(train);
  std::size_t d = 0;
  if (options.d_override) {
    d = *options.d_override;
    if (d > model.tree.max_depth()) {
      throw Error(ErrorCode::DepthExceedsTree, "requested depth " + std::to_string(d) + " but the tree only reaches " +
                                                   std::to_string(model.tree.max_depth()));
    }
  } else {
    auto adaptation = adapt_depth(model.tree, train.targets, spec.min_samples);
    d = adaptation.best().d;
    model.depth_scores = std::move(adaptation.scores);
  }
  for (;;) {
    model.divisions = extract_divisions(model.tree, d, spec.min_samples);
    const bool all_fit = std::all_of(model.divisions.divisions.begin(), model.divisions.divisions.end(),
                                     [&](const Division& div) { return div.sample_indices.size() >= spec.min_samples; });
    if (all_fit) break;
    if (d == 0) throw Error(ErrorCode::InsufficientSamples, "cannot form a division large enough for the local model");
    --d;
  }
  model.chosen_d = d;

  // training: divisions are independent of each other
  const auto& divisions = model.divisions.divisions;
  model.local_models.resize(divisions.size());
  parallel_for(divisions.size(), options.jobs, [&](std::size_t k) {
    const auto& div = divisions[k];
    std::vector<Row> x;
    std::vector<double> y;
    x.reserve(div.sample_indices.size());
    y.reserve(div.sample_indices.size());
    for (std::size_t i : div.sample_indices) {
      x.push_back(train.features[i]);
      y.push_back(train.targets[i]);
    }
    model.local_models[k] = train_local(x, y, spec, division_seed(options.seed, div.label));
  });

  // predicting-phase setup
  if (divisions.size() == 1) {
    model.classifier = ForestClassifier::constant(train.option_count(), 0);
  } else {
    auto labeled = make_pseudo_labels(model.divisions, train.features);
    auto balanced = smote_balance(labeled, train.binary_mask(), options.smote_neighbors, derive_seed(options.seed, {1}));
    model.classifier = train_forest(balanced, options.forest_trees, derive_seed(options.seed, {2}), options.jobs);
  }
  return model;
}

double predict(const DalModel& model, std::span<const double> config) {
  if (config.size() != model.option_names.size()) {
    throw Error(ErrorCode::DimensionMismatch, "configuration has " + std::to_string(config.size()) +
                                                  " options, model expects " + std::to_string(model.option_names.size()));
  }
  const std::size_t label = assign_division(model.classifier, config);
  return predict_local(model.local_models.at(label), config);
}

void write_model(std::ostream& out, const DalModel& model) {
  out << "dal-model " << kModelVersion << '\n';
  out << "seed " << model.seed << '\n';
  out << "spec " << to_string(model.spec.kind) << " min_samples " << model.spec.min_samples << " params "
      << model.spec.hyperparameters.size();
  for (const auto& [key, value] : model.spec.hyperparameters) {
    out << ' ' << encode_name(key) << ' ';
    write_real(out, value);
  }
  out << '\n';
  out << "options " << model.option_names.size();
  for (const auto& name : model.option_names) out << ' ' << encode_name(name);
  out << '\n';
  model.tree.write(out);
  out << "chosen_d " << model.chosen_d << '\n';
  out << "adaptation " << model.depth_scores.size() << '\n';
  for (const auto& s : model.depth_scores) {
    out << "depth " << s.d << ' ' << s.division_count << ' ';
    write_real(out, s.mu_hv);
    out << '\n';
  }
  const auto& divs = model.divisions;
  out << "divisions " << divs.divisions.size() << " depth " << divs.depth << " premerge " << divs.premerge_count << '\n';
  for (const auto& div : divs.divisions) {
    out << "division " << div.label << " node " << div.node << " h ";
    write_real(out, div.h);
    out << " z ";
    write_real(out, div.z);
    out << " samples " << div.sample_indices.size();
    for (std::size_t i : div.sample_indices) out << ' ' << i;
    out << '\n';
  }
  for (const auto& local : model.local_models) local.write(out);
  model.classifier.write(out);
  out << "end\n";
}

DalModel read_model(std::istream& stream) {
  DocumentReader in(stream);
  in.expect("dal-model");
  const std::string version = in.word();
  if (version != kModelVersion) throw Error(ErrorCode::VersionMismatch, "model document version " + version + " is not supported");
  DalModel model;
  in.expect("seed");
  model.seed = in.unsigned_integer();
  in.expect("spec");
  const std::string kind = in.word();
  auto parsed = parse_local_model_kind(kind);
  if (!parsed) throw Error(ErrorCode::CorruptDocument, "unknown local model kind '" + kind + "'");
  model.spec.kind = *parsed;
  in.expect("min_samples");
  model.spec.min_samples = in.count();
  in.expect("params");
  const std::size_t param_count = in.count();
  for (std::size_t k = 0; k < param_count; ++k) {
    std::string key = decode_name(in.word());
    model.spec.hyperparameters[key] = in.real();
  }
  in.expect("options");
  model.option_names.resize(in.count());
  for (auto& name : model.option_names) name = decode_name(in.word());
  model.tree = CartTree::read(in);
  if (model.tree.option_count() != model.option_names.size()) throw Error(ErrorCode::CorruptDocument, "tree dimension mismatch");
  in.expect("chosen_d");
  model.chosen_d = in.count();
  in.expect("adaptation");
  model.depth_scores.resize(in.count());
  for (auto& s : model.depth_scores) {
    in.expect("depth");
    s.d = in.count();
    s.division_count = in.count();
    s.mu_hv = in.real();
  }
  in.expect("divisions");
  const std::size_t division_count = in.count();
  if (division_count == 0) throw Error(ErrorCode::CorruptDocument, "model has no divisions");
  in.expect("depth");
  model.divisions.depth = in.count();
  in.expect("premerge");
  model.divisions.premerge_count = in.count();
  model.divisions.divisions.resize(division_count);
  for (std::size_t k = 0; k < division_count; ++k) {
    auto& div = model.divisions.divisions[k];
    in.expect("division");
    div.label = in.count();
    if (div.label != k) throw Error(ErrorCode::CorruptDocument, "division labels out of order");
    in.expect("node");
    div.node = in.count();
    in.expect("h");
    div.h = in.real();
    in.expect("z");
    div.z = in.real();
    in.expect("samples");
    div.sample_indices.resize(in.count());
    for (auto& i : div.sample_indices) i = in.count();
  }
  model.local_models.reserve(division_count);
  for (std::size_t k = 0; k < division_count; ++k) {
    model.local_models.push_back(TrainedLocalModel::read(in));
    if (model.local_models.back().option_count() != model.option_names.size()) {
      throw Error(ErrorCode::CorruptDocument, "local model dimension mismatch");
    }
  }
  model.classifier = ForestClassifier::read(in);
  if (model.classifier.option_count() != model.option_names.size() || model.classifier.class_count() > division_count) {
    throw Error(ErrorCode::CorruptDocument, "classifier does not match the divisions");
  }
  in.expect("end");
  return model;
}

void save_model(const std::filesystem::path& path, const DalModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write_model(out, model);
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

DalModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read_model(in);
}

}  // namespace dal
