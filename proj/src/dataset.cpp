#include "dal/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "dal/error.hpp"
#include "dal/random.hpp"

namespace dal {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      return cells;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

bool parse_real(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size() && std::isfinite(out);
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<Row> rows;
};

CsvTable read_csv(std::istream& in, const std::string& source) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (view.empty()) continue;
    auto cells = split_commas(view);
    if (!have_header) {
      for (auto c : cells) table.header.emplace_back(c);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw Error(ErrorCode::MalformedCsv, source + ":" + std::to_string(line_no) + ": expected " +
                                               std::to_string(table.header.size()) + " cells, found " +
                                               std::to_string(cells.size()));
    }
    Row row(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!parse_real(cells[i], row[i])) {
        throw Error(ErrorCode::MalformedCsv, source + ":" + std::to_string(line_no) +
                                                 ": cannot parse '" + std::string(cells[i]) + "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw Error(ErrorCode::MalformedCsv, source + ": missing header row");
  return table;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

}  // namespace

std::string format_real(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::vector<bool> TrainingSet::binary_mask() const {
  std::vector<bool> mask(options.size());
  for (std::size_t i = 0; i < options.size(); ++i) mask[i] = options[i].kind == OptionKind::Binary;
  return mask;
}

Dataset::Dataset(std::vector<std::string> option_names, std::vector<ConfigSample> samples)
    : samples_(std::move(samples)) {
  const std::size_t n = option_names.size();
  options_.resize(n);
  for (std::size_t j = 0; j < n; ++j) options_[j].name = std::move(option_names[j]);

  std::set<Row> seen;
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (s.options.size() != n) {
      throw Error(ErrorCode::MalformedCsv, "sample " + std::to_string(i) + " has " +
                                               std::to_string(s.options.size()) + " options, expected " +
                                               std::to_string(n));
    }
    if (!std::isfinite(s.performance) || s.performance <= 0.0) {
      throw Error(ErrorCode::NonPositivePerformance,
                  "sample " + std::to_string(i) + " has performance " + format_real(s.performance));
    }
    for (double v : s.options) {
      if (!std::isfinite(v)) throw Error(ErrorCode::MalformedCsv, "non-finite option value in sample " + std::to_string(i));
    }
    if (!seen.insert(s.options).second) {
      throw Error(ErrorCode::DuplicateConfiguration, "sample " + std::to_string(i) + " repeats an earlier configuration");
    }
  }

  bool all_binary = true;
  for (std::size_t j = 0; j < n; ++j) {
    auto& meta = options_[j];
    bool binary = true;
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      double v = samples_[i].options[j];
      if (i == 0 || v < lo) lo = v;
      if (i == 0 || v > hi) hi = v;
      if (v != 0.0 && v != 1.0) binary = false;
    }
    meta.kind = binary ? OptionKind::Binary : OptionKind::Numeric;
    meta.observed_min = lo;
    meta.observed_max = hi;
    all_binary = all_binary && binary;
  }
  kind_ = all_binary ? SystemKind::Binary : SystemKind::Mixed;
}

std::vector<std::string> Dataset::option_names() const {
  std::vector<std::string> names;
  names.reserve(options_.size());
  for (const auto& o : options_) names.push_back(o.name);
  return names;
}

TrainingSet Dataset::slice(std::span<const std::size_t> indices) const {
  TrainingSet set;
  set.options = options_;
  set.features.reserve(indices.size());
  set.targets.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= samples_.size()) throw Error(ErrorCode::LengthMismatch, "sample index out of range");
    set.features.push_back(samples_[i].options);
    set.targets.push_back(samples_[i].performance);
  }
  return set;
}

TrainingSet Dataset::all() const {
  std::vector<std::size_t> idx(samples_.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return slice(idx);
}

Dataset read_dataset(std::istream& in, const std::string& source) {
  CsvTable table = read_csv(in, source);
  if (table.header.size() < 2) {
    throw Error(ErrorCode::MalformedCsv, source + ": need at least one option column and a performance column");
  }
  std::vector<std::string> names(table.header.begin(), table.header.end() - 1);
  std::vector<ConfigSample> samples;
  samples.reserve(table.rows.size());
  for (auto& row : table.rows) {
    ConfigSample s;
    s.performance = row.back();
    row.pop_back();
    s.options = std::move(row);
    samples.push_back(std::move(s));
  }
  return Dataset(std::move(names), std::move(samples));
}

Dataset load_dataset(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_dataset(in, path.string());
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  for (const auto& o : dataset.option_meta()) out << o.name << ',';
  out << "performance\n";
  for (const auto& s : dataset.samples()) {
    for (double v : s.options) out << format_real(v) << ',';
    out << format_real(s.performance) << '\n';
  }
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write_dataset(out, dataset);
}

QueryTable load_query(const std::filesystem::path& path) {
  auto in = open_input(path);
  CsvTable table = read_csv(in, path.string());
  return {std::move(table.header), std::move(table.rows)};
}

std::optional<SizeTier> parse_tier(std::string_view label) {
  if (label.size() == 2 && (label[0] == 'S' || label[0] == 's') && label[1] >= '1' && label[1] <= '5') {
    return static_cast<SizeTier>(label[1] - '0');
  }
  return std::nullopt;
}

std::string tier_label(SizeTier tier) { return "S" + std::to_string(static_cast<int>(tier)); }

std::size_t training_size(const Dataset& dataset, SizeTier tier, const MixedSizeTable* mixed_sizes) {
  if (dataset.size() == 0) throw Error(ErrorCode::EmptyTrainingSet, "dataset has no samples");
  std::size_t size = 0;
  if (dataset.system_kind() == SystemKind::Binary) {
    size = static_cast<std::size_t>(tier) * dataset.option_count();
  } else {
    if (mixed_sizes == nullptr) {
      throw Error(ErrorCode::MissingMixedSizeTable, "mixed system needs a configured size table");
    }
    auto it = mixed_sizes->find(tier);
    if (it == mixed_sizes->end()) {
      throw Error(ErrorCode::MissingMixedSizeTable, "size table has no entry for " + tier_label(tier));
    }
    size = it->second;
  }
  if (size >= dataset.size()) {
    throw Error(ErrorCode::SizeExceedsDataset, tier_label(tier) + " asks for " + std::to_string(size) +
                                                   " training samples but only " +
                                                   std::to_string(dataset.size()) + " exist");
  }
  return size;
}

SplitPlan sample_split(const Dataset& dataset, std::size_t size, std::uint64_t seed, std::string size_label) {
  const std::size_t n = dataset.size();
  if (size == 0 || size >= n) {
    throw Error(ErrorCode::SizeExceedsDataset, "training size " + std::to_string(size) +
                                                   " must lie in (0, " + std::to_string(n) + ")");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  // partial Fisher-Yates: the first `size` slots become the sample
  for (std::size_t i = 0; i < size; ++i) {
    std::size_t j = i + uniform_index(rng, n - i);
    std::swap(idx[i], idx[j]);
  }
  SplitPlan plan;
  plan.seed = seed;
  plan.size_label = std::move(size_label);
  plan.train_indices.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(size));
  plan.test_indices.assign(idx.begin() + static_cast<std::ptrdiff_t>(size), idx.end());
  std::sort(plan.train_indices.begin(), plan.train_indices.end());
  std::sort(plan.test_indices.begin(), plan.test_indices.end());
  return plan;
}

}  // namespace dal
