#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dal {

using Row = std::vector<double>;

enum class OptionKind { Binary, Numeric };
enum class SystemKind { Binary, Mixed };

struct OptionMeta {
  std::string name;
  OptionKind kind = OptionKind::Numeric;
  double observed_min = 0.0;
  double observed_max = 0.0;

  bool operator==(const OptionMeta&) const = default;
};

struct ConfigSample {
  Row options;
  double performance = 0.0;

  bool operator==(const ConfigSample&) const = default;
};

/// Samples restricted to a subset of a dataset, in the order of the
/// selecting indices. This is what every learner consumes.
struct TrainingSet {
  std::vector<OptionMeta> options;
  std::vector<Row> features;
  std::vector<double> targets;

  std::size_t size() const { return targets.size(); }
  std::size_t option_count() const { return options.size(); }
  std::vector<bool> binary_mask() const;
};

class Dataset {
 public:
  Dataset() = default;
  /// Validates samples and infers option metadata. Throws on duplicates,
  /// non-positive or non-finite performance, or ragged rows.
  Dataset(std::vector<std::string> option_names, std::vector<ConfigSample> samples);

  const std::vector<OptionMeta>& option_meta() const { return options_; }
  const std::vector<ConfigSample>& samples() const { return samples_; }
  SystemKind system_kind() const { return kind_; }
  std::size_t option_count() const { return options_.size(); }
  std::size_t size() const { return samples_.size(); }
  std::vector<std::string> option_names() const;

  TrainingSet slice(std::span<const std::size_t> indices) const;
  TrainingSet all() const;

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<OptionMeta> options_;
  std::vector<ConfigSample> samples_;
  SystemKind kind_ = SystemKind::Binary;
};

Dataset load_dataset(const std::filesystem::path& path);
Dataset read_dataset(std::istream& in, const std::string& source = "<stream>");
void write_dataset(std::ostream& out, const Dataset& dataset);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);

/// Header and option rows of a query file (options only, no performance).
struct QueryTable {
  std::vector<std::string> header;
  std::vector<Row> rows;
};
QueryTable load_query(const std::filesystem::path& path);

enum class SizeTier { S1 = 1, S2, S3, S4, S5 };

std::optional<SizeTier> parse_tier(std::string_view label);
std::string tier_label(SizeTier tier);

using MixedSizeTable = std::map<SizeTier, std::size_t>;

/// Training size for a tier: k * option_count for binary systems, the
/// configured table entry for mixed ones.
std::size_t training_size(const Dataset& dataset, SizeTier tier,
                          const MixedSizeTable* mixed_sizes = nullptr);

struct SplitPlan {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::uint64_t seed = 0;
  std::string size_label;

  bool operator==(const SplitPlan&) const = default;
};

/// Uniform random subset of `size` training indices drawn without
/// replacement; the remainder forms the test set. Both lists are sorted.
SplitPlan sample_split(const Dataset& dataset, std::size_t size, std::uint64_t seed,
                       std::string size_label = {});

std::string format_real(double value);

}  // namespace dal
