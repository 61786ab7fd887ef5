#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dal/assign.hpp"
#include "dal/cart.hpp"
#include "dal/dataset.hpp"
#include "dal/depth_adapt.hpp"
#include "dal/local_models.hpp"

namespace dal {

struct FitOptions {
  std::optional<std::size_t> d_override;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::size_t forest_trees = 100;
  std::size_t smote_neighbors = 5;
};

/// Everything needed to predict: the dividing tree, the divisions taken at
/// the chosen depth, one local model per division and the routing forest.
struct DalModel {
  std::vector<std::string> option_names;
  CartTree tree;
  std::size_t chosen_d = 0;
  std::vector<DepthScore> depth_scores;  // empty when the depth was fixed
  DivisionSet divisions;
  std::vector<TrainedLocalModel> local_models;  // indexed by division label
  ForestClassifier classifier;
  LocalModelSpec spec;
  std::uint64_t seed = 0;

  bool operator==(const DalModel&) const = default;
};

/// Seed handed to the local model of division `label`. Division 0 gets the
/// fit seed itself, so a depth-0 model matches a lone local model.
inline std::uint64_t division_seed(std::uint64_t seed, std::size_t label) {
  return seed ^ (static_cast<std::uint64_t>(label) * 0x9E3779B97F4A7C15ULL);
}

DalModel fit(const TrainingSet& train, const LocalModelSpec& spec, const FitOptions& options = {});

double predict(const DalModel& model, std::span<const double> config);

void write_model(std::ostream& out, const DalModel& model);
DalModel read_model(std::istream& in);
void save_model(const std::filesystem::path& path, const DalModel& model);
DalModel load_model(const std::filesystem::path& path);

}  // namespace dal
