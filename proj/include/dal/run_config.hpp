#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "dal/dataset.hpp"

namespace dal {

/// Keys read from a run-configuration file. Everything is optional; command
/// line flags take precedence over whatever is set here.
///
///     # comment
///     mixed_sizes = {S1: 224, S2: 692, S3: 1000, S4: 1365, S5: 1612}
///     seed = 7
///     repeats = 30
///     model = linear
struct RunConfigFile {
  MixedSizeTable mixed_sizes;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> repeats;
  std::optional<std::string> model;
};

RunConfigFile parse_run_config(std::string_view text, const std::string& source = "<config>");
RunConfigFile load_run_config(const std::filesystem::path& path);

}  // namespace dal
