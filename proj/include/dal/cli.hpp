#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dal/depth_adapt.hpp"
#include "dal/evaluation.hpp"
#include "dal/local_models.hpp"

namespace dal {

/// Entry point of the `dal` tool. Returns the process exit status:
/// 0 success, 1 internal error, 2 configuration error, 3 data error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Built-in approaches for experiments:
///   dal, global              local model kind taken from `default_kind`
///   dal-<kind>, global-<kind> with kind in {linear, cart, net}
///   dal-d0                   divide-and-learn with the depth forced to 0
std::optional<Approach> make_builtin_approach(const std::string& name, LocalModelKind default_kind);

enum class TableFormat { Csv, Text };

void write_depth_table(std::ostream& out, std::span<const DepthScore> scores, std::size_t chosen, TableFormat format);

}  // namespace dal
