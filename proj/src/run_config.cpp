#include "dal/run_config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "dal/error.hpp"

namespace dal {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <class T>
T parse_unsigned(std::string_view value, const std::string& where) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw Error(ErrorCode::InvalidConfig, where + ": expected a non-negative integer, got '" + std::string(value) + "'");
  }
  return out;
}

MixedSizeTable parse_size_table(std::string_view value, const std::string& where) {
  if (value.size() < 2 || value.front() != '{' || value.back() != '}') {
    throw Error(ErrorCode::InvalidConfig, where + ": mixed_sizes must look like {S1: 10, S2: 20}");
  }
  value = value.substr(1, value.size() - 2);
  MixedSizeTable table;
  while (!value.empty()) {
    std::size_t comma = value.find(',');
    std::string_view entry = trim(value.substr(0, comma));
    value = comma == std::string_view::npos ? std::string_view{} : value.substr(comma + 1);
    if (entry.empty()) continue;
    std::size_t colon = entry.find(':');
    if (colon == std::string_view::npos) throw Error(ErrorCode::InvalidConfig, where + ": missing ':' in mixed_sizes entry");
    auto tier = parse_tier(trim(entry.substr(0, colon)));
    if (!tier) throw Error(ErrorCode::InvalidConfig, where + ": unknown tier '" + std::string(entry.substr(0, colon)) + "'");
    table[*tier] = parse_unsigned<std::size_t>(trim(entry.substr(colon + 1)), where);
  }
  return table;
}

}  // namespace

RunConfigFile parse_run_config(std::string_view text, const std::string& source) {
  RunConfigFile config;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    auto eq = view.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorCode::InvalidConfig, where + ": expected key = value");
    auto key = trim(view.substr(0, eq));
    auto value = trim(view.substr(eq + 1));
    if (key == "mixed_sizes") {
      config.mixed_sizes = parse_size_table(value, where);
    } else if (key == "seed") {
      config.seed = parse_unsigned<std::uint64_t>(value, where);
    } else if (key == "repeats") {
      config.repeats = parse_unsigned<std::size_t>(value, where);
    } else if (key == "model") {
      config.model = std::string(value);
    } else {
      throw Error(ErrorCode::InvalidConfig, where + ": unknown key '" + std::string(key) + "'");
    }
  }
  return config;
}

RunConfigFile load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path.string());
}

}  // namespace dal
