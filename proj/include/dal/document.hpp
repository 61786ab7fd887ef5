#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

namespace dal {

/// Whitespace-separated token stream used by the model documents. Reals are
/// written with 17 significant digits so a write/read cycle is lossless.
class DocumentReader {
 public:
  explicit DocumentReader(std::istream& in) : in_(in) {}

  std::string word();
  void expect(std::string_view keyword);
  double real();
  std::size_t count();
  std::int64_t integer();
  std::uint64_t unsigned_integer();
  bool at_end();

 private:
  std::istream& in_;
};

void write_real(std::ostream& out, double value);

}  // namespace dal
