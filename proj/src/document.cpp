#include "dal/document.hpp"

#include <charconv>
#include <cmath>

#include "dal/dataset.hpp"
#include "dal/error.hpp"

namespace dal {

std::string DocumentReader::word() {
  std::string w;
  if (!(in_ >> w)) throw Error(ErrorCode::CorruptDocument, "document ends unexpectedly");
  return w;
}

void DocumentReader::expect(std::string_view keyword) {
  std::string w = word();
  if (w != keyword) {
    throw Error(ErrorCode::CorruptDocument, "expected '" + std::string(keyword) + "', found '" + w + "'");
  }
}

double DocumentReader::real() {
  std::string w = word();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
  if (ec != std::errc() || ptr != w.data() + w.size()) {
    throw Error(ErrorCode::CorruptDocument, "expected a real number, found '" + w + "'");
  }
  return v;
}

std::uint64_t DocumentReader::unsigned_integer() {
  std::string w = word();
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
  if (ec != std::errc() || ptr != w.data() + w.size()) {
    throw Error(ErrorCode::CorruptDocument, "expected an unsigned integer, found '" + w + "'");
  }
  return v;
}

std::size_t DocumentReader::count() { return static_cast<std::size_t>(unsigned_integer()); }

std::int64_t DocumentReader::integer() {
  std::string w = word();
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
  if (ec != std::errc() || ptr != w.data() + w.size()) {
    throw Error(ErrorCode::CorruptDocument, "expected an integer, found '" + w + "'");
  }
  return v;
}

bool DocumentReader::at_end() {
  in_ >> std::ws;
  return in_.eof();
}

void write_real(std::ostream& out, double value) { out << format_real(value); }

}  // namespace dal
