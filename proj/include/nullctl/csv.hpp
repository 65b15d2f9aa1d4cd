#pragma once

// CSV rows with round-trip precision (17 significant digits).

#include <initializer_list>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>

namespace nullctl::csv {

using Cell = std::variant<double, long long, std::string>;

inline std::string format(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline void write_row(std::ostream& out, std::initializer_list<Cell> cells) {
  bool first = true;
  for (const Cell& c : cells) {
    if (!first) out << ',';
    first = false;
    if (const double* d = std::get_if<double>(&c)) {
      out << format(*d);
    } else if (const long long* i = std::get_if<long long>(&c)) {
      out << *i;
    } else {
      out << std::get<std::string>(c);
    }
  }
  out << '\n';
}

}  // namespace nullctl::csv
