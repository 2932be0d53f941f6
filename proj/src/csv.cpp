#include "wdrc/csv.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "wdrc/error.hpp"

namespace wdrc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& token, const std::filesystem::path& path, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(token.c_str(), &end);
  if (token.empty() || end != token.c_str() + token.size() || errno == ERANGE) {
    std::ostringstream msg;
    msg << path.string() << ":" << line << ": not a number: '" << token << "'";
    throw InvalidInputError(msg.str());
  }
  return x;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

NumericTable read_numeric_csv(const std::filesystem::path& path, bool header) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open " + path.string());
  NumericTable table;
  std::string line;
  std::size_t lineno = 0;
  bool header_pending = header;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto cells = split_csv_line(t);
    if (header_pending) {
      table.header = std::move(cells);
      header_pending = false;
      continue;
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, path, lineno));
    if (!table.rows.empty() && row.size() != table.rows.front().size()) {
      std::ostringstream msg;
      msg << path.string() << ":" << lineno << ": expected " << table.rows.front().size()
          << " columns, found " << row.size();
      throw InvalidInputError(msg.str());
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  const auto table = read_numeric_csv(path, false);
  if (table.rows.empty()) throw InvalidInputError(path.string() + ": empty matrix");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(table.rows.size()),
                    static_cast<Eigen::Index>(table.rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = table.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot write " + path.string());
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
}

}  // namespace wdrc
