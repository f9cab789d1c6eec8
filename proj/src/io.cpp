#include "arrayloc/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "arrayloc/error.hpp"

namespace arrayloc {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_cell(const std::string& raw, const std::filesystem::path& path) {
  const std::string s = trim(raw);
  if (s.empty() || s == "nan" || s == "NaN" || s == "NAN") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidInput(path.string() + ": cannot parse '" + s + "' as a number");
  }
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
  return out;
}

void write_header(std::ostream& out, Eigen::Index cols) {
  for (Eigen::Index j = 0; j < cols; ++j) out << (j ? "," : "") << 'n' << j;
  out << '\n';
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Eigen::MatrixXd read_numeric_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput(path.string() + " is empty");
  const std::size_t cols = split(trim(line)).size();
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (cells.size() != cols) throw InvalidInput(path.string() + ": ragged row");
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_cell(c, path));
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  return m;
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  auto out = open_out(path);
  write_header(out, m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      if (!std::isnan(m(i, j))) out << format_double(m(i, j));
    }
    out << '\n';
  }
}

Edm read_edm_csv(const std::filesystem::path& path) {
  Eigen::MatrixXd m = read_numeric_csv(path);
  if (m.rows() != m.cols()) throw InvalidInput(path.string() + ": EDM must be square");
  const int n = static_cast<int>(m.rows());
  AdjacencyMask observed(n);
  for (int i = 0; i < n; ++i) {
    if (std::isnan(m(i, i))) m(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      const bool a = std::isnan(m(i, j));
      const bool b = std::isnan(m(j, i));
      if (a != b) throw InvalidInput(path.string() + ": EDM observation pattern must be symmetric");
      if (a) {
        m(i, j) = 0.0;
        m(j, i) = 0.0;
      } else {
        observed.set(i, j);
      }
    }
  }
  return Edm(std::move(m), std::move(observed));
}

void write_edm_csv(const std::filesystem::path& path, const Edm& d) {
  Eigen::MatrixXd m = d.entries();
  for (int i = 0; i < d.size(); ++i)
    for (int j = 0; j < d.size(); ++j)
      if (!d.is_observed(i, j)) m(i, j) = std::numeric_limits<double>::quiet_NaN();
  write_matrix_csv(path, m);
}

AdjacencyMask read_mask_csv(const std::filesystem::path& path) {
  const Eigen::MatrixXd m = read_numeric_csv(path);
  if (m.hasNaN()) throw InvalidInput(path.string() + ": mask cells must all be 0 or 1");
  return AdjacencyMask::from_matrix(m);
}

NodeLayout read_layout_csv(const std::filesystem::path& path) {
  const Eigen::MatrixXd m = read_numeric_csv(path);
  return NodeLayout(m);
}

void write_layout_csv(const std::filesystem::path& path, const NodeLayout& layout) {
  write_matrix_csv(path, layout.coords());
}

SampleMatrix read_iq_csv(const std::filesystem::path& path) {
  const Eigen::MatrixXd m = read_numeric_csv(path);
  if (m.cols() % 2 != 0) throw InvalidInput(path.string() + ": I/Q columns must come in pairs");
  if (m.hasNaN()) throw InvalidInput(path.string() + ": I/Q samples must all be present");
  Eigen::MatrixXcd s(m.rows(), m.cols() / 2);
  for (Eigen::Index c = 0; c < s.cols(); ++c) {
    s.col(c).real() = m.col(2 * c);
    s.col(c).imag() = m.col(2 * c + 1);
  }
  return SampleMatrix(std::move(s));
}

void write_waveform_csv(const std::filesystem::path& path, const Signal& s) {
  auto out = open_out(path);
  out << "i,q\n";
  for (const auto& v : s) out << format_double(v.real()) << ',' << format_double(v.imag()) << '\n';
}

}  // namespace arrayloc
