#include "pdes/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pdes {

double residual(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x1,
                const Eigen::MatrixXd& x_star) {
  if (x.rows() != x1.rows() || x.cols() != x1.cols() ||
      x.rows() != x_star.rows() || x.cols() != x_star.cols())
    throw std::invalid_argument("residual: shape mismatch");
  const double denom = (x1 - x_star).norm();
  if (denom == 0.0)
    throw std::domain_error("residual: initial state equals the optimum");
  return (x - x_star).norm() / denom;
}

double tail_min_delta(const std::vector<TraceRecord>& trace,
                      double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw std::invalid_argument("tail_min_delta: fraction must be in (0, 1]");
  const size_t n = trace.size();
  const size_t count =
      std::max<size_t>(1, static_cast<size_t>(std::ceil(tail_fraction * n)));
  if (n == 0) throw std::invalid_argument("tail_min_delta: empty trace");
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = n - std::min(count, n); i < n; ++i) {
    if (!trace[i].delta)
      throw std::invalid_argument("tail_min_delta: record without delta");
    best = std::min(best, *trace[i].delta);
  }
  return best;
}

namespace {

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string format_optional(const std::optional<double>& value) {
  return value ? format_number(*value) : std::string();
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& cell, const std::string& what) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw std::runtime_error("trace csv: non-numeric cell in column " + what);
  return v;
}

std::optional<double> parse_optional(const std::string& cell,
                                     const std::string& what) {
  if (cell.empty()) return std::nullopt;
  return parse_number(cell, what);
}

const char* const kScalarColumns[] = {"consensus_error", "objective_gap",
                                      "delta", "residual", "step_used",
                                      "eps_used"};

std::vector<std::string> header_columns(int n, int d) {
  std::vector<std::string> cols;
  cols.emplace_back("k");
  for (const char* prefix : {"x", "v"}) {
    for (int i = 1; i <= n; ++i) {
      if (d == 1) {
        cols.push_back(std::string(prefix) + "_" + std::to_string(i));
      } else {
        for (int c = 0; c < d; ++c)
          cols.push_back(std::string(prefix) + "_" + std::to_string(i) +
                         "_c" + std::to_string(c));
      }
    }
  }
  for (const char* name : kScalarColumns) cols.emplace_back(name);
  return cols;
}

}  // namespace

void write_csv(const std::vector<TraceRecord>& trace,
               const std::string& path) {
  const int n = trace.empty() ? 0 : static_cast<int>(trace.front().x.rows());
  const int d = trace.empty() ? 1 : static_cast<int>(trace.front().x.cols());

  std::ofstream out(path);
  if (!out) throw std::runtime_error("trace csv: cannot open " + path);

  const auto cols = header_columns(n, d);
  for (size_t c = 0; c < cols.size(); ++c) {
    if (c) out << ',';
    out << cols[c];
  }
  out << '\n';

  for (const TraceRecord& rec : trace) {
    if (rec.x.rows() != n || rec.x.cols() != d || rec.v.rows() != n ||
        rec.v.cols() != d)
      throw std::invalid_argument("trace csv: inconsistent record shapes");
    out << rec.k;
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < d; ++c) out << ',' << format_number(rec.x(i, c));
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < d; ++c) out << ',' << format_number(rec.v(i, c));
    out << ',' << format_number(rec.consensus_error);
    out << ',' << format_optional(rec.objective_gap);
    out << ',' << format_optional(rec.delta);
    out << ',' << format_optional(rec.residual);
    out << ',' << format_number(rec.step_used);
    out << ',' << format_number(rec.eps_used);
    out << '\n';
  }
  if (!out) throw std::runtime_error("trace csv: write failed for " + path);
}

std::vector<TraceRecord> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("trace csv: cannot open " + path);

  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("trace csv: missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_line(line);

  // Infer N and d from the x_* columns, then demand the exact layout.
  int n = 0, d = 1;
  for (const std::string& col : header) {
    if (col.rfind("x_", 0) != 0) continue;
    const size_t c_pos = col.find("_c", 2);
    if (c_pos == std::string::npos) {
      n = std::max(n, std::atoi(col.c_str() + 2));
    } else {
      n = std::max(n, std::atoi(col.substr(2, c_pos - 2).c_str()));
      d = std::max(d, std::atoi(col.c_str() + c_pos + 2) + 1);
    }
  }
  const std::vector<std::string> expected = header_columns(n, d);
  if (header != expected)
    throw std::runtime_error("trace csv: unexpected column layout in " + path);

  std::vector<TraceRecord> trace;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != expected.size())
      throw std::runtime_error("trace csv: wrong cell count in a data row");

    TraceRecord rec;
    size_t at = 0;
    rec.k = static_cast<long>(parse_number(cells[at], "k"));
    ++at;
    rec.x.resize(n, d);
    rec.v.resize(n, d);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < d; ++c, ++at)
        rec.x(i, c) = parse_number(cells[at], expected[at]);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < d; ++c, ++at)
        rec.v(i, c) = parse_number(cells[at], expected[at]);
    rec.consensus_error = parse_number(cells[at], expected[at]);
    ++at;
    rec.objective_gap = parse_optional(cells[at], expected[at]);
    ++at;
    rec.delta = parse_optional(cells[at], expected[at]);
    ++at;
    rec.residual = parse_optional(cells[at], expected[at]);
    ++at;
    rec.step_used = parse_number(cells[at], expected[at]);
    ++at;
    rec.eps_used = parse_number(cells[at], expected[at]);
    trace.push_back(std::move(rec));
  }
  return trace;
}

}  // namespace pdes
