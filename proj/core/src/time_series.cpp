#include "slownav/time_series.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace slownav {

TimeSeries scalar_series(const Eigen::VectorXd& v) {
  TimeSeries s;
  s.values = v;
  return s;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_series_csv(const TimeSeries& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "t";
  for (Eigen::Index c = 0; c < series.dim(); ++c) out << ",c" << c;
  out << "\n";
  for (Eigen::Index t = 0; t < series.len(); ++t) {
    out << t;
    for (Eigen::Index c = 0; c < series.dim(); ++c)
      out << ',' << format_double(series.values(t, c));
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

TimeSeries read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path);

  Eigen::Index dim = -1;
  std::vector<double> data;
  Eigen::Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const char* p = line.c_str();
    char* end = nullptr;
    std::strtol(p, &end, 10);  // leading time index, discarded
    Eigen::Index cols = 0;
    while (*end == ',') {
      p = end + 1;
      data.push_back(std::strtod(p, &end));
      ++cols;
    }
    if (dim < 0) dim = cols;
    if (cols != dim) throw std::runtime_error("ragged csv row in " + path);
    ++rows;
  }
  TimeSeries s;
  s.values.resize(rows, dim < 0 ? 0 : dim);
  for (Eigen::Index t = 0; t < rows; ++t)
    for (Eigen::Index c = 0; c < dim; ++c) s.values(t, c) = data[t * dim + c];
  return s;
}

}  // namespace slownav
