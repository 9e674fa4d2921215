#include "ringbif/io.hpp"

#include <fstream>
#include <iomanip>
#include <numbers>
#include <stdexcept>

namespace ringbif {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << std::setprecision(17);
  return out;
}

}  // namespace

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i)
    out << header[i] << (i + 1 < header.size() ? "," : "\n");
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << row[i] << (i + 1 < row.size() ? "," : "\n");
  }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out = open_out(path);
  const int ne = traj.n + 1;
  out << "t";
  for (int j = 0; j < ne; ++j) out << ",x" << j << ",y" << j;
  if (traj.has_velocity)
    for (int j = 0; j < ne; ++j) out << ",vx" << j << ",vy" << j;
  out << "\n";
  for (std::size_t i = 0; i < traj.t.size(); ++i) {
    out << traj.t[i];
    const Eigen::VectorXd& s = traj.states[i];
    for (Eigen::Index c = 0; c < s.size(); ++c) out << "," << s(c);
    out << "\n";
  }
}

void write_loop_modes_csv(const std::string& path, const FourierLoop& loop) {
  std::ofstream out = open_out(path);
  out << "l,coordinate,re,im\n";
  for (int l = 0; l <= loop.p; ++l)
    for (int c = 0; c < loop.dim(); ++c)
      out << l << "," << c << "," << loop.modes(c, l).real() << "," << loop.modes(c, l).imag()
          << "\n";
}

void write_loop_samples_csv(const std::string& path, const FourierLoop& loop, int samples) {
  std::ofstream out = open_out(path);
  const int ne = loop.n + 1;
  out << "t";
  for (int j = 0; j < ne; ++j) out << ",x" << j << ",y" << j;
  out << "\n";
  for (int i = 0; i <= samples; ++i) {
    const double t = 2.0 * std::numbers::pi * i / samples;
    const Eigen::VectorXd x = loop.eval(t);
    out << t;
    for (Eigen::Index c = 0; c < x.size(); ++c) out << "," << x(c);
    out << "\n";
  }
}

void write_gnuplot_script(const std::string& path, const std::string& csv_path,
                          const std::string& title,
                          const std::vector<std::pair<int, int>>& xy_columns,
                          const std::vector<std::string>& series_titles) {
  std::ofstream out = open_out(path);
  out << "set datafile separator ','\n";
  out << "set key outside\n";
  out << "set title '" << title << "'\n";
  out << "plot ";
  for (std::size_t i = 0; i < xy_columns.size(); ++i) {
    if (i) out << ", \\\n     ";
    out << "'" << csv_path << "' using " << xy_columns[i].first << ":" << xy_columns[i].second
        << " with lines title '" << (i < series_titles.size() ? series_titles[i] : "") << "'";
  }
  out << "\n";
}

}  // namespace ringbif
