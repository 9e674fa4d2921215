#pragma once

#include <string>
#include <vector>

#include "ringbif/continuation.hpp"
#include "ringbif/dynamics.hpp"

namespace ringbif {

// Plain CSV writer; rows of doubles under a header line.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// Trajectory CSV: t, x0, y0, ..., xn, yn [, vx0, vy0, ...].
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

// Loop exports: Fourier modes and uniformly sampled time series.
void write_loop_modes_csv(const std::string& path, const FourierLoop& loop);
void write_loop_samples_csv(const std::string& path, const FourierLoop& loop,
                            int samples = 256);

// Companion gnuplot script plotting selected columns of a CSV.
void write_gnuplot_script(const std::string& path, const std::string& csv_path,
                          const std::string& title,
                          const std::vector<std::pair<int, int>>& xy_columns,
                          const std::vector<std::string>& series_titles);

}  // namespace ringbif
