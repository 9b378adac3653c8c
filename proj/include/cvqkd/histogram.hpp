#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "cvqkd/channel.hpp"

namespace cvqkd {

// Normalized 2-D outcome density over (x, y) in SNU. density[i][j] covers
// the cell [x_edges[i], x_edges[i+1]) x [y_edges[j], y_edges[j+1]);
// sum(density * cell area) = 1 exactly by construction. In these
// coordinates the density equals the mode's Husimi function divided by the
// SNU Jacobian of 2, so the vacuum peak sits at 1/(2 pi).
struct Histogram2D {
  std::vector<double> x_edges;
  std::vector<double> y_edges;
  std::vector<std::vector<double>> density;
  std::size_t total_count = 0;
};

struct Histogram1D {
  std::vector<double> edges;
  std::vector<double> density;
  std::size_t total_count = 0;
};

enum class Axis { X, Y };

namespace detail {

// Bin edges of half-width 6 SNU around the empirical center, in whole steps
// of the bin width. 6 SNU swallows every distribution this toolkit
// produces; the far-tail clip is below the normalization tolerance.
inline std::vector<double> centered_edges(double center, double bin_width) {
  const int side = static_cast<int>(std::ceil(6.0 / bin_width));
  std::vector<double> edges;
  edges.reserve(2 * side + 1);
  for (int i = -side; i <= side; ++i)
    edges.push_back(center + bin_width * i);
  return edges;
}

inline int edge_bin(const std::vector<double>& edges, double v) {
  if (v < edges.front() || v >= edges.back()) return -1;
  const int b = static_cast<int>((v - edges.front()) /
                                 (edges[1] - edges[0]));
  return std::min<int>(b, static_cast<int>(edges.size()) - 2);
}

}  // namespace detail

// Raw-count 2-D histogram of the records' outcomes, renormalized to unit
// volume. No smoothing and no fitting: the bins hold exactly the fraction
// of kept outcomes divided by the cell area.
inline Histogram2D build_q_histogram(const std::vector<TrialRecord>& records,
                                     double bin_width) {
  if (!(bin_width > 0.0))
    throw std::invalid_argument("build_q_histogram: bin_width must be > 0");
  if (records.empty())
    throw std::invalid_argument("build_q_histogram: need at least 1 record");

  double mx = 0.0, my = 0.0;
  for (const auto& r : records) {
    mx += r.outcome_x;
    my += r.outcome_y;
  }
  mx /= static_cast<double>(records.size());
  my /= static_cast<double>(records.size());

  Histogram2D h;
  h.x_edges = detail::centered_edges(mx, bin_width);
  h.y_edges = detail::centered_edges(my, bin_width);
  const std::size_t nx = h.x_edges.size() - 1, ny = h.y_edges.size() - 1;
  std::vector<std::vector<std::size_t>> counts(nx,
                                               std::vector<std::size_t>(ny));
  for (const auto& r : records) {
    const int bx = detail::edge_bin(h.x_edges, r.outcome_x);
    const int by = detail::edge_bin(h.y_edges, r.outcome_y);
    if (bx < 0 || by < 0) continue;
    ++counts[bx][by];
    ++h.total_count;
  }
  if (h.total_count == 0)
    throw std::invalid_argument(
        "build_q_histogram: no outcome fell inside the histogram range");

  const double norm = static_cast<double>(h.total_count) * bin_width *
                      bin_width;
  h.density.assign(nx, std::vector<double>(ny, 0.0));
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j)
      h.density[i][j] = static_cast<double>(counts[i][j]) / norm;
  return h;
}

// 1-D marginal of the same construction along the chosen axis.
inline Histogram1D marginal_histogram(const std::vector<TrialRecord>& records,
                                      Axis axis, double bin_width = 0.1) {
  if (!(bin_width > 0.0))
    throw std::invalid_argument("marginal_histogram: bin_width must be > 0");
  if (records.empty())
    throw std::invalid_argument("marginal_histogram: need at least 1 record");

  auto value = [axis](const TrialRecord& r) {
    return axis == Axis::X ? r.outcome_x : r.outcome_y;
  };
  double m = 0.0;
  for (const auto& r : records) m += value(r);
  m /= static_cast<double>(records.size());

  Histogram1D h;
  h.edges = detail::centered_edges(m, bin_width);
  std::vector<std::size_t> counts(h.edges.size() - 1, 0);
  for (const auto& r : records) {
    const int b = detail::edge_bin(h.edges, value(r));
    if (b < 0) continue;
    ++counts[static_cast<std::size_t>(b)];
    ++h.total_count;
  }
  if (h.total_count == 0)
    throw std::invalid_argument(
        "marginal_histogram: no outcome fell inside the histogram range");

  const double norm = static_cast<double>(h.total_count) * bin_width;
  h.density.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    h.density[i] = static_cast<double>(counts[i]) / norm;
  return h;
}

// Largest cell value of the normalized density.
inline double histogram_peak(const Histogram2D& h) {
  double peak = 0.0;
  for (const auto& row : h.density)
    for (double v : row) peak = std::max(peak, v);
  return peak;
}

inline double histogram_peak(const Histogram1D& h) {
  double peak = 0.0;
  for (double v : h.density) peak = std::max(peak, v);
  return peak;
}

}  // namespace cvqkd
