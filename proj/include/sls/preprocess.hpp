#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sls/trace.hpp"

namespace sls::prep {

// Instability of the interior points of one trace channel: the averaged
// absolute one-sided difference quotients. Length is trace size minus 2.
struct InstabilitySeries {
  std::vector<double> s_hat;
  std::size_t size() const { return s_hat.size(); }
};

InstabilitySeries instability(const RawTrace& trace, std::size_t channel);

// Mild moving-average smoothing: interior points become 3-point means, the
// two boundary points use the available one-sided 2-point mean.
InstabilitySeries smooth_instability(const InstabilitySeries& s);

struct TrimResult {
  std::vector<std::size_t> retained;  // indices into the trace, ascending
  bool degenerate_spread = false;     // IQR was zero: everything retained
};

// Drops points whose standardized instability (s - median)/IQR exceeds tau.
// Endpoints carry no two-sided estimate and are judged by their single
// adjacent interior estimate. A zero IQR means a flat series with no
// artifacts: all indices are returned with the degenerate flag set.
TrimResult trim(const RawTrace& trace, std::size_t channel, double tau,
                bool use_smoothing);

// Median absolute per-channel difference between two points.
double merge_penalty(std::span<const double> a, std::span<const double> b);

// Median of the pointwise merge penalties over all cross pairs.
double cluster_merge_cost(std::span<const std::vector<double>> points,
                          std::span<const std::size_t> cluster_a,
                          std::span<const std::size_t> cluster_b);

struct ClusterAssignment {
  std::vector<int> labels;  // per retained point, 0..k-1 in time order
  int k = 0;
};

// Constrained agglomeration of time-ordered points: only temporally adjacent
// clusters merge, always the cheapest pair (ties to the earliest), until k
// clusters remain.
ClusterAssignment agglomerate(std::span<const std::vector<double>> points,
                              int k);

struct ClusterSummary {
  double median = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t n = 0;
  // Set when n is too small for the requested coverage; the interval then
  // degrades to (min, max).
  bool ci_degenerate = false;
};

// Sample median plus the distribution-free order-statistic interval
// (x_(r), x_(n+1-r)), with r the largest integer whose binomial(n, 1/2)
// coverage reaches `confidence`.
ClusterSummary summarize_cluster(std::span<const double> values,
                                 double confidence);

struct TimedSummary {
  ClusterSummary stats;
  double mid_time = 0.0;
};

// Subtracts the time-linear interpolation between the two buffer medians
// from each sample cluster median.
std::vector<double> baseline_correct(std::span<const TimedSummary> samples,
                                     const TimedSummary& buffer_first,
                                     const TimedSummary& buffer_last);

}  // namespace sls::prep
