#include "sls/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "sls/errors.hpp"
#include "sls/stats.hpp"

namespace sls::prep {

namespace {

void check_channel(const RawTrace& trace, std::size_t channel) {
  if (channel >= trace.channels())
    throw ChannelMismatch("channel " + std::to_string(channel) +
                          " out of range (trace has " +
                          std::to_string(trace.channels()) + ")");
}

double quartile_range(std::vector<double> s) {
  const double q25 = stats::quantile(s, 0.25);
  const double q75 = stats::quantile(std::move(s), 0.75);
  return q75 - q25;
}

}  // namespace

InstabilitySeries instability(const RawTrace& trace, std::size_t channel) {
  if (trace.size() < 3)
    throw TooFewPoints("instability needs >= 3 points, got " +
                       std::to_string(trace.size()));
  check_channel(trace, channel);
  const auto& t = trace.times;
  InstabilitySeries out;
  out.s_hat.resize(trace.size() - 2);
  for (std::size_t i = 1; i + 1 < trace.size(); ++i) {
    const double y_prev = trace.values[i - 1][channel];
    const double y = trace.values[i][channel];
    const double y_next = trace.values[i + 1][channel];
    const double fwd = std::abs(y_next - y) / (t[i + 1] - t[i]);
    const double bwd = std::abs(y - y_prev) / (t[i] - t[i - 1]);
    out.s_hat[i - 1] = 0.5 * (fwd + bwd);
  }
  return out;
}

InstabilitySeries smooth_instability(const InstabilitySeries& s) {
  const std::size_t n = s.size();
  if (n < 3)
    throw TooFewPoints("smoothing needs >= 3 values, got " + std::to_string(n));
  InstabilitySeries out;
  out.s_hat.resize(n);
  out.s_hat[0] = 0.5 * (s.s_hat[0] + s.s_hat[1]);
  for (std::size_t i = 1; i + 1 < n; ++i)
    out.s_hat[i] = (s.s_hat[i - 1] + s.s_hat[i] + s.s_hat[i + 1]) / 3.0;
  out.s_hat[n - 1] = 0.5 * (s.s_hat[n - 2] + s.s_hat[n - 1]);
  return out;
}

TrimResult trim(const RawTrace& trace, std::size_t channel, double tau,
                bool use_smoothing) {
  InstabilitySeries s = instability(trace, channel);
  if (use_smoothing && s.size() >= 3) s = smooth_instability(s);

  const std::size_t m = trace.size();
  TrimResult result;

  const double med = stats::quantile(s.s_hat, 0.5);
  const double iqr = quartile_range(s.s_hat);
  if (!(iqr > 0.0)) {
    // A flat series has no spread to standardize against, and no artifacts.
    result.degenerate_spread = true;
    result.retained.resize(m);
    for (std::size_t i = 0; i < m; ++i) result.retained[i] = i;
    return result;
  }

  auto passes = [&](double v) { return (v - med) / iqr <= tau; };

  // Endpoints have no two-sided estimate; judge them by their one-sided
  // difference quotient against the same threshold.
  const auto& t = trace.times;
  const double e_first =
      std::abs(trace.values[1][channel] - trace.values[0][channel]) / (t[1] - t[0]);
  const double e_last =
      std::abs(trace.values[m - 1][channel] - trace.values[m - 2][channel]) /
      (t[m - 1] - t[m - 2]);

  if (passes(e_first)) result.retained.push_back(0);
  for (std::size_t i = 1; i + 1 < m; ++i)
    if (passes(s.s_hat[i - 1])) result.retained.push_back(i);
  if (passes(e_last)) result.retained.push_back(m - 1);
  return result;
}

double merge_penalty(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || a.size() != b.size())
    throw ChannelMismatch("merge_penalty: channel counts differ (" +
                          std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
  std::vector<double> diff(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) diff[j] = std::abs(a[j] - b[j]);
  return stats::median(std::move(diff));
}

double cluster_merge_cost(std::span<const std::vector<double>> points,
                          std::span<const std::size_t> cluster_a,
                          std::span<const std::size_t> cluster_b) {
  if (cluster_a.empty() || cluster_b.empty())
    throw EmptyCluster("cluster_merge_cost: empty cluster");
  std::vector<double> penalties;
  penalties.reserve(cluster_a.size() * cluster_b.size());
  for (std::size_t p : cluster_a)
    for (std::size_t q : cluster_b)
      penalties.push_back(merge_penalty(points[p], points[q]));
  return stats::median(std::move(penalties));
}

namespace {

// Contiguity means a cluster is just an index range [start, end).
struct Range {
  std::size_t start, end;
};

double range_cost(std::span<const std::vector<double>> points, Range a, Range b) {
  std::vector<double> penalties;
  penalties.reserve((a.end - a.start) * (b.end - b.start));
  for (std::size_t p = a.start; p < a.end; ++p)
    for (std::size_t q = b.start; q < b.end; ++q)
      penalties.push_back(merge_penalty(points[p], points[q]));
  return stats::median(std::move(penalties));
}

}  // namespace

ClusterAssignment agglomerate(std::span<const std::vector<double>> points,
                              int k) {
  const std::size_t n = points.size();
  if (k < 1) throw ConfigError("agglomerate: k must be >= 1");
  if (n < static_cast<std::size_t>(k))
    throw TooFewPoints("agglomerate: " + std::to_string(n) + " points < k=" +
                       std::to_string(k));

  std::vector<Range> clusters(n);
  for (std::size_t i = 0; i < n; ++i) clusters[i] = {i, i + 1};

  // Cached cost of merging cluster c with cluster c+1.
  std::vector<double> cost(n > 0 ? n - 1 : 0);
  for (std::size_t c = 0; c + 1 < n; ++c)
    cost[c] = range_cost(points, clusters[c], clusters[c + 1]);

  while (clusters.size() > static_cast<std::size_t>(k)) {
    // Lowest cost wins; on ties the earliest pair, for repeatability.
    std::size_t best = 0;
    for (std::size_t c = 1; c < cost.size(); ++c)
      if (cost[c] < cost[best]) best = c;

    clusters[best].end = clusters[best + 1].end;
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(best) + 1);
    cost.erase(cost.begin() + static_cast<std::ptrdiff_t>(best));
    if (best > 0)
      cost[best - 1] = range_cost(points, clusters[best - 1], clusters[best]);
    if (best < cost.size())
      cost[best] = range_cost(points, clusters[best], clusters[best + 1]);
  }

  ClusterAssignment out;
  out.k = k;
  out.labels.resize(n);
  for (std::size_t c = 0; c < clusters.size(); ++c)
    for (std::size_t p = clusters[c].start; p < clusters[c].end; ++p)
      out.labels[p] = static_cast<int>(c);
  return out;
}

ClusterSummary summarize_cluster(std::span<const double> values,
                                 double confidence) {
  if (values.empty()) throw EmptyCluster("summarize_cluster: no values");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw ConfigError("summarize_cluster: confidence must be in (0,1)");

  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());

  ClusterSummary out;
  out.n = v.size();
  out.median = stats::median_sorted(v);

  // Largest r with P(r <= B <= n-r) >= confidence for B ~ Bin(n, 1/2),
  // i.e. the largest r with P(B <= r-1) <= (1 - confidence)/2.
  const std::size_t n = v.size();
  const double tail = 0.5 * (1.0 - confidence);
  const double log_half_n = -static_cast<double>(n) * std::log(2.0);
  double cdf = 0.0;
  std::size_t r = 0;
  for (std::size_t m = 0; m < n / 2 + 1; ++m) {
    cdf += std::exp(std::lgamma(static_cast<double>(n) + 1.0) -
                    std::lgamma(static_cast<double>(m) + 1.0) -
                    std::lgamma(static_cast<double>(n - m) + 1.0) + log_half_n);
    if (cdf <= tail)
      r = m + 1;
    else
      break;
  }

  if (r < 1 || r > n - r + 1) {
    out.ci_lo = v.front();
    out.ci_hi = v.back();
    out.ci_degenerate = true;
  } else {
    out.ci_lo = v[r - 1];
    out.ci_hi = v[n - r];
  }
  return out;
}

std::vector<double> baseline_correct(std::span<const TimedSummary> samples,
                                     const TimedSummary& buffer_first,
                                     const TimedSummary& buffer_last) {
  if (buffer_first.stats.n == 0 || buffer_last.stats.n == 0)
    throw MissingBaseline("baseline_correct: buffer summary missing");
  const double t0 = buffer_first.mid_time;
  const double t1 = buffer_last.mid_time;
  const double b0 = buffer_first.stats.median;
  const double b1 = buffer_last.stats.median;
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    double baseline;
    if (t1 == t0)
      baseline = 0.5 * (b0 + b1);
    else
      baseline = b0 + (b1 - b0) * (s.mid_time - t0) / (t1 - t0);
    out.push_back(s.stats.median - baseline);
  }
  return out;
}

}  // namespace sls::prep
