#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "sls/errors.hpp"
#include "sls/preprocess.hpp"
#include "sls/stats.hpp"

using namespace sls;
using namespace sls::prep;

namespace {

RawTrace make_trace(const std::vector<double>& t, const std::vector<double>& y) {
  RawTrace trace;
  trace.times = t;
  trace.channel_names = {"ch"};
  for (double v : y) trace.values.push_back({v});
  return trace;
}

// Direct term-by-term evaluation of the two-sided difference-quotient mean.
std::vector<double> instability_oracle(const std::vector<double>& t,
                                       const std::vector<double>& y) {
  std::vector<double> s;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    const double fwd = std::abs(y[i + 1] - y[i]) / (t[i + 1] - t[i]);
    const double bwd = std::abs(y[i] - y[i - 1]) / (t[i] - t[i - 1]);
    s.push_back((fwd + bwd) / 2.0);
  }
  return s;
}

}  // namespace

TEST_CASE("instability of a constant signal is zero") {
  const auto s = instability(make_trace({0, 1, 2}, {0, 0, 0}), 0);
  REQUIRE(s.size() == 1);
  CHECK(s.s_hat[0] == 0.0);
}

TEST_CASE("instability hand example") {
  const auto s = instability(make_trace({0, 1, 2}, {0, 1, 1}), 0);
  REQUIRE(s.size() == 1);
  CHECK(s.s_hat[0] == doctest::Approx(0.5));
}

TEST_CASE("instability matches the per-term oracle") {
  // Frozen values from the oracle: interior estimates of (0,2,2,10) are
  // (|0|+|2|)/2 = 1 and (|8|+|0|)/2 = 4.
  const std::vector<double> t{0, 1, 2, 3}, y{0, 2, 2, 10};
  const auto s = instability(make_trace(t, y), 0);
  REQUIRE(s.size() == 2);
  CHECK(s.s_hat[0] == doctest::Approx(1.0));
  CHECK(s.s_hat[1] == doctest::Approx(4.0));

  std::mt19937_64 gen(3);
  std::vector<double> rt, ry;
  double time = 0.0;
  for (int i = 0; i < 50; ++i) {
    time += 0.5 + (gen() % 100) * 0.01;
    rt.push_back(time);
    ry.push_back((gen() % 1000) * 0.1);
  }
  const auto sr = instability(make_trace(rt, ry), 0);
  const auto expected = instability_oracle(rt, ry);
  REQUIRE(sr.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i)
    CHECK(sr.s_hat[i] == doctest::Approx(expected[i]).epsilon(1e-14));
}

TEST_CASE("instability requires 3 points") {
  CHECK_THROWS_AS(instability(make_trace({0, 1}, {0, 0}), 0), TooFewPoints);
}

TEST_CASE("smoothing is a fixed point on constants") {
  InstabilitySeries s;
  s.s_hat = {3.0, 3.0, 3.0, 3.0, 3.0};
  const auto sm = smooth_instability(s);
  for (double v : sm.s_hat) CHECK(v == doctest::Approx(3.0));
}

TEST_CASE("smoothing middle of (0,3,0) is 1 with one-sided boundaries") {
  InstabilitySeries s;
  s.s_hat = {0.0, 3.0, 0.0};
  const auto sm = smooth_instability(s);
  CHECK(sm.s_hat[0] == doctest::Approx(1.5));
  CHECK(sm.s_hat[1] == doctest::Approx(1.0));
  CHECK(sm.s_hat[2] == doctest::Approx(1.5));
}

TEST_CASE("smoothing spreads an impulse as a 3-point convolution") {
  InstabilitySeries s;
  s.s_hat.assign(11, 0.0);
  s.s_hat[5] = 9.0;
  const auto sm = smooth_instability(s);
  for (std::size_t i = 0; i < sm.size(); ++i) {
    const double expected = (i >= 4 && i <= 6) ? 3.0 : 0.0;
    CHECK(sm.s_hat[i] == doctest::Approx(expected));
  }
}

TEST_CASE("trim retains everything on a flat trace") {
  std::vector<double> t(50), y(50, 7.0);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
  const auto res = trim(make_trace(t, y), 0, 1.0, false);
  CHECK(res.degenerate_spread);
  CHECK(res.retained.size() == 50);
}

TEST_CASE("trim removes transition points of a noisy step, matching the rule") {
  // 100 low + 100 high with small noise; the oracle recomputes the rule
  // explicitly and must agree index for index.
  std::mt19937_64 gen(11);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> t, y;
  for (int i = 0; i < 200; ++i) {
    t.push_back(i);
    y.push_back((i < 100 ? 0.0 : 10.0) + noise(gen));
  }
  const auto trace = make_trace(t, y);
  const auto res = trim(trace, 0, 1.0, false);
  REQUIRE_FALSE(res.degenerate_spread);

  const auto s = instability_oracle(t, y);
  std::vector<double> sorted = s;
  const double med = sls::stats::quantile(sorted, 0.5);
  const double iqr =
      sls::stats::quantile(sorted, 0.75) - sls::stats::quantile(sorted, 0.25);
  std::set<std::size_t> expected;
  const double e_first = std::abs(y[1] - y[0]) / (t[1] - t[0]);
  const double e_last = std::abs(y[199] - y[198]) / (t[199] - t[198]);
  if ((e_first - med) / iqr <= 1.0) expected.insert(0);
  for (std::size_t i = 1; i + 1 < y.size(); ++i)
    if ((s[i - 1] - med) / iqr <= 1.0) expected.insert(i);
  if ((e_last - med) / iqr <= 1.0) expected.insert(199);

  CHECK(std::set<std::size_t>(res.retained.begin(), res.retained.end()) ==
        expected);
  // The two step-adjacent interior points must be gone.
  CHECK_FALSE(expected.count(99));
  CHECK_FALSE(expected.count(100));
}

TEST_CASE("trim catches injected spikes and spares plateaus") {
  int spike_removed = 0, spike_total = 0, stable_removed = 0, stable_total = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto syn = oracle::make_plateau_trace(seed, 4, 80, 0.05, 0, 0.02, 50.0);
    const auto trace = make_trace(syn.times, syn.values);
    const auto res = trim(trace, 0, 1.0, false);
    std::vector<bool> kept(syn.times.size(), false);
    for (std::size_t idx : res.retained) kept[idx] = true;
    // Points whose derivative touches a spike or a level transition are
    // legitimately unstable; keep them out of the stable-point tally.
    std::vector<bool> guard(syn.times.size(), false);
    for (std::size_t i = 0; i < syn.times.size(); ++i) {
      if (syn.is_artifact[i])
        for (std::size_t d = (i >= 2 ? i - 2 : 0); d <= i + 2 && d < guard.size(); ++d)
          guard[d] = true;
      if (i + 1 < syn.times.size() &&
          syn.plateau_of_point[i] >= 0 && syn.plateau_of_point[i + 1] >= 0 &&
          syn.plateau_of_point[i] != syn.plateau_of_point[i + 1]) {
        for (std::size_t d = (i >= 1 ? i - 1 : 0); d <= i + 2 && d < guard.size(); ++d)
          guard[d] = true;
      }
    }
    for (std::size_t i = 0; i < syn.times.size(); ++i) {
      if (syn.is_artifact[i]) {
        ++spike_total;
        if (!kept[i]) ++spike_removed;
      } else if (!guard[i]) {
        ++stable_total;
        if (!kept[i]) ++stable_removed;
      }
    }
  }
  CHECK(spike_total > 20);
  CHECK(static_cast<double>(spike_removed) / spike_total >= 0.95);
  CHECK(static_cast<double>(stable_removed) / stable_total <= 0.05);
}

TEST_CASE("trim is scale-equivariant for power-of-two scalings") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> t, y;
  for (int i = 0; i < 120; ++i) {
    t.push_back(i);
    y.push_back((i / 40) * 5.0 + noise(gen));
  }
  const auto base = trim(make_trace(t, y), 0, 1.0, false);
  std::vector<double> scaled = y;
  for (double& v : scaled) v *= 4.0;  // exact in floating point
  const auto res = trim(make_trace(t, scaled), 0, 1.0, false);
  CHECK(res.retained == base.retained);
}

TEST_CASE("merge penalty basics") {
  const std::vector<double> a0{0, 0, 0}, b0{1, 2, 9};
  CHECK(merge_penalty(a0, a0) == 0.0);
  CHECK(merge_penalty(a0, b0) == doctest::Approx(2.0));
  const std::vector<double> a1{3}, b1{7};
  CHECK(merge_penalty(a1, b1) == doctest::Approx(4.0));
  const std::vector<double> short_one{1, 2};
  CHECK_THROWS_AS(merge_penalty(a0, short_one), ChannelMismatch);
}

TEST_CASE("cluster merge cost matches exhaustive pair enumeration") {
  std::mt19937_64 gen(9);
  std::vector<std::vector<double>> points;
  for (int i = 0; i < 6; ++i)
    points.push_back({(gen() % 100) * 0.1, (gen() % 100) * 0.1});

  const std::vector<std::size_t> a{0, 1}, b{2, 3};
  std::vector<double> penalties;
  for (std::size_t p : a)
    for (std::size_t q : b) penalties.push_back(merge_penalty(points[p], points[q]));
  std::sort(penalties.begin(), penalties.end());
  const double expected = 0.5 * (penalties[1] + penalties[2]);
  CHECK(cluster_merge_cost(points, a, b) == doctest::Approx(expected));

  // Singletons reduce to the pointwise penalty; identical points cost zero.
  const std::vector<std::size_t> s0{0}, s1{1};
  CHECK(cluster_merge_cost(points, s0, s1) ==
        doctest::Approx(merge_penalty(points[0], points[1])));
  std::vector<std::vector<double>> same(4, {2.0, 2.0});
  CHECK(cluster_merge_cost(same, a, b) == 0.0);
}

TEST_CASE("agglomerate trivial targets") {
  std::vector<std::vector<double>> points;
  for (int i = 0; i < 5; ++i) points.push_back({static_cast<double>(i)});
  const auto each = agglomerate(points, 5);
  for (int i = 0; i < 5; ++i) CHECK(each.labels[i] == i);
  const auto one = agglomerate(points, 1);
  for (int i = 0; i < 5; ++i) CHECK(one.labels[i] == 0);
  CHECK_THROWS_AS(agglomerate(points, 6), TooFewPoints);
}

TEST_CASE("agglomerate recovers noisy plateau segmentation exactly") {
  std::mt19937_64 gen(21);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<std::vector<double>> points;
  std::vector<int> truth;
  for (int p = 0; p < 3; ++p)
    for (int i = 0; i < 30; ++i) {
      points.push_back({10.0 * p + noise(gen)});
      truth.push_back(p);
    }
  const auto res = agglomerate(points, 3);
  CHECK(res.labels == truth);
}

TEST_CASE("agglomerate labels are contiguous in time for random inputs") {
  std::mt19937_64 gen(33);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<std::vector<double>> points;
    const int n = 40 + static_cast<int>(gen() % 40);
    for (int i = 0; i < n; ++i)
      points.push_back({(gen() % 1000) * 0.01, (gen() % 1000) * 0.01});
    const int k = 2 + static_cast<int>(gen() % 6);
    const auto res = agglomerate(points, k);
    std::set<int> distinct(res.labels.begin(), res.labels.end());
    CHECK(static_cast<int>(distinct.size()) == k);
    for (std::size_t i = 1; i < res.labels.size(); ++i)
      CHECK(res.labels[i] >= res.labels[i - 1]);
  }
}

TEST_CASE("agglomerate is deterministic") {
  std::mt19937_64 gen(77);
  std::vector<std::vector<double>> points;
  for (int i = 0; i < 60; ++i) points.push_back({(gen() % 50) * 1.0});
  const auto a = agglomerate(points, 4);
  const auto b = agglomerate(points, 4);
  CHECK(a.labels == b.labels);
}

TEST_CASE("summarize_cluster singleton degrades to (min,max) with a warning") {
  const std::vector<double> v{5.0};
  const auto s = summarize_cluster(v, 0.95);
  CHECK(s.median == 5.0);
  CHECK(s.ci_lo == 5.0);
  CHECK(s.ci_hi == 5.0);
  CHECK(s.ci_degenerate);
}

TEST_CASE("summarize_cluster matches the binomial order-statistic oracle") {
  std::vector<double> v(100);
  for (int i = 0; i < 100; ++i) v[static_cast<std::size_t>(i)] = i + 1.0;
  const auto s = summarize_cluster(v, 0.95);
  CHECK(s.median == doctest::Approx(50.5));
  const std::size_t r = oracle::median_ci_rank(100, 0.95);
  REQUIRE(r >= 1);
  CHECK(s.ci_lo == doctest::Approx(static_cast<double>(r)));
  CHECK(s.ci_hi == doctest::Approx(static_cast<double>(100 - r + 1)));
  CHECK(oracle::median_ci_coverage(100, r) >= 0.95);
  CHECK(oracle::median_ci_coverage(100, r + 1) < 0.95);

  // Random sizes and confidence levels against the oracle rank.
  std::mt19937_64 gen(13);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 5 + gen() % 400;
    const double conf = 0.5 + 0.49 * (gen() % 1000) / 1000.0;
    std::vector<double> vals(n);
    for (std::size_t i = 0; i < n; ++i) vals[i] = static_cast<double>(gen() % 10000);
    const auto sum = summarize_cluster(vals, conf);
    const std::size_t rr = oracle::median_ci_rank(n, conf);
    std::sort(vals.begin(), vals.end());
    if (rr == 0) {
      CHECK(sum.ci_degenerate);
      CHECK(sum.ci_lo == vals.front());
      CHECK(sum.ci_hi == vals.back());
    } else {
      CHECK_FALSE(sum.ci_degenerate);
      CHECK(sum.ci_lo == vals[rr - 1]);
      CHECK(sum.ci_hi == vals[n - rr]);
    }
  }
}

TEST_CASE("summarize_cluster symmetry and invariances") {
  std::vector<double> v;
  for (int i = -5; i <= 5; ++i) v.push_back(i);
  const auto s = summarize_cluster(v, 0.95);
  CHECK(s.median == 0.0);
  CHECK(s.ci_lo == -s.ci_hi);

  // Permutation invariance.
  std::mt19937_64 gen(4);
  std::vector<double> w{3.0, 1.0, 4.0, 1.5, 9.0, 2.6, 5.3};
  auto shuffled = w;
  std::shuffle(shuffled.begin(), shuffled.end(), gen);
  CHECK(summarize_cluster(w, 0.9).median ==
        summarize_cluster(shuffled, 0.9).median);

  // Monotone equivariance on odd n: median(f(x)) = f(median(x)).
  auto f = [](double x) { return std::exp(0.3 * x); };
  std::vector<double> fw;
  for (double x : w) fw.push_back(f(x));
  CHECK(summarize_cluster(fw, 0.9).median ==
        doctest::Approx(f(summarize_cluster(w, 0.9).median)));

  CHECK_THROWS_AS(summarize_cluster(std::vector<double>{}, 0.95), EmptyCluster);
}

TEST_CASE("baseline correction") {
  auto mk = [](double median, double mid_time) {
    TimedSummary ts;
    ts.stats.median = median;
    ts.stats.n = 10;
    ts.mid_time = mid_time;
    return ts;
  };
  std::vector<TimedSummary> samples{mk(2.0, 5.0)};

  SUBCASE("zero buffers leave input unchanged") {
    const auto out = baseline_correct(samples, mk(0.0, 0.0), mk(0.0, 10.0));
    CHECK(out[0] == doctest::Approx(2.0));
  }
  SUBCASE("constant buffers shift by the constant") {
    const auto out = baseline_correct(samples, mk(0.7, 0.0), mk(0.7, 10.0));
    CHECK(out[0] == doctest::Approx(1.3));
  }
  SUBCASE("linear drift interpolates at the cluster mid-time") {
    const auto out = baseline_correct(samples, mk(0.0, 0.0), mk(1.0, 10.0));
    CHECK(out[0] == doctest::Approx(1.5));  // 2.0 - 0.5
  }
  SUBCASE("buffers correct themselves to zero") {
    const auto first = mk(0.4, 0.0);
    const auto last = mk(0.9, 10.0);
    std::vector<TimedSummary> buffers{first, last};
    const auto out = baseline_correct(buffers, first, last);
    CHECK(out[0] == doctest::Approx(0.0));
    CHECK(out[1] == doctest::Approx(0.0));
  }
  SUBCASE("missing buffer throws") {
    TimedSummary empty;
    CHECK_THROWS_AS(baseline_correct(samples, empty, mk(0.0, 10.0)),
                    MissingBaseline);
  }
}
