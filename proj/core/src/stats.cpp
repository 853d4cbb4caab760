#include "introspect/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "introspect/error.hpp"
#include "introspect/math.hpp"

namespace introspect {

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;  // sample variance (n-1)
  std::size_t n = 0;
};

Moments moments(std::span<const double> xs) {
  Moments m;
  m.n = xs.size();
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(m.n);
  for (double x : xs) m.var += (x - m.mean) * (x - m.mean);
  m.var /= static_cast<double>(m.n - 1);
  return m;
}

// Continued fraction for the incomplete beta (Lentz's method).
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-12;
  constexpr double kTiny = 1e-300;

  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  raise(ErrorCode::kNumeric, "incomplete beta: continued fraction did not converge");
}

double p_from_t(double t, double df) {
  // two-sided p = I_{df/(df+t^2)}(df/2, 1/2)
  if (!std::isfinite(t)) return 0.0;
  const double x = df / (df + t * t);
  return regularized_incomplete_beta(0.5 * df, 0.5, x);
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (x < 0.0 || x > 1.0) raise(ErrorCode::kContract, "incomplete beta: x outside [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

TTestResult two_sample_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    raise(ErrorCode::kContract, "t-test: each sample needs at least 2 values");
  }
  const Moments ma = moments(a);
  const Moments mb = moments(b);
  const double df = static_cast<double>(ma.n + mb.n - 2);
  const double pooled =
      ((ma.n - 1) * ma.var + (mb.n - 1) * mb.var) / df;

  TTestResult r;
  r.df = df;
  if (pooled == 0.0) {
    if (ma.mean == mb.mean) {
      raise(ErrorCode::kDegenerateSample,
            "t-test: both samples constant and equal; statistic undefined");
    }
    r.t = ma.mean > mb.mean ? std::numeric_limits<double>::infinity()
                            : -std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
    return r;
  }
  const double se = std::sqrt(pooled * (1.0 / ma.n + 1.0 / mb.n));
  r.t = (ma.mean - mb.mean) / se;
  r.p_value = p_from_t(r.t, df);
  return r;
}

TTestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    raise(ErrorCode::kContract, "t-test: each sample needs at least 2 values");
  }
  const Moments ma = moments(a);
  const Moments mb = moments(b);
  const double va = ma.var / ma.n, vb = mb.var / mb.n;
  if (va + vb == 0.0) {
    if (ma.mean == mb.mean) {
      raise(ErrorCode::kDegenerateSample,
            "t-test: both samples constant and equal; statistic undefined");
    }
    TTestResult r;
    r.df = static_cast<double>(ma.n + mb.n - 2);
    r.t = ma.mean > mb.mean ? std::numeric_limits<double>::infinity()
                            : -std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
    return r;
  }
  TTestResult r;
  r.t = (ma.mean - mb.mean) / std::sqrt(va + vb);
  r.df = (va + vb) * (va + vb) /
         (va * va / (ma.n - 1) + vb * vb / (mb.n - 1));
  r.p_value = p_from_t(r.t, r.df);
  return r;
}

LogitStats logit_stats(std::span<const LogitRecord> records) {
  if (records.empty()) raise(ErrorCode::kContract, "logit stats: no records");

  std::map<DatasetTag, std::vector<double>> means, mins, maxs;
  LogitStats stats;
  stats.scatter.reserve(records.size());

  for (const LogitRecord& r : records) {
    if (r.logits.empty()) raise(ErrorCode::kContract, "logit stats: empty logit vector");
    double sum = 0.0;
    float mn = r.logits[0], mx = r.logits[0];
    for (float v : r.logits) {
      sum += v;
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    means[r.tag].push_back(sum / static_cast<double>(r.logits.size()));
    mins[r.tag].push_back(mn);
    maxs[r.tag].push_back(mx);

    const std::vector<float> probs = softmax(r.logits);
    ScatterRow row;
    row.tag = r.tag;
    row.logit_min = mn;
    row.logit_max = mx;
    row.softmax_min = *std::min_element(probs.begin(), probs.end());
    row.softmax_max = *std::max_element(probs.begin(), probs.end());
    stats.scatter.push_back(row);
  }

  for (const auto& [tag, ms] : means) {
    TagLogitSummary s;
    s.count = ms.size();
    auto fill = [&](const std::vector<double>& xs, double& mean_out, double& std_out) {
      double mean = 0.0;
      for (double x : xs) mean += x;
      mean /= static_cast<double>(xs.size());
      double var = 0.0;
      for (double x : xs) var += (x - mean) * (x - mean);
      std_out = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
      mean_out = mean;
    };
    fill(ms, s.mean_of_mean, s.std_of_mean);
    fill(mins.at(tag), s.mean_of_min, s.std_of_min);
    fill(maxs.at(tag), s.mean_of_max, s.std_of_max);
    stats.summaries[tag] = s;
  }
  return stats;
}

void write_scatter_csv(const LogitStats& stats, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) raise(ErrorCode::kIo, "scatter csv: cannot open '" + path.string() + "'");
  f << "tag,logit_min,logit_max,softmax_min,softmax_max\n";
  char buf[128];
  for (const ScatterRow& r : stats.scatter) {
    std::snprintf(buf, sizeof(buf), "%s,%.9g,%.9g,%.9g,%.9g", tag_name(r.tag),
                  static_cast<double>(r.logit_min), static_cast<double>(r.logit_max),
                  static_cast<double>(r.softmax_min), static_cast<double>(r.softmax_max));
    f << buf << '\n';
  }
}

void write_summary_csv(const LogitStats& stats, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) raise(ErrorCode::kIo, "summary csv: cannot open '" + path.string() + "'");
  f << "tag,count,mean_of_mean,std_of_mean,mean_of_min,std_of_min,mean_of_max,std_of_max\n";
  char buf[256];
  for (const auto& [tag, s] : stats.summaries) {
    std::snprintf(buf, sizeof(buf), "%s,%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g", tag_name(tag),
                  s.count, s.mean_of_mean, s.std_of_mean, s.mean_of_min, s.std_of_min,
                  s.mean_of_max, s.std_of_max);
    f << buf << '\n';
  }
}

}  // namespace introspect
