#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "introspect/logit_record.hpp"

namespace introspect {

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;  // two-sided
};

/// Student's two-sample t-test with pooled variance, df = na+nb-2. Each
/// sample needs >= 2 values; equal samples with zero spread are degenerate.
TTestResult two_sample_t_test(std::span<const double> a, std::span<const double> b);

/// Welch's unequal-variance variant (not the default anywhere).
TTestResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// Regularized incomplete beta I_x(a,b) by Lentz's continued fraction;
/// relative error below 1e-8 over the t-test's parameter range.
double regularized_incomplete_beta(double a, double b, double x);

struct TagLogitSummary {
  std::size_t count = 0;
  double mean_of_mean = 0.0, std_of_mean = 0.0;
  double mean_of_min = 0.0, std_of_min = 0.0;
  double mean_of_max = 0.0, std_of_max = 0.0;
};

struct ScatterRow {
  DatasetTag tag;
  float logit_min, logit_max, softmax_min, softmax_max;
};

/// The data behind the paper-style figures: per-tag summary statistics over
/// each record's logit mean/min/max, plus one scatter row per record with
/// the logit and softmax extremes.
struct LogitStats {
  std::map<DatasetTag, TagLogitSummary> summaries;
  std::vector<ScatterRow> scatter;
};

LogitStats logit_stats(std::span<const LogitRecord> records);

/// CSV `tag,logit_min,logit_max,softmax_min,softmax_max`, one row per record.
void write_scatter_csv(const LogitStats& stats, const std::filesystem::path& path);
/// CSV with one summary row per tag.
void write_summary_csv(const LogitStats& stats, const std::filesystem::path& path);

}  // namespace introspect
