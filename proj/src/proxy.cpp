#include "cogload/proxy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "cogload/errors.hpp"

namespace cogload {

namespace {

// Ranks with ties resolved as average ranks (1-based).
std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  double mean_a = 0.0;
  double mean_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= n;
  mean_b /= n;
  double cov = 0.0;
  double var_a = 0.0;
  double var_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) return std::nullopt;
  return cov / std::sqrt(var_a * var_b);
}

struct FieldSums {
  int n = 0;
  double diff_std = 0.0;
  double el_std = 0.0;
  double combined_raw = 0.0;
  double combined_std = 0.0;
  double il_reported = 0.0;
  double cl_reported = 0.0;

  void add(const ProxyRecord& r) {
    n += 1;
    diff_std += r.diff_std;
    el_std += r.el_std;
    combined_raw += r.combined_raw;
    combined_std += r.combined_std;
    il_reported += r.il_reported;
    cl_reported += r.cl_reported;
  }
};

}  // namespace

StandardizedSeries minmax_standardize(std::span<const double> values) {
  if (values.empty()) {
    throw InvalidArgumentError("cannot standardize an empty series");
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw InvalidArgumentError("cannot standardize a non-finite value");
    }
  }
  StandardizedSeries series;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  series.source_min = *lo;
  series.source_max = *hi;
  series.values.reserve(values.size());
  if (series.source_max == series.source_min) {
    series.values.assign(values.size(), 0.5);
    return series;
  }
  const double range = series.source_max - series.source_min;
  for (double v : values) {
    series.values.push_back((v - series.source_min) / range);
  }
  return series;
}

CombinedLoad combined_load(double diff_std, double el_std) {
  if (!(diff_std >= 0.0 && diff_std <= 1.0)) {
    throw InvalidArgumentError("diff_std must lie in [0,1], got " +
                               std::to_string(diff_std));
  }
  if (!(el_std >= 0.0 && el_std <= 1.0)) {
    throw InvalidArgumentError("el_std must lie in [0,1], got " +
                               std::to_string(el_std));
  }
  CombinedLoad load;
  load.raw = diff_std + el_std;
  load.std = load.raw / 2.0;
  return load;
}

std::vector<LearnerRow> learner_rows(std::span<const ProxyRecord> records) {
  std::map<std::string, FieldSums> by_learner;
  for (const auto& r : records) by_learner[r.learner_id].add(r);

  std::vector<LearnerRow> rows;
  rows.reserve(by_learner.size());
  for (const auto& [learner_id, sums] : by_learner) {
    LearnerRow row;
    row.learner_id = learner_id;
    row.n_records = sums.n;
    const double n = sums.n;
    row.diff_std = sums.diff_std / n;
    row.el_std = sums.el_std / n;
    row.combined_raw = sums.combined_raw / n;
    row.combined_std = sums.combined_std / n;
    row.il_reported = sums.il_reported / n;
    row.cl_reported = sums.cl_reported / n;
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(), [](const LearnerRow& a, const LearnerRow& b) {
    if (a.cl_reported != b.cl_reported) return a.cl_reported < b.cl_reported;
    return a.learner_id < b.learner_id;
  });
  return rows;
}

std::vector<TrendPoint> trend_series(std::span<const ProxyRecord> records) {
  std::map<int, FieldSums> by_index;
  for (const auto& r : records) by_index[r.administration_index].add(r);

  std::vector<TrendPoint> series;
  series.reserve(by_index.size());
  for (const auto& [index, sums] : by_index) {
    TrendPoint point;
    point.administration_index = index;
    point.n = sums.n;
    const double n = sums.n;
    point.diff_std = sums.diff_std / n;
    point.el_std = sums.el_std / n;
    point.combined_raw = sums.combined_raw / n;
    point.combined_std = sums.combined_std / n;
    point.il_reported = sums.il_reported / n;
    point.cl_reported = sums.cl_reported / n;
    series.push_back(point);
  }
  return series;
}

AlignmentStats alignment_stats(std::span<const double> series_a,
                               std::span<const double> series_b) {
  if (series_a.size() != series_b.size()) {
    throw InvalidArgumentError("series lengths differ: " +
                               std::to_string(series_a.size()) + " vs " +
                               std::to_string(series_b.size()));
  }
  if (series_a.size() < 2) {
    throw InvalidArgumentError("correlation needs at least 2 points");
  }
  AlignmentStats stats;
  stats.n = static_cast<int>(series_a.size());
  stats.pearson_r = pearson(series_a, series_b);
  const auto ranks_a = average_ranks(series_a);
  const auto ranks_b = average_ranks(series_b);
  stats.spearman_rho = pearson(ranks_a, ranks_b);
  return stats;
}

}  // namespace cogload
