#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cogload {

// A series rescaled to [0, 1], remembering the transform that produced it.
struct StandardizedSeries {
  std::vector<double> values;
  double source_min = 0.0;
  double source_max = 0.0;
};

// Min-max rescaling: min maps to 0, max to 1. A constant series maps every
// value to 0.5 so degenerate datasets still flow through the pipeline.
// Throws InvalidArgumentError on empty or non-finite input.
StandardizedSeries minmax_standardize(std::span<const double> values);

struct CombinedLoad {
  double raw = 0.0;  // diff_std + el_std, in [0, 2]
  double std = 0.0;  // raw / 2, back in [0, 1]
};

// Sum of standardized difficulty and standardized extraneous load; the
// halved form keeps it on the same display scale as the inputs. Throws
// InvalidArgumentError when an input leaves [0, 1].
CombinedLoad combined_load(double diff_std, double el_std);

// One learning segment joined with its closing questionnaire.
struct ProxyRecord {
  std::string learner_id;
  int administration_index = 0;
  double diff_std = 0.0;
  double el_std = 0.0;
  double combined_raw = 0.0;
  double combined_std = 0.0;
  double il_reported = 0.0;
  double cl_reported = 0.0;
};

// Per-learner means of every ProxyRecord field.
struct LearnerRow {
  std::string learner_id;
  int n_records = 0;
  double diff_std = 0.0;
  double el_std = 0.0;
  double combined_raw = 0.0;
  double combined_std = 0.0;
  double il_reported = 0.0;
  double cl_reported = 0.0;
};

// Groups records by learner and means each field. Rows are sorted by mean
// reported cognitive load ascending, ties broken by learner id.
std::vector<LearnerRow> learner_rows(std::span<const ProxyRecord> records);

// Cross-learner means at one administration index.
struct TrendPoint {
  int administration_index = 0;
  int n = 0;  // contributing learners
  double diff_std = 0.0;
  double el_std = 0.0;
  double combined_raw = 0.0;
  double combined_std = 0.0;
  double il_reported = 0.0;
  double cl_reported = 0.0;
};

// Means per administration index across learners, ascending by index;
// indices with no records are omitted.
std::vector<TrendPoint> trend_series(std::span<const ProxyRecord> records);

struct AlignmentStats {
  std::optional<double> pearson_r;    // undefined when a series is constant
  std::optional<double> spearman_rho; // rank ties get average ranks
  int n = 0;
};

// Product-moment and rank correlation between two equally long series.
// Throws InvalidArgumentError on length mismatch or fewer than 2 points.
AlignmentStats alignment_stats(std::span<const double> series_a,
                               std::span<const double> series_b);

}  // namespace cogload
