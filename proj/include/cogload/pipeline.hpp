#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cogload/calibrate.hpp"
#include "cogload/ingest.hpp"
#include "cogload/proxy.hpp"
#include "cogload/segmenting.hpp"
#include "cogload/simgen.hpp"

namespace cogload {

// calibration.csv: item_id,b,se,n_responses (sorted by item_id)
void write_calibration_csv(std::ostream& out, const CalibrationResult& result);
std::unordered_map<std::string, double> read_calibration_csv(std::istream& in);

// exclusions.csv: id,entity,reason (in removal order)
void write_exclusions_csv(std::ostream& out, std::span<const Exclusion> exclusions);

// segments.csv: learner_id,administration_index,start_ts,end_ts,phase,
//               n_items,n_mapped,n_unmapped,mean_b (mean_b empty when undefined)
struct SegmentReport {
  Segment segment;
  std::optional<SegmentDifficulty> difficulty;
};
void write_segments_csv(std::ostream& out, std::span<const SegmentReport> reports);

// proxy.csv: learner_id,administration_index,diff_std,el_std,combined_raw,
//            combined_std,il_reported,cl_reported
void write_proxy_csv(std::ostream& out, std::span<const ProxyRecord> records);
std::vector<ProxyRecord> read_proxy_csv(std::istream& in);

// trends.csv: administration_index,n,diff_std_mean,il_mean,cl_mean,el_mean,
//             combined_std_mean
void write_trends_csv(std::ostream& out, std::span<const TrendPoint> points);

struct CalibrateOptions {
  std::filesystem::path events_csv;
  std::optional<std::filesystem::path> items_csv;
  std::optional<ItemKind> kind_filter;  // requires items_csv
  int min_responses = 100;
  CalibrationConfig calibration;
  std::filesystem::path out_dir;
};

struct CalibrateSummary {
  int parsed_events = 0;
  int first_attempt_events = 0;
  int kept_items = 0;
  int removed_items = 0;
  int calibrated_items = 0;
  int excluded_entities = 0;
  int iterations_used = 0;
  bool converged = false;
  double final_log_likelihood = 0.0;
};

// parse -> first attempts -> minimum-response filter -> matrix -> JML;
// writes calibration.csv and exclusions.csv into out_dir.
CalibrateSummary run_calibrate(const CalibrateOptions& options);

struct AnalyzeOptions {
  std::filesystem::path events_csv;
  std::filesystem::path questionnaires_csv;
  std::filesystem::path subscale_map_json;
  std::filesystem::path calibration_csv;
  std::optional<std::filesystem::path> ground_truth_json;  // routing_end_ts map
  std::optional<double> routing_end_ts;                    // uniform fallback
  std::filesystem::path out_dir;
  bool emit_svg = true;
};

struct AnalyzeSummary {
  int n_segments = 0;
  int n_records = 0;
  int n_learners = 0;
  int n_warnings = 0;
};

// Segments, proxy records, trends, heatmap and trend charts. Segments with
// no mapped difficulty go to warnings.txt instead of failing the run.
AnalyzeSummary run_analyze(const AnalyzeOptions& options);

struct SimulateSummary {
  std::uint64_t seed = 0;
  int n_learners = 0;
  int n_items = 0;
  int n_events = 0;
  int n_administrations = 0;
};

SimulateSummary run_simulate(const SimConfig& config,
                             const std::filesystem::path& out_dir);

// Re-renders the heatmap and trend charts from an existing proxy.csv.
void run_report(const std::filesystem::path& proxy_csv,
                const std::filesystem::path& out_dir);

}  // namespace cogload
