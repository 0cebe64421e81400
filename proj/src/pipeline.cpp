#include "cogload/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "cogload/csv.hpp"
#include "cogload/errors.hpp"
#include "cogload/svg.hpp"

namespace cogload {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.is_open()) {
    throw IoError("cannot open input file", path.string());
  }
  return in;
}

void write_output(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out.is_open()) {
    throw IoError("cannot open for writing", path.string());
  }
  writer(out);
  out.flush();
  if (!out.good()) {
    throw IoError("write failed", path.string());
  }
}

void expect_csv_header(std::istream& in, std::string_view expected,
                       const char* file_kind) {
  std::string line;
  if (!csv::read_line(in, line) || line != expected) {
    throw ParseError(std::string("bad ") + file_kind + " header, expected '" +
                         std::string(expected) + "'",
                     1);
  }
}

constexpr char kCalibrationHeader[] = "item_id,b,se,n_responses";
constexpr char kProxyHeader[] =
    "learner_id,administration_index,diff_std,el_std,combined_raw,combined_std,"
    "il_reported,cl_reported";

}  // namespace

void write_calibration_csv(std::ostream& out, const CalibrationResult& result) {
  std::vector<std::size_t> order(result.items.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return result.items[a].item_id < result.items[b].item_id;
  });
  out << kCalibrationHeader << '\n';
  for (std::size_t j : order) {
    out << result.items[j].item_id << ',' << csv::format_double(result.items[j].b)
        << ',' << csv::format_double(result.standard_errors[j]) << ','
        << result.response_counts[j] << '\n';
  }
}

std::unordered_map<std::string, double> read_calibration_csv(std::istream& in) {
  expect_csv_header(in, kCalibrationHeader, "calibration");
  std::unordered_map<std::string, double> difficulty;
  std::string line;
  std::size_t line_no = 1;
  while (csv::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != 4) {
      throw ParseError("expected 4 fields, got " + std::to_string(fields.size()),
                       line_no);
    }
    const auto b = csv::to_double(fields[1]);
    if (fields[0].empty() || !b) {
      throw ParseError("bad calibration row", line_no);
    }
    if (!difficulty.emplace(std::string(fields[0]), *b).second) {
      throw ParseError("duplicate item_id '" + std::string(fields[0]) + "'",
                       line_no);
    }
  }
  return difficulty;
}

void write_exclusions_csv(std::ostream& out, std::span<const Exclusion> exclusions) {
  out << "id,entity,reason\n";
  for (const auto& e : exclusions) {
    out << e.id << ',' << to_string(e.kind) << ',' << to_string(e.reason) << '\n';
  }
}

void write_segments_csv(std::ostream& out, std::span<const SegmentReport> reports) {
  out << "learner_id,administration_index,start_ts,end_ts,phase,n_items,n_mapped,"
         "n_unmapped,mean_b\n";
  for (const auto& r : reports) {
    const auto& s = r.segment;
    out << s.learner_id << ',' << s.administration_index << ','
        << csv::format_double(s.start_ts) << ',' << csv::format_double(s.end_ts)
        << ',' << to_string(s.phase) << ',' << s.item_ids.size() << ',';
    if (r.difficulty) {
      out << r.difficulty->n_mapped << ',' << r.difficulty->n_unmapped << ','
          << csv::format_double(r.difficulty->mean_b);
    } else {
      out << 0 << ',' << s.item_ids.size() << ',';
    }
    out << '\n';
  }
}

void write_proxy_csv(std::ostream& out, std::span<const ProxyRecord> records) {
  out << kProxyHeader << '\n';
  for (const auto& r : records) {
    out << r.learner_id << ',' << r.administration_index << ','
        << csv::format_double(r.diff_std) << ',' << csv::format_double(r.el_std)
        << ',' << csv::format_double(r.combined_raw) << ','
        << csv::format_double(r.combined_std) << ','
        << csv::format_double(r.il_reported) << ','
        << csv::format_double(r.cl_reported) << '\n';
  }
}

std::vector<ProxyRecord> read_proxy_csv(std::istream& in) {
  expect_csv_header(in, kProxyHeader, "proxy");
  std::vector<ProxyRecord> records;
  std::string line;
  std::size_t line_no = 1;
  while (csv::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != 8) {
      throw ParseError("expected 8 fields, got " + std::to_string(fields.size()),
                       line_no);
    }
    ProxyRecord r;
    r.learner_id = std::string(fields[0]);
    const auto index = csv::to_int(fields[1]);
    const auto diff_std = csv::to_double(fields[2]);
    const auto el_std = csv::to_double(fields[3]);
    const auto combined_raw = csv::to_double(fields[4]);
    const auto combined_std = csv::to_double(fields[5]);
    const auto il = csv::to_double(fields[6]);
    const auto cl = csv::to_double(fields[7]);
    if (r.learner_id.empty() || !index || !diff_std || !el_std || !combined_raw ||
        !combined_std || !il || !cl) {
      throw ParseError("bad proxy row", line_no);
    }
    r.administration_index = static_cast<int>(*index);
    r.diff_std = *diff_std;
    r.el_std = *el_std;
    r.combined_raw = *combined_raw;
    r.combined_std = *combined_std;
    r.il_reported = *il;
    r.cl_reported = *cl;
    records.push_back(std::move(r));
  }
  return records;
}

void write_trends_csv(std::ostream& out, std::span<const TrendPoint> points) {
  out << "administration_index,n,diff_std_mean,il_mean,cl_mean,el_mean,"
         "combined_std_mean\n";
  for (const auto& p : points) {
    out << p.administration_index << ',' << p.n << ','
        << csv::format_double(p.diff_std) << ',' << csv::format_double(p.il_reported)
        << ',' << csv::format_double(p.cl_reported) << ','
        << csv::format_double(p.el_std) << ',' << csv::format_double(p.combined_std)
        << '\n';
  }
}

CalibrateSummary run_calibrate(const CalibrateOptions& options) {
  auto events_in = open_input(options.events_csv);
  std::vector<InteractionEvent> events = parse_events(events_in);

  if (options.kind_filter && !options.items_csv) {
    throw InvalidArgumentError("item kind filtering requires an items file");
  }
  if (options.items_csv) {
    auto items_in = open_input(*options.items_csv);
    const std::vector<ItemMeta> items = parse_items(items_in);
    std::unordered_map<std::string, ItemKind> kind_by_id;
    for (const auto& item : items) kind_by_id.emplace(item.item_id, item.kind);
    std::vector<InteractionEvent> filtered;
    filtered.reserve(events.size());
    for (auto& e : events) {
      auto it = kind_by_id.find(e.item_id);
      if (it == kind_by_id.end()) {
        throw InconsistentInputError("event references item '" + e.item_id +
                                     "' missing from the items file");
      }
      if (!options.kind_filter || it->second == *options.kind_filter) {
        filtered.push_back(std::move(e));
      }
    }
    events = std::move(filtered);
  }

  CalibrateSummary summary;
  summary.parsed_events = static_cast<int>(events.size());

  const std::vector<InteractionEvent> deduped = first_attempts(events);
  summary.first_attempt_events = static_cast<int>(deduped.size());

  FilterResult filtered = filter_min_responses(deduped, options.min_responses);
  summary.kept_items = filtered.kept_item_count;
  summary.removed_items = filtered.removed_item_count;

  const ResponseMatrix matrix = build_response_matrix(filtered.kept);
  const CalibrationResult result = calibrate_jml(matrix, options.calibration);

  summary.calibrated_items = static_cast<int>(result.items.size());
  summary.excluded_entities = static_cast<int>(result.exclusions.size());
  summary.iterations_used = result.iterations_used;
  summary.converged = result.converged;
  summary.final_log_likelihood = result.final_log_likelihood;

  std::error_code ec;
  std::filesystem::create_directories(options.out_dir, ec);
  if (ec) throw IoError("cannot create directory", options.out_dir.string());
  write_output(options.out_dir / "calibration.csv",
               [&](std::ostream& out) { write_calibration_csv(out, result); });
  write_output(options.out_dir / "exclusions.csv", [&](std::ostream& out) {
    write_exclusions_csv(out, result.exclusions);
  });
  return summary;
}

namespace {

std::unordered_map<std::string, double> routing_map_from_ground_truth(
    const std::filesystem::path& path) {
  auto in = open_input(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid ground truth JSON: ") + e.what(), 1);
  }
  if (!doc.contains("routing_end_ts") || !doc["routing_end_ts"].is_object()) {
    throw ParseError("ground truth JSON lacks a routing_end_ts object", 1);
  }
  std::unordered_map<std::string, double> map;
  for (const auto& [learner, value] : doc["routing_end_ts"].items()) {
    if (!value.is_number()) {
      throw ParseError("routing_end_ts for '" + learner + "' is not a number", 1);
    }
    map.emplace(learner, value.get<double>());
  }
  return map;
}

}  // namespace

AnalyzeSummary run_analyze(const AnalyzeOptions& options) {
  auto calibration_in = open_input(options.calibration_csv);
  const auto difficulty = read_calibration_csv(calibration_in);

  auto events_in = open_input(options.events_csv);
  const std::vector<InteractionEvent> events = parse_events(events_in);

  auto questionnaires_in = open_input(options.questionnaires_csv);
  const std::vector<QuestionnaireAdministration> admins =
      parse_questionnaires(questionnaires_in);
  if (admins.empty()) {
    throw InvalidArgumentError("no administrations in " +
                               options.questionnaires_csv.string());
  }

  auto map_in = open_input(options.subscale_map_json);
  const SubscaleMap subscale_map = parse_subscale_map(map_in);

  std::unordered_map<std::string, double> routing_end;
  if (options.ground_truth_json) {
    routing_end = routing_map_from_ground_truth(*options.ground_truth_json);
  } else if (options.routing_end_ts) {
    for (const auto& admin : admins) {
      routing_end.emplace(admin.learner_id, *options.routing_end_ts);
    }
  }

  const std::vector<InteractionEvent> deduped = first_attempts(events);
  SegmentationResult segmentation = build_segments(deduped, admins);
  label_phases(segmentation.segments, routing_end);

  std::vector<std::string> warnings;
  std::vector<SegmentReport> reports;
  reports.reserve(segmentation.segments.size());
  for (const auto& segment : segmentation.segments) {
    SegmentReport report;
    report.segment = segment;
    try {
      report.difficulty = segment_mean_difficulty(segment, difficulty);
    } catch (const UndefinedDifficultyError&) {
      warnings.push_back("undefined_difficulty learner=" + segment.learner_id +
                         " administration_index=" +
                         std::to_string(segment.administration_index) +
                         " n_items=" + std::to_string(segment.item_ids.size()));
    }
    reports.push_back(std::move(report));
  }
  for (const auto& e : segmentation.unassigned) {
    warnings.push_back("unassigned_event learner=" + e.learner_id +
                       " item=" + e.item_id +
                       " t=" + csv::format_double(e.timestamp_s));
  }

  std::vector<double> defined_means;
  for (const auto& r : reports) {
    if (r.difficulty) defined_means.push_back(r.difficulty->mean_b);
  }
  if (defined_means.empty()) {
    throw InconsistentInputError(
        "no segment has a calibrated difficulty; nothing to analyze");
  }
  const StandardizedSeries diff_std = minmax_standardize(defined_means);

  // Per-learner administrations in file order; the ordinal joining key is
  // the same one build_segments assigned.
  std::unordered_map<std::string, std::vector<const QuestionnaireAdministration*>>
      admins_by_learner;
  for (const auto& admin : admins) {
    admins_by_learner[admin.learner_id].push_back(&admin);
  }

  std::vector<ProxyRecord> records;
  records.reserve(defined_means.size());
  std::size_t next_defined = 0;
  for (const auto& r : reports) {
    if (!r.difficulty) continue;
    const double d = diff_std.values[next_defined++];
    const auto& learner_admins = admins_by_learner[r.segment.learner_id];
    const auto* admin = learner_admins[r.segment.administration_index - 1];
    const SubscaleScores scores = score_questionnaire(*admin, subscale_map);
    const CombinedLoad combined = combined_load(d, scores.extraneous);
    ProxyRecord record;
    record.learner_id = r.segment.learner_id;
    record.administration_index = r.segment.administration_index;
    record.diff_std = d;
    record.el_std = scores.extraneous;
    record.combined_raw = combined.raw;
    record.combined_std = combined.std;
    record.il_reported = scores.intrinsic;
    record.cl_reported = scores.overall;
    records.push_back(std::move(record));
  }

  const std::vector<LearnerRow> rows = learner_rows(records);
  const std::vector<TrendPoint> trends = trend_series(records);

  std::error_code ec;
  std::filesystem::create_directories(options.out_dir, ec);
  if (ec) throw IoError("cannot create directory", options.out_dir.string());

  write_output(options.out_dir / "segments.csv",
               [&](std::ostream& out) { write_segments_csv(out, reports); });
  write_output(options.out_dir / "proxy.csv",
               [&](std::ostream& out) { write_proxy_csv(out, records); });
  write_output(options.out_dir / "trends.csv",
               [&](std::ostream& out) { write_trends_csv(out, trends); });

  nlohmann::json meta;
  meta["diff_standardization"] = {
      {"source_min", diff_std.source_min},
      {"source_max", diff_std.source_max},
      {"constant_series", diff_std.source_min == diff_std.source_max},
  };
  meta["heatmap_sort"] = "cl_reported ascending";
  write_output(options.out_dir / "analysis_meta.json",
               [&](std::ostream& out) { out << meta.dump(2) << '\n'; });

  if (!warnings.empty()) {
    write_output(options.out_dir / "warnings.txt", [&](std::ostream& out) {
      for (const auto& w : warnings) out << w << '\n';
    });
  }
  if (options.emit_svg) {
    write_output(options.out_dir / "heatmap.svg",
                 [&](std::ostream& out) { out << heatmap_svg(rows); });
    write_output(options.out_dir / "trends.svg",
                 [&](std::ostream& out) { out << trend_svg(trends); });
  }

  AnalyzeSummary summary;
  summary.n_segments = static_cast<int>(reports.size());
  summary.n_records = static_cast<int>(records.size());
  summary.n_learners = static_cast<int>(rows.size());
  summary.n_warnings = static_cast<int>(warnings.size());
  return summary;
}

SimulateSummary run_simulate(const SimConfig& config,
                             const std::filesystem::path& out_dir) {
  const SimDataset dataset = simulate_dataset(config);
  emit_fixture(dataset, config, out_dir);
  SimulateSummary summary;
  summary.seed = config.seed;
  summary.n_learners = config.n_learners;
  summary.n_items = config.n_items;
  for (const auto& session : dataset.sessions) {
    summary.n_events += static_cast<int>(session.events.size());
    summary.n_administrations += static_cast<int>(session.administrations.size());
  }
  return summary;
}

void run_report(const std::filesystem::path& proxy_csv,
                const std::filesystem::path& out_dir) {
  auto in = open_input(proxy_csv);
  const std::vector<ProxyRecord> records = read_proxy_csv(in);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create directory", out_dir.string());
  write_output(out_dir / "heatmap.svg", [&](std::ostream& out) {
    out << heatmap_svg(learner_rows(records));
  });
  write_output(out_dir / "trends.svg", [&](std::ostream& out) {
    out << trend_svg(trend_series(records));
  });
}

}  // namespace cogload
