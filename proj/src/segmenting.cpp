#include "cogload/segmenting.hpp"

#include <algorithm>
#include <map>

#include "cogload/errors.hpp"

namespace cogload {

const char* to_string(Phase phase) {
  return phase == Phase::routing ? "routing" : "learning";
}

SegmentationResult build_segments(
    std::span<const InteractionEvent> events,
    std::span<const QuestionnaireAdministration> administrations) {
  std::map<std::string, std::vector<double>> admin_ts;
  for (const auto& admin : administrations) {
    auto& ts = admin_ts[admin.learner_id];
    if (!ts.empty() && admin.timestamp_s <= ts.back()) {
      throw InvalidArgumentError(
          "administrations for learner '" + admin.learner_id +
          "' are not in strictly increasing timestamp order");
    }
    ts.push_back(admin.timestamp_s);
  }

  std::map<std::string, std::vector<const InteractionEvent*>> events_by_learner;
  for (const auto& e : events) events_by_learner[e.learner_id].push_back(&e);
  for (auto& [learner, list] : events_by_learner) {
    std::sort(list.begin(), list.end(),
              [](const InteractionEvent* a, const InteractionEvent* b) {
                if (a->timestamp_s != b->timestamp_s) {
                  return a->timestamp_s < b->timestamp_s;
                }
                return a->item_id < b->item_id;
              });
  }

  SegmentationResult result;
  for (const auto& [learner, ts_list] : admin_ts) {
    std::vector<Segment> segments;
    segments.reserve(ts_list.size());
    double prev = 0.0;
    for (std::size_t k = 0; k < ts_list.size(); ++k) {
      Segment s;
      s.learner_id = learner;
      s.administration_index = static_cast<int>(k) + 1;
      s.start_ts = prev;
      s.end_ts = ts_list[k];
      segments.push_back(std::move(s));
      prev = ts_list[k];
    }
    auto events_it = events_by_learner.find(learner);
    if (events_it != events_by_learner.end()) {
      std::size_t k = 0;
      for (const InteractionEvent* e : events_it->second) {
        while (k < segments.size() && segments[k].end_ts < e->timestamp_s) ++k;
        if (k == segments.size()) {
          result.unassigned.push_back(*e);
        } else {
          segments[k].item_ids.push_back(e->item_id);
        }
      }
    }
    for (auto& s : segments) result.segments.push_back(std::move(s));
  }

  // Learners with events but no administrations contribute only
  // unassigned events.
  for (const auto& [learner, list] : events_by_learner) {
    if (admin_ts.contains(learner)) continue;
    for (const InteractionEvent* e : list) result.unassigned.push_back(*e);
  }
  std::sort(result.unassigned.begin(), result.unassigned.end(),
            [](const InteractionEvent& a, const InteractionEvent& b) {
              if (a.learner_id != b.learner_id) return a.learner_id < b.learner_id;
              if (a.timestamp_s != b.timestamp_s) return a.timestamp_s < b.timestamp_s;
              return a.item_id < b.item_id;
            });
  return result;
}

std::unordered_map<std::string, double> difficulty_by_id(
    const CalibrationResult& calibration) {
  std::unordered_map<std::string, double> map;
  map.reserve(calibration.items.size());
  for (const auto& item : calibration.items) map.emplace(item.item_id, item.b);
  return map;
}

SegmentDifficulty segment_mean_difficulty(
    const Segment& segment,
    const std::unordered_map<std::string, double>& difficulty) {
  SegmentDifficulty d;
  double sum = 0.0;
  for (const auto& item_id : segment.item_ids) {
    auto it = difficulty.find(item_id);
    if (it == difficulty.end()) {
      d.n_unmapped += 1;
    } else {
      d.n_mapped += 1;
      sum += it->second;
    }
  }
  if (d.n_mapped == 0) {
    throw UndefinedDifficultyError(segment.learner_id,
                                   segment.administration_index);
  }
  d.mean_b = sum / d.n_mapped;
  return d;
}

SegmentDifficulty segment_mean_difficulty(const Segment& segment,
                                          const CalibrationResult& calibration) {
  return segment_mean_difficulty(segment, difficulty_by_id(calibration));
}

void label_phases(std::vector<Segment>& segments,
                  const std::unordered_map<std::string, double>& routing_end_ts) {
  for (auto& s : segments) {
    auto it = routing_end_ts.find(s.learner_id);
    const double end = it == routing_end_ts.end() ? 0.0 : it->second;
    s.phase = s.end_ts <= end ? Phase::routing : Phase::learning;
  }
}

}  // namespace cogload
