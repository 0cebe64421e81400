#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cogload/calibrate.hpp"
#include "cogload/ingest.hpp"

namespace cogload {

enum class Phase { routing, learning };

const char* to_string(Phase phase);

// The interval between two consecutive questionnaire administrations for
// one learner, with the items answered inside it. Intervals are
// right-closed: an event at exactly the administration timestamp belongs
// to the segment that questionnaire reflects on.
struct Segment {
  std::string learner_id;
  int administration_index = 0;  // 1-based ordinal of the closing questionnaire
  double start_ts = 0.0;
  double end_ts = 0.0;
  std::vector<std::string> item_ids;  // timestamp order
  Phase phase = Phase::learning;
};

struct SegmentationResult {
  std::vector<Segment> segments;  // ordered by (learner_id, administration_index)
  std::vector<InteractionEvent> unassigned;  // events after the last administration
};

// Builds one segment per administration and learner. Administrations must
// be listed in strictly increasing timestamp order per learner. Events
// later than a learner's last administration are reported as unassigned.
SegmentationResult build_segments(
    std::span<const InteractionEvent> events,
    std::span<const QuestionnaireAdministration> administrations);

struct SegmentDifficulty {
  double mean_b = 0.0;
  int n_mapped = 0;
  int n_unmapped = 0;
};

std::unordered_map<std::string, double> difficulty_by_id(
    const CalibrationResult& calibration);

// Mean difficulty over the segment's items that have a calibrated b; items
// without one are counted as unmapped and left out of the mean. Throws
// UndefinedDifficultyError when no item is mapped.
SegmentDifficulty segment_mean_difficulty(
    const Segment& segment,
    const std::unordered_map<std::string, double>& difficulty);
SegmentDifficulty segment_mean_difficulty(const Segment& segment,
                                          const CalibrationResult& calibration);

// phase = routing iff end_ts <= routing_end_ts for the segment's learner;
// a segment straddling the boundary counts as learning. Learners missing
// from the map get routing_end_ts = 0, i.e. no routing phase.
void label_phases(std::vector<Segment>& segments,
                  const std::unordered_map<std::string, double>& routing_end_ts);

}  // namespace cogload
