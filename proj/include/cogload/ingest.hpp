#pragma once

#include <array>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cogload/response_matrix.hpp"

namespace cogload {

// One answered question from the interaction log. Timestamps are seconds
// since the learner's session start.
struct InteractionEvent {
  std::string learner_id;
  std::string item_id;
  double timestamp_s = 0.0;
  bool correct = false;

  friend bool operator==(const InteractionEvent&, const InteractionEvent&) = default;
};

enum class ItemKind { independent, passage };

struct ItemMeta {
  std::string item_id;
  ItemKind kind = ItemKind::independent;
  std::optional<std::string> passage_id;  // present iff kind == passage
  std::optional<int> level;

  friend bool operator==(const ItemMeta&, const ItemMeta&) = default;
};

// One questionnaire response: ten Likert ratings, each 1..10.
struct QuestionnaireAdministration {
  std::string learner_id;
  double timestamp_s = 0.0;
  std::vector<int> ratings;

  friend bool operator==(const QuestionnaireAdministration&,
                         const QuestionnaireAdministration&) = default;
};

enum class Subscale { intrinsic, extraneous, germane };

// Assigns each of the ten rating positions to a load subscale. Every
// subscale must receive at least one position.
struct SubscaleMap {
  std::array<Subscale, 10> position{};

  // Positions 1-3 intrinsic, 4-6 extraneous, 7-10 germane. A stand-in for
  // instrument-specific configuration, used by the shipped fixtures.
  static SubscaleMap default_map();

  friend bool operator==(const SubscaleMap&, const SubscaleMap&) = default;
};

// Subscale means rescaled from the 1..10 rating range to [0, 1].
struct SubscaleScores {
  double intrinsic = 0.0;
  double extraneous = 0.0;
  double germane = 0.0;
  double overall = 0.0;
};

// events.csv: learner_id,item_id,timestamp_s,correct
std::vector<InteractionEvent> parse_events(std::istream& in);
void write_events(std::ostream& out, std::span<const InteractionEvent> events);

// items.csv: item_id,kind,passage_id,level
std::vector<ItemMeta> parse_items(std::istream& in);
void write_items(std::ostream& out, std::span<const ItemMeta> items);

// questionnaires.csv: learner_id,timestamp_s,r1,...,r10
std::vector<QuestionnaireAdministration> parse_questionnaires(std::istream& in);
void write_questionnaires(std::ostream& out,
                          std::span<const QuestionnaireAdministration> admins);

// subscale_map.json: {"r1": "intrinsic", ..., "r10": "germane"}
SubscaleMap parse_subscale_map(std::istream& in);
void write_subscale_map(std::ostream& out, const SubscaleMap& map);

// Keeps only each learner's earliest attempt at each item, preserving the
// relative order of the survivors. Idempotent.
std::vector<InteractionEvent> first_attempts(std::span<const InteractionEvent> events);

struct FilterResult {
  std::vector<InteractionEvent> kept;
  int removed_item_count = 0;
  int kept_item_count = 0;
};

// Drops items answered by fewer than `threshold` distinct learners,
// together with all their events. The boundary is strict: a count equal to
// the threshold is kept.
FilterResult filter_min_responses(std::span<const InteractionEvent> events,
                                  int threshold = 100);

// One matrix entry per event; indices in first-appearance order. Throws
// InconsistentInputError when a (learner, item) pair repeats, i.e. the
// events were not first-attempt deduplicated.
ResponseMatrix build_response_matrix(std::span<const InteractionEvent> events);

// Means of (rating - 1) / 9 per subscale; overall over all ten ratings.
SubscaleScores score_questionnaire(const QuestionnaireAdministration& admin,
                                   const SubscaleMap& map);

const char* to_string(ItemKind kind);
const char* to_string(Subscale subscale);

}  // namespace cogload
