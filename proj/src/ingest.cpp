#include "cogload/ingest.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "cogload/csv.hpp"
#include "cogload/errors.hpp"

namespace cogload {

namespace {

constexpr char kEventsHeader[] = "learner_id,item_id,timestamp_s,correct";
constexpr char kItemsHeader[] = "item_id,kind,passage_id,level";
constexpr char kQuestionnairesHeader[] =
    "learner_id,timestamp_s,r1,r2,r3,r4,r5,r6,r7,r8,r9,r10";

void expect_header(std::istream& in, std::string_view expected,
                   const char* file_kind) {
  std::string line;
  if (!csv::read_line(in, line)) {
    throw ParseError(std::string("missing ") + file_kind + " header", 1);
  }
  if (line != expected) {
    throw ParseError(std::string("bad ") + file_kind + " header, expected '" +
                         std::string(expected) + "'",
                     1);
  }
}

[[noreturn]] void bad_field(const char* field, std::string_view token,
                            const char* expectation, std::size_t line) {
  throw ParseError(std::string("field '") + field + "': expected " + expectation +
                       ", got '" + std::string(token) + "'",
                   line);
}

std::string nonempty_id(const char* field, std::string_view token,
                        std::size_t line) {
  if (token.empty()) bad_field(field, token, "a nonempty identifier", line);
  return std::string(token);
}

double timestamp_field(const char* field, std::string_view token,
                       std::size_t line) {
  const auto value = csv::to_double(token);
  if (!value || !(*value >= 0.0)) {
    bad_field(field, token, "a non-negative number of seconds", line);
  }
  return *value;
}

// Key for exact-duplicate detection on (learner, item, timestamp value).
std::string event_key(const InteractionEvent& e) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(e.timestamp_s);
  return e.learner_id + '\x1f' + e.item_id + '\x1f' + std::to_string(bits);
}

std::string pair_key(std::string_view learner, std::string_view item) {
  std::string key;
  key.reserve(learner.size() + item.size() + 1);
  key.append(learner);
  key.push_back('\x1f');
  key.append(item);
  return key;
}

}  // namespace

const char* to_string(ItemKind kind) {
  return kind == ItemKind::independent ? "independent" : "passage";
}

const char* to_string(Subscale subscale) {
  switch (subscale) {
    case Subscale::intrinsic:
      return "intrinsic";
    case Subscale::extraneous:
      return "extraneous";
    case Subscale::germane:
      return "germane";
  }
  return "germane";
}

std::vector<InteractionEvent> parse_events(std::istream& in) {
  expect_header(in, kEventsHeader, "events");
  std::vector<InteractionEvent> events;
  std::unordered_set<std::string> seen;
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
    InteractionEvent e;
    e.learner_id = nonempty_id("learner_id", fields[0], line_no);
    e.item_id = nonempty_id("item_id", fields[1], line_no);
    e.timestamp_s = timestamp_field("timestamp_s", fields[2], line_no);
    if (fields[3] == "0") {
      e.correct = false;
    } else if (fields[3] == "1") {
      e.correct = true;
    } else {
      bad_field("correct", fields[3], "0 or 1", line_no);
    }
    if (!seen.insert(event_key(e)).second) {
      throw DuplicateEventError("duplicate event for learner '" + e.learner_id +
                                    "', item '" + e.item_id + "' at t=" +
                                    csv::format_double(e.timestamp_s),
                                line_no);
    }
    events.push_back(std::move(e));
  }
  return events;
}

void write_events(std::ostream& out, std::span<const InteractionEvent> events) {
  out << kEventsHeader << '\n';
  for (const auto& e : events) {
    out << e.learner_id << ',' << e.item_id << ',' << csv::format_double(e.timestamp_s)
        << ',' << (e.correct ? '1' : '0') << '\n';
  }
}

std::vector<ItemMeta> parse_items(std::istream& in) {
  expect_header(in, kItemsHeader, "items");
  std::vector<ItemMeta> items;
  std::unordered_set<std::string> seen;
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
    ItemMeta item;
    item.item_id = nonempty_id("item_id", fields[0], line_no);
    if (!seen.insert(item.item_id).second) {
      throw ParseError("duplicate item_id '" + item.item_id + "'", line_no);
    }
    if (fields[1] == "independent") {
      item.kind = ItemKind::independent;
      if (!fields[2].empty()) {
        bad_field("passage_id", fields[2], "an empty field for independent items",
                  line_no);
      }
    } else if (fields[1] == "passage") {
      item.kind = ItemKind::passage;
      if (fields[2].empty()) {
        bad_field("passage_id", fields[2], "a passage identifier", line_no);
      }
      item.passage_id = std::string(fields[2]);
    } else {
      bad_field("kind", fields[1], "independent or passage", line_no);
    }
    if (!fields[3].empty()) {
      const auto level = csv::to_int(fields[3]);
      if (!level) bad_field("level", fields[3], "an integer grade level", line_no);
      item.level = static_cast<int>(*level);
    }
    items.push_back(std::move(item));
  }
  return items;
}

void write_items(std::ostream& out, std::span<const ItemMeta> items) {
  out << kItemsHeader << '\n';
  for (const auto& item : items) {
    out << item.item_id << ',' << to_string(item.kind) << ','
        << item.passage_id.value_or("") << ',';
    if (item.level) out << *item.level;
    out << '\n';
  }
}

std::vector<QuestionnaireAdministration> parse_questionnaires(std::istream& in) {
  expect_header(in, kQuestionnairesHeader, "questionnaires");
  std::vector<QuestionnaireAdministration> admins;
  std::string line;
  std::size_t line_no = 1;
  while (csv::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != 12) {
      throw ParseError("expected 12 fields, got " + std::to_string(fields.size()),
                       line_no);
    }
    QuestionnaireAdministration admin;
    admin.learner_id = nonempty_id("learner_id", fields[0], line_no);
    admin.timestamp_s = timestamp_field("timestamp_s", fields[1], line_no);
    admin.ratings.reserve(10);
    for (int k = 0; k < 10; ++k) {
      const auto rating = csv::to_int(fields[2 + k]);
      if (!rating || *rating < 1 || *rating > 10) {
        const std::string field = "r" + std::to_string(k + 1);
        bad_field(field.c_str(), fields[2 + k], "an integer in [1,10]", line_no);
      }
      admin.ratings.push_back(static_cast<int>(*rating));
    }
    admins.push_back(std::move(admin));
  }
  return admins;
}

void write_questionnaires(std::ostream& out,
                          std::span<const QuestionnaireAdministration> admins) {
  out << kQuestionnairesHeader << '\n';
  for (const auto& admin : admins) {
    out << admin.learner_id << ',' << csv::format_double(admin.timestamp_s);
    for (int rating : admin.ratings) out << ',' << rating;
    out << '\n';
  }
}

SubscaleMap SubscaleMap::default_map() {
  SubscaleMap map;
  for (int k = 0; k < 3; ++k) map.position[k] = Subscale::intrinsic;
  for (int k = 3; k < 6; ++k) map.position[k] = Subscale::extraneous;
  for (int k = 6; k < 10; ++k) map.position[k] = Subscale::germane;
  return map;
}

SubscaleMap parse_subscale_map(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid subscale map JSON: ") + e.what(), 1);
  }
  if (!doc.is_object() || doc.size() != 10) {
    throw ParseError("subscale map must be an object with keys r1..r10", 1);
  }
  SubscaleMap map;
  std::array<int, 3> counts{};
  for (int k = 0; k < 10; ++k) {
    const std::string key = "r" + std::to_string(k + 1);
    if (!doc.contains(key) || !doc[key].is_string()) {
      throw ParseError("subscale map is missing key '" + key + "'", 1);
    }
    const std::string value = doc[key].get<std::string>();
    if (value == "intrinsic") {
      map.position[k] = Subscale::intrinsic;
    } else if (value == "extraneous") {
      map.position[k] = Subscale::extraneous;
    } else if (value == "germane") {
      map.position[k] = Subscale::germane;
    } else {
      throw ParseError("subscale map key '" + key + "' has unknown subscale '" +
                           value + "'",
                       1);
    }
    counts[static_cast<int>(map.position[k])]++;
  }
  if (counts[0] == 0 || counts[1] == 0 || counts[2] == 0) {
    throw ParseError("every subscale needs at least one rating position", 1);
  }
  return map;
}

void write_subscale_map(std::ostream& out, const SubscaleMap& map) {
  nlohmann::json doc = nlohmann::json::object();
  for (int k = 0; k < 10; ++k) {
    doc["r" + std::to_string(k + 1)] = to_string(map.position[k]);
  }
  out << doc.dump(2) << '\n';
}

std::vector<InteractionEvent> first_attempts(
    std::span<const InteractionEvent> events) {
  std::unordered_map<std::string, std::size_t> earliest;
  for (std::size_t idx = 0; idx < events.size(); ++idx) {
    const std::string key = pair_key(events[idx].learner_id, events[idx].item_id);
    auto [it, inserted] = earliest.try_emplace(key, idx);
    if (!inserted && events[idx].timestamp_s < events[it->second].timestamp_s) {
      it->second = idx;
    }
  }
  std::vector<std::size_t> kept;
  kept.reserve(earliest.size());
  for (const auto& [key, idx] : earliest) kept.push_back(idx);
  std::sort(kept.begin(), kept.end());
  std::vector<InteractionEvent> result;
  result.reserve(kept.size());
  for (std::size_t idx : kept) result.push_back(events[idx]);
  return result;
}

FilterResult filter_min_responses(std::span<const InteractionEvent> events,
                                  int threshold) {
  if (threshold < 1) {
    throw InvalidArgumentError("min-response threshold must be positive");
  }
  std::unordered_map<std::string, int> distinct_learners;
  std::unordered_set<std::string> seen_pairs;
  for (const auto& e : events) {
    if (seen_pairs.insert(pair_key(e.learner_id, e.item_id)).second) {
      distinct_learners[e.item_id] += 1;
    }
  }
  FilterResult result;
  for (const auto& [item, count] : distinct_learners) {
    if (count < threshold) {
      result.removed_item_count += 1;
    } else {
      result.kept_item_count += 1;
    }
  }
  result.kept.reserve(events.size());
  for (const auto& e : events) {
    if (distinct_learners[e.item_id] >= threshold) result.kept.push_back(e);
  }
  return result;
}

ResponseMatrix build_response_matrix(std::span<const InteractionEvent> events) {
  std::vector<Response> responses;
  responses.reserve(events.size());
  for (const auto& e : events) {
    responses.push_back({e.learner_id, e.item_id, e.correct});
  }
  return ResponseMatrix::from_responses(responses);
}

SubscaleScores score_questionnaire(const QuestionnaireAdministration& admin,
                                   const SubscaleMap& map) {
  if (admin.ratings.size() != map.position.size()) {
    throw InconsistentInputError(
        "questionnaire has " + std::to_string(admin.ratings.size()) +
        " ratings but the subscale map covers " +
        std::to_string(map.position.size()) + " positions");
  }
  std::array<double, 3> sums{};
  std::array<int, 3> counts{};
  double total = 0.0;
  for (std::size_t k = 0; k < admin.ratings.size(); ++k) {
    const int rating = admin.ratings[k];
    if (rating < 1 || rating > 10) {
      throw InvalidArgumentError("rating r" + std::to_string(k + 1) +
                                 " out of range: " + std::to_string(rating));
    }
    const double unit = (rating - 1) / 9.0;
    sums[static_cast<int>(map.position[k])] += unit;
    counts[static_cast<int>(map.position[k])] += 1;
    total += unit;
  }
  SubscaleScores scores;
  scores.intrinsic = sums[0] / counts[0];
  scores.extraneous = sums[1] / counts[1];
  scores.germane = sums[2] / counts[2];
  scores.overall = total / static_cast<double>(admin.ratings.size());
  return scores;
}

}  // namespace cogload
