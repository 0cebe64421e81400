#include "cogload/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>

#include <nlohmann/json.hpp>

#include "cogload/csv.hpp"
#include "cogload/errors.hpp"
#include "cogload/rasch.hpp"
#include "cogload/rng.hpp"

namespace cogload {

namespace {

constexpr double kEventSpacingSeconds = 30.0;

std::string padded_id(char prefix, int index, int total) {
  const std::string digits = std::to_string(index + 1);
  const std::size_t width = std::to_string(total).size();
  std::string id(1, prefix);
  id.append(width - digits.size(), '0');
  id.append(digits);
  return id;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Likert quantization of a [0,1] value.
int to_rating(double v) {
  return 1 + static_cast<int>(std::lround(9.0 * clamp01(v)));
}

double rating_to_unit(int rating) { return (rating - 1) / 9.0; }

// Four ratings whose sum is as close as possible to 4*(1 + 9*target).
void append_dithered_ratings(double target, std::vector<int>& ratings) {
  const long sum = std::lround(4.0 * (1.0 + 9.0 * clamp01(target)));
  const long base = sum / 4;
  const long extra = sum % 4;
  for (long k = 0; k < 4; ++k) {
    ratings.push_back(static_cast<int>(base + (k < extra ? 1 : 0)));
  }
}

}  // namespace

void SimConfig::validate() const {
  if (n_learners < 1) throw InvalidArgumentError("n_learners must be positive");
  if (n_items < 1) throw InvalidArgumentError("n_items must be positive");
  if (!(theta_sd >= 0.0)) throw InvalidArgumentError("theta_sd must be non-negative");
  if (!(b_min < b_max)) throw InvalidArgumentError("b_min must be less than b_max");
  if (routing_item_count < 0) {
    throw InvalidArgumentError("routing_item_count must be non-negative");
  }
  if (!(adaptation_step > 0.0)) {
    throw InvalidArgumentError("adaptation_step must be positive");
  }
  if (session_item_count < 0) {
    throw InvalidArgumentError("session_item_count must be non-negative");
  }
  if (effective_session_items() < routing_item_count) {
    throw InvalidArgumentError(
        "session_item_count must be at least routing_item_count");
  }
  if (administration_every < 1) {
    throw InvalidArgumentError("administration_every must be positive");
  }
  if (!(noise_sd >= 0.0)) throw InvalidArgumentError("noise_sd must be non-negative");
  if (!(el_min >= 0.0 && el_max <= 1.0 && el_min <= el_max)) {
    throw InvalidArgumentError("el_min/el_max must satisfy 0 <= el_min <= el_max <= 1");
  }
  if (!(gl_level >= 0.0 && gl_level <= 1.0)) {
    throw InvalidArgumentError("gl_level must lie in [0,1]");
  }
  if (!(cl_noise_sd >= 0.0)) {
    throw InvalidArgumentError("cl_noise_sd must be non-negative");
  }
}

Population sample_population(const SimConfig& config) {
  config.validate();
  Population pop;
  Rng stream(Rng::substream(config.seed, 0));
  pop.learner_ids.reserve(config.n_learners);
  pop.theta.reserve(config.n_learners);
  for (int i = 0; i < config.n_learners; ++i) {
    pop.learner_ids.push_back(padded_id('L', i, config.n_learners));
    pop.theta.push_back(stream.next_normal(config.theta_mean, config.theta_sd));
  }
  pop.el_level.reserve(config.n_learners);
  for (int i = 0; i < config.n_learners; ++i) {
    pop.el_level.push_back(stream.next_range(config.el_min, config.el_max));
  }
  pop.bank.reserve(config.n_items);
  for (int j = 0; j < config.n_items; ++j) {
    const double b =
        config.n_items == 1
            ? (config.b_min + config.b_max) / 2.0
            : config.b_min + j * (config.b_max - config.b_min) / (config.n_items - 1);
    pop.bank.push_back({padded_id('I', j, config.n_items), b});
  }
  return pop;
}

ResponseMatrix simulate_responses(std::span<const std::string> learner_ids,
                                  std::span<const double> thetas,
                                  std::span<const ItemBankEntry> bank,
                                  std::uint64_t seed) {
  if (learner_ids.size() != thetas.size()) {
    throw InconsistentInputError("learner id and ability counts differ");
  }
  Rng stream(seed);
  std::vector<ResponseMatrix::IndexedEntry> entries;
  entries.reserve(thetas.size() * bank.size());
  for (std::uint32_t i = 0; i < thetas.size(); ++i) {
    for (std::uint32_t j = 0; j < bank.size(); ++j) {
      const double p = rasch_probability(thetas[i], bank[j].b);
      entries.push_back({i, j, stream.next_unit() < p});
    }
  }
  std::vector<std::string> item_ids;
  item_ids.reserve(bank.size());
  for (const auto& item : bank) item_ids.push_back(item.item_id);
  return ResponseMatrix::from_indexed(
      std::vector<std::string>(learner_ids.begin(), learner_ids.end()),
      std::move(item_ids), entries);
}

SessionResult simulate_session(const std::string& learner_id, double theta,
                               double el_level, std::span<const ItemBankEntry> bank,
                               const SimConfig& config, std::size_t learner_index) {
  const int session_items = config.effective_session_items();
  if (static_cast<std::size_t>(session_items) > bank.size()) {
    throw BankExhaustedError("session needs " + std::to_string(session_items) +
                             " items but the bank holds " +
                             std::to_string(bank.size()));
  }

  Rng responses(Rng::substream(config.seed, 1 + 2 * learner_index));
  Rng questionnaire(Rng::substream(config.seed, 2 + 2 * learner_index));

  SessionResult out;
  out.routing_end_ts = kEventSpacingSeconds * config.routing_item_count;

  std::vector<bool> served(bank.size(), false);
  double level = config.routing_level;
  std::vector<double> interval_b;
  interval_b.reserve(config.administration_every);

  for (int k = 1; k <= session_items; ++k) {
    const bool routing = k <= config.routing_item_count;
    const double target = routing ? config.routing_level : level;

    std::size_t pick = bank.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < bank.size(); ++j) {
      if (served[j]) continue;
      const double distance = std::abs(bank[j].b - target);
      if (distance < best) {  // ties keep the earlier, easier item
        best = distance;
        pick = j;
      }
    }
    served[pick] = true;

    const double timestamp = kEventSpacingSeconds * k;
    const double p = rasch_probability(theta, bank[pick].b);
    const bool correct = responses.next_unit() < p;
    out.events.push_back({learner_id, bank[pick].item_id, timestamp, correct});
    out.served_level.push_back(target);
    interval_b.push_back(bank[pick].b);

    if (!routing) {
      level = std::clamp(level + (correct ? 1.0 : -1.0) * config.adaptation_step,
                         config.b_min, config.b_max);
    }

    if (k % config.administration_every == 0) {
      double mean_b = 0.0;
      for (double b : interval_b) mean_b += b;
      mean_b /= interval_b.size();
      const double difficulty_unit =
          clamp01((mean_b - config.b_min) / (config.b_max - config.b_min));

      QuestionnaireAdministration admin;
      admin.learner_id = learner_id;
      admin.timestamp_s = timestamp;
      admin.ratings.reserve(10);
      for (int r = 0; r < 3; ++r) {
        admin.ratings.push_back(to_rating(
            clamp01(difficulty_unit + questionnaire.next_normal(0.0, config.noise_sd))));
      }
      double el_sum = 0.0;
      std::vector<int> el_ratings;
      el_ratings.reserve(3);
      for (int r = 0; r < 3; ++r) {
        const double value =
            clamp01(el_level + questionnaire.next_normal(0.0, config.noise_sd));
        el_sum += value;
        el_ratings.push_back(to_rating(value));
      }
      for (int rating : el_ratings) admin.ratings.push_back(rating);

      if (config.couple_cl) {
        double il_reported = 0.0;
        for (int r = 0; r < 3; ++r) il_reported += rating_to_unit(admin.ratings[r]);
        il_reported /= 3.0;
        double el_reported = 0.0;
        for (int rating : el_ratings) el_reported += rating_to_unit(rating);
        el_reported /= 3.0;
        const double cl_target =
            clamp01((difficulty_unit + el_reported) / 2.0 +
                    questionnaire.next_normal(0.0, config.cl_noise_sd));
        // Overall load is the mean of all ten unit ratings; pick germane
        // ratings that land the mean on the target.
        const double germane_target =
            (10.0 * cl_target - 3.0 * il_reported - 3.0 * el_reported) / 4.0;
        append_dithered_ratings(germane_target, admin.ratings);
      } else {
        const int rating = to_rating(config.gl_level);
        for (int r = 0; r < 4; ++r) admin.ratings.push_back(rating);
      }

      out.administrations.push_back(std::move(admin));
      out.true_il.push_back(difficulty_unit);
      out.true_el.push_back(el_sum / 3.0);
      interval_b.clear();
    }
  }
  return out;
}

SimDataset simulate_dataset(const SimConfig& config) {
  config.validate();
  SimDataset dataset;
  dataset.population = sample_population(config);
  dataset.subscale_map = SubscaleMap::default_map();
  dataset.sessions.reserve(config.n_learners);
  for (int i = 0; i < config.n_learners; ++i) {
    dataset.sessions.push_back(simulate_session(
        dataset.population.learner_ids[i], dataset.population.theta[i],
        dataset.population.el_level[i], dataset.population.bank, config, i));
  }
  return dataset;
}

namespace {

void write_text_file(const std::filesystem::path& path,
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

}  // namespace

void emit_fixture(const SimDataset& dataset, const SimConfig& config,
                  const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory", dir.string());

  std::vector<InteractionEvent> events;
  std::vector<QuestionnaireAdministration> admins;
  for (const auto& session : dataset.sessions) {
    events.insert(events.end(), session.events.begin(), session.events.end());
    admins.insert(admins.end(), session.administrations.begin(),
                  session.administrations.end());
  }
  write_text_file(dir / "events.csv",
                  [&](std::ostream& out) { write_events(out, events); });

  std::vector<ItemMeta> items;
  items.reserve(dataset.population.bank.size());
  for (const auto& entry : dataset.population.bank) {
    items.push_back({entry.item_id, ItemKind::independent, std::nullopt, std::nullopt});
  }
  write_text_file(dir / "items.csv",
                  [&](std::ostream& out) { write_items(out, items); });
  write_text_file(dir / "questionnaires.csv",
                  [&](std::ostream& out) { write_questionnaires(out, admins); });
  write_text_file(dir / "subscale_map.json", [&](std::ostream& out) {
    write_subscale_map(out, dataset.subscale_map);
  });

  nlohmann::json truth;
  nlohmann::json theta = nlohmann::json::object();
  for (std::size_t i = 0; i < dataset.population.learner_ids.size(); ++i) {
    theta[dataset.population.learner_ids[i]] = dataset.population.theta[i];
  }
  truth["theta"] = std::move(theta);
  nlohmann::json b = nlohmann::json::object();
  for (const auto& entry : dataset.population.bank) {
    b[entry.item_id] = entry.b;
  }
  truth["b"] = std::move(b);
  nlohmann::json routing = nlohmann::json::object();
  for (std::size_t i = 0; i < dataset.sessions.size(); ++i) {
    routing[dataset.population.learner_ids[i]] = dataset.sessions[i].routing_end_ts;
  }
  truth["routing_end_ts"] = std::move(routing);
  truth["config"] = {
      {"n_learners", config.n_learners},
      {"n_items", config.n_items},
      {"theta_mean", config.theta_mean},
      {"theta_sd", config.theta_sd},
      {"b_min", config.b_min},
      {"b_max", config.b_max},
      {"routing_item_count", config.routing_item_count},
      {"routing_level", config.routing_level},
      {"adaptation_step", config.adaptation_step},
      {"session_item_count", config.session_item_count},
      {"administration_every", config.administration_every},
      {"noise_sd", config.noise_sd},
      {"el_min", config.el_min},
      {"el_max", config.el_max},
      {"gl_level", config.gl_level},
      {"couple_cl", config.couple_cl},
      {"cl_noise_sd", config.cl_noise_sd},
  };
  truth["seed"] = config.seed;
  write_text_file(dir / "ground_truth.json",
                  [&](std::ostream& out) { out << truth.dump(2) << '\n'; });
}

}  // namespace cogload
