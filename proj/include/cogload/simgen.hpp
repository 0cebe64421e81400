#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cogload/ingest.hpp"
#include "cogload/response_matrix.hpp"

namespace cogload {

// Synthetic-cohort configuration. Difficulty levels live directly on the
// logit scale; routing_level plays the role of the fixed entry level an
// adaptive system starts every learner at.
struct SimConfig {
  int n_learners = 200;
  int n_items = 100;
  double theta_mean = 0.0;
  double theta_sd = 1.0;
  double b_min = -3.0;  // item difficulty grid, equally spaced
  double b_max = 3.0;
  int routing_item_count = 10;
  double routing_level = 1.5;
  double adaptation_step = 0.4;
  int session_item_count = 0;  // 0 = serve the whole bank
  int administration_every = 10;
  double noise_sd = 0.05;  // questionnaire rating noise
  std::uint64_t seed = 1;

  // Questionnaire shape.
  double el_min = 0.1;  // per-learner extraneous-load band
  double el_max = 0.9;
  double gl_level = 0.75;
  bool couple_cl = false;     // make the overall-load ratings track
                              // (difficulty_std + extraneous)/2
  double cl_noise_sd = 0.05;  // noise on that coupling

  int effective_session_items() const {
    return session_item_count > 0 ? session_item_count : n_items;
  }

  // Throws InvalidArgumentError naming the offending field.
  void validate() const;
};

struct ItemBankEntry {
  std::string item_id;
  double b = 0.0;
};

// Ground-truth population: abilities, per-learner extraneous-load levels,
// and the difficulty grid.
struct Population {
  std::vector<std::string> learner_ids;
  std::vector<double> theta;
  std::vector<double> el_level;
  std::vector<ItemBankEntry> bank;  // ascending difficulty
};

// Abilities ~ Normal(theta_mean, theta_sd), difficulties equally spaced on
// [b_min, b_max]. Deterministic in (config, seed).
Population sample_population(const SimConfig& config);

// Complete matrix of Bernoulli draws with Rasch success probabilities.
ResponseMatrix simulate_responses(std::span<const std::string> learner_ids,
                                  std::span<const double> thetas,
                                  std::span<const ItemBankEntry> bank,
                                  std::uint64_t seed);

// One adaptive session plus its questionnaires and ground-truth trace.
struct SessionResult {
  std::vector<InteractionEvent> events;  // 30-second spacing
  std::vector<QuestionnaireAdministration> administrations;
  std::vector<double> served_level;  // target level per event
  std::vector<double> true_il;       // per administration: interval mean
                                     // difficulty mapped to [0,1]
  std::vector<double> true_el;       // per administration: pre-quantization
                                     // extraneous level
  double routing_end_ts = 0.0;
};

// Serves the nearest unserved item to the current level (ties take the
// easier item): the routing phase pins the level to routing_level, after
// which each answer moves it by +-adaptation_step, clamped to the grid
// range. Substream layout: population draws use stream 0, learner i uses
// streams 1+2i (responses) and 2+2i (questionnaires). Throws
// BankExhaustedError when the session asks for more items than the bank
// holds.
SessionResult simulate_session(const std::string& learner_id, double theta,
                               double el_level, std::span<const ItemBankEntry> bank,
                               const SimConfig& config, std::size_t learner_index);

struct SimDataset {
  Population population;
  std::vector<SessionResult> sessions;  // learner-index order
  SubscaleMap subscale_map;
};

SimDataset simulate_dataset(const SimConfig& config);

// Writes events.csv, items.csv, questionnaires.csv, subscale_map.json and
// ground_truth.json into `dir`, creating it if needed. Everything written
// parses back to the in-memory dataset exactly.
void emit_fixture(const SimDataset& dataset, const SimConfig& config,
                  const std::filesystem::path& dir);

}  // namespace cogload
