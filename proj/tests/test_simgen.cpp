#include "cogload/simgen.hpp"

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include <gtest/gtest.h>

#include "cogload/errors.hpp"
#include "cogload/rng.hpp"
#include "cogload/segmenting.hpp"

namespace cogload {
namespace {

namespace fs = std::filesystem;

SimConfig small_config() {
  SimConfig config;
  config.n_learners = 4;
  config.n_items = 30;
  config.routing_item_count = 5;
  config.administration_every = 5;
  config.session_item_count = 20;
  config.seed = 11;
  return config;
}

fs::path fresh_temp_dir(const std::string& tag) {
  const fs::path dir =
      fs::temp_directory_path() / ("cogload_test_" + tag + "_" +
                                   std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

TEST(SampleGrid, EquallySpacedDifficulties) {
  SimConfig config;
  config.n_learners = 1;
  config.n_items = 3;
  config.b_min = -1.0;
  config.b_max = 1.0;
  config.routing_item_count = 0;
  const auto pop = sample_population(config);
  ASSERT_EQ(pop.bank.size(), 3u);
  EXPECT_DOUBLE_EQ(pop.bank[0].b, -1.0);
  EXPECT_DOUBLE_EQ(pop.bank[1].b, 0.0);
  EXPECT_DOUBLE_EQ(pop.bank[2].b, 1.0);
}

TEST(SamplePopulation, SameSeedSamePopulation) {
  const SimConfig config = small_config();
  const auto a = sample_population(config);
  const auto b = sample_population(config);
  EXPECT_EQ(a.theta, b.theta);
  EXPECT_EQ(a.el_level, b.el_level);
}

TEST(SamplePopulation, ZeroSpreadCollapsesToMean) {
  SimConfig config = small_config();
  config.theta_mean = 0.7;
  config.theta_sd = 0.0;
  const auto pop = sample_population(config);
  for (double theta : pop.theta) EXPECT_DOUBLE_EQ(theta, 0.7);
}

TEST(SimConfig, ValidationNamesTheField) {
  SimConfig config = small_config();
  config.n_items = 0;
  try {
    config.validate();
    FAIL() << "expected InvalidArgumentError";
  } catch (const InvalidArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("n_items"), std::string::npos);
  }
  config = small_config();
  config.b_min = 2.0;
  config.b_max = 2.0;
  EXPECT_THROW(config.validate(), InvalidArgumentError);
  config = small_config();
  config.session_item_count = 3;  // below routing_item_count
  EXPECT_THROW(config.validate(), InvalidArgumentError);
  config = small_config();
  config.administration_every = 0;
  EXPECT_THROW(config.validate(), InvalidArgumentError);
}

TEST(SimulateResponses, DeterministicAndComplete) {
  const SimConfig config = small_config();
  const auto pop = sample_population(config);
  const auto a = simulate_responses(pop.learner_ids, pop.theta, pop.bank, 77);
  const auto b = simulate_responses(pop.learner_ids, pop.theta, pop.bank, 77);
  ASSERT_EQ(a.n_entries(), pop.theta.size() * pop.bank.size());
  for (std::size_t i = 0; i < a.n_learners(); ++i) {
    const auto ea = a.learner_entries(i);
    const auto eb = b.learner_entries(i);
    ASSERT_EQ(ea.size(), eb.size());
    for (std::size_t k = 0; k < ea.size(); ++k) {
      EXPECT_EQ(ea[k].correct, eb[k].correct);
    }
  }
}

TEST(SimulateResponses, BalancedWhenAbilityMatchesDifficulty) {
  // 100 x 100 draws at theta == b: accuracy within 3 binomial sd of 0.5.
  std::vector<std::string> ids;
  std::vector<double> thetas;
  for (int i = 0; i < 100; ++i) {
    ids.push_back("L" + std::to_string(i));
    thetas.push_back(0.0);
  }
  std::vector<ItemBankEntry> bank;
  for (int j = 0; j < 100; ++j) bank.push_back({"I" + std::to_string(j), 0.0});
  const auto m = simulate_responses(ids, thetas, bank, 123);
  double correct = 0.0;
  for (std::size_t i = 0; i < m.n_learners(); ++i) {
    for (const auto& e : m.learner_entries(i)) correct += e.correct ? 1.0 : 0.0;
  }
  const double accuracy = correct / 10000.0;
  EXPECT_NEAR(accuracy, 0.5, 3.0 * 0.005);
}

TEST(SimulateResponses, SaturatesOnVeryEasyItems) {
  std::vector<std::string> ids;
  std::vector<double> thetas;
  for (int i = 0; i < 100; ++i) {
    ids.push_back("L" + std::to_string(i));
    thetas.push_back(0.0);
  }
  std::vector<ItemBankEntry> bank;
  for (int j = 0; j < 50; ++j) bank.push_back({"I" + std::to_string(j), -10.0});
  const auto m = simulate_responses(ids, thetas, bank, 5);
  double correct = 0.0;
  for (std::size_t i = 0; i < m.n_learners(); ++i) {
    for (const auto& e : m.learner_entries(i)) correct += e.correct ? 1.0 : 0.0;
  }
  EXPECT_GE(correct / 5000.0, 0.999);
}

TEST(SimulateSession, RoutingPhaseServesTheRoutingLevel) {
  const SimConfig config = small_config();
  const auto pop = sample_population(config);
  const auto session = simulate_session(pop.learner_ids[0], pop.theta[0],
                                        pop.el_level[0], pop.bank, config, 0);
  ASSERT_EQ(session.events.size(), 20u);
  for (int k = 0; k < config.routing_item_count; ++k) {
    EXPECT_DOUBLE_EQ(session.served_level[k], config.routing_level);
  }
  EXPECT_DOUBLE_EQ(session.routing_end_ts, 30.0 * config.routing_item_count);
  // Timestamps advance in 30-second steps.
  for (std::size_t k = 0; k < session.events.size(); ++k) {
    EXPECT_DOUBLE_EQ(session.events[k].timestamp_s, 30.0 * (k + 1));
  }
  // One administration per administration_every items.
  ASSERT_EQ(session.administrations.size(), 4u);
  EXPECT_DOUBLE_EQ(session.administrations[0].timestamp_s, 150.0);
}

TEST(SimulateSession, HighAbilityPushesTheLevelToTheCeiling) {
  SimConfig config = small_config();
  config.n_items = 60;
  config.session_item_count = 40;
  const auto pop = sample_population(config);
  const double theta = config.b_max + 5.0;
  const auto session = simulate_session("L1", theta, 0.5, pop.bank, config, 0);
  for (std::size_t k = config.routing_item_count + 1;
       k < session.served_level.size(); ++k) {
    EXPECT_GE(session.served_level[k], session.served_level[k - 1]);
  }
  EXPECT_DOUBLE_EQ(session.served_level.back(), config.b_max);
}

TEST(SimulateSession, LevelRandomWalksAroundAMatchedAbility) {
  // theta == routing_level: the level self-corrects around it. Empirically
  // most served levels stay within 3 adaptation steps.
  SimConfig config;
  config.n_learners = 1;
  config.n_items = 400;
  config.session_item_count = 100;
  config.routing_item_count = 10;
  config.routing_level = 0.5;
  config.adaptation_step = 0.3;
  config.b_min = -4.0;
  config.b_max = 4.0;
  const auto pop = sample_population(config);

  int total = 0;
  int within = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    SimConfig c = config;
    c.seed = seed;
    const auto session =
        simulate_session("L1", config.routing_level, 0.5, pop.bank, c, 0);
    for (std::size_t k = config.routing_item_count; k < session.served_level.size();
         ++k) {
      total += 1;
      if (std::abs(session.served_level[k] - config.routing_level) <=
          3.0 * config.adaptation_step) {
        within += 1;
      }
    }
  }
  EXPECT_GT(static_cast<double>(within) / total, 0.75);
}

TEST(SimulateSession, ExhaustedBankIsAnError) {
  SimConfig config = small_config();
  config.session_item_count = config.n_items + 1;
  const auto pop = sample_population(small_config());
  EXPECT_THROW(simulate_session("L1", 0.0, 0.5, pop.bank, config, 0),
               BankExhaustedError);
}

TEST(SimulateSession, MonotoneAbilityEffectAcrossSeeds) {
  SimConfig config;
  config.n_learners = 1;
  config.n_items = 200;
  config.session_item_count = 80;
  config.routing_item_count = 10;
  const auto pop = sample_population(config);

  double high_sum = 0.0;
  double low_sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    SimConfig c = config;
    c.seed = seed;
    const auto high = simulate_session("L1", 1.5, 0.5, pop.bank, c, 0);
    const auto low = simulate_session("L1", -1.5, 0.5, pop.bank, c, 1);
    for (std::size_t k = config.routing_item_count; k < high.served_level.size();
         ++k) {
      high_sum += high.served_level[k];
      low_sum += low.served_level[k];
    }
  }
  EXPECT_GT(high_sum, low_sum);
}

TEST(SimulateDataset, FullyDeterministic) {
  const SimConfig config = small_config();
  const auto a = simulate_dataset(config);
  const auto b = simulate_dataset(config);
  ASSERT_EQ(a.sessions.size(), b.sessions.size());
  for (std::size_t i = 0; i < a.sessions.size(); ++i) {
    EXPECT_EQ(a.sessions[i].events, b.sessions[i].events);
    EXPECT_EQ(a.sessions[i].administrations, b.sessions[i].administrations);
  }
}

TEST(SimulateDataset, EventsReferenceBankItems) {
  const auto dataset = simulate_dataset(small_config());
  std::set<std::string> bank_ids;
  for (const auto& item : dataset.population.bank) bank_ids.insert(item.item_id);
  for (const auto& session : dataset.sessions) {
    for (const auto& e : session.events) {
      EXPECT_TRUE(bank_ids.count(e.item_id)) << e.item_id;
    }
  }
}

TEST(SimulateDataset, RoutingIntervalsAreHarderThanTheFirstLearningInterval) {
  SimConfig config;
  config.n_learners = 35;
  config.n_items = 200;
  config.session_item_count = 60;
  config.routing_item_count = 20;
  config.administration_every = 10;
  config.routing_level = 1.5;
  config.theta_mean = 0.0;
  config.seed = 31;
  const auto dataset = simulate_dataset(config);

  double routing_sum = 0.0;
  int routing_n = 0;
  double first_learning_sum = 0.0;
  int first_learning_n = 0;
  for (const auto& session : dataset.sessions) {
    // Administrations 1..2 close routing intervals; 3 is the first
    // learning interval.
    routing_sum += session.true_il[0] + session.true_il[1];
    routing_n += 2;
    first_learning_sum += session.true_il[2];
    first_learning_n += 1;
  }
  EXPECT_GT(routing_sum / routing_n, first_learning_sum / first_learning_n);
}

TEST(EmitFixture, RoundTripsThroughTheParsers) {
  const SimConfig config = small_config();
  const auto dataset = simulate_dataset(config);
  const fs::path dir = fresh_temp_dir("roundtrip");
  emit_fixture(dataset, config, dir);

  std::vector<InteractionEvent> expected_events;
  std::vector<QuestionnaireAdministration> expected_admins;
  for (const auto& session : dataset.sessions) {
    expected_events.insert(expected_events.end(), session.events.begin(),
                           session.events.end());
    expected_admins.insert(expected_admins.end(),
                           session.administrations.begin(),
                           session.administrations.end());
  }

  std::ifstream events_in(dir / "events.csv");
  EXPECT_EQ(parse_events(events_in), expected_events);
  std::ifstream admins_in(dir / "questionnaires.csv");
  EXPECT_EQ(parse_questionnaires(admins_in), expected_admins);
  std::ifstream map_in(dir / "subscale_map.json");
  EXPECT_EQ(parse_subscale_map(map_in), dataset.subscale_map);
  std::ifstream items_in(dir / "items.csv");
  const auto items = parse_items(items_in);
  ASSERT_EQ(items.size(), dataset.population.bank.size());
  for (std::size_t j = 0; j < items.size(); ++j) {
    EXPECT_EQ(items[j].item_id, dataset.population.bank[j].item_id);
    EXPECT_EQ(items[j].kind, ItemKind::independent);
  }

  std::ifstream truth_in(dir / "ground_truth.json");
  const auto truth = nlohmann::json::parse(truth_in);
  EXPECT_EQ(truth.at("theta").size(),
            static_cast<std::size_t>(config.n_learners));
  EXPECT_EQ(truth.at("b").size(), static_cast<std::size_t>(config.n_items));
  EXPECT_EQ(truth.at("seed").get<std::uint64_t>(), config.seed);
  for (std::size_t i = 0; i < dataset.population.learner_ids.size(); ++i) {
    const auto& learner = dataset.population.learner_ids[i];
    EXPECT_DOUBLE_EQ(truth.at("theta").at(learner).get<double>(),
                     dataset.population.theta[i]);
    EXPECT_DOUBLE_EQ(truth.at("routing_end_ts").at(learner).get<double>(),
                     dataset.sessions[i].routing_end_ts);
  }
  fs::remove_all(dir);
}

TEST(EmitFixture, GoldenFixtureIsByteStable) {
  SimConfig config;
  config.seed = 42;
  config.n_learners = 5;
  config.n_items = 20;
  const auto dataset = simulate_dataset(config);
  const fs::path dir = fresh_temp_dir("golden");
  emit_fixture(dataset, config, dir);

  const fs::path golden = fs::path(COGLOAD_GOLDEN_DIR) / "fixture_s42";
  for (const char* name : {"events.csv", "items.csv", "questionnaires.csv",
                           "subscale_map.json", "ground_truth.json"}) {
    EXPECT_EQ(slurp(dir / name), slurp(golden / name)) << name;
  }
  fs::remove_all(dir);
}

}  // namespace
}  // namespace cogload
