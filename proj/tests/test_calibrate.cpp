#include "cogload/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "cogload/errors.hpp"
#include "cogload/rng.hpp"
#include "cogload/simgen.hpp"
#include "oracles.hpp"

namespace cogload {
namespace {

ResponseMatrix matrix_from(std::vector<Response> responses) {
  return ResponseMatrix::from_responses(responses);
}

// Rows are learners, '1'/'0' per item; items named I1..In, learners L1..Lm.
ResponseMatrix matrix_from_pattern(const std::vector<std::string>& rows) {
  std::vector<Response> responses;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      responses.push_back({"L" + std::to_string(i + 1), "I" + std::to_string(j + 1),
                           rows[i][j] == '1'});
    }
  }
  return matrix_from(std::move(responses));
}

TEST(LogLikelihood, EmptyMatrixIsZero) {
  const ResponseMatrix m = matrix_from({});
  EXPECT_DOUBLE_EQ(log_likelihood(m, {}, {}), 0.0);
}

TEST(LogLikelihood, SingleCorrectAtEqualParametersIsLogHalf) {
  const ResponseMatrix m = matrix_from({{"L1", "I1", true}});
  const std::vector<double> theta{0.7};
  const std::vector<double> b{0.7};
  EXPECT_NEAR(log_likelihood(m, theta, b), -0.6931471805599453, 1e-6);
}

TEST(LogLikelihood, EqualParametersGiveLogHalfPerEntry) {
  std::vector<Response> responses;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 3; ++j) {
      responses.push_back({"L" + std::to_string(i + 1), "I" + std::to_string(j + 1),
                           (i + j) % 2 == 0});
    }
  }
  const ResponseMatrix m = matrix_from(responses);
  const std::vector<double> theta(4, 1.3);
  const std::vector<double> b(3, 1.3);
  EXPECT_NEAR(log_likelihood(m, theta, b), 12.0 * std::log(0.5), 1e-12);
}

TEST(LogLikelihood, MissingParameterIsAnError) {
  const ResponseMatrix m = matrix_from({{"L1", "I1", true}, {"L2", "I1", false}});
  const std::vector<double> short_theta{0.0};
  const std::vector<double> b{0.0};
  EXPECT_THROW(log_likelihood(m, short_theta, b), InconsistentInputError);
  const std::vector<double> theta{0.0, 0.0};
  EXPECT_THROW(log_likelihood(m, theta, {}), InconsistentInputError);
}

TEST(LogLikelihood, TranslationInvarianceProperty) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n_learners = 2 + static_cast<int>(rng.next_u64() % 6);
    const int n_items = 2 + static_cast<int>(rng.next_u64() % 6);
    const ResponseMatrix m = testing::random_matrix(rng, n_learners, n_items);
    std::vector<double> theta(n_learners);
    std::vector<double> b(n_items);
    for (auto& v : theta) v = rng.next_range(-2.0, 2.0);
    for (auto& v : b) v = rng.next_range(-2.0, 2.0);
    const double base = log_likelihood(m, theta, b);
    const double shift = rng.next_range(-3.0, 3.0);
    for (auto& v : theta) v += shift;
    for (auto& v : b) v += shift;
    const double shifted = log_likelihood(m, theta, b);
    EXPECT_NEAR(shifted, base, 1e-12 * std::abs(base));
  }
}

TEST(LikelihoodGradients, AllCorrectAtEqualParameters) {
  // x - P = 0.5 per entry, so each learner gradient is 0.5 * items answered.
  std::vector<Response> responses;
  for (int j = 0; j < 5; ++j) {
    responses.push_back({"L1", "I" + std::to_string(j + 1), true});
  }
  const ResponseMatrix m = matrix_from(responses);
  const std::vector<double> theta{0.0};
  const std::vector<double> b(5, 0.0);
  const auto g = likelihood_gradients(m, theta, b);
  EXPECT_NEAR(g.d_theta[0], 5 * 0.5, 1e-12);
  for (int j = 0; j < 5; ++j) EXPECT_NEAR(g.d_b[j], -0.5, 1e-12);
}

TEST(LikelihoodGradients, VanishInTheSaturatedLimit) {
  const ResponseMatrix m = matrix_from({{"L1", "I1", true}, {"L1", "I2", false}});
  const std::vector<double> theta{0.0};
  const std::vector<double> b{-40.0, 40.0};  // correct on easy, wrong on hard
  const auto g = likelihood_gradients(m, theta, b);
  EXPECT_NEAR(g.d_theta[0], 0.0, 1e-9);
  EXPECT_NEAR(g.d_b[0], 0.0, 1e-9);
  EXPECT_NEAR(g.d_b[1], 0.0, 1e-9);
}

TEST(LikelihoodGradients, MatchCentralFiniteDifferences) {
  Rng rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    const ResponseMatrix m = testing::random_matrix(rng, 4, 4);
    std::vector<double> theta(m.n_learners());
    std::vector<double> b(m.n_items());
    for (auto& v : theta) v = rng.next_range(-2.0, 2.0);
    for (auto& v : b) v = rng.next_range(-2.0, 2.0);
    const auto analytic = likelihood_gradients(m, theta, b);
    const auto fd = testing::fd_gradients(m, theta, b, 1e-5);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      EXPECT_NEAR(analytic.d_theta[i], fd.d_theta[i],
                  1e-6 * std::max(1.0, std::abs(fd.d_theta[i])));
    }
    for (std::size_t j = 0; j < b.size(); ++j) {
      EXPECT_NEAR(analytic.d_b[j], fd.d_b[j],
                  1e-6 * std::max(1.0, std::abs(fd.d_b[j])));
    }
  }
}

TEST(LikelihoodGradients, SecondDerivativesMatchSecondDifferences) {
  Rng rng(33);
  const ResponseMatrix m = testing::random_matrix(rng, 5, 5);
  std::vector<double> theta(m.n_learners());
  std::vector<double> b(m.n_items());
  for (auto& v : theta) v = rng.next_range(-1.5, 1.5);
  for (auto& v : b) v = rng.next_range(-1.5, 1.5);
  const auto analytic = likelihood_gradients(m, theta, b);
  const double h = 1e-4;
  const double base = log_likelihood(m, theta, b);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    std::vector<double> t = theta;
    t[i] += h;
    const double up = log_likelihood(m, t, b);
    t[i] -= 2 * h;
    const double down = log_likelihood(m, t, b);
    const double fd2 = (up - 2 * base + down) / (h * h);
    EXPECT_NEAR(analytic.d2_theta[i], fd2, 1e-4 * std::max(1.0, std::abs(fd2)));
  }
  for (std::size_t j = 0; j < b.size(); ++j) {
    std::vector<double> bb = b;
    bb[j] += h;
    const double up = log_likelihood(m, theta, bb);
    bb[j] -= 2 * h;
    const double down = log_likelihood(m, theta, bb);
    const double fd2 = (up - 2 * base + down) / (h * h);
    EXPECT_NEAR(analytic.d2_b[j], fd2, 1e-4 * std::max(1.0, std::abs(fd2)));
  }
}

TEST(ExcludeDegenerate, RemovesAllCorrectItem) {
  const ResponseMatrix m = matrix_from_pattern({"110", "101"});
  const auto [reduced, exclusions] = exclude_degenerate(m);
  ASSERT_FALSE(exclusions.empty());
  const auto item = std::find_if(exclusions.begin(), exclusions.end(),
                                 [](const Exclusion& e) {
                                   return e.kind == Exclusion::Kind::item &&
                                          e.id == "I1";
                                 });
  ASSERT_NE(item, exclusions.end());
  EXPECT_EQ(item->reason, ExclusionReason::all_correct);
}

TEST(ExcludeDegenerate, RemovesAllIncorrectLearner) {
  const ResponseMatrix m = matrix_from_pattern({"00", "10", "01"});
  const auto [reduced, exclusions] = exclude_degenerate(m);
  const auto learner = std::find_if(exclusions.begin(), exclusions.end(),
                                    [](const Exclusion& e) {
                                      return e.kind == Exclusion::Kind::learner &&
                                             e.id == "L1";
                                    });
  ASSERT_NE(learner, exclusions.end());
  EXPECT_EQ(learner->reason, ExclusionReason::all_incorrect);
}

TEST(ExcludeDegenerate, CascadeAfterItemRemoval) {
  // I1 is answered correctly by everyone; dropping it leaves L2 with only
  // incorrect responses.
  const ResponseMatrix m = matrix_from_pattern({
      "110",  // L1
      "100",  // L2
      "101",  // L3
  });
  const auto [reduced, exclusions] = exclude_degenerate(m);
  ASSERT_EQ(exclusions.size(), 2u);
  EXPECT_EQ(exclusions[0].kind, Exclusion::Kind::item);
  EXPECT_EQ(exclusions[0].id, "I1");
  EXPECT_EQ(exclusions[0].reason, ExclusionReason::all_correct);
  EXPECT_EQ(exclusions[1].kind, Exclusion::Kind::learner);
  EXPECT_EQ(exclusions[1].id, "L2");
  EXPECT_EQ(exclusions[1].reason, ExclusionReason::cascade);
  EXPECT_EQ(reduced.n_learners(), 2u);
  EXPECT_EQ(reduced.n_items(), 2u);
}

TEST(ExcludeDegenerate, FullyDegenerateMatrixIsAnError) {
  EXPECT_THROW(exclude_degenerate(matrix_from_pattern({"11", "11"})),
               EmptyAfterReductionError);
  EXPECT_THROW(exclude_degenerate(matrix_from({{"L1", "I1", true}})),
               EmptyAfterReductionError);
}

TEST(CalibrateJml, RecoversGridSearchOptimumOnSmallMatrix) {
  const ResponseMatrix m = matrix_from_pattern({"110", "011", "101"});
  const CalibrationResult result = calibrate_jml(m);
  ASSERT_TRUE(result.converged);
  ASSERT_TRUE(result.exclusions.empty());
  const auto oracle = testing::grid_search_jml(m);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(result.abilities[i].theta, oracle.theta[i], 0.05);
  }
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_NEAR(result.items[j].b, oracle.b[j], 0.05);
  }
}

TEST(CalibrateJml, MeanDifficultyIsZero) {
  const ResponseMatrix m = matrix_from_pattern({"110", "011", "101", "100"});
  const CalibrationResult result = calibrate_jml(m);
  double mean_b = 0.0;
  for (const auto& item : result.items) mean_b += item.b;
  mean_b /= result.items.size();
  EXPECT_NEAR(mean_b, 0.0, 1e-9);
}

TEST(CalibrateJml, LikelihoodAscends) {
  Rng rng(44);
  for (int trial = 0; trial < 20; ++trial) {
    const ResponseMatrix m = testing::random_matrix(rng, 6, 6);
    CalibrationResult result;
    try {
      result = calibrate_jml(m);
    } catch (const EmptyAfterReductionError&) {
      continue;
    }
    EXPECT_GE(result.final_log_likelihood,
              result.initial_log_likelihood - 1e-9);
    EXPECT_LE(result.final_log_likelihood, 0.0);
    EXPECT_TRUE(std::isfinite(result.final_log_likelihood));
  }
}

TEST(CalibrateJml, PermutingItemOrderPermutesOutputExactly) {
  // Same responses, listed so items and learners first appear in a
  // different order.
  std::vector<Response> original;
  std::vector<std::string> rows = {"1101", "0110", "1010", "0011"};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      original.push_back({"L" + std::to_string(i + 1), "I" + std::to_string(j + 1),
                          rows[i][j] == '1'});
    }
  }
  std::vector<Response> permuted(original.rbegin(), original.rend());

  const CalibrationResult a = calibrate_jml(matrix_from(original));
  const CalibrationResult b = calibrate_jml(matrix_from(permuted));

  std::map<std::string, double> b_by_id;
  for (const auto& item : b.items) b_by_id[item.item_id] = item.b;
  std::map<std::string, double> theta_by_id;
  for (const auto& ability : b.abilities) theta_by_id[ability.learner_id] = ability.theta;

  ASSERT_EQ(a.items.size(), b.items.size());
  for (const auto& item : a.items) {
    EXPECT_EQ(item.b, b_by_id.at(item.item_id));  // bit-identical
  }
  for (const auto& ability : a.abilities) {
    EXPECT_EQ(ability.theta, theta_by_id.at(ability.learner_id));
  }
  // Output order follows input first-appearance order.
  EXPECT_EQ(a.items.front().item_id, "I1");
  EXPECT_EQ(b.items.front().item_id, "I4");
}

TEST(CalibrateJml, DeterministicAcrossRuns) {
  Rng rng(55);
  const ResponseMatrix m = testing::random_matrix(rng, 8, 8);
  const CalibrationResult a = calibrate_jml(m);
  const CalibrationResult b = calibrate_jml(m);
  ASSERT_EQ(a.items.size(), b.items.size());
  for (std::size_t j = 0; j < a.items.size(); ++j) {
    EXPECT_EQ(a.items[j].b, b.items[j].b);
  }
  EXPECT_EQ(a.final_log_likelihood, b.final_log_likelihood);
  EXPECT_EQ(a.iterations_used, b.iterations_used);
}

TEST(CalibrateJml, RawScoreSufficiencyOnCompleteMatrix) {
  const SimConfig config = [] {
    SimConfig c;
    c.n_learners = 100;
    c.n_items = 8;
    c.b_min = -1.5;
    c.b_max = 1.5;
    c.routing_item_count = 0;
    c.seed = 1234;
    return c;
  }();
  const Population pop = sample_population(config);
  const ResponseMatrix m =
      simulate_responses(pop.learner_ids, pop.theta, pop.bank, 99);
  const CalibrationResult result = calibrate_jml(m);

  // Degenerate learners are dropped before estimation; raw scores are the
  // correct counts over the learners actually used, where the matrix is
  // still complete.
  const auto [reduced, exclusions] = exclude_degenerate(m);
  std::map<std::string, int> correct_count;
  for (std::size_t j = 0; j < reduced.n_items(); ++j) {
    int count = 0;
    for (const auto& e : reduced.item_entries(j)) count += e.correct ? 1 : 0;
    correct_count[reduced.item_id(j)] = count;
  }
  for (const auto& lhs : result.items) {
    for (const auto& rhs : result.items) {
      const int cl = correct_count.at(lhs.item_id);
      const int cr = correct_count.at(rhs.item_id);
      if (cl == cr) {
        EXPECT_NEAR(lhs.b, rhs.b, 1e-3);
      } else if (cl > cr) {
        EXPECT_LT(lhs.b, rhs.b);
      }
    }
  }
}

TEST(CalibrateJml, ValidatesConfig) {
  const ResponseMatrix m = matrix_from_pattern({"10", "01"});
  CalibrationConfig config;
  config.max_iterations = 0;
  EXPECT_THROW(calibrate_jml(m, config), InvalidArgumentError);
  config = {};
  config.convergence_tolerance = 0.0;
  EXPECT_THROW(calibrate_jml(m, config), InvalidArgumentError);
  config = {};
  config.newton_damping = 1.5;
  EXPECT_THROW(calibrate_jml(m, config), InvalidArgumentError);
}

TEST(CalibrateJml, ReportsIterationLimit) {
  const ResponseMatrix m = matrix_from_pattern({"110", "011", "101"});
  CalibrationConfig config;
  config.max_iterations = 1;
  config.convergence_tolerance = 1e-12;
  const CalibrationResult result = calibrate_jml(m, config);
  EXPECT_FALSE(result.converged);
  EXPECT_EQ(result.iterations_used, 1);
}

TEST(StandardErrors, SingleLearnerAtEqualParameters) {
  const ResponseMatrix m = matrix_from({{"L1", "I1", true}});
  const std::vector<double> theta{1.2};
  const std::vector<double> b{1.2};
  const auto se = standard_errors(m, theta, b);
  ASSERT_EQ(se.size(), 1u);
  EXPECT_DOUBLE_EQ(se[0], 2.0);  // information 0.25
}

TEST(StandardErrors, DuplicatedLearnersScaleBySqrtTwo) {
  const ResponseMatrix one = matrix_from({{"L1", "I1", true}});
  const ResponseMatrix two =
      matrix_from({{"L1", "I1", true}, {"L2", "I1", false}});
  const std::vector<double> theta1{0.4};
  const std::vector<double> theta2{0.4, 0.4};
  const std::vector<double> b{0.4};
  const auto se1 = standard_errors(one, theta1, b);
  const auto se2 = standard_errors(two, theta2, b);
  EXPECT_NEAR(se2[0], se1[0] / std::sqrt(2.0), 1e-12);
}

TEST(StandardErrors, ItemWithoutResponsesIsAnError) {
  std::vector<ResponseMatrix::IndexedEntry> entries{{0, 0, true}};
  const ResponseMatrix m =
      ResponseMatrix::from_indexed({"L1"}, {"I1", "I2"}, entries);
  const std::vector<double> theta{0.0};
  const std::vector<double> b{0.0, 0.0};
  EXPECT_THROW(standard_errors(m, theta, b), InconsistentInputError);
}

TEST(StandardErrors, ResultOverloadResolvesByIdAndRejectsGaps) {
  const ResponseMatrix m = matrix_from_pattern({"10", "01"});
  const CalibrationResult result = calibrate_jml(m);
  const auto se = standard_errors(m, result);
  EXPECT_EQ(se.size(), 2u);
  for (double v : se) EXPECT_GT(v, 0.0);

  CalibrationResult missing = result;
  missing.items.pop_back();
  EXPECT_THROW(standard_errors(m, missing), InconsistentInputError);
}

}  // namespace
}  // namespace cogload
