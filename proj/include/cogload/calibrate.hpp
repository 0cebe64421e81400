#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cogload/response_matrix.hpp"

namespace cogload {

// Item difficulty on the logit scale; higher b means a harder item.
struct ItemParameters {
  std::string item_id;
  double b = 0.0;
};

// Learner ability on the same logit continuum as item difficulty; only the
// difference theta - b ever enters a probability.
struct AbilityEstimate {
  std::string learner_id;
  double theta = 0.0;
};

struct CalibrationConfig {
  int max_iterations = 100;
  double convergence_tolerance = 1e-4;  // max absolute parameter change per sweep
  double newton_damping = 1.0;          // in (0, 1]; halved on likelihood decrease
  double theta_bound = 10.0;            // clamp for intermediate iterates

  void validate() const;
};

enum class ExclusionReason { all_correct, all_incorrect, cascade };

struct Exclusion {
  enum class Kind { learner, item };
  Kind kind;
  std::string id;
  ExclusionReason reason;
};

const char* to_string(ExclusionReason reason);
const char* to_string(Exclusion::Kind kind);

struct CalibrationResult {
  std::vector<ItemParameters> items;       // matrix item order, mean(b) == 0
  std::vector<AbilityEstimate> abilities;  // matrix learner order
  std::vector<double> standard_errors;     // parallel to items
  std::vector<int> response_counts;        // parallel to items
  double initial_log_likelihood = 0.0;     // at the PROX start
  double final_log_likelihood = 0.0;
  int iterations_used = 0;
  bool converged = false;
  std::vector<Exclusion> exclusions;
};

// Joint Bernoulli log-likelihood of the observed matrix given per-learner
// abilities and per-item difficulties (indexed like the matrix). Throws
// InconsistentInputError when a parameter vector does not cover the matrix.
double log_likelihood(const ResponseMatrix& matrix, std::span<const double> theta,
                      std::span<const double> b);

struct LikelihoodGradients {
  std::vector<double> d_theta;   // per learner: sum of (x - P)
  std::vector<double> d_b;       // per item: sum of (P - x)
  std::vector<double> d2_theta;  // per learner: -sum of P(1-P)
  std::vector<double> d2_b;      // per item: -sum of P(1-P)
};

LikelihoodGradients likelihood_gradients(const ResponseMatrix& matrix,
                                         std::span<const double> theta,
                                         std::span<const double> b);

// Removes all-correct / all-incorrect items and learners, repeating until no
// degenerate row or column remains. Entities that only become degenerate
// after an earlier removal are reported with reason cascade. Throws
// EmptyAfterReductionError when nothing survives.
std::pair<ResponseMatrix, std::vector<Exclusion>> exclude_degenerate(
    const ResponseMatrix& matrix);

// Joint maximum-likelihood calibration: alternating damped Newton sweeps
// over abilities and difficulties, then recentering so mean(b) = 0 (all
// abilities shift by the same constant, leaving every theta - b intact).
// Invokes exclude_degenerate first and records the exclusions.
CalibrationResult calibrate_jml(const ResponseMatrix& matrix,
                                const CalibrationConfig& config = {});

// Asymptotic difficulty standard errors, 1/sqrt(sum of P(1-P)) over the
// learners who answered each item.
std::vector<double> standard_errors(const ResponseMatrix& matrix,
                                    std::span<const double> theta,
                                    std::span<const double> b);

// Same, resolving parameters from a calibration result by id. Throws
// InconsistentInputError when the result lacks a learner or item the
// matrix observed.
std::vector<double> standard_errors(const ResponseMatrix& matrix,
                                    const CalibrationResult& result);

}  // namespace cogload
