#include "cogload/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "cogload/errors.hpp"
#include "cogload/rasch.hpp"

namespace cogload {

namespace {

void check_coverage(const ResponseMatrix& matrix, std::span<const double> theta,
                    std::span<const double> b) {
  if (theta.size() != matrix.n_learners() || b.size() != matrix.n_items()) {
    throw InconsistentInputError(
        "parameter vectors do not cover the response matrix (" +
        std::to_string(theta.size()) + " abilities for " +
        std::to_string(matrix.n_learners()) + " learners, " +
        std::to_string(b.size()) + " difficulties for " +
        std::to_string(matrix.n_items()) + " items)");
  }
}

double clamp(double x, double bound) { return std::clamp(x, -bound, bound); }

double logit(double p) { return std::log(p / (1.0 - p)); }

// One damped Newton sweep: all abilities against the current difficulties,
// then all difficulties against the refreshed abilities. Reduction order is
// the id-sorted adjacency order, so the result does not depend on input
// ordering or on how the sweep might be parallelized.
void newton_sweep(const ResponseMatrix& matrix, std::span<const double> theta,
                  std::span<const double> b, double step, double bound,
                  std::vector<double>& theta_out, std::vector<double>& b_out) {
  for (std::size_t i = 0; i < matrix.n_learners(); ++i) {
    double gradient = 0.0;
    double information = 0.0;
    for (const auto& e : matrix.learner_entries(i)) {
      const double p = rasch_probability(theta[i], b[e.index]);
      gradient += (e.correct ? 1.0 : 0.0) - p;
      information += p * (1.0 - p);
    }
    theta_out[i] = clamp(theta[i] + step * gradient / information, bound);
  }
  for (std::size_t j = 0; j < matrix.n_items(); ++j) {
    double gradient = 0.0;
    double information = 0.0;
    for (const auto& e : matrix.item_entries(j)) {
      const double p = rasch_probability(theta_out[e.index], b[j]);
      gradient += p - (e.correct ? 1.0 : 0.0);
      information += p * (1.0 - p);
    }
    b_out[j] = clamp(b[j] + step * gradient / information, bound);
  }
}

}  // namespace

void CalibrationConfig::validate() const {
  if (max_iterations < 1) {
    throw InvalidArgumentError("max_iterations must be at least 1");
  }
  if (!(convergence_tolerance > 0.0)) {
    throw InvalidArgumentError("convergence_tolerance must be positive");
  }
  if (!(newton_damping > 0.0 && newton_damping <= 1.0)) {
    throw InvalidArgumentError("newton_damping must lie in (0, 1]");
  }
  if (!(theta_bound > 0.0)) {
    throw InvalidArgumentError("theta_bound must be positive");
  }
}

const char* to_string(ExclusionReason reason) {
  switch (reason) {
    case ExclusionReason::all_correct:
      return "all_correct";
    case ExclusionReason::all_incorrect:
      return "all_incorrect";
    case ExclusionReason::cascade:
      return "cascade";
  }
  return "cascade";
}

const char* to_string(Exclusion::Kind kind) {
  return kind == Exclusion::Kind::learner ? "learner" : "item";
}

double log_likelihood(const ResponseMatrix& matrix, std::span<const double> theta,
                      std::span<const double> b) {
  check_coverage(matrix, theta, b);
  double total = 0.0;
  for (std::uint32_t i : matrix.learners_in_id_order()) {
    for (const auto& e : matrix.learner_entries(i)) {
      const double d = theta[i] - b[e.index];
      total += e.correct ? log_sigmoid(d) : log_sigmoid(-d);
    }
  }
  return total;
}

LikelihoodGradients likelihood_gradients(const ResponseMatrix& matrix,
                                         std::span<const double> theta,
                                         std::span<const double> b) {
  check_coverage(matrix, theta, b);
  LikelihoodGradients g;
  g.d_theta.assign(matrix.n_learners(), 0.0);
  g.d2_theta.assign(matrix.n_learners(), 0.0);
  g.d_b.assign(matrix.n_items(), 0.0);
  g.d2_b.assign(matrix.n_items(), 0.0);
  for (std::size_t i = 0; i < matrix.n_learners(); ++i) {
    for (const auto& e : matrix.learner_entries(i)) {
      const double p = rasch_probability(theta[i], b[e.index]);
      g.d_theta[i] += (e.correct ? 1.0 : 0.0) - p;
      g.d2_theta[i] -= p * (1.0 - p);
    }
  }
  for (std::size_t j = 0; j < matrix.n_items(); ++j) {
    for (const auto& e : matrix.item_entries(j)) {
      const double p = rasch_probability(theta[e.index], b[j]);
      g.d_b[j] += p - (e.correct ? 1.0 : 0.0);
      g.d2_b[j] -= p * (1.0 - p);
    }
  }
  return g;
}

std::pair<ResponseMatrix, std::vector<Exclusion>> exclude_degenerate(
    const ResponseMatrix& matrix) {
  const std::size_t n_learners = matrix.n_learners();
  const std::size_t n_items = matrix.n_items();
  std::vector<bool> learner_alive(n_learners, true);
  std::vector<bool> item_alive(n_items, true);
  std::vector<Exclusion> exclusions;

  bool first_pass = true;
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<std::size_t> drop_items;
    std::vector<std::size_t> drop_learners;
    std::vector<ExclusionReason> item_reasons;
    std::vector<ExclusionReason> learner_reasons;

    for (std::size_t j = 0; j < n_items; ++j) {
      if (!item_alive[j]) continue;
      std::size_t seen = 0;
      std::size_t correct = 0;
      for (const auto& e : matrix.item_entries(j)) {
        if (!learner_alive[e.index]) continue;
        ++seen;
        if (e.correct) ++correct;
      }
      if (seen == 0 || correct == 0 || correct == seen) {
        drop_items.push_back(j);
        ExclusionReason direct = (seen != 0 && correct == seen)
                                     ? ExclusionReason::all_correct
                                     : ExclusionReason::all_incorrect;
        item_reasons.push_back(first_pass ? direct : ExclusionReason::cascade);
      }
    }
    for (std::size_t i = 0; i < n_learners; ++i) {
      if (!learner_alive[i]) continue;
      std::size_t seen = 0;
      std::size_t correct = 0;
      for (const auto& e : matrix.learner_entries(i)) {
        if (!item_alive[e.index]) continue;
        ++seen;
        if (e.correct) ++correct;
      }
      if (seen == 0 || correct == 0 || correct == seen) {
        drop_learners.push_back(i);
        ExclusionReason direct = (seen != 0 && correct == seen)
                                     ? ExclusionReason::all_correct
                                     : ExclusionReason::all_incorrect;
        learner_reasons.push_back(first_pass ? direct : ExclusionReason::cascade);
      }
    }

    for (std::size_t k = 0; k < drop_items.size(); ++k) {
      item_alive[drop_items[k]] = false;
      exclusions.push_back(
          {Exclusion::Kind::item, matrix.item_id(drop_items[k]), item_reasons[k]});
      changed = true;
    }
    for (std::size_t k = 0; k < drop_learners.size(); ++k) {
      learner_alive[drop_learners[k]] = false;
      exclusions.push_back({Exclusion::Kind::learner,
                            matrix.learner_id(drop_learners[k]),
                            learner_reasons[k]});
      changed = true;
    }
    first_pass = false;
  }

  std::vector<std::string> kept_learners;
  std::vector<std::uint32_t> learner_map(n_learners, 0);
  for (std::size_t i = 0; i < n_learners; ++i) {
    if (learner_alive[i]) {
      learner_map[i] = static_cast<std::uint32_t>(kept_learners.size());
      kept_learners.push_back(matrix.learner_id(i));
    }
  }
  std::vector<std::string> kept_items;
  std::vector<std::uint32_t> item_map(n_items, 0);
  for (std::size_t j = 0; j < n_items; ++j) {
    if (item_alive[j]) {
      item_map[j] = static_cast<std::uint32_t>(kept_items.size());
      kept_items.push_back(matrix.item_id(j));
    }
  }
  if (kept_learners.empty() || kept_items.empty()) {
    throw EmptyAfterReductionError(
        "no learners or items remain after removing degenerate scores");
  }

  std::vector<ResponseMatrix::IndexedEntry> entries;
  entries.reserve(matrix.n_entries());
  for (std::size_t i = 0; i < n_learners; ++i) {
    if (!learner_alive[i]) continue;
    for (const auto& e : matrix.learner_entries(i)) {
      if (!item_alive[e.index]) continue;
      entries.push_back({learner_map[i], item_map[e.index], e.correct});
    }
  }
  return {ResponseMatrix::from_indexed(std::move(kept_learners),
                                       std::move(kept_items), entries),
          std::move(exclusions)};
}

CalibrationResult calibrate_jml(const ResponseMatrix& matrix,
                                const CalibrationConfig& config) {
  config.validate();
  auto [m, exclusions] = exclude_degenerate(matrix);

  const std::size_t n_learners = m.n_learners();
  const std::size_t n_items = m.n_items();

  // PROX-style start: logits of clamped proportions correct.
  std::vector<double> theta(n_learners);
  std::vector<double> b(n_items);
  for (std::size_t i = 0; i < n_learners; ++i) {
    const auto row = m.learner_entries(i);
    double correct = 0.0;
    for (const auto& e : row) correct += e.correct ? 1.0 : 0.0;
    const double p = std::clamp(correct / row.size(), 0.01, 0.99);
    theta[i] = logit(p);
  }
  for (std::size_t j = 0; j < n_items; ++j) {
    const auto col = m.item_entries(j);
    double correct = 0.0;
    for (const auto& e : col) correct += e.correct ? 1.0 : 0.0;
    const double p = std::clamp(correct / col.size(), 0.01, 0.99);
    b[j] = -logit(p);
  }

  double ll = log_likelihood(m, theta, b);
  const double initial_ll = ll;
  std::vector<double> theta_next(n_learners);
  std::vector<double> b_next(n_items);

  CalibrationResult result;
  result.exclusions = std::move(exclusions);

  int iterations = 0;
  bool converged = false;
  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    iterations = iter;
    double step = config.newton_damping;
    double ll_next = 0.0;
    bool accepted = false;
    while (true) {
      newton_sweep(m, theta, b, step, config.theta_bound, theta_next, b_next);
      ll_next = log_likelihood(m, theta_next, b_next);
      if (ll_next >= ll - 1e-12 * std::abs(ll)) {
        accepted = true;
        break;
      }
      step *= 0.5;
      if (step < 1e-12) break;
    }
    if (!accepted) {
      // No step length improves the likelihood: already at a numerical
      // optimum, keep the current parameters.
      converged = true;
      break;
    }

    double max_change = 0.0;
    for (std::size_t i = 0; i < n_learners; ++i) {
      max_change = std::max(max_change, std::abs(theta_next[i] - theta[i]));
      if (!std::isfinite(theta_next[i])) {
        throw NumericalFailureError("ability iterate became non-finite", iter);
      }
    }
    for (std::size_t j = 0; j < n_items; ++j) {
      max_change = std::max(max_change, std::abs(b_next[j] - b[j]));
      if (!std::isfinite(b_next[j])) {
        throw NumericalFailureError("difficulty iterate became non-finite", iter);
      }
    }
    theta.swap(theta_next);
    b.swap(b_next);
    ll = ll_next;
    if (max_change < config.convergence_tolerance) {
      converged = true;
      break;
    }
  }

  // Anchor the scale: mean difficulty zero, every theta - b unchanged.
  // Summing in item-id order keeps the recentering independent of input
  // ordering, bit for bit.
  std::vector<std::uint32_t> item_order(n_items);
  std::iota(item_order.begin(), item_order.end(), 0u);
  std::sort(item_order.begin(), item_order.end(),
            [&m](std::uint32_t a, std::uint32_t c) {
              return m.item_id(a) < m.item_id(c);
            });
  double mean_b = 0.0;
  for (std::uint32_t j : item_order) mean_b += b[j];
  mean_b /= static_cast<double>(n_items);
  for (double& v : b) v -= mean_b;
  for (double& v : theta) v -= mean_b;

  result.items.reserve(n_items);
  result.response_counts.reserve(n_items);
  for (std::size_t j = 0; j < n_items; ++j) {
    result.items.push_back({m.item_id(j), b[j]});
    result.response_counts.push_back(static_cast<int>(m.item_entries(j).size()));
  }
  result.abilities.reserve(n_learners);
  for (std::size_t i = 0; i < n_learners; ++i) {
    result.abilities.push_back({m.learner_id(i), theta[i]});
  }
  result.standard_errors = standard_errors(m, theta, b);
  result.initial_log_likelihood = initial_ll;
  result.final_log_likelihood = log_likelihood(m, theta, b);
  result.iterations_used = iterations;
  result.converged = converged;
  return result;
}

std::vector<double> standard_errors(const ResponseMatrix& matrix,
                                    std::span<const double> theta,
                                    std::span<const double> b) {
  check_coverage(matrix, theta, b);
  std::vector<double> se(matrix.n_items());
  for (std::size_t j = 0; j < matrix.n_items(); ++j) {
    const auto col = matrix.item_entries(j);
    if (col.empty()) {
      throw InconsistentInputError("item '" + matrix.item_id(j) +
                                   "' has no responses");
    }
    double information = 0.0;
    for (const auto& e : col) {
      const double p = rasch_probability(theta[e.index], b[j]);
      information += p * (1.0 - p);
    }
    se[j] = 1.0 / std::sqrt(information);
  }
  return se;
}

std::vector<double> standard_errors(const ResponseMatrix& matrix,
                                    const CalibrationResult& result) {
  std::unordered_map<std::string, double> theta_by_id;
  for (const auto& a : result.abilities) theta_by_id.emplace(a.learner_id, a.theta);
  std::unordered_map<std::string, double> b_by_id;
  for (const auto& it : result.items) b_by_id.emplace(it.item_id, it.b);

  std::vector<double> theta(matrix.n_learners());
  for (std::size_t i = 0; i < matrix.n_learners(); ++i) {
    auto it = theta_by_id.find(matrix.learner_id(i));
    if (it == theta_by_id.end()) {
      throw InconsistentInputError("no ability estimate for learner '" +
                                   matrix.learner_id(i) + "'");
    }
    theta[i] = it->second;
  }
  std::vector<double> b(matrix.n_items());
  for (std::size_t j = 0; j < matrix.n_items(); ++j) {
    auto it = b_by_id.find(matrix.item_id(j));
    if (it == b_by_id.end()) {
      throw InconsistentInputError("no difficulty estimate for item '" +
                                   matrix.item_id(j) + "'");
    }
    b[j] = it->second;
  }
  return standard_errors(matrix, theta, b);
}

}  // namespace cogload
