#include "cogload/rasch.hpp"

#include <cmath>

#include "cogload/errors.hpp"
#include "cogload/rng.hpp"

namespace cogload {

double rasch_probability(double theta, double b) {
  if (!std::isfinite(theta) || !std::isfinite(b)) {
    throw InvalidArgumentError("rasch_probability requires finite theta and b");
  }
  const double d = theta - b;
  if (d >= 0.0) {
    return 1.0 / (1.0 + portable_exp(-d));
  }
  const double e = portable_exp(d);
  return e / (1.0 + e);
}

double log_sigmoid(double x) {
  if (x >= 0.0) {
    return -std::log1p(std::exp(-x));
  }
  return x - std::log1p(std::exp(x));
}

}  // namespace cogload
