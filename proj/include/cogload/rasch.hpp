#pragma once

namespace cogload {

// Success probability of the one-parameter logistic model,
// P(correct) = logistic(theta - b). Strictly increasing in theta and
// strictly decreasing in b. Throws InvalidArgumentError on non-finite
// input. Evaluated with platform-stable arithmetic so simulated draws
// are reproducible bit-for-bit everywhere.
double rasch_probability(double theta, double b);

// log(logistic(x)) without intermediate saturation; always finite for
// finite x. Used by the likelihood so extreme logits stay well-behaved.
double log_sigmoid(double x);

}  // namespace cogload
