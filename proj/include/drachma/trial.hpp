#pragma once

#include "drachma/types.hpp"

namespace drachma {

/// k-th time derivative of a_T(t) = A sin^m(pi t / T_p), evaluated exactly via
/// the finite exponential expansion
///   sin^m(x) = (2i)^{-m} sum_q binom(m, q) (-1)^q e^{i (m - 2q) x},
/// where each term differentiates to a multiplication by i (m - 2q) pi / T_p.
/// Outside [0, T_p] the value (every derivative order) is exactly zero.
Complex trial_eval(const TrialFunction& tf, double t, int derivative = 0);

/// trial_eval on a uniform grid covering [0, T_p] with the given step.
/// T_p must be an integer number of steps (within 1e-9 relative).
Waveform trial_grid(const TrialFunction& tf, double dt, int derivative = 0);

/// Number of samples for the [0, T_p] grid, validating divisibility.
Eigen::Index trial_sample_count(const TrialFunction& tf, double dt);

void validate_trial(const TrialFunction& tf);

} // namespace drachma
