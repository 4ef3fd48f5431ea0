#pragma once

#include "drachma/dynamics.hpp"

#include <cstddef>
#include <vector>

namespace drachma::detail {

/// Deterministic trajectory with the branch parameters switching at the given
/// jump times; the field is continuous across each switch.  Shared between
/// evolve_with_decay and the shot simulator (which caches the no-jump case).
Waveform integrate_with_jumps(const Waveform& a_in, const std::vector<StateBranch>& branches,
                              std::size_t initial, const std::vector<Jump>& jumps, double kappa,
                              const IntegratorSettings& settings);

} // namespace drachma::detail
