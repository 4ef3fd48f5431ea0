#pragma once

#include "drachma/config.hpp"
#include "drachma/types.hpp"

#include <string>
#include <vector>

namespace drachma::testing {

inline std::string config_path(const char* name) {
    return std::string(DRACHMA_CONFIG_DIR) + "/" + name;
}

inline double sup_abs_diff(const Waveform& a, const Waveform& b) {
    return (a.samples - b.samples).cwiseAbs().maxCoeff();
}

inline double reference_kappa() { return angular_from_hz(564700.0); }

/// Two-branch qubit set with the bundled dispersive shifts (+-299 kHz).
inline std::vector<StateBranch> qubit_branches(double zeta0_hz = 0.0, double zeta1_hz = 0.0) {
    StateBranch b0, b1;
    b0.label = 0;
    b0.chi = angular_from_hz(299e3);
    b0.zeta = angular_from_hz(zeta0_hz);
    b1.label = 1;
    b1.chi = angular_from_hz(-299e3);
    b1.zeta = angular_from_hz(zeta1_hz);
    return {b0, b1};
}

inline TrialFunction qubit_trial(double amplitude = 5.4945615551059675e-3) {
    TrialFunction tf;
    tf.amplitude = Complex(amplitude, 0.0);
    tf.exponent_m = 3;
    tf.duration = 1e-6;
    return tf;
}

} // namespace drachma::testing
