#pragma once

#include "drachma/types.hpp"

namespace drachma {

/// Frequency-domain cavity transfer function for one state branch,
///   h(w) = sqrt(kappa) / (kappa/2 - i (w - chi_j)),
/// under the convention a(t) = Int a(w) e^{-i w t} dw.
Complex transfer_fd(double omega, const StateBranch& branch, double kappa);

/// Matching causal impulse response sqrt(kappa) e^{-(kappa/2 + i chi_j) t} for
/// t >= 0, zero for t < 0.
Complex impulse_response_td(double t, const StateBranch& branch, double kappa);

enum class PropagationMethod {
    Convolution, // Duhamel integral, exact per segment for the reconstructed input
    Spectral,    // FFT multiply by transfer_fd on a zero-padded window
    Ode          // fixed-step RK4 on an oversampled grid
};

struct PropagationSettings {
    PropagationMethod method = PropagationMethod::Convolution;
    int oversample = 10;           // internal substeps per sample (Ode)
    double stability_limit = 0.1;  // refuse when (kappa/2 + |chi|) * dt_internal exceeds this
};

/// Intra-cavity field of one branch driven by a_in, starting from vacuum at
/// the first sample.  Output lives on the input grid.  All three methods agree
/// to ~1e-6 of the peak for band-limited inputs.
Waveform propagate_linear(const Waveform& a_in, const StateBranch& branch, double kappa,
                          const PropagationSettings& settings = {});

/// Detected output field alpha e^{-i phi} a_in + beta e^{-i theta} a.
/// Grids of a_in and a must match.
Waveform output_field(const Waveform& a_in, const Waveform& a, const DetectionChain& chain);

} // namespace drachma
