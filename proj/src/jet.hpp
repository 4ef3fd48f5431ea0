#pragma once

// Truncated derivative stacks ("jets"): entry r holds the r-th time derivative
// of a quantity at one instant.  Products use the Leibniz rule, so applying an
// operator factor (c + i s(t) + d/dt) to an accumulated expression stays exact
// as long as every participating jet is exact.

#include "drachma/types.hpp"

#include <vector>

namespace drachma::detail {

using Jet = std::vector<Complex>;

inline Jet jet_zero(std::size_t len) { return Jet(len, Complex(0.0)); }

inline Jet jet_conj(const Jet& a) {
    Jet r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = std::conj(a[i]);
    return r;
}

/// Leibniz product truncated to the shorter operand.
inline Jet jet_mul(const Jet& a, const Jet& b) {
    const std::size_t n = std::min(a.size(), b.size());
    Jet r(n, Complex(0.0));
    for (std::size_t k = 0; k < n; ++k) {
        double binom = 1.0;
        for (std::size_t q = 0; q <= k; ++q) {
            r[k] += binom * a[q] * b[k - q];
            binom = binom * static_cast<double>(k - q) / static_cast<double>(q + 1);
        }
    }
    return r;
}

/// d/dt: shift derivatives down one slot (top entry becomes unusable).
inline Jet jet_shift(const Jet& a) {
    if (a.size() <= 1) return jet_zero(1);
    return Jet(a.begin() + 1, a.end());
}

inline Jet& jet_add_inplace(Jet& a, const Jet& b) {
    const std::size_t n = std::min(a.size(), b.size());
    a.resize(n);
    for (std::size_t i = 0; i < n; ++i) a[i] += b[i];
    return a;
}

inline Jet jet_scale(const Jet& a, Complex c) {
    Jet r(a);
    for (auto& v : r) v *= c;
    return r;
}

} // namespace drachma::detail
