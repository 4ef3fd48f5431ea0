#pragma once

// Causal piecewise-cubic reconstruction of a sampled envelope, shared by the
// convolution and ODE propagation paths so both integrate the same continuous
// input.  Segment [t_n, t_{n+1}] is the cubic through samples n-2..n+1
// (missing left samples are zero), so the value at any time <= t_k depends
// only on samples with index <= k.

#include "drachma/types.hpp"

#include <array>

namespace drachma::detail {

struct SegmentPoly {
    // p(x) = c0 + c1 x + c2 x^2 + c3 x^3 with x in [0, 1] across the segment
    std::array<Complex, 4> c;

    Complex eval(double x) const { return c[0] + x * (c[1] + x * (c[2] + x * c[3])); }
};

class CausalCubic {
  public:
    explicit CausalCubic(const Waveform& w) : w_(&w) {}

    /// Polynomial for segment n (covering [t_n, t_{n+1}]), 0 <= n <= size-2.
    SegmentPoly segment(Eigen::Index n) const {
        const auto& s = w_->samples;
        const Complex um2 = n >= 2 ? s[n - 2] : Complex(0.0);
        const Complex um1 = n >= 1 ? s[n - 1] : Complex(0.0);
        const Complex u0 = s[n];
        const Complex up1 = s[n + 1];
        // Lagrange basis through nodes {-2,-1,0,1} in monomial form
        SegmentPoly p;
        p.c[0] = u0;
        p.c[1] = um2 / 6.0 - um1 + u0 / 2.0 + up1 / 3.0;
        p.c[2] = (um1 + up1) / 2.0 - u0;
        p.c[3] = (up1 - um2) / 6.0 + (um1 - u0) / 2.0;
        return p;
    }

    /// Value at coarse index n plus fraction x in [0, 1].
    Complex at(Eigen::Index n, double x) const {
        if (n >= w_->size() - 1) return x == 0.0 ? w_->samples[w_->size() - 1] : Complex(0.0);
        return segment(n).eval(x);
    }

  private:
    const Waveform* w_;
};

} // namespace drachma::detail
