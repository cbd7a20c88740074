#pragma once

#include "shellflow/spectral.hpp"

namespace shellflow {

enum class ShellModel { goy, sabra };

/// Coefficients of the four-term shell coupling. a, b are free real
/// parameters; the defaults are the classical energy-cascade choice.
/// first_term_sign is a verification hook (see the verify CLI command):
/// flipping it to -1 breaks the cancellation identities on purpose so the
/// audit suite can prove it would catch a sign error. It is not a model
/// parameter.
struct ShellCoefficients {
  double a = 1.0;
  double b = -0.5;
  ShellModel kind = ShellModel::goy;
  double first_term_sign = 1.0;
};

/// Single component b_n(u, v) of the shell coupling (1-based n). Shells
/// outside [1, N] read as zero.
cplx b_component(const SpectralState& u, const SpectralState& v, int n,
                 const ShellCoefficients& coeffs);

/// B(u, v) = -(b_1(u,v), b_2(u,v), ...). Throws on ladder mismatch.
SpectralState apply_B(const SpectralState& u, const SpectralState& v,
                      const ShellCoefficients& coeffs);

/// (B(u,v), w)_V. For GOY this pairing is skew in (v, w) as a complex
/// identity; for SABRA only its real part is (the imaginary part does
/// not cancel), which is all the energy balance uses.
cplx trilinear_form(const SpectralState& u, const SpectralState& v,
                    const SpectralState& w, const ShellCoefficients& coeffs);

}  // namespace shellflow
