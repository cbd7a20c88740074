#include "shellflow/nonlinearity.hpp"

#include <stdexcept>

namespace shellflow {

namespace {
constexpr cplx kI{0.0, 1.0};
}

cplx b_component(const SpectralState& u, const SpectralState& v, int n,
                 const ShellCoefficients& c) {
  const WavenumberLadder& lad = u.ladder();
  const double a = c.a, b = c.b;
  const double s = c.first_term_sign;
  if (c.kind == ShellModel::goy) {
    // b_n = i ( a k_{n+1} conj(u_{n+1}) conj(v_{n+2})
    //         + b k_n     conj(u_{n-1}) conj(v_{n+1})
    //         - a k_{n-1} conj(u_{n-1}) conj(v_{n-2})
    //         - b k_{n-1} conj(u_{n-2}) conj(v_{n-1}) )
    return kI *
           (s * a * lad.k(n + 1) * std::conj(u.at(n + 1)) * std::conj(v.at(n + 2)) +
            b * lad.k(n) * std::conj(u.at(n - 1)) * std::conj(v.at(n + 1)) -
            a * lad.k(n - 1) * std::conj(u.at(n - 1)) * std::conj(v.at(n - 2)) -
            b * lad.k(n - 1) * std::conj(u.at(n - 2)) * std::conj(v.at(n - 1)));
  }
  // SABRA:
  // b_n = -i ( a k_{n+1} conj(u_{n+1}) v_{n+2}
  //          + b k_n     conj(u_{n-1}) v_{n+1}
  //          + a k_{n-1}      u_{n-1}  v_{n-2}
  //          + b k_{n-1}      u_{n-2}  v_{n-1} )
  return -kI *
         (s * a * lad.k(n + 1) * std::conj(u.at(n + 1)) * v.at(n + 2) +
          b * lad.k(n) * std::conj(u.at(n - 1)) * v.at(n + 1) +
          a * lad.k(n - 1) * u.at(n - 1) * v.at(n - 2) +
          b * lad.k(n - 1) * u.at(n - 2) * v.at(n - 1));
}

SpectralState apply_B(const SpectralState& u, const SpectralState& v,
                      const ShellCoefficients& coeffs) {
  if (!u.ladder().same_as(v.ladder()))
    throw std::invalid_argument("apply_B: ladder mismatch");
  SpectralState out(u.ladder_ptr());
  for (int n = 1; n <= u.n_shells(); ++n)
    out.mut(n) = -b_component(u, v, n, coeffs);
  return out;
}

cplx trilinear_form(const SpectralState& u, const SpectralState& v,
                    const SpectralState& w, const ShellCoefficients& coeffs) {
  if (!u.ladder().same_as(w.ladder()))
    throw std::invalid_argument("trilinear_form: ladder mismatch");
  return weighted_inner(apply_B(u, v, coeffs), w, 0.0);
}

}  // namespace shellflow
