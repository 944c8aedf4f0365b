#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace atomgw::numerics {

namespace detail {
// 16-point Gauss-Legendre nodes (positive half) and weights on [-1, 1].
inline constexpr std::array<double, 8> gl16_nodes = {
    0.0950125098376374401853193, 0.2816035507792589132304605, 0.4580167776572273863424194,
    0.6178762444026437484466718, 0.7554044083550030338951012, 0.8656312023878317438804679,
    0.9445750230732325760779884, 0.9894009349916499325961542};
inline constexpr std::array<double, 8> gl16_weights = {
    0.1894506104550684962853967, 0.1826034150449235888667637, 0.1691565193950025381893121,
    0.1495959888165767320815017, 0.1246289712555338720524763, 0.0951585116824927848099251,
    0.0622535239386478928628438, 0.0271524594117540948517806};
}  // namespace detail

/// Composite 16-point Gauss-Legendre rule with `panels` equal sub-intervals.
template <typename F>
double integrate_gauss_legendre(F&& f, double a, double b, int panels = 1) {
  panels = std::max(panels, 1);
  const double width = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * width;
    const double half = 0.5 * width;
    double panel = 0.0;
    for (std::size_t i = 0; i < detail::gl16_nodes.size(); ++i) {
      const double dx = half * detail::gl16_nodes[i];
      panel += detail::gl16_weights[i] * (f(mid - dx) + f(mid + dx));
    }
    total += panel * half;
  }
  return total;
}

}  // namespace atomgw::numerics
