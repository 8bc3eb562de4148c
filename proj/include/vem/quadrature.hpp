#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vem {

/// Symmetric quadrature rule on a triangle in barycentric coordinates.
/// Weights are normalized to sum to one (multiply by the triangle area).
struct TriQuadRule {
  int degree = 0;
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
};

namespace detail {

inline void add_orbit_3(TriQuadRule& rule, double a, double w) {
  double b = 1.0 - 2.0 * a;
  rule.points.push_back({b, a, a});
  rule.points.push_back({a, b, a});
  rule.points.push_back({a, a, b});
  for (int i = 0; i < 3; ++i) rule.weights.push_back(w);
}

inline void add_orbit_6(TriQuadRule& rule, double a, double b, double w) {
  double c = 1.0 - a - b;
  const std::array<std::array<double, 3>, 6> perms{{{a, b, c}, {a, c, b}, {b, a, c},
                                                    {b, c, a}, {c, a, b}, {c, b, a}}};
  for (const auto& p : perms) {
    rule.points.push_back(p);
    rule.weights.push_back(w);
  }
}

inline TriQuadRule make_rule(int degree) {
  TriQuadRule rule;
  rule.degree = degree;
  switch (degree) {
    case 2:
      add_orbit_3(rule, 1.0 / 6.0, 1.0 / 3.0);
      break;
    case 4:
      // Dunavant, 6 points.
      add_orbit_3(rule, 0.445948490915965, 0.223381589678011);
      add_orbit_3(rule, 0.091576213509771, 0.109951743655322);
      break;
    case 6:
      // Dunavant, 12 points.
      add_orbit_3(rule, 0.249286745170910, 0.116786275726379);
      add_orbit_3(rule, 0.063089014491502, 0.050844906370207);
      add_orbit_6(rule, 0.053145049844817, 0.310352451033784, 0.082851075618374);
      break;
    default:
      throw std::invalid_argument("no triangle quadrature rule of degree " +
                                  std::to_string(degree) + " (supported: 2, 4, 6)");
  }
  return rule;
}

}  // namespace detail

inline constexpr std::array<int, 3> kSupportedQuadratureDegrees{2, 4, 6};

/// Returns the cached rule of the requested degree; throws for unsupported degrees.
inline const TriQuadRule& triangle_rule(int degree) {
  static const TriQuadRule r2 = detail::make_rule(2);
  static const TriQuadRule r4 = detail::make_rule(4);
  static const TriQuadRule r6 = detail::make_rule(6);
  switch (degree) {
    case 2: return r2;
    case 4: return r4;
    case 6: return r6;
    default:
      throw std::invalid_argument("no triangle quadrature rule of degree " +
                                  std::to_string(degree) + " (supported: 2, 4, 6)");
  }
}

}  // namespace vem
