#pragma once

#include <array>

namespace lcdrop {

/// Polynomial of degree <= 4, coefficients in increasing powers.
struct Polynomial {
  std::array<double, 5> coeffs{};

  double operator()(double s) const;
  double derivative(double s) const;
  double second_derivative(double s) const;
  /// Index of the highest nonzero coefficient (0 for the zero polynomial).
  int degree() const;
};

/// Double well f = f_c - f_e split into two convex parts on (-1/2, 1).
///
/// The implicit part f_c enters the scheme at the new time level and the
/// expansive part f_e at the old one, which makes the s-update energy stable
/// for every time step.
class DoubleWell {
 public:
  DoubleWell() = default;
  DoubleWell(Polynomial convex, Polynomial expansive);

  /// f_c = 63 s^2, f_e = -16 s^4 + (64/3) s^3 + 57 s^2, hence
  /// f = 16 s^4 - (64/3) s^3 + 6 s^2 with f'(s) = 4 s (4 s - 1)(4 s - 3).
  static DoubleWell nematic_default();

  double f(double s) const { return convex_(s) - expansive_(s); }
  double df(double s) const { return convex_.derivative(s) - expansive_.derivative(s); }
  double fc(double s) const { return convex_(s); }
  double fe(double s) const { return expansive_(s); }
  double dfc(double s) const { return convex_.derivative(s); }
  double dfe(double s) const { return expansive_.derivative(s); }
  double d2fc(double s) const { return convex_.second_derivative(s); }
  double d2fe(double s) const { return expansive_.second_derivative(s); }

  const Polynomial& convex() const { return convex_; }
  const Polynomial& expansive() const { return expansive_; }

  /// True when f_c' is affine, so the s-update is a single linear solve.
  bool implicit_part_is_linear() const { return convex_.degree() <= 2; }

  /// Throws std::invalid_argument unless f_c'' >= 0 and f_e'' >= 0 on a grid
  /// of spacing `step` over [lo, hi].
  void check_convex_split(double lo = -0.49, double hi = 0.99, double step = 1e-3) const;

 private:
  Polynomial convex_;
  Polynomial expansive_;
};

}  // namespace lcdrop
