#include "lcdrop/double_well.hpp"

#include <stdexcept>
#include <string>

namespace lcdrop {

double Polynomial::operator()(double s) const {
  double v = 0.0;
  for (int k = 4; k >= 0; --k) v = v * s + coeffs[static_cast<std::size_t>(k)];
  return v;
}

double Polynomial::derivative(double s) const {
  double v = 0.0;
  for (int k = 4; k >= 1; --k) v = v * s + k * coeffs[static_cast<std::size_t>(k)];
  return v;
}

double Polynomial::second_derivative(double s) const {
  double v = 0.0;
  for (int k = 4; k >= 2; --k) v = v * s + k * (k - 1) * coeffs[static_cast<std::size_t>(k)];
  return v;
}

int Polynomial::degree() const {
  for (int k = 4; k > 0; --k) {
    if (coeffs[static_cast<std::size_t>(k)] != 0.0) return k;
  }
  return 0;
}

DoubleWell::DoubleWell(Polynomial convex, Polynomial expansive)
    : convex_(convex), expansive_(expansive) {}

DoubleWell DoubleWell::nematic_default() {
  Polynomial fc{{0.0, 0.0, 63.0, 0.0, 0.0}};
  Polynomial fe{{0.0, 0.0, 57.0, 64.0 / 3.0, -16.0}};
  return DoubleWell(fc, fe);
}

void DoubleWell::check_convex_split(double lo, double hi, double step) const {
  const int n = static_cast<int>((hi - lo) / step + 0.5);
  for (int k = 0; k <= n; ++k) {
    const double s = lo + k * step;
    if (d2fc(s) < 0.0) {
      throw std::invalid_argument("double well: f_c is not convex at s = " + std::to_string(s));
    }
    if (d2fe(s) < 0.0) {
      throw std::invalid_argument("double well: f_e is not convex at s = " + std::to_string(s));
    }
  }
}

}  // namespace lcdrop
