#pragma once

#include <array>
#include <cmath>
#include <span>

namespace renewal::quad {

// 4-point Gauss-Legendre on [-1, 1]; exact for polynomials of degree <= 7.
inline constexpr std::array<double, 4> kGaussNodes = {
    -0.86113631159405257522, -0.33998104358485626480, 0.33998104358485626480,
    0.86113631159405257522};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.34785484513745385737, 0.65214515486254614263, 0.65214515486254614263,
    0.34785484513745385737};

/// Gauss-Legendre integral of f over [a, b].
template <class F>
double gauss(F&& f, double a, double b) {
  if (b <= a) return 0.0;
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < kGaussNodes.size(); ++i)
    sum += kGaussWeights[i] * f(mid + half * kGaussNodes[i]);
  return half * sum;
}

/// Gauss-Legendre over [a, b], split at every breakpoint strictly inside.
/// `breaks` must be sorted ascending.
template <class F>
double gauss_split(F&& f, double a, double b, std::span<const double> breaks) {
  if (b <= a) return 0.0;
  double sum = 0.0;
  double left = a;
  for (double x : breaks) {
    if (x <= left) continue;
    if (x >= b) break;
    sum += gauss(f, left, x);
    left = x;
  }
  return sum + gauss(f, left, b);
}

/// Simpson's rule on a single panel [a, b].
template <class F>
double simpson(F&& f, double a, double b) {
  const double m = 0.5 * (a + b);
  return (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
}

}  // namespace renewal::quad
