#pragma once
// Test-only reference implementations, kept independent of the library's
// numerical paths: a dense truncated-Taylor matrix exponential with scaling
// and squaring, recursive adaptive Simpson quadrature, and the closed-form
// state-space counts used to cross-check enumeration.

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline Eigen::MatrixXd expm_taylor(const Eigen::MatrixXd& a, double tol = 1e-14) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  double scale = 1.0;
  while (norm * scale > 0.5) {
    scale *= 0.5;
    ++squarings;
  }
  const Eigen::MatrixXd b = a * scale;
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  Eigen::MatrixXd sum = term;
  for (int k = 1; k < 60; ++k) {
    term = (term * b) / k;
    sum += term;
    if (term.cwiseAbs().maxCoeff() < tol) break;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

inline double adaptive_simpson_impl(const std::function<double(double)>& f, double a, double b,
                                    double fa, double fm, double fb, double whole, double tol,
                                    int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_simpson_impl(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_impl(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol, int max_depth = 40) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_impl(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// ---- closed-form space sizes ------------------------------------------------

inline double falling_factorial(int n, int m) {  // n!/(n-m)!
  double v = 1.0;
  for (int i = 0; i < m; ++i) v *= (n - i);
  return v;
}

inline double binomial(int n, int k) {
  double v = 1.0;
  for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
  return v;
}

inline double factorial(int n) { return falling_factorial(n, n); }

inline long observer_count_sbr(int n) { return 1L + static_cast<long>(n) * (n + 1); }

inline long observer_count_fsfs(int n) {
  double seqs = 0.0;
  for (int m = 0; m <= n; ++m) seqs += falling_factorial(n, m);
  return 1L + static_cast<long>(n * seqs + 0.5);
}

inline long observer_count_esfs(int n) {
  return static_cast<long>(factorial(n) * ((1L << n) + 1) + 0.5);
}

inline long phase_count_sbr(int n) { return static_cast<long>(n) * n + 2L * n + 2; }

inline long phase_count_fsfs(int n) {
  double q1 = 0.0;
  for (int m = 1; m <= n; ++m) q1 += binomial(n - 1, m - 1) * factorial(m);
  q1 *= n;
  double tail = 1.0;  // empty queue
  for (int m = 1; m <= n - 1; ++m) tail += falling_factorial(n - 1, m);
  for (int m = 1; m <= n; ++m) tail += falling_factorial(n - 1, m - 1);
  const double q2 = tail;
  const double q3 = 2.0 + (n - 1) * tail;
  return static_cast<long>(q1 + q2 + q3 + 0.5);
}

inline long phase_count_esfs(int n) {
  const double q1 = factorial(n) * std::pow(2.0, n - 1);
  const double q2 = factorial(n - 1) * std::pow(2.0, n);
  const double q3 =
      factorial(n) + factorial(n - 1) + (factorial(n) - factorial(n - 1)) * std::pow(2.0, n);
  return static_cast<long>(q1 + q2 + q3 + 0.5);
}

}  // namespace oracle
