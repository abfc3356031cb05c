// Copyright 2026 The SignFed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

namespace signfed {

// Adaptive Gauss-Kronrod integration with a 7-point Gauss / 15-point Kronrod
// pair (the QUADPACK DQK15 rule). Intervals are bisected worst-error-first
// until the summed error estimate drops below abs_tol or the interval budget
// is exhausted. |K - G| is used as the per-interval error estimate; it is a
// gross overestimate for smooth integrands, which only costs extra bisections.
namespace quadrature_detail {

// Abscissae of the 15-point Kronrod rule on [-1,1] (positive half).
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <typename F>
void gauss_kronrod_15(const F& f, double a, double b, double* result,
                      double* error) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = kWgk[7] * fc;
  double gauss = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double fsum = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * fsum;
    if (j % 2 == 1) gauss += kWg[j / 2] * fsum;
  }
  *result = kronrod * half;
  *error = std::abs((kronrod - gauss) * half);
}

struct Interval {
  double a, b, value, error;
  bool operator<(const Interval& other) const { return error < other.error; }
};

}  // namespace quadrature_detail

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = false;
};

template <typename F>
QuadratureResult integrate(const F& f, double a, double b,
                           double abs_tol = 1e-12,
                           std::size_t max_intervals = 4000) {
  using quadrature_detail::Interval;
  if (a == b) return {0.0, 0.0, true};

  Interval first{a, b, 0.0, 0.0};
  quadrature_detail::gauss_kronrod_15(f, a, b, &first.value, &first.error);

  std::priority_queue<Interval> queue;
  queue.push(first);
  double total_value = first.value;
  double total_error = first.error;
  std::size_t count = 1;

  while (total_error > abs_tol && count < max_intervals) {
    const Interval worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // Interval is at floating-point resolution; nothing left to split.
      queue.push(worst);
      break;
    }
    Interval left{worst.a, mid, 0.0, 0.0};
    Interval right{mid, worst.b, 0.0, 0.0};
    quadrature_detail::gauss_kronrod_15(f, left.a, left.b, &left.value,
                                        &left.error);
    quadrature_detail::gauss_kronrod_15(f, right.a, right.b, &right.value,
                                        &right.error);
    total_value += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++count;
  }

  return {total_value, total_error, total_error <= abs_tol};
}

}  // namespace signfed
