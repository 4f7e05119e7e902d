// SPDX-License-Identifier: Apache-2.0
//
// iucorr - inter-user channel correlation toolkit for massive MIMO arrays
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "iucorr/theory.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace iucorr
{

namespace
{

constexpr double kPi = std::numbers::pi;

// Asymptotic kernel with the degenerate-axis rule: an axis of size 1
// contributes exactly 1 regardless of c (the finite kernel is identically 1
// there), which reproduces the single-axis linear-array form.
double axis_kernel_asymptotic(double c, int m)
{
    if (m == 1)
        return 1.0;
    return sinc_kernel_asymptotic(c, m);
}

void require_positive_wavelength(double wavelength, const char *who)
{
    if (!(wavelength > 0.0))
        throw std::invalid_argument(std::string(who) + ": wavelength must be positive");
}

} // namespace

const char *to_string(EstimatorKind kind)
{
    switch (kind)
    {
    case EstimatorKind::empirical:
        return "empirical";
    case EstimatorKind::closed_form:
        return "closed_form";
    case EstimatorKind::asymptotic:
        return "asymptotic";
    }
    return "unknown";
}

double sinc(double x)
{
    if (x == 0.0)
        return 1.0;
    return std::sin(x) / x;
}

double sinc_sum(double c, int m)
{
    if (m < 1)
        throw std::invalid_argument("sinc_sum: m must be at least 1");
    double acc = 0.0;
    const double step = 2.0 * kPi * c;
    for (int k = 0; k < m; ++k)
        acc += sinc(step * k);
    return acc;
}

double sinc_kernel(double c, int m)
{
    if (m < 1)
        throw std::invalid_argument("sinc_kernel: m must be at least 1");
    const double step = 2.0 * kPi * c;
    double acc = static_cast<double>(m); // lag 0, multiplicity m
    for (int k = 1; k < m; ++k)
        acc += 2.0 * (m - k) * sinc(step * k);
    return acc / (static_cast<double>(m) * static_cast<double>(m));
}

double sinc_kernel_asymptotic(double c, int m)
{
    if (m < 1)
        throw std::invalid_argument("sinc_kernel_asymptotic: m must be at least 1");
    if (c == 0.0)
        return 1.0;
    return 1.0 / (2.0 * c * m);
}

namespace
{

template <typename AxisKernel>
CorrelationEstimate evaluate_pair_sum(const PathEnsembleSpec &spec, const ArrayGeometry &geom,
                                      double wavelength, AxisKernel &&kernel, EstimatorKind kind)
{
    spec.validate();
    const int n = spec.n_paths();
    double variance = 0.0;
    for (int l = 0; l < n; ++l)
    {
        for (int lp = 0; lp < n; ++lp)
        {
            const double w = spec.gains_user1[l] * spec.gains_user2[lp];
            const double cx = geom.d_x * spec.alpha_x(l, lp) / wavelength;
            const double cy = geom.d_y * spec.alpha_y(l, lp) / wavelength;
            variance += w * w * kernel(cx, geom.m_x) * kernel(cy, geom.m_y);
        }
    }
    CorrelationEstimate out;
    out.variance = variance;
    out.correlation = std::sqrt(variance);
    out.kind = kind;
    out.meta = static_cast<std::size_t>(geom.antenna_count());
    return out;
}

} // namespace

CorrelationEstimate correlation_closed_form(const PathEnsembleSpec &spec,
                                            const ArrayGeometry &geom, double wavelength)
{
    require_positive_wavelength(wavelength, "correlation_closed_form");
    return evaluate_pair_sum(
        spec, geom, wavelength, [](double c, int m) { return sinc_kernel(c, m); },
        EstimatorKind::closed_form);
}

CorrelationEstimate correlation_asymptotic(const PathEnsembleSpec &spec,
                                           const ArrayGeometry &geom, double wavelength)
{
    require_positive_wavelength(wavelength, "correlation_asymptotic");
    return evaluate_pair_sum(
        spec, geom, wavelength, [](double c, int m) { return axis_kernel_asymptotic(c, m); },
        EstimatorKind::asymptotic);
}

CorrelationEstimate keyhole_closed_form(int n_keyholes, double alpha_x_o, double alpha_y_o,
                                        const ArrayGeometry &geom, double wavelength,
                                        bool asymptotic)
{
    if (n_keyholes < 1)
        throw std::invalid_argument("keyhole_closed_form: need at least one keyhole");
    require_positive_wavelength(wavelength, "keyhole_closed_form");
    if (alpha_x_o < 0.0 || alpha_x_o > 1.0 || alpha_y_o < 0.0 || alpha_y_o > 1.0)
        throw std::invalid_argument("keyhole_closed_form: alpha_o entries must be in [0, 1]");

    const auto kernel = [asymptotic](double c, int m) {
        return asymptotic ? axis_kernel_asymptotic(c, m) : sinc_kernel(c, m);
    };

    const double l = static_cast<double>(n_keyholes);
    const double correlated = kernel(geom.d_x * alpha_x_o / wavelength, geom.m_x) *
                              kernel(geom.d_y * alpha_y_o / wavelength, geom.m_y);
    const double independent = kernel(geom.d_x / wavelength, geom.m_x) *
                               kernel(geom.d_y / wavelength, geom.m_y);

    CorrelationEstimate out;
    out.variance = correlated / l + (l - 1.0) / l * independent;
    out.correlation = std::sqrt(out.variance);
    out.kind = asymptotic ? EstimatorKind::asymptotic : EstimatorKind::closed_form;
    out.meta = static_cast<std::size_t>(geom.antenna_count());
    return out;
}

DotMoments response_dot_moments(double alpha_x, double alpha_y, const ArrayGeometry &geom,
                                double wavelength)
{
    if (alpha_x < 0.0 || alpha_x > 1.0 || alpha_y < 0.0 || alpha_y > 1.0)
        throw std::invalid_argument("response_dot_moments: alpha values must be in [0, 1]");
    require_positive_wavelength(wavelength, "response_dot_moments");

    const double cx = alpha_x * geom.d_x / wavelength;
    const double cy = alpha_y * geom.d_y / wavelength;
    const double mean = sinc_sum(cx, geom.m_x) * sinc_sum(cy, geom.m_y);

    // Second moment is the power kernel rescaled back to the unnormalized
    // double sum: M^2 * kernel_x * kernel_y with M = m_x * m_y.
    const double mx2 = static_cast<double>(geom.m_x) * geom.m_x;
    const double my2 = static_cast<double>(geom.m_y) * geom.m_y;
    const double second = mx2 * sinc_kernel(cx, geom.m_x) * my2 * sinc_kernel(cy, geom.m_y);

    DotMoments out;
    out.mean = mean;
    out.variance = second - mean * mean;
    return out;
}

SincSeries::SincSeries(double gamma) : gamma_(gamma)
{
    if (!(gamma > 0.0) || gamma > kPi)
        throw std::invalid_argument("SincSeries: gamma must lie in (0, pi]");
}

double SincSeries::closed_form() const
{
    return (kPi + gamma_) / (2.0 * gamma_);
}

double SincSeries::partial_sum(std::int64_t n) const
{
    if (n < 0)
        throw std::invalid_argument("SincSeries::partial_sum: n must be non-negative");
    double acc = 0.0;
    for (std::int64_t k = 0; k <= n; ++k)
        acc += sinc(gamma_ * static_cast<double>(k));
    return acc;
}

double SincSeries::cesaro_average(std::int64_t n) const
{
    if (n < 0)
        throw std::invalid_argument("SincSeries::cesaro_average: n must be non-negative");
    double partial = 0.0;
    double average = 0.0;
    for (std::int64_t k = 0; k <= n; ++k)
    {
        partial += sinc(gamma_ * static_cast<double>(k));
        average += (partial - average) / static_cast<double>(k + 1);
    }
    return average;
}

double sinc_lag_limit(double gamma)
{
    if (!(gamma > 0.0))
        throw std::invalid_argument("sinc_lag_limit: gamma must be positive");
    return kPi / gamma;
}

double sinc_lag_finite(double gamma, int m)
{
    if (!(gamma > 0.0))
        throw std::invalid_argument("sinc_lag_finite: gamma must be positive");
    if (m < 1)
        throw std::invalid_argument("sinc_lag_finite: m must be at least 1");
    double acc = static_cast<double>(m);
    for (int k = 1; k < m; ++k)
        acc += 2.0 * (m - k) * sinc(gamma * k);
    return acc / static_cast<double>(m);
}

} // namespace iucorr
