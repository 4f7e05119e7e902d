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

#ifndef IUCORR_THEORY_HPP
#define IUCORR_THEORY_HPP

#include "iucorr/geometry.hpp"
#include "iucorr/synth.hpp"
#include "iucorr/types.hpp"

#include <cstddef>
#include <cstdint>

namespace iucorr
{

enum class EstimatorKind
{
    empirical,
    closed_form,
    asymptotic
};

/// Inter-user channel correlation value. `variance` is
/// Var[(1/M) h_k^H h_k'] over the joint channel distribution and
/// `correlation` its square root (the value plotted in sweep outputs).
/// `meta` holds the sample count for empirical estimates and the total
/// antenna count for closed-form / asymptotic ones.
struct CorrelationEstimate
{
    double variance = 0.0;
    double correlation = 0.0;
    EstimatorKind kind = EstimatorKind::closed_form;
    std::size_t meta = 0;
};

const char *to_string(EstimatorKind kind);

/// Unnormalized sinc: sin(x)/x with sinc(0) = 1.
double sinc(double x);

/// sum_{k=0}^{m-1} sinc(2*pi*k*c). Mean kernel of the correlated-angle
/// steering dot product along one array axis.
double sinc_sum(double c, int m);

/// (1/m^2) * sum_{k1=0}^{m-1} sum_{k2=0}^{m-1} sinc(2*pi*c*(k1-k2)).
/// Power kernel along one axis. Evaluated in O(m) by grouping equal lags:
/// lag k1-k2 = k occurs (m - |k|) times.
double sinc_kernel(double c, int m);

/// Large-array limit of sinc_kernel: 1 when c = 0, else 1/(2*c*m).
double sinc_kernel_asymptotic(double c, int m);

/// Squared inter-user correlation of a path ensemble, finite-array form:
/// sum over path pairs (l, l') of (beta_l * beta'_l')^2 *
/// sinc_kernel(d_x*alpha_x[l][l']/lambda, m_x) *
/// sinc_kernel(d_y*alpha_y[l][l']/lambda, m_y).
CorrelationEstimate correlation_closed_form(const PathEnsembleSpec &spec,
                                            const ArrayGeometry &geom, double wavelength);

/// Same sum with the asymptotic kernel per axis. An axis of size 1 (ULA)
/// contributes a factor of exactly 1, matching the single-axis form; for
/// rectangular arrays the asymptotic kernel is applied per axis.
CorrelationEstimate correlation_asymptotic(const PathEnsembleSpec &spec,
                                           const ArrayGeometry &geom, double wavelength);

/// Keyhole ensemble (n_keyholes shared apertures, per-path gain
/// 1/sqrt(L)): weighted sum of the correlated term (alpha_o on both axes)
/// with weight 1/L and the independent-angle term (alpha = 1) with weight
/// (L-1)/L. Set `asymptotic` for the large-array kernel.
CorrelationEstimate keyhole_closed_form(int n_keyholes, double alpha_x_o, double alpha_y_o,
                                        const ArrayGeometry &geom, double wavelength,
                                        bool asymptotic = false);

struct DotMoments
{
    double mean = 0.0;
    double variance = 0.0;
};

/// Mean and variance of the dot product between two array responses whose
/// sine differences are uniform with half-widths (alpha_x, alpha_y),
/// independently per axis. Unnormalized: mean is up to M, variance up to
/// M^2 (the power kernel enters rescaled by M^2).
DotMoments response_dot_moments(double alpha_x, double alpha_y, const ArrayGeometry &geom,
                                double wavelength);

/// The series sum_{k=0}^{inf} sinc(gamma*k) for gamma in (0, pi], whose
/// closed form is (pi + gamma) / (2*gamma). The raw partial sums converge
/// only conditionally and oscillate, so the convergence checker exposes
/// their Cesaro average as well.
class SincSeries
{
  public:
    explicit SincSeries(double gamma);

    double gamma() const { return gamma_; }
    double closed_form() const;

    /// sum_{k=0}^{n} sinc(gamma*k).
    double partial_sum(std::int64_t n) const;

    /// Mean of the partial sums S_0 .. S_n (streaming, O(n)).
    double cesaro_average(std::int64_t n) const;

  private:
    double gamma_;
};

/// Limit of (1/m) * sum_{k1,k2=0}^{m-1} sinc(gamma*(k1-k2)) as m grows:
/// pi/gamma for gamma > 0.
double sinc_lag_limit(double gamma);

/// The finite-m value of the sum above, lag-grouped to O(m).
double sinc_lag_finite(double gamma, int m);

} // namespace iucorr

#endif
