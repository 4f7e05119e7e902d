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

#include "iucorr/verify.hpp"

#include "iucorr/dataset.hpp"
#include "iucorr/estimation.hpp"
#include "iucorr/geometry.hpp"
#include "iucorr/synth.hpp"
#include "iucorr/theory.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <vector>

#include <unistd.h>

namespace iucorr
{

namespace
{

namespace fs = std::filesystem;

constexpr double kPi = std::numbers::pi;
constexpr double kCenterFrequencyHz = 2.437e9;

std::string fmt(const char *format, ...) __attribute__((format(printf, 1, 2)));

std::string fmt(const char *format, ...)
{
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return std::string(buf);
}

CheckResult make_result(int id, std::string name, bool pass, std::string detail,
                        bool gating = true)
{
    CheckResult r;
    r.id = id;
    r.name = std::move(name);
    r.status = pass ? CheckStatus::pass : CheckStatus::fail;
    r.gating = gating;
    r.detail = std::move(detail);
    return r;
}

// ---------------------------------------------------------------------------
// Criterion 1: i.i.d. Rayleigh baseline, (1/M) sqrt(Var) = 1/sqrt(M)
// ---------------------------------------------------------------------------

CheckResult check_rayleigh_baseline(const VerifyOptions &opt)
{
    constexpr int kSamples = 20000;
    constexpr double kTol = 0.05;
    const int m_values[] = {16, 64, 256};

    bool pass = true;
    std::string detail;
    for (std::size_t i = 0; i < std::size(m_values); ++i)
    {
        const int m = m_values[i];
        RngStream rng(opt.master_seed, 100 + i);
        std::vector<cxd> dots(kSamples);
        for (int t = 0; t < kSamples; ++t)
        {
            const ChannelVector h1 = generate_rayleigh(m, rng);
            const ChannelVector h2 = generate_rayleigh(m, rng);
            dots[static_cast<std::size_t>(t)] = h1.dot(h2) / static_cast<double>(m);
        }
        const EnsembleStats stats = ensemble_correlation_from_dots(dots);
        const double target = 1.0 / std::sqrt(static_cast<double>(m));
        const double rel = std::abs(stats.estimate.correlation - target) / target;
        pass = pass && rel <= kTol;
        detail += fmt("M=%d corr=%.5f target=%.5f rel=%.3f%%; ", m, stats.estimate.correlation,
                      target, 100.0 * rel);
    }
    detail += fmt("tol %.0f%% at n=%d", 100.0 * kTol, kSamples);
    return make_result(1, "rayleigh_baseline", pass, detail);
}

// ---------------------------------------------------------------------------
// Criterion 2: finite-array closed form vs Monte Carlo over the sweep grid
// ---------------------------------------------------------------------------

CheckResult check_closed_form_vs_mc(const VerifyOptions &opt)
{
    constexpr int kSamples = 20000;
    const double lambda = kSpeedOfLight / kCenterFrequencyHz;
    const double d = lambda / 2.0;
    const double alphas[] = {0.05, 0.1, 0.2, 0.6};
    const int keyholes[] = {1, 3};

    struct Point
    {
        bool ula;
        double alpha;
        int n_keyholes;
    };
    std::vector<Point> grid;
    for (int arr = 0; arr < 2; ++arr)
        for (double a : alphas)
            for (int l : keyholes)
                grid.push_back(Point{arr == 1, a, l});

    struct Outcome
    {
        double deviation_in_se = 0.0;
        bool within = false;
    };
    std::vector<Outcome> outcomes(grid.size());

    detail::parallel_for(grid.size(), opt.threads, [&](std::size_t i) {
        const Point &p = grid[i];
        const ArrayGeometry geom =
            p.ula ? ArrayGeometry::ula(64, d) : ArrayGeometry(8, 8, d, d);
        const PathEnsembleSpec spec = PathEnsembleSpec::keyhole(p.n_keyholes, p.alpha, p.alpha);
        RngStream rng(opt.master_seed, 200 + i);
        std::vector<cxd> dots(kSamples);
        const int m = geom.antenna_count();
        for (int t = 0; t < kSamples; ++t)
        {
            const auto [h1, h2] = generate_channel_pair(spec, geom, lambda, rng);
            dots[static_cast<std::size_t>(t)] = h1.dot(h2) / static_cast<double>(m);
        }
        const EnsembleStats stats = ensemble_correlation_from_dots(dots);
        const double cf =
            correlation_closed_form(spec, geom, lambda).variance * opt.closed_form_perturbation;
        const double dev = std::abs(stats.estimate.variance - cf);
        outcomes[i].deviation_in_se = stats.variance_se > 0.0 ? dev / stats.variance_se : 0.0;
        outcomes[i].within = dev <= 3.0 * stats.variance_se;
    });

    int n_pass = 0;
    double worst = 0.0;
    std::size_t worst_idx = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i)
    {
        if (outcomes[i].within)
            ++n_pass;
        if (outcomes[i].deviation_in_se > worst)
        {
            worst = outcomes[i].deviation_in_se;
            worst_idx = i;
        }
    }
    const double fraction = static_cast<double>(n_pass) / static_cast<double>(grid.size());
    const Point &w = grid[worst_idx];
    const std::string detail =
        fmt("%d/%zu grid points within 3 SE at n=%d (need >= 95%%); worst %.2f SE at "
            "%s alpha=%.2f L=%d",
            n_pass, grid.size(), kSamples, worst, w.ula ? "ula64" : "upa8x8", w.alpha,
            w.n_keyholes);
    return make_result(2, "closed_form_vs_monte_carlo", fraction >= 0.95, detail);
}

// ---------------------------------------------------------------------------
// Criterion 3: asymptotic accuracy window
// ---------------------------------------------------------------------------

CheckResult check_asymptotic_window()
{
    constexpr double kTol = 0.10;
    const double lambda = kSpeedOfLight / kCenterFrequencyHz;
    const double d = lambda / 2.0;
    const PathEnsembleSpec spec = PathEnsembleSpec::single_path(1.0, 1.0, 0.2, 0.2);

    bool pass = true;
    std::string detail;
    const struct
    {
        const char *name;
        ArrayGeometry geom;
    } cases[] = {{"upa16x16", ArrayGeometry::square_upa(256, d)},
                 {"ula196", ArrayGeometry::ula(196, d)}};
    for (const auto &c : cases)
    {
        const CorrelationEstimate cf = correlation_closed_form(spec, c.geom, lambda);
        const CorrelationEstimate asym = correlation_asymptotic(spec, c.geom, lambda);
        const double corr_ratio = cf.correlation / asym.correlation;
        const double var_ratio = cf.variance / asym.variance;
        pass = pass && std::abs(corr_ratio - 1.0) <= kTol;
        detail += fmt("%s corr_ratio=%.4f (var_ratio=%.4f); ", c.name, corr_ratio, var_ratio);
    }
    detail += fmt("tol |ratio-1| <= %.0f%% on the correlation level", 100.0 * kTol);
    return make_result(3, "asymptotic_accuracy_window", pass, detail);
}

// ---------------------------------------------------------------------------
// Criterion 4: spacing doubles while alpha halves, closed forms coincide
// ---------------------------------------------------------------------------

CheckResult check_spacing_alpha_offset()
{
    constexpr double kTol = 1e-12;
    const double lambda = kSpeedOfLight / kCenterFrequencyHz;

    bool pass = true;
    std::string detail;
    for (int arr = 0; arr < 2; ++arr)
    {
        const auto geom_of = [&](double d) {
            return arr == 0 ? ArrayGeometry(8, 8, d, d) : ArrayGeometry::ula(64, d);
        };
        const CorrelationEstimate narrow = correlation_closed_form(
            PathEnsembleSpec::single_path(1.0, 1.0, 0.2, 0.2), geom_of(0.25 * lambda), lambda);
        const CorrelationEstimate wide = correlation_closed_form(
            PathEnsembleSpec::single_path(1.0, 1.0, 0.1, 0.1), geom_of(0.5 * lambda), lambda);
        const double rel = std::abs(narrow.variance - wide.variance) /
                           std::max(narrow.variance, wide.variance);
        pass = pass && rel <= kTol;
        detail += fmt("%s rel_diff=%.2e; ", arr == 0 ? "upa8x8" : "ula64", rel);
    }
    detail += fmt("tol %.0e (d=0.25wl,a=0.2 vs d=0.5wl,a=0.1)", kTol);
    return make_result(4, "spacing_alpha_offset", pass, detail);
}

// ---------------------------------------------------------------------------
// Criterion 5: keyhole weighted form equals the general pair sum
// ---------------------------------------------------------------------------

CheckResult check_keyhole_identity()
{
    constexpr double kTol = 1e-12;
    const double lambda = kSpeedOfLight / kCenterFrequencyHz;
    const double d = 0.3 * lambda; // away from half-wavelength so no term vanishes
    const ArrayGeometry geom(8, 8, d, d);
    const double ax_o = 0.2, ay_o = 0.35;

    bool pass = true;
    std::string detail;
    for (int l : {1, 2, 3, 8})
    {
        const CorrelationEstimate direct =
            keyhole_closed_form(l, ax_o, ay_o, geom, lambda, false);
        const CorrelationEstimate general = correlation_closed_form(
            PathEnsembleSpec::keyhole(l, ax_o, ay_o), geom, lambda);
        const double rel =
            std::abs(direct.variance - general.variance) / std::abs(general.variance);
        pass = pass && rel <= kTol;
        detail += fmt("L=%d rel=%.2e; ", l, rel);
    }
    detail += fmt("tol %.0e", kTol);
    return make_result(5, "keyhole_identity", pass, detail);
}

// ---------------------------------------------------------------------------
// Criterion 6: half-wavelength ULA, alpha = 1: asymptotic variance is 1/M
// ---------------------------------------------------------------------------

CheckResult check_uniform_los_landmark()
{
    const double lambda = kSpeedOfLight / kCenterFrequencyHz;
    const PathEnsembleSpec spec = PathEnsembleSpec::single_path(1.0, 1.0, 1.0, 1.0);

    bool pass = true;
    std::string detail;
    for (int m : {16, 64, 100, 256})
    {
        const ArrayGeometry geom = ArrayGeometry::ula(m, lambda / 2.0);
        const double variance = correlation_asymptotic(spec, geom, lambda).variance;
        const double target = 1.0 / static_cast<double>(m);
        pass = pass && variance == target;
        detail += fmt("M=%d var=%.10g %s 1/M; ", m, variance,
                      variance == target ? "==" : "!=");
    }
    detail += "exact equality required";
    return make_result(6, "uniform_los_landmark", pass, detail);
}

// ---------------------------------------------------------------------------
// Criterion 7: sinc series closed form via Cesaro-averaged partial sums
// ---------------------------------------------------------------------------

CheckResult check_sinc_series()
{
    constexpr std::int64_t kN = 1000000;
    constexpr double kTol = 1e-3;

    bool pass = true;
    std::string detail;
    for (double gamma : {0.5, 1.0, kPi / 2.0, kPi})
    {
        const SincSeries series(gamma);
        const double avg = series.cesaro_average(kN);
        const double err = std::abs(avg - series.closed_form());
        pass = pass && err <= kTol;
        detail += fmt("g=%.4f err=%.2e; ", gamma, err);
    }

    // gamma = pi: every term after the first vanishes, partial sums stay 1.
    const SincSeries at_pi(kPi);
    for (std::int64_t n : {0LL, 1LL, 7LL, 1000LL})
    {
        const double err = std::abs(at_pi.partial_sum(n) - 1.0);
        pass = pass && err <= 1e-12;
    }
    detail += fmt("tol %.0e at N=%lld; gamma=pi partial sums exact to 1e-12", kTol,
                  static_cast<long long>(kN));
    return make_result(7, "sinc_series_cesaro", pass, detail);
}

// ---------------------------------------------------------------------------
// Criterion 8: lag-grouped double sum approaches pi/gamma
// ---------------------------------------------------------------------------

CheckResult check_sinc_lag_limit()
{
    constexpr int kM = 10000;
    constexpr double kTol = 1e-3;

    bool pass = true;
    std::string detail;
    for (double gamma : {0.5, 1.0, kPi / 2.0, kPi})
    {
        const double finite = sinc_lag_finite(gamma, kM);
        const double limit = sinc_lag_limit(gamma);
        const double rel = std::abs(finite - limit) / limit;
        pass = pass && rel <= kTol;
        detail += fmt("g=%.4f rel=%.2e; ", gamma, rel);
    }
    detail += fmt("tol %.0e at M=%d", kTol, kM);
    return make_result(8, "sinc_lag_limit", pass, detail);
}

// ---------------------------------------------------------------------------
// Criterion 9: dot-product moments vs independent 2-D quadrature
// ---------------------------------------------------------------------------

void gauss_legendre(int n, std::vector<double> &nodes, std::vector<double> &weights)
{
    nodes.assign(static_cast<std::size_t>(n), 0.0);
    weights.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
    {
        // Newton iteration from the Chebyshev initial guess.
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it)
        {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k)
            {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15)
                break;
        }
        nodes[static_cast<std::size_t>(i)] = x;
        weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

DotMoments quadrature_dot_moments(double alpha_x, double alpha_y, const ArrayGeometry &geom,
                                  double wavelength)
{
    std::vector<double> nodes, weights;
    gauss_legendre(64, nodes, weights);

    // Dot product of two responses whose sines differ by (ux, uy): the sum
    // of the steering entries evaluated at the difference itself.
    const auto dot_at = [&](double ux, double uy) {
        return steering_vector(geom, SteeringAngles{ux, uy}, wavelength).sum();
    };

    cxd mean(0.0, 0.0);
    double second = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
    {
        const double ux = alpha_x * nodes[i];
        for (std::size_t j = 0; j < nodes.size(); ++j)
        {
            const double uy = alpha_y * nodes[j];
            const cxd g = dot_at(ux, uy);
            const double w = weights[i] * weights[j] * 0.25; // normalized density
            mean += w * g;
            second += w * std::norm(g);
        }
    }

    DotMoments out;
    out.mean = mean.real();
    out.variance = second - std::norm(mean);
    return out;
}

CheckResult check_moment_quadrature()
{
    constexpr double kTol = 1e-6;
    const double lambda = kSpeedOfLight / kCenterFrequencyHz;
    const double d = lambda / 2.0;

    bool pass = true;
    std::string detail;
    const struct
    {
        const char *name;
        ArrayGeometry geom;
    } cases[] = {{"ula4", ArrayGeometry::ula(4, d)}, {"upa4x4", ArrayGeometry(4, 4, d, d)}};
    for (const auto &c : cases)
    {
        for (double alpha : {0.25, 0.5, 1.0})
        {
            const DotMoments formula = response_dot_moments(alpha, alpha, c.geom, lambda);
            const DotMoments quad = quadrature_dot_moments(alpha, alpha, c.geom, lambda);
            const double dm = std::abs(formula.mean - quad.mean);
            const double dv = std::abs(formula.variance - quad.variance);
            pass = pass && dm <= kTol && dv <= kTol;
            detail += fmt("%s a=%.2f dmean=%.1e dvar=%.1e; ", c.name, alpha, dm, dv);
        }
    }
    detail += fmt("tol %.0e absolute", kTol);
    return make_result(9, "moment_quadrature_oracle", pass, detail);
}

// ---------------------------------------------------------------------------
// Criterion 10: flat correlation across the 20 MHz band
// ---------------------------------------------------------------------------

CheckResult check_subcarrier_flatness(const VerifyOptions &opt)
{
    constexpr int kSamplesPerSubcarrier = 500;
    constexpr double kStdTol = 0.01;
    constexpr double kRatioTol = 1e-4;

    const SubcarrierPlan plan{kCenterFrequencyHz, 20e6, 52};
    const std::vector<double> wavelengths = subcarrier_wavelengths(plan);
    const int n_sc = plan.n_subcarriers;
    const ArrayGeometry geom(8, 8, 0.0635, 0.0635);

    struct Curve
    {
        double alpha;
        int n_keyholes;
    };
    std::vector<Curve> curves;
    for (double a : {0.05, 0.1, 0.2, 0.6})
        for (int l : {1, 3})
            curves.push_back(Curve{a, l});

    std::vector<double> corr(curves.size() * static_cast<std::size_t>(n_sc));
    detail::parallel_for(corr.size(), opt.threads, [&](std::size_t i) {
        const Curve &c = curves[i / static_cast<std::size_t>(n_sc)];
        const int sc = static_cast<int>(i % static_cast<std::size_t>(n_sc));
        const PathEnsembleSpec spec = PathEnsembleSpec::keyhole(c.n_keyholes, c.alpha, c.alpha);
        RngStream rng(opt.master_seed, 1000 + i);
        std::vector<cxd> dots(kSamplesPerSubcarrier);
        const int m = geom.antenna_count();
        for (int t = 0; t < kSamplesPerSubcarrier; ++t)
        {
            const auto [h1, h2] = generate_channel_pair(
                spec, geom, wavelengths[static_cast<std::size_t>(sc)], rng);
            dots[static_cast<std::size_t>(t)] = h1.dot(h2) / static_cast<double>(m);
        }
        corr[i] = ensemble_correlation_from_dots(dots).estimate.correlation;
    });

    bool pass = true;
    double worst_std = 0.0;
    for (std::size_t c = 0; c < curves.size(); ++c)
    {
        double mean = 0.0;
        for (int s = 0; s < n_sc; ++s)
            mean += corr[c * static_cast<std::size_t>(n_sc) + static_cast<std::size_t>(s)];
        mean /= n_sc;
        double var = 0.0;
        for (int s = 0; s < n_sc; ++s)
        {
            const double v =
                corr[c * static_cast<std::size_t>(n_sc) + static_cast<std::size_t>(s)] - mean;
            var += v * v;
        }
        const double sd = std::sqrt(var / (n_sc - 1));
        worst_std = std::max(worst_std, sd);
        pass = pass && sd < kStdTol;
    }

    // Cross-band level: in the large-array form the variance scales with
    // the squared wavelength, so the band-edge ratio is exact there. The
    // finite-M closed form is reported alongside; the square-root level
    // halves the percentage (both are printed, intent left open).
    const PathEnsembleSpec spec = PathEnsembleSpec::single_path(1.0, 1.0, 0.2, 0.2);
    const double lam_low_sc = wavelengths.front(); // lowest subcarrier = largest wavelength
    const double lam_high_sc = wavelengths.back();
    const double target = (lam_low_sc / lam_high_sc) * (lam_low_sc / lam_high_sc);
    const double asym_ratio = correlation_asymptotic(spec, geom, lam_low_sc).variance /
                              correlation_asymptotic(spec, geom, lam_high_sc).variance;
    const double cf_ratio = correlation_closed_form(spec, geom, lam_low_sc).variance /
                            correlation_closed_form(spec, geom, lam_high_sc).variance;
    pass = pass && std::abs(asym_ratio - target) <= kRatioTol;

    const std::string detail =
        fmt("worst per-curve std=%.4f (tol < %.2f, %d samples/subcarrier); cross-band "
            "asym var ratio=%.6f vs (wl_low/wl_high)^2=%.6f (tol %.0e, sqrt level %.6f, "
            "finite-M closed form %.6f)",
            worst_std, kStdTol, kSamplesPerSubcarrier, asym_ratio, target, kRatioTol,
            std::sqrt(asym_ratio), cf_ratio);
    return make_result(10, "subcarrier_flatness", pass, detail);
}

// ---------------------------------------------------------------------------
// Criterion 11: MUSIC planted-source recovery
// ---------------------------------------------------------------------------

struct MusicTrialSetup
{
    std::vector<SteeringAngles> sources;
    std::vector<double> truth_x_deg;
    std::vector<double> truth_y_deg;
};

bool run_music_trial(const MusicTrialSetup &setup, const ArrayGeometry &geom,
                     const std::vector<double> &wavelengths, double snr_db, RngStream &rng,
                     const AngleGrid &grid)
{
    const int m = geom.antenna_count();
    const int n_src = static_cast<int>(setup.sources.size());
    const double noise_var =
        static_cast<double>(n_src) / std::pow(10.0, snr_db / 10.0); // per-antenna signal power

    std::vector<ChannelVector> snapshots;
    snapshots.reserve(wavelengths.size());
    for (double lambda : wavelengths)
    {
        ChannelVector x = ChannelVector::Zero(m);
        for (const SteeringAngles &src : setup.sources)
        {
            const double phase = rng.uniform(0.0, 2.0 * kPi);
            x += std::polar(1.0, phase) * steering_vector(geom, src, lambda);
        }
        const double sigma = std::sqrt(noise_var);
        for (int a = 0; a < m; ++a)
            x[a] += sigma * rng.complex_normal();
        snapshots.push_back(std::move(x));
    }

    const double lambda_center = kSpeedOfLight / kCenterFrequencyHz;
    const SpectrumMap map = music_spectrum(snapshots, geom, lambda_center, n_src, grid);

    constexpr double kRadToDeg = 180.0 / kPi;
    const auto within_one_step = [&](const SpectrumPeak &peak, std::size_t truth) {
        const double px = std::asin(peak.s_x) * kRadToDeg;
        const double py = std::asin(peak.s_y) * kRadToDeg;
        return std::abs(px - setup.truth_x_deg[truth]) <= 1.0 + 1e-9 &&
               std::abs(py - setup.truth_y_deg[truth]) <= 1.0 + 1e-9;
    };

    if (n_src == 1)
        return within_one_step(map.global_peak(), 0);

    const std::vector<SpectrumPeak> peaks = map.local_maxima(n_src);
    if (static_cast<int>(peaks.size()) < n_src)
        return false;
    std::vector<bool> used(peaks.size(), false);
    for (std::size_t t = 0; t < setup.sources.size(); ++t)
    {
        bool matched = false;
        for (std::size_t p = 0; p < peaks.size(); ++p)
        {
            if (!used[p] && within_one_step(peaks[p], t))
            {
                used[p] = true;
                matched = true;
                break;
            }
        }
        if (!matched)
            return false;
    }
    return true;
}

CheckResult check_music_recovery(const VerifyOptions &opt)
{
    constexpr int kTrials = 100;
    constexpr double kSnrDb = 20.0;
    constexpr double kRadToDeg = 180.0 / kPi;

    const double lambda_center = kSpeedOfLight / kCenterFrequencyHz;
    const ArrayGeometry geom(8, 8, lambda_center / 2.0, lambda_center / 2.0);
    const std::vector<double> wavelengths =
        subcarrier_wavelengths(SubcarrierPlan{kCenterFrequencyHz, 20e6, 52});
    const AngleGrid grid = AngleGrid::degrees(1.0);

    std::vector<int> single_ok(kTrials, 0);
    detail::parallel_for(kTrials, opt.threads, [&](std::size_t t) {
        RngStream rng(opt.master_seed, 5000 + t);
        MusicTrialSetup setup;
        const double tx = rng.uniform(-50.0, 50.0);
        const double ty = rng.uniform(-50.0, 50.0);
        setup.sources = {SteeringAngles{std::sin(tx / kRadToDeg), std::sin(ty / kRadToDeg)}};
        setup.truth_x_deg = {tx};
        setup.truth_y_deg = {ty};
        single_ok[t] = run_music_trial(setup, geom, wavelengths, kSnrDb, rng, grid) ? 1 : 0;
    });

    std::vector<int> double_ok(kTrials, 0);
    detail::parallel_for(kTrials, opt.threads, [&](std::size_t t) {
        RngStream rng(opt.master_seed, 5200 + t);
        MusicTrialSetup setup;
        const double s1x = rng.uniform(-0.8, 0.3);
        const double s1y = rng.uniform(-0.8, 0.3);
        const double s2x = s1x + 0.5;
        const double s2y = s1y + 0.5;
        setup.sources = {SteeringAngles{s1x, s1y}, SteeringAngles{s2x, s2y}};
        setup.truth_x_deg = {std::asin(s1x) * kRadToDeg, std::asin(s2x) * kRadToDeg};
        setup.truth_y_deg = {std::asin(s1y) * kRadToDeg, std::asin(s2y) * kRadToDeg};
        double_ok[t] = run_music_trial(setup, geom, wavelengths, kSnrDb, rng, grid) ? 1 : 0;
    });

    int n1 = 0, n2 = 0;
    for (int t = 0; t < kTrials; ++t)
    {
        n1 += single_ok[static_cast<std::size_t>(t)];
        n2 += double_ok[static_cast<std::size_t>(t)];
    }
    const bool pass = n1 >= 95 && n2 >= 95;
    const std::string detail =
        fmt("one source %d/%d, two sources %d/%d within one 1-degree grid step at %.0f dB "
            "(need >= 95%%)",
            n1, kTrials, n2, kTrials, kSnrDb);
    return make_result(11, "music_recovery", pass, detail);
}

// ---------------------------------------------------------------------------
// Criterion 12: calibration round trip
// ---------------------------------------------------------------------------

CheckResult check_calibration_roundtrip(const VerifyOptions &opt)
{
    constexpr int kTrials = 50;
    constexpr int kAntennas = 64;
    constexpr double kTol = 1e-12;

    RngStream rng(opt.master_seed, 6000);
    double worst = 0.0;
    for (int t = 0; t < kTrials; ++t)
    {
        const ChannelVector truth = generate_rayleigh(kAntennas, rng);
        ChannelVector screen(kAntennas);
        for (int a = 0; a < kAntennas; ++a)
            screen[a] = std::polar(1.0, rng.uniform(0.0, 2.0 * kPi));
        const ChannelVector raw = screen.cwiseProduct(truth);
        const ChannelVector calibrated = calibrate(raw, screen);
        worst = std::max(worst, (calibrated - truth).cwiseAbs().maxCoeff());
    }
    const bool pass = worst <= kTol;
    return make_result(12, "calibration_roundtrip", pass,
                       fmt("worst entry error %.2e over %d random phase screens (tol %.0e)",
                           worst, kTrials, kTol));
}

// ---------------------------------------------------------------------------
// Criterion 13: container round trip and corruption detection
// ---------------------------------------------------------------------------

struct TempDir
{
    fs::path path;
    explicit TempDir(const std::string &tag)
    {
        path = fs::temp_directory_path() /
               fs::path("iucorr-" + tag + "-" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir()
    {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

CheckResult check_dataset_roundtrip(const VerifyOptions &opt)
{
    SyntheticDatasetSpec spec;
    spec.master_seed = opt.master_seed;
    const SyntheticDataset data = generate_synthetic_dataset(spec);

    std::string detail;
    bool pass = true;
    try
    {
        TempDir dir("verify-ds");
        const fs::path first = dir.path / "first";
        const fs::path second = dir.path / "second";
        write_dataset(data.manifest, data.records, first);

        DatasetReader reader(first);
        std::vector<LocationRecord> reread;
        reread.reserve(data.records.size());
        bool equal = reader.manifest().records.size() == data.manifest.records.size() &&
                     reader.manifest().clusters.size() == data.manifest.clusters.size();
        for (const LocationRecord &orig : data.records)
        {
            const LocationRecord back = reader.load(orig.location_id);
            equal = equal && back.samples.size() == orig.samples.size() &&
                    back.frames == orig.frames && back.cluster_id == orig.cluster_id;
            for (std::size_t i = 0; equal && i < orig.samples.size(); ++i)
                equal = back.samples[i] == orig.samples[i];
            reread.push_back(back);
        }
        pass = pass && equal;
        detail += fmt("round trip of %zu records (%d clusters x %d locations) %s; ",
                      data.records.size(), spec.clusters_los + spec.clusters_nlos,
                      spec.locations_per_cluster, equal ? "value-exact" : "MISMATCH");

        // Re-writing the re-read records must reproduce identical bytes.
        write_dataset(reader.manifest(), reread, second);
        bool bytes_equal = true;
        for (const auto &info : data.manifest.records)
        {
            std::ifstream a(first / (info.location_id + ".cplx"), std::ios::binary);
            std::ifstream b(second / (info.location_id + ".cplx"), std::ios::binary);
            std::string ba((std::istreambuf_iterator<char>(a)),
                           std::istreambuf_iterator<char>());
            std::string bb((std::istreambuf_iterator<char>(b)),
                           std::istreambuf_iterator<char>());
            bytes_equal = bytes_equal && !ba.empty() && ba == bb;
        }
        pass = pass && bytes_equal;
        detail += fmt("re-write bit-exact: %s; ", bytes_equal ? "yes" : "NO");

        // Flip one payload byte: the checksum must catch it and name the spot.
        const std::string victim = data.records.front().location_id;
        const fs::path blob = first / (victim + ".cplx");
        {
            std::fstream f(blob, std::ios::binary | std::ios::in | std::ios::out);
            f.seekp(128);
            char byte = 0;
            f.seekg(128);
            f.read(&byte, 1);
            byte = static_cast<char>(byte ^ 0x5A);
            f.seekp(128);
            f.write(&byte, 1);
        }
        bool corruption_caught = false;
        try
        {
            (void)reader.load(victim);
        }
        catch (const IoError &e)
        {
            corruption_caught = std::string(e.what()).find(victim) != std::string::npos;
        }
        pass = pass && corruption_caught;
        detail += fmt("bit-flip detected: %s; ", corruption_caught ? "yes" : "NO");

        // Truncate the blob: the size check on open must catch it.
        fs::resize_file(blob, fs::file_size(blob) - 16);
        bool truncation_caught = false;
        try
        {
            DatasetReader broken(first);
        }
        catch (const IoError &e)
        {
            truncation_caught = std::string(e.what()).find(victim) != std::string::npos;
        }
        pass = pass && truncation_caught;
        detail += fmt("truncation detected: %s", truncation_caught ? "yes" : "NO");
    }
    catch (const std::exception &e)
    {
        pass = false;
        detail += std::string("unexpected error: ") + e.what();
    }
    return make_result(13, "dataset_container_roundtrip", pass, detail);
}

// ---------------------------------------------------------------------------
// Criterion 14: measured-dataset checks (informative, external data)
// ---------------------------------------------------------------------------

CheckResult check_measured_dataset(const VerifyOptions &opt)
{
    if (opt.measured_dataset_path.empty() || !fs::exists(opt.measured_dataset_path))
    {
        CheckResult r;
        r.id = 14;
        r.name = "measured_dataset";
        r.status = CheckStatus::skip;
        r.gating = false;
        r.detail = "no measured dataset supplied (pass --dataset or set "
                   "IUCORR_MEASURED_DATASET); informative check skipped";
        return r;
    }

    bool pass = true;
    std::string detail;
    try
    {
        DatasetReader reader(opt.measured_dataset_path);
        const ClusterStats stats = cluster_correlation_stats(reader, 64, {});
        const int k = stats.n_clusters();

        const auto label_of = [&](int idx) {
            for (const ClusterInfo &c : reader.manifest().clusters)
                if (c.cluster_id == stats.cluster_ids[static_cast<std::size_t>(idx)])
                    return c.label;
            return ClusterLabel::los;
        };

        double min_intra = 1.0, min_los_intra = 1.0, max_nlos_intra = 0.0;
        for (int i = 0; i < k; ++i)
        {
            min_intra = std::min(min_intra, stats.mean(i, i));
            if (label_of(i) == ClusterLabel::los)
                min_los_intra = std::min(min_los_intra, stats.mean(i, i));
            else
                max_nlos_intra = std::max(max_nlos_intra, stats.mean(i, i));
        }
        pass = pass && min_intra >= 0.48;
        pass = pass && std::abs(min_los_intra - 0.838) <= 0.02;
        pass = pass && std::abs(max_nlos_intra - 0.623) <= 0.02;
        detail += fmt("min intra=%.3f (>=0.48); min LOS intra=%.3f (0.838+-0.02); "
                      "max NLOS intra=%.3f (0.623+-0.02); ",
                      min_intra, min_los_intra, max_nlos_intra);

        int idx_los4 = -1, idx_nlos2 = -1;
        for (int i = 0; i < k; ++i)
        {
            if (stats.cluster_ids[static_cast<std::size_t>(i)] == "los_4")
                idx_los4 = i;
            if (stats.cluster_ids[static_cast<std::size_t>(i)] == "nlos_2")
                idx_nlos2 = i;
        }
        if (idx_los4 >= 0 && idx_nlos2 >= 0)
        {
            const double pair_mean = stats.mean(idx_los4, idx_nlos2);
            pass = pass && std::abs(pair_mean - 0.557) <= 0.02;
            detail += fmt("los_4/nlos_2 mean=%.3f (0.557+-0.02); ", pair_mean);
        }
        else
        {
            detail += "clusters los_4/nlos_2 not found by id, pair check not evaluated; ";
        }

        int high = 0, total = 0;
        const double twice_rayleigh = 2.0 / 8.0; // M = 64
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j)
            {
                ++total;
                if (stats.mean(i, j) >= twice_rayleigh)
                    ++high;
            }
        const double fraction = total > 0 ? static_cast<double>(high) / total : 0.0;
        pass = pass && std::abs(fraction - 0.3056) <= 0.03;
        detail += fmt("%d/%d inter-cluster pairs >= 2x Rayleigh = %.2f%% (30.56%%+-3%%)", high,
                      total, 100.0 * fraction);
    }
    catch (const std::exception &e)
    {
        pass = false;
        detail = std::string("measured dataset error: ") + e.what();
    }

    CheckResult r = make_result(14, "measured_dataset", pass, detail, /*gating=*/false);
    return r;
}

} // namespace

bool VerifyReport::all_passed() const
{
    for (const CheckResult &c : checks)
        if (c.gating && c.status == CheckStatus::fail)
            return false;
    return true;
}

int VerifyReport::exit_code() const
{
    return all_passed() ? 0 : 1;
}

VerifyReport verify_suite(const VerifyOptions &options)
{
    const auto wanted = [&](int id) {
        return options.checks.empty() ||
               std::find(options.checks.begin(), options.checks.end(), id) !=
                   options.checks.end();
    };

    VerifyReport report;
    if (wanted(1))
        report.checks.push_back(check_rayleigh_baseline(options));
    if (wanted(2))
        report.checks.push_back(check_closed_form_vs_mc(options));
    if (wanted(3))
        report.checks.push_back(check_asymptotic_window());
    if (wanted(4))
        report.checks.push_back(check_spacing_alpha_offset());
    if (wanted(5))
        report.checks.push_back(check_keyhole_identity());
    if (wanted(6))
        report.checks.push_back(check_uniform_los_landmark());
    if (wanted(7))
        report.checks.push_back(check_sinc_series());
    if (wanted(8))
        report.checks.push_back(check_sinc_lag_limit());
    if (wanted(9))
        report.checks.push_back(check_moment_quadrature());
    if (wanted(10))
        report.checks.push_back(check_subcarrier_flatness(options));
    if (wanted(11))
        report.checks.push_back(check_music_recovery(options));
    if (wanted(12))
        report.checks.push_back(check_calibration_roundtrip(options));
    if (wanted(13))
        report.checks.push_back(check_dataset_roundtrip(options));
    if (wanted(14))
        report.checks.push_back(check_measured_dataset(options));
    return report;
}

void print_report(const VerifyReport &report, std::ostream &os)
{
    for (const CheckResult &c : report.checks)
    {
        const char *tag = c.status == CheckStatus::pass ? "PASS"
                          : c.status == CheckStatus::skip ? "SKIP"
                                                          : "FAIL";
        os << '[' << tag << "] " << fmt("%02d", c.id) << ' ' << c.name;
        if (!c.gating)
            os << " (informative)";
        os << ": " << c.detail << '\n';
    }
    os << (report.all_passed() ? "verification suite: all gating checks passed"
                               : "verification suite: FAILURES present")
       << '\n';
}

} // namespace iucorr
