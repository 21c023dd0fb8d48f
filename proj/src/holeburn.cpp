#include "qmem/holeburn.hpp"

#include <algorithm>
#include <cmath>

#include "qmem/errors.hpp"
#include "qmem/spectral.hpp"

namespace qmem {

std::array<std::array<double, 3>, 3> LevelScheme::uniform_strengths() {
    const double third = 1.0 / 3.0;
    return {{{third, third, third}, {third, third, third}, {third, third, third}}};
}

std::array<double, 3> LevelScheme::ground_offsets() const {
    return {0.0, ground_splittings[0], ground_splittings[0] + ground_splittings[1]};
}

std::array<double, 3> LevelScheme::excited_offsets() const {
    return {0.0, excited_splittings[0], excited_splittings[0] + excited_splittings[1]};
}

double LevelScheme::transition_offset(int g, int e, int ref_g, int ref_e) const {
    const auto go = ground_offsets();
    const auto eo = excited_offsets();
    return (eo[e] - eo[ref_e]) - (go[g] - go[ref_g]);
}

void LevelScheme::validate() const {
    for (double s : ground_splittings)
        if (!(s > 0.0)) throw ParameterError("ground splittings must be > 0");
    for (double s : excited_splittings)
        if (!(s > 0.0)) throw ParameterError("excited splittings must be > 0");
    for (const auto& row : oscillator_strengths) {
        double sum = 0.0;
        for (double v : row) {
            if (v < 0.0) throw ParameterError("oscillator strengths must be >= 0");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw ParameterError("oscillator-strength rows must sum to 1");
    }
    for (const auto& row : branching) {
        double sum = 0.0;
        for (double v : row) {
            if (v < 0.0) throw ParameterError("branching ratios must be >= 0");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw ParameterError("branching rows must sum to 1");
    }
}

void PumpStep::validate() const {
    if (ground_level < 0 || ground_level > 2 || excited_level < 0 || excited_level > 2)
        throw ParameterError("pump step addresses an undefined level index");
    if (!(band_hi >= band_lo)) throw ParameterError("pump band is empty");
    if (!(duration > 0.0)) throw ParameterError("pump duration must be > 0");
    if (rate < 0.0) throw ParameterError("pump rate must be >= 0");
}

void BurnConfig::validate() const {
    if (!(probe_hi > probe_lo)) throw ParameterError("probe span is empty");
    if (!(grid_step > 0.0)) throw ParameterError("grid step must be > 0");
    if (!(homogeneous_fwhm > 0.0)) throw ParameterError("homogeneous linewidth must be > 0");
    if (reference_ground < 0 || reference_ground > 2 || reference_excited < 0 ||
        reference_excited > 2)
        throw ParameterError("reference transition indices out of range");
}

namespace {

// Lorentzian-smoothed band indicator in [0, 1].
double band_indicator(double nu, double lo, double hi, double fwhm) {
    const double inv = 2.0 / fwhm;
    return (std::atan((hi - nu) * inv) - std::atan((lo - nu) * inv)) / kPi;
}

struct PairOffsets {
    // offset[g][e] of each transition relative to the reference transition.
    std::array<std::array<double, 3>, 3> off;
    double min_off = 0.0, max_off = 0.0;
};

PairOffsets pair_offsets(const LevelScheme& scheme, const BurnConfig& config) {
    PairOffsets p;
    p.min_off = 1e300;
    p.max_off = -1e300;
    for (int g = 0; g < 3; ++g)
        for (int e = 0; e < 3; ++e) {
            p.off[g][e] = scheme.transition_offset(g, e, config.reference_ground,
                                                   config.reference_excited);
            p.min_off = std::min(p.min_off, p.off[g][e]);
            p.max_off = std::max(p.max_off, p.off[g][e]);
        }
    return p;
}

}  // namespace

BurnResult burn(const LevelScheme& scheme, const BurnConfig& config,
                std::span<const PumpStep> steps) {
    scheme.validate();
    config.validate();
    for (const auto& s : steps) s.validate();

    const PairOffsets pairs = pair_offsets(scheme, config);
    const double pad = 50.0 * config.homogeneous_fwhm + 2.0 * config.grid_step;
    const double lo = config.probe_lo - pairs.max_off - pad;
    const double hi = config.probe_hi - pairs.min_off + pad;
    const std::size_t n = static_cast<std::size_t>(std::ceil((hi - lo) / config.grid_step)) + 1;

    BurnResult result;
    result.class_detuning.resize(n);
    for (std::size_t k = 0; k < n; ++k)
        result.class_detuning[k] = lo + config.grid_step * static_cast<double>(k);
    for (auto& level : result.pop) level.assign(n, 1.0 / 3.0);

    for (const auto& step : steps) {
        const double laser_lo = step.band_lo + pairs.off[step.ground_level][step.excited_level];
        const double laser_hi = step.band_hi + pairs.off[step.ground_level][step.excited_level];
        const double s_named =
            scheme.oscillator_strengths[step.ground_level][step.excited_level];
        if (s_named <= 0.0)
            throw ParameterError("pump step names a transition with zero strength");

        for (std::size_t k = 0; k < n; ++k) {
            const double delta = result.class_detuning[k];
            // Pump rates per (ground, excited) pairing at this class.
            double rates[3][3];
            double out_rate[3] = {0.0, 0.0, 0.0};
            bool active = false;
            for (int g = 0; g < 3; ++g)
                for (int e = 0; e < 3; ++e) {
                    const double nu_t = delta + pairs.off[g][e];
                    const double ind =
                        band_indicator(nu_t, laser_lo, laser_hi, config.homogeneous_fwhm);
                    const double r = step.rate * ind *
                                     scheme.oscillator_strengths[g][e] / s_named;
                    rates[g][e] = r > 1e-9 * step.rate ? r : 0.0;
                    out_rate[g] += rates[g][e];
                    if (rates[g][e] > 0.0) active = true;
                }
            if (!active) continue;

            double p[3] = {result.pop[0][k], result.pop[1][k], result.pop[2][k]};
            int pumped_levels = 0;
            int pumped_g = -1;
            for (int g = 0; g < 3; ++g)
                if (out_rate[g] > 0.0) {
                    ++pumped_levels;
                    pumped_g = g;
                }
            if (pumped_levels == 1) {
                // Closed form: single pumped level, instant redistribution.
                const int g = pumped_g;
                double back = 0.0, gain[3] = {0.0, 0.0, 0.0};
                for (int e = 0; e < 3; ++e)
                    for (int i = 0; i < 3; ++i) {
                        const double flux = rates[g][e] * scheme.branching[e][i];
                        if (i == g)
                            back += flux;
                        else
                            gain[i] += flux;
                    }
                const double r_eff = out_rate[g] - back;
                if (r_eff > 0.0) {
                    const double moved = p[g] * (1.0 - std::exp(-r_eff * step.duration));
                    p[g] -= moved;
                    for (int i = 0; i < 3; ++i)
                        if (i != g) p[i] += moved * gain[i] / r_eff;
                }
            } else {
                // General linear system dp/dt = M p, RK4 with conservative M.
                double m[3][3] = {};
                for (int g = 0; g < 3; ++g)
                    for (int e = 0; e < 3; ++e)
                        for (int i = 0; i < 3; ++i)
                            m[i][g] += rates[g][e] * scheme.branching[e][i];
                for (int g = 0; g < 3; ++g) m[g][g] -= out_rate[g];
                double max_rate = 0.0;
                for (int g = 0; g < 3; ++g) max_rate = std::max(max_rate, out_rate[g]);
                const int substeps =
                    std::max(64, static_cast<int>(std::ceil(8.0 * max_rate * step.duration)));
                const double h = step.duration / substeps;
                auto deriv = [&](const double* q, double* dq) {
                    for (int i = 0; i < 3; ++i)
                        dq[i] = m[i][0] * q[0] + m[i][1] * q[1] + m[i][2] * q[2];
                };
                for (int sstep = 0; sstep < substeps; ++sstep) {
                    double k1[3], k2[3], k3[3], k4[3], tmp[3];
                    deriv(p, k1);
                    for (int i = 0; i < 3; ++i) tmp[i] = p[i] + 0.5 * h * k1[i];
                    deriv(tmp, k2);
                    for (int i = 0; i < 3; ++i) tmp[i] = p[i] + 0.5 * h * k2[i];
                    deriv(tmp, k3);
                    for (int i = 0; i < 3; ++i) tmp[i] = p[i] + h * k3[i];
                    deriv(tmp, k4);
                    for (int i = 0; i < 3; ++i)
                        p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
            result.pop[0][k] = p[0];
            result.pop[1][k] = p[1];
            result.pop[2][k] = p[2];
        }
    }
    return result;
}

namespace {

double interp_pop(const BurnResult& r, int level, double delta) {
    const auto& grid = r.class_detuning;
    if (delta < grid.front() || delta > grid.back())
        throw ParameterError("population grid does not cover the requested detuning");
    const double step = grid[1] - grid[0];
    const double f = (delta - grid.front()) / step;
    const std::size_t i = std::min(static_cast<std::size_t>(f), grid.size() - 2);
    const double w = f - static_cast<double>(i);
    return (1.0 - w) * r.pop[level][i] + w * r.pop[level][i + 1];
}

}  // namespace

AbsorptionProfile absorption_spectrum(const BurnResult& populations,
                                      const LevelScheme& scheme, double background_depth,
                                      const BurnConfig& config) {
    scheme.validate();
    config.validate();
    if (background_depth < 0.0) throw ParameterError("background depth must be >= 0");
    if (populations.class_detuning.size() < 2)
        throw ParameterError("population grid too small");
    for (const auto& level : populations.pop)
        if (level.size() != populations.class_detuning.size())
            throw ParameterError("population arrays do not match the class grid");

    const PairOffsets pairs = pair_offsets(scheme, config);
    AbsorptionProfile profile;
    const std::size_t n =
        static_cast<std::size_t>(std::ceil((config.probe_hi - config.probe_lo) /
                                           config.grid_step)) + 1;
    profile.grid.resize(n);
    std::vector<double> raw(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double nu = config.probe_lo + config.grid_step * static_cast<double>(k);
        profile.grid[k] = nu;
        double a = 0.0;
        for (int g = 0; g < 3; ++g)
            for (int e = 0; e < 3; ++e)
                a += scheme.oscillator_strengths[g][e] *
                     interp_pop(populations, g, nu - pairs.off[g][e]);
        raw[k] = background_depth * a;
    }

    // Homogeneous-lineshape smoothing with a normalized discrete kernel, so
    // a flat profile stays exactly flat.
    const int half = std::max(1, static_cast<int>(std::ceil(20.0 * config.homogeneous_fwhm /
                                                            config.grid_step)));
    std::vector<double> kernel(2 * half + 1);
    double ksum = 0.0;
    for (int j = -half; j <= half; ++j) {
        const double x = static_cast<double>(j) * config.grid_step;
        const double hw = 0.5 * config.homogeneous_fwhm;
        kernel[j + half] = hw / (kPi * (x * x + hw * hw));
        ksum += kernel[j + half];
    }
    for (double& v : kernel) v /= ksum;
    profile.alpha.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int j = -half; j <= half; ++j) {
            const std::ptrdiff_t idx =
                std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(k) + j, 0,
                                           static_cast<std::ptrdiff_t>(n) - 1);
            acc += kernel[j + half] * raw[idx];
        }
        profile.alpha[k] = acc;
    }
    return profile;
}

std::vector<PumpStep> default_preparation_sequence(double window_width,
                                                   double feature_width,
                                                   double pump_rate, double step_duration,
                                                   int backpump_rounds) {
    if (!(window_width > feature_width) || !(feature_width > 0.0))
        throw ParameterError("window must be wider than the feature");
    std::vector<PumpStep> steps;
    const double wh = 0.5 * window_width;
    const double fh = 0.5 * feature_width;
    steps.push_back({0, 2, -wh, wh, step_duration, pump_rate});
    for (int r = 0; r < backpump_rounds; ++r) {
        steps.push_back({1, 2, -fh, fh, step_duration, pump_rate});
        steps.push_back({2, 1, -fh, fh, step_duration, pump_rate});
    }
    return steps;
}

double feature_fwhm(const AbsorptionProfile& profile, double window_lo, double window_hi) {
    if (profile.grid.size() < 3) throw ParameterError("profile too small");
    std::size_t first = profile.grid.size(), last = 0, peak = 0;
    double floor = 1e300, top = -1e300;
    for (std::size_t k = 0; k < profile.grid.size(); ++k) {
        if (profile.grid[k] < window_lo || profile.grid[k] > window_hi) continue;
        if (first == profile.grid.size()) first = k;
        last = k;
        floor = std::min(floor, profile.alpha[k]);
        if (profile.alpha[k] > top) {
            top = profile.alpha[k];
            peak = k;
        }
    }
    if (first >= last) throw ParameterError("window contains no profile points");
    if (!(top > floor)) throw ParameterError("no absorption feature inside the window");
    const double half_level = floor + 0.5 * (top - floor);
    auto cross = [&](std::size_t from, int dir) {
        std::size_t k = from;
        while (k > first && k < last && profile.alpha[k] > half_level)
            k = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(k) + dir);
        // Linear interpolation between k and the previous sample.
        const std::size_t k_in = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(k) - dir);
        const double a0 = profile.alpha[k_in], a1 = profile.alpha[k];
        const double x0 = profile.grid[k_in], x1 = profile.grid[k];
        if (a0 == a1) return x1;
        return x0 + (half_level - a0) / (a1 - a0) * (x1 - x0);
    };
    return cross(peak, +1) - cross(peak, -1);
}

}  // namespace qmem
