#include "qmem/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "qmem/errors.hpp"
#include "qmem/rng.hpp"

namespace qmem {

namespace {

double gauss_sigma(double fwhm) { return fwhm / kGaussFwhmPerSigma; }

double gauss_pdf(double x, double fwhm) {
    const double s = gauss_sigma(fwhm);
    const double u = x / s;
    return std::exp(-0.5 * u * u) / (s * std::sqrt(kTwoPi));
}

double lorentz_pdf(double x, double fwhm) {
    const double hw = 0.5 * fwhm;
    return hw / (kPi * (x * x + hw * hw));
}

double gauss_cdf(double x, double fwhm) {
    return 0.5 * std::erfc(-x / (gauss_sigma(fwhm) * std::sqrt(2.0)));
}

double lorentz_cdf(double x, double fwhm) {
    return 0.5 + std::atan(x / (0.5 * fwhm)) / kPi;
}

// Adaptive Simpson quadrature for the Voigt convolution integrals.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double tol,
                        int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, fb, frm, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Voigt density at offset x from center: int G(t) L(x - t) dt. The Gaussian
// factor confines the integrand, so +/-12 sigma brackets suffice.
double voigt_pdf_offset(double x, double gauss_fwhm, double lorentz_fwhm) {
    if (gauss_fwhm == 0.0) return lorentz_pdf(x, lorentz_fwhm);
    if (lorentz_fwhm == 0.0) return gauss_pdf(x, gauss_fwhm);
    const double s = gauss_sigma(gauss_fwhm);
    auto f = [&](double t) { return gauss_pdf(t, gauss_fwhm) * lorentz_pdf(x - t, lorentz_fwhm); };
    const double peak = lorentz_pdf(0.0, lorentz_fwhm) / (s * std::sqrt(kTwoPi));
    return integrate(f, -12.0 * s, 12.0 * s, 1e-11 * std::max(peak, 1e-300));
}

}  // namespace

SpectralDistribution SpectralDistribution::gaussian(double fwhm, double center) {
    SpectralDistribution d{DistKind::Gaussian, fwhm, 0.0, center};
    d.validate();
    return d;
}

SpectralDistribution SpectralDistribution::lorentzian(double fwhm, double center) {
    SpectralDistribution d{DistKind::Lorentzian, 0.0, fwhm, center};
    d.validate();
    return d;
}

SpectralDistribution SpectralDistribution::voigt(double gauss_fwhm, double lorentz_fwhm,
                                                 double center) {
    SpectralDistribution d{DistKind::Voigt, gauss_fwhm, lorentz_fwhm, center};
    d.validate();
    return d;
}

SpectralDistribution SpectralDistribution::delta(double center) {
    return {DistKind::Gaussian, 0.0, 0.0, center};
}

double SpectralDistribution::scale() const {
    return std::max(gauss_fwhm, lorentz_fwhm);
}

void SpectralDistribution::validate() const {
    if (!std::isfinite(gauss_fwhm) || !std::isfinite(lorentz_fwhm) || !std::isfinite(center))
        throw ParameterError("spectral distribution parameters must be finite");
    if (gauss_fwhm < 0.0 || lorentz_fwhm < 0.0)
        throw ParameterError("spectral FWHM values must be >= 0");
    switch (kind) {
        case DistKind::Gaussian:
            if (lorentz_fwhm != 0.0)
                throw ParameterError("Gaussian distribution cannot carry a Lorentzian width");
            break;
        case DistKind::Lorentzian:
            if (gauss_fwhm != 0.0)
                throw ParameterError("Lorentzian distribution cannot carry a Gaussian width");
            if (lorentz_fwhm == 0.0)
                throw ParameterError("Lorentzian distribution needs a nonzero width");
            break;
        case DistKind::Voigt:
            break;
    }
}

double pdf(const SpectralDistribution& dist, double detuning) {
    dist.validate();
    if (dist.is_delta())
        throw ParameterError("pdf undefined for a zero-width distribution");
    const double x = detuning - dist.center;
    switch (dist.kind) {
        case DistKind::Gaussian:
            return gauss_pdf(x, dist.gauss_fwhm);
        case DistKind::Lorentzian:
            return lorentz_pdf(x, dist.lorentz_fwhm);
        case DistKind::Voigt:
            return voigt_pdf_offset(x, dist.gauss_fwhm, dist.lorentz_fwhm);
    }
    return 0.0;
}

double cdf(const SpectralDistribution& dist, double detuning) {
    dist.validate();
    if (dist.is_delta()) return detuning >= dist.center ? 1.0 : 0.0;
    const double x = detuning - dist.center;
    switch (dist.kind) {
        case DistKind::Gaussian:
            return gauss_cdf(x, dist.gauss_fwhm);
        case DistKind::Lorentzian:
            return lorentz_cdf(x, dist.lorentz_fwhm);
        case DistKind::Voigt: {
            if (dist.gauss_fwhm == 0.0) return lorentz_cdf(x, dist.lorentz_fwhm);
            if (dist.lorentz_fwhm == 0.0) return gauss_cdf(x, dist.gauss_fwhm);
            // CDF of the sum: int G(t) L_cdf(x - t) dt.
            const double s = gauss_sigma(dist.gauss_fwhm);
            auto f = [&](double t) {
                return gauss_pdf(t, dist.gauss_fwhm) * lorentz_cdf(x - t, dist.lorentz_fwhm);
            };
            return integrate(f, -12.0 * s, 12.0 * s, 1e-12);
        }
    }
    return 0.0;
}

double sample_one(const SpectralDistribution& dist, std::uint64_t seed,
                  std::uint64_t index) {
    auto rng = SplitMix64::for_index(seed, index);
    double value = dist.center;
    if (dist.gauss_fwhm > 0.0) value += gauss_sigma(dist.gauss_fwhm) * rng.normal();
    if (dist.lorentz_fwhm > 0.0 && dist.kind != DistKind::Gaussian)
        value += 0.5 * dist.lorentz_fwhm * rng.cauchy();
    return value;
}

std::vector<double> sample(const SpectralDistribution& dist, std::uint64_t seed,
                           std::size_t n) {
    dist.validate();
    if (n == 0) throw ParameterError("cannot sample an empty ensemble (n = 0)");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = sample_one(dist, seed, i);
    return out;
}

double normalization_quadrature(const SpectralDistribution& dist, int points) {
    dist.validate();
    if (dist.is_delta()) return 1.0;
    if (points < 3) throw ParameterError("normalization quadrature needs >= 3 points");
    // x = center + s tan(u), u in (-pi/2, pi/2); trapezoid in u.
    const double s = dist.scale();
    const double eps = 1e-9;
    const double lo = -0.5 * kPi + eps;
    const double hi = 0.5 * kPi - eps;
    const double h = (hi - lo) / (points - 1);
    double sum = 0.0;
    for (int i = 0; i < points; ++i) {
        const double u = lo + h * i;
        const double c = std::cos(u);
        const double x = dist.center + s * std::tan(u);
        const double w = (i == 0 || i == points - 1) ? 0.5 : 1.0;
        sum += w * pdf(dist, x) * s / (c * c);
    }
    return sum * h;
}

Pulse Pulse::square(double peak_rabi, double duration, double carrier_detuning,
                    double phase) {
    Pulse p;
    p.shape = PulseShape::Square;
    p.peak_rabi = peak_rabi;
    p.duration = duration;
    p.carrier_detuning = carrier_detuning;
    p.phase = phase;
    p.validate();
    return p;
}

Pulse Pulse::square_pi(double peak_rabi, double phase) {
    return square(peak_rabi, kPi / peak_rabi, 0.0, phase);
}

Pulse Pulse::chs(double peak_rabi, double bandwidth, double duration,
                 double carrier_detuning, double phase, double truncation) {
    Pulse p;
    p.shape = PulseShape::CHS;
    p.peak_rabi = peak_rabi;
    p.duration = duration;
    p.carrier_detuning = carrier_detuning;
    p.phase = phase;
    p.chs_bandwidth = bandwidth;
    p.chs_truncation = truncation;
    p.validate();
    return p;
}

double Pulse::chs_beta() const {
    return 2.0 * std::acosh(1.0 / chs_truncation) / duration;
}

void Pulse::validate() const {
    if (!(duration > 0.0) || !std::isfinite(duration))
        throw ParameterError("pulse duration must be > 0");
    if (peak_rabi < 0.0 || !std::isfinite(peak_rabi))
        throw ParameterError("pulse peak Rabi frequency must be >= 0");
    if (!std::isfinite(carrier_detuning) || !std::isfinite(phase))
        throw ParameterError("pulse parameters must be finite");
    if (shape == PulseShape::CHS) {
        if (chs_bandwidth < 0.0 || !std::isfinite(chs_bandwidth))
            throw ParameterError("CHS bandwidth must be >= 0");
        if (!(chs_truncation > 0.0 && chs_truncation < 1.0))
            throw ParameterError("CHS truncation must lie in (0, 1)");
    }
}

TwoLevelState TwoLevelState::superposition() {
    TwoLevelState s;
    s.population_excited = 0.5;
    s.coherence = 0.5;
    return s;
}

BlochVec TwoLevelState::to_bloch() const {
    return {2.0 * coherence.real(), -2.0 * coherence.imag(),
            2.0 * population_excited - 1.0};
}

TwoLevelState TwoLevelState::from_bloch(const BlochVec& v) {
    TwoLevelState s;
    s.population_excited = 0.5 * (1.0 + v.z);
    s.coherence = {0.5 * v.x, -0.5 * v.y};
    return s;
}

namespace {

// Torque vector (rad/s) of the rotating-frame Hamiltonian at pulse time t.
void chs_torque(const Pulse& p, double detuning_hz, double t, double* wx, double* wy,
                double* wz) {
    const double beta = p.chs_beta();
    const double u = beta * (t - 0.5 * p.duration);
    const double envelope = p.peak_rabi / std::cosh(u);
    const double sweep = kPi * p.chs_bandwidth * std::tanh(u);  // (B/2) tanh, angular
    *wx = envelope * std::cos(p.phase);
    *wy = envelope * std::sin(p.phase);
    *wz = kTwoPi * (detuning_hz - p.carrier_detuning) - sweep;
}

BlochVec rk4_step(const Pulse& p, double detuning, double t, double dt, BlochVec r) {
    auto deriv = [&](double tt, const BlochVec& v) {
        double wx, wy, wz;
        chs_torque(p, detuning, tt, &wx, &wy, &wz);
        return BlochVec{wy * v.z - wz * v.y, wz * v.x - wx * v.z, wx * v.y - wy * v.x};
    };
    const BlochVec k1 = deriv(t, r);
    const BlochVec k2 = deriv(t + 0.5 * dt, {r.x + 0.5 * dt * k1.x, r.y + 0.5 * dt * k1.y,
                                             r.z + 0.5 * dt * k1.z});
    const BlochVec k3 = deriv(t + 0.5 * dt, {r.x + 0.5 * dt * k2.x, r.y + 0.5 * dt * k2.y,
                                             r.z + 0.5 * dt * k2.z});
    const BlochVec k4 = deriv(t + dt, {r.x + dt * k3.x, r.y + dt * k3.y, r.z + dt * k3.z});
    r.x += dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    r.y += dt / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
    r.z += dt / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z);
    return r;
}

}  // namespace

TwoLevelState propagate_two_level(const Pulse& pulse, double detuning,
                                  const TwoLevelState& initial) {
    pulse.validate();
    if (!std::isfinite(detuning) || !std::isfinite(initial.population_excited) ||
        !std::isfinite(initial.coherence.real()) || !std::isfinite(initial.coherence.imag()))
        throw NumericError("propagate_two_level: non-finite input");

    BlochVec r = initial.to_bloch();
    if (pulse.shape == PulseShape::Square) {
        const double wx = pulse.peak_rabi * std::cos(pulse.phase);
        const double wy = pulse.peak_rabi * std::sin(pulse.phase);
        const double wz = kTwoPi * (detuning - pulse.carrier_detuning);
        const double w = std::sqrt(wx * wx + wy * wy + wz * wz);
        if (w == 0.0) return initial;
        const auto rot = BlochRotation::about_axis(wx / w, wy / w, wz / w,
                                                   w * pulse.duration);
        return TwoLevelState::from_bloch(rot.apply(r));
    }
    // CHS: fixed-step RK4.
    const double rate = std::max({pulse.peak_rabi, kTwoPi * pulse.chs_bandwidth,
                                  kTwoPi * std::abs(detuning - pulse.carrier_detuning),
                                  1.0 / pulse.duration});
    const double dt_max = 1.0 / (200.0 * rate);
    const int n = static_cast<int>(std::ceil(pulse.duration / dt_max));
    const double dt = pulse.duration / n;
    for (int i = 0; i < n; ++i) r = rk4_step(pulse, detuning, i * dt, dt, r);
    return TwoLevelState::from_bloch(r);
}

double transfer_probability(const Pulse& pulse, double detuning) {
    return propagate_two_level(pulse, detuning, TwoLevelState::ground()).population_excited;
}

double transfer_efficiency(const Pulse& pulse, const SpectralDistribution& dist,
                           double band_lo, double band_hi, int quad_points) {
    pulse.validate();
    dist.validate();
    if (band_lo > band_hi) throw ParameterError("transfer_efficiency: empty band");
    if (band_lo == band_hi) return transfer_probability(pulse, band_lo);
    if (quad_points < 3) throw ParameterError("transfer_efficiency: too few quadrature points");

    // Composite Simpson over the band; weight by pdf (or uniformly when the
    // carrier distribution is much wider than the band, pdf is ~flat anyway).
    if (quad_points % 2 == 0) ++quad_points;
    const double h = (band_hi - band_lo) / (quad_points - 1);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < quad_points; ++i) {
        const double nu = band_lo + h * i;
        double w = (i == 0 || i == quad_points - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        const double rho = dist.is_delta() ? 1.0 : pdf(dist, nu);
        num += w * rho * transfer_probability(pulse, nu);
        den += w * rho;
    }
    if (den <= 0.0) throw ParameterError("transfer_efficiency: band has no spectral weight");
    return num / den;
}

double rabi_from_power(double power_watts, double calibration) {
    if (power_watts < 0.0 || !std::isfinite(power_watts))
        throw ParameterError("power must be >= 0");
    if (calibration < 0.0 || !std::isfinite(calibration))
        throw ParameterError("calibration must be >= 0");
    return calibration * std::sqrt(power_watts);
}

}  // namespace qmem
