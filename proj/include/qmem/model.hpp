#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qmem {

// Parameters of the closed-form four-pulse echo efficiency model.
struct NlpeParams {
    double d = 0.0;            // optical depth of the prepared feature
    double eta_control = 1.0;  // average transfer efficiency of one control pi pulse
    double gamma13 = 0.0;      // Hz, spin-transition inhomogeneous broadening
    double gamma35 = 0.0;      // Hz, excited-splitting inhomogeneous broadening
    double gamma = 0.0;        // Hz, effective optical decoherence rate

    void validate() const;
};

// eta(t31, t42) = d^2 e^-d eta_c^4
//                 * exp(-pi^2 g13^2 t31^2 / (2 ln 2))
//                 * exp(-pi^2 g35^2 t42^2 / (2 ln 2))
//                 * exp(-2 gamma t42)
double nlpe_efficiency(const NlpeParams& p, double t31, double t42);

// Gaussian dephasing factor exp(-pi^2 g^2 t^2 / (2 ln 2)) shared with the
// Monte Carlo checks.
double gaussian_dephasing_factor(double fwhm_hz, double t);

enum class DecayModel { GaussianTimesExp, GaussianOnly, ExpOnly };
enum class EchoAxis { T31, T42 };

struct FitPoint {
    double x = 0.0;
    double y = 0.0;
    double sigma = 1.0;
};

struct FitResult {
    std::vector<std::string> names;
    std::vector<double> params;
    std::vector<double> uncertainties;  // 1-sigma, chi2-scaled covariance
    double residual_norm = 0.0;         // sqrt(chi2) of weighted residuals
    bool converged = false;
    int iterations = 0;
    std::string warning;  // non-fatal fit-quality flags

    double value(const std::string& name) const;
    double uncertainty(const std::string& name) const;
};

// Model evaluations with analytic parameter derivatives (dydp has one entry
// per parameter). Exposed so gradients can be validated externally.
void eval_decay_model(DecayModel model, std::span<const double> p, double t,
                      double* y, double* dydp);
void eval_rabi_model(std::span<const double> p, double t, double* y, double* dydp);
void eval_voigt_model(std::span<const double> p, double x, double* y, double* dydp);

// Parameter layouts:
//   GaussianTimesExp: {amplitude, gamma35, gamma}
//   GaussianOnly:     {amplitude, gamma}
//   ExpOnly:          {amplitude, lifetime}
//   Rabi:             {amplitude, rabi_hz, decay_rate, offset}
//   Voigt:            {gauss_fwhm, lorentz_fwhm, center, amplitude}
std::vector<std::string> decay_param_names(DecayModel model);

struct FitOptions {
    int max_iterations = 400;
    double gradient_tol = 1e-10;
    int restarts = 5;
};

// Damped (Levenberg-Marquardt) weighted least squares.
FitResult fit_decay(std::span<const FitPoint> data, DecayModel model,
                    std::vector<double> init = {}, const FitOptions& opt = {});

// A cos(2 pi Omega t) exp(-decay_rate t) + offset.
FitResult fit_rabi_nutation(std::span<const FitPoint> data, const FitOptions& opt = {});

// Least-squares Voigt line fit; appends derived "total_fwhm" (numeric).
FitResult fit_voigt(std::span<const FitPoint> data, const FitOptions& opt = {});

// Full width at half maximum of the (normalized) Voigt profile, found
// numerically from the profile itself.
double voigt_total_fwhm(double gauss_fwhm, double lorentz_fwhm);

// Time at which eta(t)/eta(0) = 1/e along the chosen axis (bracketed root
// finding). With dd_exponential set, the decay is a pure exponential with
// that 1/e time and the value is returned directly.
double lifetime_1e(const NlpeParams& p, EchoAxis axis,
                   std::optional<double> dd_exponential = std::nullopt);

}  // namespace qmem
