#include "qmem/model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "qmem/errors.hpp"
#include "qmem/rng.hpp"
#include "qmem/spectral.hpp"

namespace qmem {

namespace {
constexpr double kLn2 = 0.69314718055994530942;
// Gaussian factor exponent scale: pi^2 / (2 ln 2), as printed in the model.
constexpr double kGaussExpScale = kPi * kPi / (2.0 * kLn2);
}  // namespace

void NlpeParams::validate() const {
    if (d < 0.0 || !std::isfinite(d)) throw ParameterError("optical depth must be >= 0");
    if (!(eta_control >= 0.0 && eta_control <= 1.0))
        throw ParameterError("eta_control must lie in [0, 1]");
    if (gamma13 < 0.0 || gamma35 < 0.0 || gamma < 0.0)
        throw ParameterError("decoherence rates must be >= 0");
}

double gaussian_dephasing_factor(double fwhm_hz, double t) {
    const double g = fwhm_hz * t;
    return std::exp(-kGaussExpScale * g * g);
}

double nlpe_efficiency(const NlpeParams& p, double t31, double t42) {
    p.validate();
    if (t31 < 0.0 || t42 < 0.0) throw ParameterError("pulse intervals must be >= 0");
    const double absorption = p.d * p.d * std::exp(-p.d);
    const double control = std::pow(p.eta_control, 4);
    return absorption * control * gaussian_dephasing_factor(p.gamma13, t31) *
           gaussian_dephasing_factor(p.gamma35, t42) * std::exp(-2.0 * p.gamma * t42);
}

double FitResult::value(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return params[i];
    throw ParameterError("unknown fit parameter: " + name);
}

double FitResult::uncertainty(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return uncertainties[i];
    throw ParameterError("unknown fit parameter: " + name);
}

std::vector<std::string> decay_param_names(DecayModel model) {
    switch (model) {
        case DecayModel::GaussianTimesExp:
            return {"amplitude", "gamma35", "gamma"};
        case DecayModel::GaussianOnly:
            return {"amplitude", "gamma"};
        case DecayModel::ExpOnly:
            return {"amplitude", "lifetime"};
    }
    return {};
}

// Width-like parameters enter through |w| so the model stays defined (and
// even) across zero; fits near a zero width settle at the boundary cleanly.
void eval_decay_model(DecayModel model, std::span<const double> p, double t,
                      double* y, double* dydp) {
    const double a = p[0];
    switch (model) {
        case DecayModel::GaussianTimesExp: {
            const double g35 = std::abs(p[1]);
            const double gam = std::abs(p[2]);
            const double fg = std::exp(-kGaussExpScale * g35 * g35 * t * t);
            const double fe = std::exp(-2.0 * gam * t);
            *y = a * fg * fe;
            if (dydp) {
                dydp[0] = fg * fe;
                dydp[1] = a * fg * fe * (-2.0 * kGaussExpScale * p[1] * t * t);
                dydp[2] = a * fg * fe * (-2.0 * t) * (p[2] < 0 ? -1.0 : 1.0);
            }
            return;
        }
        case DecayModel::GaussianOnly: {
            const double g = std::abs(p[1]);
            const double fg = std::exp(-kGaussExpScale * g * g * t * t);
            *y = a * fg;
            if (dydp) {
                dydp[0] = fg;
                dydp[1] = a * fg * (-2.0 * kGaussExpScale * p[1] * t * t);
            }
            return;
        }
        case DecayModel::ExpOnly: {
            const double tau = p[1];
            const double fe = std::exp(-t / tau);
            *y = a * fe;
            if (dydp) {
                dydp[0] = fe;
                dydp[1] = a * fe * t / (tau * tau);
            }
            return;
        }
    }
}

void eval_rabi_model(std::span<const double> p, double t, double* y, double* dydp) {
    const double a = p[0], omega = p[1], rate = p[2], c = p[3];
    const double phase = kTwoPi * omega * t;
    const double damp = std::exp(-rate * t);
    const double cosv = std::cos(phase);
    *y = a * cosv * damp + c;
    if (dydp) {
        dydp[0] = cosv * damp;
        dydp[1] = -a * std::sin(phase) * kTwoPi * t * damp;
        dydp[2] = -a * cosv * t * damp;
        dydp[3] = 1.0;
    }
}

namespace {

double gauss_profile(double t, double fwhm) {
    const double s = fwhm / kGaussFwhmPerSigma;
    const double u = t / s;
    return std::exp(-0.5 * u * u) / (s * std::sqrt(kTwoPi));
}

double lorentz_profile(double t, double fwhm) {
    const double hw = 0.5 * fwhm;
    return hw / (kPi * (t * t + hw * hw));
}

// Voigt value and derivatives by differentiating under the convolution
// integral; composite Simpson over +/-12 Gaussian sigma.
struct VoigtEval {
    double v = 0.0, dv_dg = 0.0, dv_dl = 0.0, dv_dx = 0.0;
};

VoigtEval voigt_eval(double x, double g, double l) {
    VoigtEval out;
    if (g <= 0.0 && l <= 0.0) throw ParameterError("Voigt profile needs a nonzero width");
    if (g <= 0.0) {
        const double hw = 0.5 * l;
        const double den = x * x + hw * hw;
        out.v = lorentz_profile(x, l);
        out.dv_dl = (x * x - hw * hw) / (kTwoPi * den * den);
        out.dv_dx = -l * x / (kPi * den * den);
        return out;
    }
    if (l <= 0.0) {
        const double s = g / kGaussFwhmPerSigma;
        out.v = gauss_profile(x, g);
        out.dv_dg = out.v * (x * x / (s * s) - 1.0) / g;
        out.dv_dx = -out.v * x / (s * s);
        return out;
    }
    const double s = g / kGaussFwhmPerSigma;
    const int n = 3000;  // even
    const double lo = -12.0 * s, hi = 12.0 * s;
    const double h = (hi - lo) / n;
    double sv = 0.0, sg = 0.0, sl = 0.0, sx = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double t = lo + h * i;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        const double G = gauss_profile(t, g);
        const double u = x - t;
        const double hw = 0.5 * l;
        const double den = u * u + hw * hw;
        const double L = hw / (kPi * den);
        const double dG_dg = G * (t * t / (s * s) - 1.0) / g;
        const double dL_dl = (u * u - hw * hw) / (kTwoPi * den * den);
        const double dL_du = -l * u / (kPi * den * den);
        sv += w * G * L;
        sg += w * dG_dg * L;
        sl += w * G * dL_dl;
        sx += w * G * dL_du;
    }
    const double f = h / 3.0;
    out.v = sv * f;
    out.dv_dg = sg * f;
    out.dv_dl = sl * f;
    out.dv_dx = sx * f;
    return out;
}

}  // namespace

void eval_voigt_model(std::span<const double> p, double x, double* y, double* dydp) {
    const double g = std::abs(p[0]);
    const double l = std::abs(p[1]);
    const double center = p[2];
    const double amp = p[3];
    const VoigtEval e = voigt_eval(x - center, g, l);
    *y = amp * e.v;
    if (dydp) {
        dydp[0] = amp * e.dv_dg * (p[0] < 0 ? -1.0 : 1.0);
        dydp[1] = amp * e.dv_dl * (p[1] < 0 ? -1.0 : 1.0);
        dydp[2] = -amp * e.dv_dx;
        dydp[3] = e.v;
    }
}

double voigt_total_fwhm(double gauss_fwhm, double lorentz_fwhm) {
    const double g = std::abs(gauss_fwhm), l = std::abs(lorentz_fwhm);
    if (g == 0.0) return l;
    if (l == 0.0) return g;
    const double peak = voigt_eval(0.0, g, l).v;
    // Half-max crossing is bracketed by the component widths.
    double lo = 0.25 * std::min(g, l), hi = g + l;
    auto f = [&](double x) { return voigt_eval(x, g, l).v - 0.5 * peak; };
    while (f(hi) > 0.0) hi *= 2.0;
    while (f(lo) < 0.0) lo *= 0.5;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
        if (hi - lo < 1e-12 * hi) break;
    }
    return lo + hi;  // full width = 2 * half width
}

namespace {

using ModelFn = std::function<void(std::span<const double>, double, double*, double*)>;

struct LMOutcome {
    Eigen::VectorXd p;
    double chi2 = std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;
};

LMOutcome levenberg_marquardt(std::span<const FitPoint> data, const ModelFn& fn,
                              Eigen::VectorXd p, const FitOptions& opt) {
    const int np = static_cast<int>(p.size());
    const int nd = static_cast<int>(data.size());
    Eigen::VectorXd r(nd);
    Eigen::MatrixXd J(nd, np);
    std::vector<double> dydp(np);

    auto evaluate = [&](const Eigen::VectorXd& q, Eigen::VectorXd* res,
                        Eigen::MatrixXd* jac) -> double {
        double chi2 = 0.0;
        for (int i = 0; i < nd; ++i) {
            double y;
            fn(std::span<const double>(q.data(), np), data[i].x, &y,
               jac ? dydp.data() : nullptr);
            const double w = 1.0 / data[i].sigma;
            const double ri = (data[i].y - y) * w;
            chi2 += ri * ri;
            if (res) (*res)(i) = ri;
            if (jac)
                for (int j = 0; j < np; ++j) (*jac)(i, j) = -dydp[j] * w;
        }
        return chi2;
    };

    double chi2 = evaluate(p, &r, &J);
    double lambda = 1e-3;
    bool converged = false;
    int iter = 0;
    for (; iter < opt.max_iterations; ++iter) {
        const Eigen::VectorXd grad = J.transpose() * r;
        if (grad.norm() < opt.gradient_tol) {
            converged = true;
            break;
        }
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        Eigen::MatrixXd damped = JtJ;
        for (int j = 0; j < np; ++j)
            damped(j, j) += lambda * std::max(JtJ(j, j), 1e-30);
        const Eigen::VectorXd step = damped.ldlt().solve(-grad);
        if (!step.allFinite()) {
            lambda *= 10.0;
            continue;
        }
        const Eigen::VectorXd q = p + step;
        Eigen::VectorXd r_try(nd);
        Eigen::MatrixXd J_try(nd, np);
        const double chi2_try = evaluate(q, &r_try, &J_try);
        if (std::isfinite(chi2_try) && chi2_try <= chi2) {
            const double rel_drop = (chi2 - chi2_try) / std::max(chi2, 1e-300);
            p = q;
            r.swap(r_try);
            J.swap(J_try);
            chi2 = chi2_try;
            lambda = std::max(lambda * 0.3, 1e-12);
            if (rel_drop < 1e-15 && (J.transpose() * r).norm() < opt.gradient_tol) {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) break;
        }
    }
    return {p, chi2, converged, iter};
}

FitResult finish_fit(std::span<const FitPoint> data, const ModelFn& fn,
                     const LMOutcome& best, std::vector<std::string> names) {
    const int np = static_cast<int>(best.p.size());
    const int nd = static_cast<int>(data.size());
    Eigen::MatrixXd J(nd, np);
    std::vector<double> dydp(np);
    for (int i = 0; i < nd; ++i) {
        double y;
        fn(std::span<const double>(best.p.data(), np), data[i].x, &y, dydp.data());
        for (int j = 0; j < np; ++j) J(i, j) = dydp[j] / data[i].sigma;
    }
    FitResult out;
    out.names = std::move(names);
    out.params.assign(best.p.data(), best.p.data() + np);
    out.residual_norm = std::sqrt(best.chi2);
    out.converged = best.converged;
    out.iterations = best.iterations;
    out.uncertainties.assign(np, 0.0);
    const double dof = std::max(1, nd - np);
    const double chi2_red = best.chi2 / dof;
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::MatrixXd cov = JtJ.completeOrthogonalDecomposition().pseudoInverse();
    for (int j = 0; j < np; ++j) {
        const double v = cov(j, j) * std::max(chi2_red, 0.0);
        out.uncertainties[j] = v > 0.0 ? std::sqrt(v) : 0.0;
    }
    return out;
}

FitResult run_fit(std::span<const FitPoint> data, const ModelFn& fn,
                  const std::vector<double>& init, std::vector<std::string> names,
                  const FitOptions& opt) {
    Eigen::VectorXd p0 = Eigen::Map<const Eigen::VectorXd>(init.data(), init.size());
    LMOutcome best = levenberg_marquardt(data, fn, p0, opt);
    if (!best.converged) {
        SplitMix64 rng(0x5eedf17ULL);
        for (int k = 0; k < opt.restarts && !best.converged; ++k) {
            Eigen::VectorXd q = p0;
            for (int j = 0; j < q.size(); ++j)
                q(j) *= 1.0 + 0.4 * (rng.uniform() - 0.5);
            LMOutcome trial = levenberg_marquardt(data, fn, q, opt);
            if (trial.chi2 < best.chi2 || (trial.converged && !best.converged))
                best = trial;
        }
    }
    return finish_fit(data, fn, best, std::move(names));
}

void check_fit_data(std::span<const FitPoint> data, std::size_t min_points) {
    if (data.size() < min_points)
        throw ParameterError("too few data points for this fit");
    double xmin = data.front().x, xmax = data.front().x;
    for (const auto& pt : data) {
        if (!std::isfinite(pt.x) || !std::isfinite(pt.y))
            throw NumericError("fit data contains non-finite values");
        if (!(pt.sigma > 0.0)) throw ParameterError("fit sigmas must be > 0");
        xmin = std::min(xmin, pt.x);
        xmax = std::max(xmax, pt.x);
    }
    if (xmax == xmin) throw ParameterError("degenerate fit data: all abscissae equal");
}

// Time at which |y| falls to amplitude/e, for decay inits.
double efold_abscissa(std::span<const FitPoint> data, double amplitude) {
    const double target = amplitude / 2.718281828459045;
    for (const auto& pt : data)
        if (pt.y < target && pt.x > 0.0) return pt.x;
    double xmax = 0.0;
    for (const auto& pt : data) xmax = std::max(xmax, pt.x);
    return xmax > 0.0 ? xmax : 1.0;
}

}  // namespace

FitResult fit_decay(std::span<const FitPoint> data, DecayModel model,
                    std::vector<double> init, const FitOptions& opt) {
    check_fit_data(data, 4);
    double amplitude = 0.0;
    for (const auto& pt : data) amplitude = std::max(amplitude, pt.y);
    if (amplitude <= 0.0) amplitude = 1.0;
    const double te = efold_abscissa(data, amplitude);
    if (init.empty()) {
        switch (model) {
            case DecayModel::GaussianTimesExp:
                init = {amplitude, std::sqrt(2.0 * kLn2) / (kPi * te) * 0.8, 0.2 / (2.0 * te)};
                break;
            case DecayModel::GaussianOnly:
                init = {amplitude, std::sqrt(2.0 * kLn2) / (kPi * te)};
                break;
            case DecayModel::ExpOnly:
                init = {amplitude, te};
                break;
        }
    }
    const auto names = decay_param_names(model);
    if (init.size() != names.size())
        throw ParameterError("fit_decay: wrong number of initial parameters");
    ModelFn fn = [model](std::span<const double> p, double x, double* y, double* dy) {
        eval_decay_model(model, p, x, y, dy);
    };
    FitResult out = run_fit(data, fn, init, names, opt);
    // Report widths as magnitudes (models are even in them).
    for (std::size_t j = 0; j < out.names.size(); ++j)
        if (out.names[j] != "amplitude") out.params[j] = std::abs(out.params[j]);
    return out;
}

FitResult fit_rabi_nutation(std::span<const FitPoint> data, const FitOptions& opt) {
    check_fit_data(data, 8);
    double ymin = data.front().y, ymax = data.front().y;
    double xmin = data.front().x, xmax = data.front().x;
    for (const auto& pt : data) {
        ymin = std::min(ymin, pt.y);
        ymax = std::max(ymax, pt.y);
        xmin = std::min(xmin, pt.x);
        xmax = std::max(xmax, pt.x);
    }
    const double span = xmax - xmin;
    const double swing = ymax - ymin;
    if (swing <= 1e-12 * std::max(std::abs(ymax), 1.0))
        throw ParameterError("rabi fit ambiguous: signal is constant");

    // Coarse periodogram for the frequency init.
    double mean = 0.0;
    for (const auto& pt : data) mean += pt.y;
    mean /= static_cast<double>(data.size());
    double dt_min = span;
    for (std::size_t i = 1; i < data.size(); ++i)
        dt_min = std::min(dt_min, std::abs(data[i].x - data[i - 1].x));
    const double f_lo = 0.25 / span;
    const double f_hi = 0.5 / std::max(dt_min, 1e-30);
    double best_f = f_lo, best_pw = -1.0;
    const int nf = 2000;
    for (int k = 0; k <= nf; ++k) {
        const double f = f_lo * std::pow(f_hi / f_lo, static_cast<double>(k) / nf);
        double cs = 0.0, sn = 0.0;
        for (const auto& pt : data) {
            cs += (pt.y - mean) * std::cos(kTwoPi * f * pt.x);
            sn += (pt.y - mean) * std::sin(kTwoPi * f * pt.x);
        }
        const double pw = cs * cs + sn * sn;
        if (pw > best_pw) {
            best_pw = pw;
            best_f = f;
        }
    }
    if (best_f * span < 1.0)
        throw ParameterError("rabi fit ambiguous: less than one period visible");

    std::vector<double> init = {0.5 * swing, best_f, 0.1 / span, mean};
    ModelFn fn = [](std::span<const double> p, double x, double* y, double* dy) {
        eval_rabi_model(p, x, y, dy);
    };
    FitResult out = run_fit(data, fn, init,
                            {"amplitude", "rabi_hz", "decay_rate", "offset"}, opt);
    // cos is even in Omega; report the positive branch.
    out.params[1] = std::abs(out.params[1]);
    return out;
}

FitResult fit_voigt(std::span<const FitPoint> data, const FitOptions& opt) {
    check_fit_data(data, 10);
    // Peak location and a crude width from the half-max crossings.
    std::size_t imax = 0;
    for (std::size_t i = 1; i < data.size(); ++i)
        if (data[i].y > data[imax].y) imax = i;
    const double peak = data[imax].y;
    const double center0 = data[imax].x;
    if (peak <= 0.0) throw ParameterError("voigt fit: peak response must be positive");
    double lo = data.front().x, hi = data.back().x;
    for (std::size_t i = imax; i-- > 0;)
        if (data[i].y < 0.5 * peak) {
            lo = data[i].x;
            break;
        }
    for (std::size_t i = imax + 1; i < data.size(); ++i)
        if (data[i].y < 0.5 * peak) {
            hi = data[i].x;
            break;
        }
    double width0 = hi - lo;
    if (width0 <= 0.0) width0 = (data.back().x - data.front().x) / 4.0;

    // Unimodality check: rises to the peak, falls after (5% slack).
    bool unimodal = true;
    const double slack = 0.05 * peak;
    for (std::size_t i = 1; i <= imax; ++i)
        if (data[i].y < data[i - 1].y - slack) unimodal = false;
    for (std::size_t i = imax + 1; i < data.size(); ++i)
        if (data[i].y > data[i - 1].y + slack) unimodal = false;

    VoigtEval e0 = voigt_eval(0.0, 0.7 * width0, 0.3 * width0);
    std::vector<double> init = {0.7 * width0, 0.3 * width0, center0, peak / e0.v};
    ModelFn fn = [](std::span<const double> p, double x, double* y, double* dy) {
        eval_voigt_model(p, x, y, dy);
    };
    FitResult out = run_fit(data, fn, init,
                            {"gauss_fwhm", "lorentz_fwhm", "center", "amplitude"}, opt);
    out.params[0] = std::abs(out.params[0]);
    out.params[1] = std::abs(out.params[1]);
    if (!unimodal) out.warning = "input data is not unimodal; fit quality suspect";

    // Derived total width, with first-order uncertainty propagation.
    const double g = out.params[0], l = out.params[1];
    const double fwhm = voigt_total_fwhm(g, l);
    const double hg = std::max(1e-6 * std::max(g, l), 1e-12);
    const double dg = (voigt_total_fwhm(g + hg, l) - voigt_total_fwhm(std::max(g - hg, 0.0), l)) /
                      (g - hg >= 0.0 ? 2.0 * hg : hg);
    const double dl = (voigt_total_fwhm(g, l + hg) - voigt_total_fwhm(g, std::max(l - hg, 0.0))) /
                      (l - hg >= 0.0 ? 2.0 * hg : hg);
    const double sg = out.uncertainties[0], sl = out.uncertainties[1];
    out.names.push_back("total_fwhm");
    out.params.push_back(fwhm);
    out.uncertainties.push_back(std::sqrt(dg * dg * sg * sg + dl * dl * sl * sl));
    return out;
}

double lifetime_1e(const NlpeParams& p, EchoAxis axis,
                   std::optional<double> dd_exponential) {
    if (dd_exponential) {
        if (!(*dd_exponential > 0.0)) throw ParameterError("DD lifetime must be > 0");
        return *dd_exponential;
    }
    p.validate();
    // log of the decaying part along the chosen axis.
    auto log_factor = [&](double t) {
        if (axis == EchoAxis::T31) {
            const double g = p.gamma13 * t;
            return -kGaussExpScale * g * g;
        }
        const double g = p.gamma35 * t;
        return -kGaussExpScale * g * g - 2.0 * p.gamma * t;
    };
    const bool decaying = (axis == EchoAxis::T31) ? p.gamma13 > 0.0
                                                  : (p.gamma35 > 0.0 || p.gamma > 0.0);
    if (!decaying) throw NumericError("lifetime_1e: efficiency does not decay on this axis");

    double hi = 1e-9;
    while (log_factor(hi) > -1.0) hi *= 2.0;
    double lo = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (log_factor(mid) > -1.0 ? lo : hi) = mid;
        if (hi - lo <= 1e-15 * hi) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace qmem
