#include "qmem/photonics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qmem/errors.hpp"
#include "qmem/rng.hpp"
#include "qmem/spectral.hpp"

namespace qmem {

double poisson_pmf(double mu, int n) {
    if (n < 0) throw ParameterError("photon number must be >= 0");
    if (mu < 0.0 || !std::isfinite(mu)) throw ParameterError("mean photon number must be >= 0");
    if (mu == 0.0) return n == 0 ? 1.0 : 0.0;
    return std::exp(-mu + n * std::log(mu) - std::lgamma(n + 1.0));
}

double snr(double mu, double eta_m, double p_n) {
    if (mu < 0.0 || eta_m < 0.0) throw ParameterError("snr: negative inputs");
    if (p_n < 0.0) throw ParameterError("snr: negative noise");
    if (p_n == 0.0) return std::numeric_limits<double>::infinity();  // saturated
    return mu * eta_m / p_n;
}

void MemoryChannel::validate() const {
    if (!(eta_m >= 0.0 && eta_m <= 1.0)) throw ParameterError("eta_m must lie in [0, 1]");
    if (!(p_n >= 0.0 && p_n <= 1.0)) throw ParameterError("p_n must lie in [0, 1]");
    if (!(f_c >= 0.0 && f_c <= 1.0)) throw ParameterError("f_c must lie in [0, 1]");
}

void TimeBinQubit::validate() const {
    const double norm = std::norm(amp_early) + std::norm(amp_late);
    if (std::abs(norm - 1.0) > 1e-12)
        throw ParameterError("time-bin amplitudes must be normalized");
    if (mean_photons_mu_q < 0.0) throw ParameterError("mu_q must be >= 0");
}

TimeBinQubit TimeBinQubit::early(double mu_q) { return {1.0, 0.0, mu_q}; }
TimeBinQubit TimeBinQubit::late(double mu_q) { return {0.0, 1.0, mu_q}; }
TimeBinQubit TimeBinQubit::plus(double mu_q) {
    const double r = 1.0 / std::sqrt(2.0);
    return {r, r, mu_q};
}
TimeBinQubit TimeBinQubit::plus_i(double mu_q) {
    const double r = 1.0 / std::sqrt(2.0);
    return {r, {0.0, r}, mu_q};
}

std::vector<std::complex<double>> output_bin_amplitudes(const TimeBinQubit& qubit,
                                                        const Analysis& analysis) {
    qubit.validate();
    if (analysis.kind == Analysis::Kind::FullPi)
        return {qubit.amp_early, 0.0, qubit.amp_late};
    const std::complex<double> rot{std::cos(analysis.phase), std::sin(analysis.phase)};
    return {0.5 * qubit.amp_early, 0.5 * (qubit.amp_early * rot + qubit.amp_late),
            0.5 * qubit.amp_late * rot};
}

std::vector<double> expected_window_signal(const MemoryChannel& channel,
                                           const TimeBinQubit& qubit,
                                           const Analysis& analysis) {
    channel.validate();
    const auto amps = output_bin_amplitudes(qubit, analysis);
    std::vector<double> rates(amps.size());
    for (std::size_t k = 0; k < amps.size(); ++k)
        rates[k] = qubit.mean_photons_mu_q * channel.eta_m * std::norm(amps[k]) + channel.p_n;
    return rates;
}

CountHistogram simulate_counts(const MemoryChannel& channel, const TimeBinQubit& qubit,
                               const Analysis& analysis, std::uint64_t repetitions,
                               std::uint64_t seed, const CountingOptions& opt) {
    if (repetitions == 0) throw ParameterError("simulate_counts: repetitions must be >= 1");
    const auto rates = expected_window_signal(channel, qubit, analysis);
    CountHistogram h;
    h.repetitions = repetitions;
    h.detection_window = opt.detection_window;
    h.counts.resize(rates.size());
    h.bin_edges.resize(rates.size() + 1);
    for (std::size_t k = 0; k < rates.size(); ++k)
        h.bin_edges[k] = static_cast<double>(k) * opt.bin_separation;
    h.bin_edges[rates.size()] =
        static_cast<double>(rates.size() - 1) * opt.bin_separation + opt.detection_window;
    for (std::size_t k = 0; k < rates.size(); ++k) {
        auto rng = SplitMix64::for_index(seed, k);
        h.counts[k] = rng.poisson(rates[k] * static_cast<double>(repetitions));
    }
    return h;
}

double fidelity_from_counts(std::uint64_t n_plus, std::uint64_t n_minus) {
    if (n_plus + n_minus == 0)
        throw ParameterError("fidelity undefined: no counts in either projection");
    return static_cast<double>(n_plus) / static_cast<double>(n_plus + n_minus);
}

double theoretical_fidelity(double mu_q, const MemoryChannel& channel) {
    channel.validate();
    if (!(mu_q > 0.0)) throw ParameterError("mu_q must be > 0");
    if (!(channel.eta_m > 0.0)) throw ParameterError("eta_m must be > 0");
    const double r = channel.p_n / (mu_q * channel.eta_m);
    return (channel.f_c + r) / (1.0 + 2.0 * r);
}

double total_fidelity(double f_e, double f_l, double f_plus, double f_plusi) {
    for (double f : {f_e, f_l, f_plus, f_plusi})
        if (!(f >= 0.0 && f <= 1.0)) throw ParameterError("fidelities must lie in [0, 1]");
    return (f_e + f_l) / 6.0 + (f_plus + f_plusi) / 3.0;
}

std::pair<double, int> classical_bound(double mu_q, double eta_m) {
    if (!(mu_q > 0.0)) throw ParameterError("mu_q must be > 0");
    if (!(eta_m > 0.0 && eta_m <= 1.0)) throw ParameterError("eta_m must lie in (0, 1]");

    constexpr int kMaxN = 500;
    // Pmf table up to a negligible tail remainder.
    std::vector<double> pmf;
    pmf.reserve(64);
    double cum = 0.0;
    for (int n = 0; n <= kMaxN; ++n) {
        pmf.push_back(poisson_pmf(mu_q, n));
        cum += pmf.back();
        if (1.0 - cum < 1e-15 && n > mu_q + 10.0) break;
    }
    const int n_top = static_cast<int>(pmf.size()) - 1;

    const double budget = (1.0 - pmf[0]) * eta_m;
    auto tail = [&](int from) {
        double s = 0.0;
        for (int n = n_top; n >= from; --n) s += pmf[n];  // ascending magnitudes
        return s;
    };

    // Smallest shell the attacker must dip into: keep all events with
    // n >= n_min + 1 whole, spend the leftover budget on shell n_min.
    int n_min = -1;
    for (int i = 0; i <= n_top; ++i) {
        if (budget - tail(i + 1) >= 0.0) {
            n_min = i;
            break;
        }
    }
    if (n_min < 0)
        throw NumericError("classical_bound: no feasible n_min below the photon cutoff");

    const double kept_tail = tail(n_min + 1);
    const double gamma_budget = budget - kept_tail;
    double num = (static_cast<double>(n_min) + 1.0) / (static_cast<double>(n_min) + 2.0) *
                 gamma_budget;
    for (int n = n_min + 1; n <= n_top; ++n)
        num += (static_cast<double>(n) + 1.0) / (static_cast<double>(n) + 2.0) * pmf[n];
    const double den = gamma_budget + kept_tail;
    return {num / den, n_min};
}

namespace {

// Projection phase that maximizes the central-bin signal for this qubit.
double constructive_phase(const TimeBinQubit& q) {
    return std::arg(q.amp_late) - std::arg(q.amp_early);
}

double superposition_fidelity(const MemoryChannel& channel, const TimeBinQubit& qubit,
                              std::uint64_t repetitions, std::uint64_t seed,
                              const CountingOptions& opt) {
    const double phi = constructive_phase(qubit);
    const auto h_plus = simulate_counts(channel, qubit, Analysis::half_pi_pair(phi),
                                        repetitions, seed, opt);
    const auto h_minus = simulate_counts(channel, qubit, Analysis::half_pi_pair(phi + kPi),
                                         repetitions, seed + 1, opt);
    return fidelity_from_counts(h_plus.counts[1], h_minus.counts[1]);
}

}  // namespace

FidelityReport simulate_fidelity_report(const MemoryChannel& channel, double mu_q,
                                        std::uint64_t repetitions, std::uint64_t seed,
                                        const CountingOptions& opt) {
    FidelityReport rep;
    rep.mu_q = mu_q;

    const auto h_e = simulate_counts(channel, TimeBinQubit::early(mu_q),
                                     Analysis::full_pi(), repetitions, seed + 10, opt);
    rep.f_e = fidelity_from_counts(h_e.counts[0], h_e.counts[2]);
    const auto h_l = simulate_counts(channel, TimeBinQubit::late(mu_q),
                                     Analysis::full_pi(), repetitions, seed + 20, opt);
    rep.f_l = fidelity_from_counts(h_l.counts[2], h_l.counts[0]);
    rep.f_plus = superposition_fidelity(channel, TimeBinQubit::plus(mu_q), repetitions,
                                        seed + 30, opt);
    rep.f_plusi = superposition_fidelity(channel, TimeBinQubit::plus_i(mu_q), repetitions,
                                         seed + 40, opt);
    rep.f_total = total_fidelity(rep.f_e, rep.f_l, rep.f_plus, rep.f_plusi);
    rep.theoretical = theoretical_fidelity(mu_q, channel);
    const auto [bound, n_min] = classical_bound(mu_q, channel.eta_m);
    rep.bound = bound;
    rep.n_min = n_min;
    rep.quantum = rep.f_total > rep.bound;
    return rep;
}

}  // namespace qmem
