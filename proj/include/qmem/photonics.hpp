#pragma once

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

namespace qmem {

// e^-mu mu^n / n!, evaluated through lgamma so large n cannot overflow.
double poisson_pmf(double mu, int n);

// Signal-to-noise ratio mu * eta_m / p_n. p_n = 0 reports saturation.
double snr(double mu, double eta_m, double p_n);

// Memory channel seen by the counting analysis.
struct MemoryChannel {
    double eta_m = 0.0;  // memory efficiency
    double p_n = 0.0;    // unconditional noise probability per detection window
    double f_c = 1.0;    // classical (interferometer) fidelity

    void validate() const;
};

// Photonic time-bin qubit; |amp_early|^2 + |amp_late|^2 = 1.
struct TimeBinQubit {
    std::complex<double> amp_early = 1.0;
    std::complex<double> amp_late = 0.0;
    double mean_photons_mu_q = 1.0;

    static TimeBinQubit early(double mu_q);
    static TimeBinQubit late(double mu_q);
    static TimeBinQubit plus(double mu_q);    // (|e> + |l>)/sqrt(2)
    static TimeBinQubit plus_i(double mu_q);  // (|e> + i|l>)/sqrt(2)
    void validate() const;
};

// Readout of the echo: either all four pi pulses (time bins map one-to-one)
// or the final pi pulse split into two pi/2 pulses with a relative phase,
// which interferes the bins into a central output window.
struct Analysis {
    enum class Kind { FullPi, HalfPiPair } kind = Kind::FullPi;
    double phase = 0.0;  // rad, HalfPiPair only

    static Analysis full_pi() { return {Kind::FullPi, 0.0}; }
    static Analysis half_pi_pair(double phase) { return {Kind::HalfPiPair, phase}; }
};

struct CountHistogram {
    std::vector<double> bin_edges;  // s, size bins+1
    std::vector<std::uint64_t> counts;
    std::uint64_t repetitions = 0;
    double detection_window = 1.1e-6;

    std::size_t bins() const { return counts.size(); }
};

struct CountingOptions {
    double detection_window = 1.1e-6;  // s
    double bin_separation = 2e-6;      // s, early/central/late spacing
};

// Output-bin amplitudes of the analysis:
//   FullPi:      (a_e, 0, a_l)
//   HalfPiPair:  (a_e/2, (a_e e^{i phi} + a_l)/2, a_l e^{i phi}/2)
std::vector<std::complex<double>> output_bin_amplitudes(const TimeBinQubit& qubit,
                                                        const Analysis& analysis);

// Expected clicks per window and repetition: mu_q eta_m |b_k|^2 + p_n.
std::vector<double> expected_window_signal(const MemoryChannel& channel,
                                           const TimeBinQubit& qubit,
                                           const Analysis& analysis);

// Poisson-samples counts per window over `repetitions` runs.
CountHistogram simulate_counts(const MemoryChannel& channel, const TimeBinQubit& qubit,
                               const Analysis& analysis, std::uint64_t repetitions,
                               std::uint64_t seed, const CountingOptions& opt = {});

// F = N+ / (N+ + N-).
double fidelity_from_counts(std::uint64_t n_plus, std::uint64_t n_minus);

// F(mu_q) = (F_c + p_n / (mu_q eta_M)) / (1 + 2 p_n / (mu_q eta_M)).
double theoretical_fidelity(double mu_q, const MemoryChannel& channel);

// F_T = (F_e + F_l)/6 + (F_+ + F_+i)/3.
double total_fidelity(double f_e, double f_l, double f_plus, double f_plusi);

// Highest fidelity a measure-and-prepare strategy reaches given Poisson input
// statistics and memory efficiency eta_m; returns (bound, n_min).
std::pair<double, int> classical_bound(double mu_q, double eta_m);

// Per-state and total fidelities from a Monte Carlo run of the counting
// pipeline (basis states via FullPi, superpositions via HalfPiPair).
struct FidelityReport {
    double mu_q = 0.0;
    double f_e = 0.0, f_l = 0.0, f_plus = 0.0, f_plusi = 0.0;
    double f_total = 0.0;
    double theoretical = 0.0;      // Eq-style prediction at the channel
    double bound = 0.0;            // classical measure-and-prepare limit
    int n_min = 0;
    bool quantum = false;          // f_total > bound
};

FidelityReport simulate_fidelity_report(const MemoryChannel& channel, double mu_q,
                                        std::uint64_t repetitions, std::uint64_t seed,
                                        const CountingOptions& opt = {});

}  // namespace qmem
