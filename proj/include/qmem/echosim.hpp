#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmem/spectral.hpp"

namespace qmem {

enum class DDAxis { X, Y };

// Train of pi pulses on the spin transition. Offsets are measured from the
// start of the block; the default constructors use the standard symmetric
// spacing tau - pi - 2tau - pi - ... - tau.
struct DDSequence {
    struct Event {
        DDAxis axis;
        double offset;  // s, pulse center within the block
    };
    std::vector<Event> pulses;
    double block_length = 0.0;  // s
    Pulse pulse_template;       // used when pulses are propagated with finite length

    static DDSequence xx(double block_length, const Pulse& tmpl, int repeats = 1);
    static DDSequence xxxx(double block_length, const Pulse& tmpl, int repeats = 1);
    static DDSequence xy4(double block_length, const Pulse& tmpl, int repeats = 1);
    static DDSequence from_phases(const std::vector<DDAxis>& phases, double block_length,
                                  const Pulse& tmpl);

    bool empty() const { return pulses.empty(); }
    void validate() const;  // ordering and pulse-extent checks
};

// Systematic and per-ion errors of the DD pulses.
struct PulseErrorModel {
    double angle_error = 0.0;  // rad, systematic offset added to each pi rotation
    SpectralDistribution detuning_spread = SpectralDistribution::delta(0.0);  // Hz
    // Multiplicative rotation-angle scale (field inhomogeneity); center 1.
    SpectralDistribution per_ion_angle_scale = SpectralDistribution::delta(1.0);

    void validate() const;
};

enum class OpticalTransition { Pi35, Pi13, Pi13SplitPair };

struct OpticalPulseEvent {
    double time = 0.0;  // s, pulse center
    OpticalTransition transition = OpticalTransition::Pi35;
    Pulse pulse;
};

// Timed event list of one four-pulse echo run with optional embedded DD.
struct ProtocolSchedule {
    double input_time = 0.0;
    std::vector<OpticalPulseEvent> optical_pulses;  // exactly four, time ordered
    std::optional<DDSequence> dd_block;             // placed inside [t1, t2]
    double dd_start = 0.0;                          // s, absolute block start
    double t31 = 0.0;        // interval(first pulse, third pulse)
    double t42 = 0.0;        // interval(second pulse, fourth pulse)
    double echo_time = 0.0;  // derived from the rephasing condition
    double detection_window = 1.1e-6;
    double spin_storage = 0.0;  // interval(first, second pulse), DD lives here

    void validate() const;
};

struct ScheduleOptions {
    double input_time = 0.0;
    double first_pulse_delay = 2e-6;  // input -> first control pulse
    double detection_window = 1.1e-6;
    Pulse optical_pulse_template =
        Pulse::chs(kTwoPi * 1.2e6, 2.2e6, 1.5e-6);  // metadata for extent checks
};

// Gaps: t1->t2 = spin_storage, t2->t3 = t31 - spin_storage,
// t3->t4 = t42 - (t31 - spin_storage). Echo at t4 + (t31 - spin_storage) - d1.
ProtocolSchedule build_nlpe_schedule(double t31, double t42, double spin_storage,
                                     std::optional<DDSequence> dd = std::nullopt,
                                     const ScheduleOptions& opts = {});

// Deterministic medium factors of the echo efficiency.
struct MediumParams {
    double d = 0.0;            // optical depth
    double eta_control = 1.0;  // per-pulse transfer efficiency of the control pulses
    double gamma = 0.0;        // Hz, effective optical decoherence (e^{-2 gamma t42})

    void validate() const;
};

struct EchoDiagnostics {
    double absorption_factor = 0.0;         // d^2 e^-d
    double control_factor = 1.0;            // eta_control^4
    double spin_dephasing_factor = 1.0;     // |<spin phasor>|^2, includes DD
    double excited_dephasing_factor = 1.0;  // |<excited phasor>|^2
    double homogeneous_factor = 1.0;        // e^{-2 gamma t42}
};

struct EchoResult {
    double efficiency = 0.0;
    std::vector<double> trace_times;                  // s
    std::vector<std::complex<double>> amplitude_trace;  // echo amplitude vs time
    double residual_spin_population = 0.0;            // from the DD block
    EchoDiagnostics diagnostics;
};

struct SimOptions {
    int threads = 1;
    int trace_points = 0;  // 0 disables the trace
    bool finite_duration_dd = false;  // propagate DD pulses with the template
};

// Monte Carlo companion of the closed-form efficiency model: per-ion phase
// accumulation (spin detunings over t31, excited-splitting detunings over
// t42) with DD pulses applied as SU(2) rotations carrying the error model.
EchoResult simulate_echo(const ProtocolSchedule& schedule,
                         const SpectralDistribution& optical_dist,
                         const SpectralDistribution& spin_dist,
                         const PulseErrorModel& errors, const MediumParams& medium,
                         std::size_t n_ions, std::uint64_t seed,
                         const SimOptions& sim = {});

struct RephasingResult {
    double rephasing_efficiency = 0.0;  // |<final coherence> / initial|^2
    double residual_population = 0.0;   // mean wrong-level population
};

// Propagates the stored superposition through the DD block alone.
RephasingResult spin_rephasing_efficiency(const DDSequence& dd,
                                          const PulseErrorModel& errors,
                                          std::size_t n_ions, std::uint64_t seed,
                                          int threads = 1);

// Ratio of zero-time intercept efficiencies (DD vs no-DD), clipped to [0, 1];
// 1 - ratio bounds the residual population.
double estimate_rephasing_from_intercepts(double eff_dd_zero, double eff_nodd_zero);

// Affine noise model: p_n = noise_floor + calibration * residual_population.
double noise_from_residual(double residual_population, double calibration,
                           double noise_floor);

// Calibration that maps (residual, floor) onto a measured noise level.
double solve_noise_calibration(double residual_population, double p_n,
                               double noise_floor);

}  // namespace qmem
