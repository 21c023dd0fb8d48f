#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace qmem {

// Hyperfine level structure of the storage transition. Ground levels are
// indexed 0..2 for |+-1/2>g, |+-3/2>g, |+-5/2>g; excited levels likewise.
struct LevelScheme {
    std::array<double, 2> ground_splittings = {34.5e6, 46.2e6};   // Hz
    std::array<double, 2> excited_splittings = {75.0e6, 102.0e6};  // Hz
    // Relative oscillator strengths, rows = ground, columns = excited; each
    // row sums to 1.
    std::array<std::array<double, 3>, 3> oscillator_strengths = uniform_strengths();
    // Branching of excited-state decay back to the ground levels, rows =
    // excited; each row sums to 1.
    std::array<std::array<double, 3>, 3> branching = uniform_strengths();

    static std::array<std::array<double, 3>, 3> uniform_strengths();
    std::array<double, 3> ground_offsets() const;   // {0, s0, s0+s1}
    std::array<double, 3> excited_offsets() const;
    // Frequency of transition (g, e) relative to the reference transition.
    double transition_offset(int g, int e, int ref_g, int ref_e) const;
    void validate() const;
};

// One pump pass: the laser sweeps `band` (given relative to the target
// transition of the reference class) and drives every transition of every
// class it crosses.
struct PumpStep {
    int ground_level = 0;
    int excited_level = 0;
    double band_lo = 0.0;  // Hz
    double band_hi = 0.0;  // Hz
    double duration = 0.0;  // s
    double rate = 0.0;      // 1/s, peak pump rate on the named transition

    void validate() const;
};

struct BurnConfig {
    // Probe span (relative to the reference transition) the caller will ask
    // absorption for; the class grid is derived from it.
    double probe_lo = -5e6;
    double probe_hi = 5e6;
    double grid_step = 1e4;        // Hz
    double homogeneous_fwhm = 1e4;  // Hz, readout lineshape
    int reference_ground = 0;
    int reference_excited = 2;  // probe on |+-1/2>g -> |+-5/2>e

    void validate() const;
};

// Ground-state populations per frequency class. The class coordinate is the
// detuning of the reference transition; every class holds unit population.
struct BurnResult {
    std::vector<double> class_detuning;        // Hz
    std::array<std::vector<double>, 3> pop;    // per ground level
};

// Rate-equation evolution of the pump sequence; excited states are
// adiabatically eliminated (pump-then-decay per step).
BurnResult burn(const LevelScheme& scheme, const BurnConfig& config,
                std::span<const PumpStep> steps);

struct AbsorptionProfile {
    std::vector<double> grid;   // Hz, probe detuning
    std::vector<double> alpha;  // optical depth
};

// alpha(nu) = background * sum_{g,e} strength(g,e) * pop_g(nu - offset(g,e)),
// smoothed by the homogeneous lineshape. Linear in background and in the
// populations.
AbsorptionProfile absorption_spectrum(const BurnResult& populations,
                                      const LevelScheme& scheme, double background_depth,
                                      const BurnConfig& config);

// Pump sequence that prepares a transparent window of `window_width` with a
// central absorption band of `feature_width` on the reference transition:
// one saturating sweep over the window clears every crossing class, then
// alternating back-pumps on the other two ground levels of the feature class
// stack its population into the reference ground level.
std::vector<PumpStep> default_preparation_sequence(double window_width,
                                                   double feature_width,
                                                   double pump_rate = 2000.0,
                                                   double step_duration = 1e-2,
                                                   int backpump_rounds = 8);

// Width of the absorption band at half its height above the window floor.
double feature_fwhm(const AbsorptionProfile& profile, double window_lo, double window_hi);

}  // namespace qmem
