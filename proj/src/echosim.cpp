#include "qmem/echosim.hpp"

#include <algorithm>
#include <cmath>

#include "qmem/errors.hpp"
#include "qmem/parallel.hpp"
#include "qmem/rng.hpp"

namespace qmem {

namespace {

std::vector<DDSequence::Event> symmetric_train(const std::vector<DDAxis>& phases,
                                               double block_length) {
    const std::size_t n = phases.size();
    const double tau = block_length / (2.0 * static_cast<double>(n));
    std::vector<DDSequence::Event> events;
    events.reserve(n);
    for (std::size_t k = 0; k < n; ++k)
        events.push_back({phases[k], tau * (2.0 * static_cast<double>(k) + 1.0)});
    return events;
}

std::vector<DDAxis> repeat_phases(std::initializer_list<DDAxis> unit, int repeats) {
    if (repeats < 1) throw ParameterError("DD repeat count must be >= 1");
    std::vector<DDAxis> out;
    out.reserve(unit.size() * static_cast<std::size_t>(repeats));
    for (int r = 0; r < repeats; ++r) out.insert(out.end(), unit.begin(), unit.end());
    return out;
}

}  // namespace

DDSequence DDSequence::from_phases(const std::vector<DDAxis>& phases, double block_length,
                                   const Pulse& tmpl) {
    if (phases.empty()) throw ParameterError("DD sequence needs at least one pulse");
    if (!(block_length > 0.0)) throw ParameterError("DD block length must be > 0");
    DDSequence seq;
    seq.pulses = symmetric_train(phases, block_length);
    seq.block_length = block_length;
    seq.pulse_template = tmpl;
    seq.validate();
    return seq;
}

DDSequence DDSequence::xx(double block_length, const Pulse& tmpl, int repeats) {
    return from_phases(repeat_phases({DDAxis::X, DDAxis::X}, repeats), block_length, tmpl);
}

DDSequence DDSequence::xxxx(double block_length, const Pulse& tmpl, int repeats) {
    return from_phases(repeat_phases({DDAxis::X, DDAxis::X, DDAxis::X, DDAxis::X}, repeats),
                       block_length, tmpl);
}

DDSequence DDSequence::xy4(double block_length, const Pulse& tmpl, int repeats) {
    return from_phases(repeat_phases({DDAxis::X, DDAxis::Y, DDAxis::X, DDAxis::Y}, repeats),
                       block_length, tmpl);
}

void DDSequence::validate() const {
    if (pulses.empty()) throw ParameterError("DD sequence is empty");
    if (!(block_length > 0.0)) throw ParameterError("DD block length must be > 0");
    const double half = 0.5 * pulse_template.duration;
    double prev_end = 0.0;
    for (const auto& ev : pulses) {
        if (ev.offset - half < prev_end - 1e-15)
            throw ScheduleError("DD pulses overlap or precede the block start");
        if (ev.offset + half > block_length + 1e-15)
            throw ScheduleError("DD pulse extends past the block end");
        prev_end = ev.offset + half;
    }
}

void PulseErrorModel::validate() const {
    if (!(angle_error > -kPi && angle_error < kPi))
        throw ParameterError("angle error must lie in (-pi, pi)");
    detuning_spread.validate();
    per_ion_angle_scale.validate();
}

void MediumParams::validate() const {
    if (d < 0.0 || !std::isfinite(d)) throw ParameterError("optical depth must be >= 0");
    if (!(eta_control >= 0.0 && eta_control <= 1.0))
        throw ParameterError("eta_control must lie in [0, 1]");
    if (gamma < 0.0) throw ParameterError("gamma must be >= 0");
}

void ProtocolSchedule::validate() const {
    if (optical_pulses.size() != 4)
        throw ScheduleError("an NLPE schedule needs exactly four control pulses");
    double prev = input_time;
    for (const auto& ev : optical_pulses) {
        if (!(ev.time > prev)) throw ScheduleError("control pulses must be strictly ordered");
        prev = ev.time;
    }
    const double t1 = optical_pulses[0].time;
    const double t2 = optical_pulses[1].time;
    const double t3 = optical_pulses[2].time;
    const double t4 = optical_pulses[3].time;
    if (std::abs((t3 - t1) - t31) > 1e-12 || std::abs((t4 - t2) - t42) > 1e-12)
        throw ScheduleError("schedule intervals inconsistent with t31/t42");
    if (dd_block) {
        dd_block->validate();
        if (dd_start < t1 - 1e-15 ||
            dd_start + dd_block->block_length > t2 + 1e-15)
            throw ScheduleError("DD block does not fit inside the spin-storage interval");
    }
    if (!(echo_time > t4)) throw ScheduleError("echo would form before the last pulse");
}

ProtocolSchedule build_nlpe_schedule(double t31, double t42, double spin_storage,
                                     std::optional<DDSequence> dd,
                                     const ScheduleOptions& opts) {
    if (!(t31 > 0.0) || !(t42 > 0.0)) throw ParameterError("t31 and t42 must be > 0");
    if (!(spin_storage > 0.0)) throw ParameterError("spin storage must be > 0");
    const double gap23 = t31 - spin_storage;
    if (!(gap23 > 0.0))
        throw ScheduleError("spin storage must be shorter than t31");
    const double gap34 = t42 - gap23;
    if (!(gap34 > 0.0))
        throw ScheduleError("t42 too short for the pulse-two/pulse-three gap");
    if (dd && dd->block_length > spin_storage + 1e-15)
        throw ScheduleError("DD block is longer than the spin-storage interval");

    const double d1 = opts.first_pulse_delay;
    if (!(d1 > 0.0)) throw ParameterError("first pulse delay must be > 0");
    const double t1 = opts.input_time + d1;
    const double t2 = t1 + spin_storage;
    const double t3 = t2 + gap23;
    const double t4 = t3 + gap34;

    ProtocolSchedule s;
    s.input_time = opts.input_time;
    s.detection_window = opts.detection_window;
    s.t31 = t31;
    s.t42 = t42;
    s.spin_storage = spin_storage;
    s.optical_pulses = {
        {t1, OpticalTransition::Pi35, opts.optical_pulse_template},
        {t2, OpticalTransition::Pi13, opts.optical_pulse_template},
        {t3, OpticalTransition::Pi13, opts.optical_pulse_template},
        {t4, OpticalTransition::Pi35, opts.optical_pulse_template},
    };
    // Optical phase rephases when (t1 - input) - gap23 + (te - t4) = 0.
    s.echo_time = t4 + gap23 - d1;
    if (dd) {
        s.dd_block = std::move(dd);
        // Center the block in the spin-storage interval.
        s.dd_start = t1 + 0.5 * (spin_storage - s.dd_block->block_length);
    }
    s.validate();
    return s;
}

namespace {

struct IonDraws {
    double spin_detuning;     // Hz
    double excited_detuning;  // Hz
    double angle_scale;
};

IonDraws draw_ion(const SpectralDistribution& optical_dist,
                  const SpectralDistribution& spin_dist,
                  const SpectralDistribution& scale_dist, std::uint64_t seed,
                  std::uint64_t index) {
    // Independent sub-streams per quantity keep draws uncorrelated.
    IonDraws d;
    d.spin_detuning = spin_dist.is_delta() ? spin_dist.center
                                           : sample_one(spin_dist, seed ^ 0x517cc1b7ULL, index);
    d.excited_detuning = optical_dist.is_delta()
                             ? optical_dist.center
                             : sample_one(optical_dist, seed ^ 0x2545f491ULL, index);
    d.angle_scale = scale_dist.is_delta() ? scale_dist.center
                                          : sample_one(scale_dist, seed ^ 0x9d2c5680ULL, index);
    return d;
}

// Net Bloch rotation of the DD block for one ion: z precession at the spin
// detuning between pulses, pulses as rotations of angle scale*(pi + delta)
// about the X/Y axis (instantaneous by default).
BlochRotation dd_block_rotation(const DDSequence& dd, double spin_detuning_hz,
                                double angle_error, double angle_scale,
                                bool finite_duration) {
    const double wz = kTwoPi * spin_detuning_hz;
    BlochRotation u = BlochRotation::identity();
    double t_prev = 0.0;
    for (const auto& ev : dd.pulses) {
        const double axis_phase = (ev.axis == DDAxis::X) ? 0.0 : 0.5 * kPi;
        if (finite_duration) {
            const double half = 0.5 * dd.pulse_template.duration;
            const double free = (ev.offset - half) - t_prev;
            u = BlochRotation::about_z(wz * free) * u;
            // Scale the drive amplitude; detuning stays active inside the pulse.
            Pulse p = dd.pulse_template;
            p.peak_rabi *= angle_scale * (1.0 + angle_error / kPi);
            p.phase = axis_phase;
            // Propagate the three basis vectors to build the rotation.
            BlochRotation rot;
            for (int col = 0; col < 3; ++col) {
                BlochVec v{col == 0 ? 1.0 : 0.0, col == 1 ? 1.0 : 0.0, col == 2 ? 1.0 : 0.0};
                const TwoLevelState out =
                    propagate_two_level(p, spin_detuning_hz, TwoLevelState::from_bloch(v));
                const BlochVec w = out.to_bloch();
                rot.m[0 + col] = w.x;
                rot.m[3 + col] = w.y;
                rot.m[6 + col] = w.z;
            }
            u = rot * u;
            t_prev = ev.offset + half;
        } else {
            u = BlochRotation::about_z(wz * (ev.offset - t_prev)) * u;
            u = BlochRotation::about_xy(axis_phase, angle_scale * (kPi + angle_error)) * u;
            t_prev = ev.offset;
        }
    }
    u = BlochRotation::about_z(wz * (dd.block_length - t_prev)) * u;
    return u;
}

constexpr std::size_t kChunk = 4096;

}  // namespace

EchoResult simulate_echo(const ProtocolSchedule& schedule,
                         const SpectralDistribution& optical_dist,
                         const SpectralDistribution& spin_dist,
                         const PulseErrorModel& errors, const MediumParams& medium,
                         std::size_t n_ions, std::uint64_t seed, const SimOptions& sim) {
    schedule.validate();
    optical_dist.validate();
    spin_dist.validate();
    errors.validate();
    medium.validate();
    if (n_ions == 0) throw ParameterError("simulate_echo: empty ensemble");

    const double t1 = schedule.optical_pulses[0].time;
    const double t2 = schedule.optical_pulses[1].time;
    const double spin_tail = schedule.t31 - (t2 - t1);  // spin exposure after the DD gap
    const bool has_dd = schedule.dd_block.has_value();
    const double dd_len = has_dd ? schedule.dd_block->block_length : 0.0;
    // Free spin evolution inside [t1, t2] not covered by the DD block.
    const double spin_free_12 = (t2 - t1) - dd_len;

    const int n_trace = sim.trace_points;
    const std::size_t n_chunks = (n_ions + kChunk - 1) / kChunk;

    struct ChunkAcc {
        KahanSum re, im;        // full phasor including DD transfer
        KahanSum spin_re, spin_im;
        KahanSum exc_re, exc_im;
        KahanSum residual;
        std::vector<KahanSum> trace_re, trace_im;
    };
    std::vector<ChunkAcc> acc(n_chunks);
    std::vector<double> trace_times(n_trace);
    for (int k = 0; k < n_trace; ++k) {
        const double f = n_trace > 1 ? static_cast<double>(k) / (n_trace - 1) : 0.5;
        trace_times[k] = schedule.echo_time + (f - 0.5) * schedule.detection_window;
    }

    parallel_chunks(n_ions, kChunk, sim.threads, [&](std::size_t c, std::size_t b,
                                                     std::size_t e) {
        ChunkAcc& a = acc[c];
        if (n_trace > 0) {
            a.trace_re.resize(n_trace);
            a.trace_im.resize(n_trace);
        }
        for (std::size_t i = b; i < e; ++i) {
            const IonDraws ion = draw_ion(optical_dist, spin_dist,
                                          errors.per_ion_angle_scale, seed, i);
            // Spin coherence through the storage gap: DD block plus free ends.
            std::complex<double> spin_factor;
            double residual = 0.0;
            if (has_dd) {
                const BlochRotation u =
                    dd_block_rotation(*schedule.dd_block, ion.spin_detuning,
                                      errors.angle_error, ion.angle_scale,
                                      sim.finite_duration_dd);
                const BlochVec plus_x{1.0, 0.0, 0.0};
                const BlochVec out = u.apply(plus_x);
                spin_factor = {out.x, out.y};
                residual = transfer_probability(u);
                const double free_phase = kTwoPi * ion.spin_detuning * spin_free_12;
                spin_factor *= std::complex<double>(std::cos(free_phase), std::sin(free_phase));
            } else {
                const double ph = kTwoPi * ion.spin_detuning * (t2 - t1);
                spin_factor = {std::cos(ph), std::sin(ph)};
            }
            const double tail_phase = kTwoPi * ion.spin_detuning * spin_tail;
            spin_factor *= std::complex<double>(std::cos(tail_phase), std::sin(tail_phase));

            const double exc_phase = kTwoPi * ion.excited_detuning * schedule.t42;
            const std::complex<double> exc_factor{std::cos(exc_phase), std::sin(exc_phase)};

            const std::complex<double> phasor = spin_factor * exc_factor;
            a.re.add(phasor.real());
            a.im.add(phasor.imag());
            a.spin_re.add(spin_factor.real());
            a.spin_im.add(spin_factor.imag());
            a.exc_re.add(exc_factor.real());
            a.exc_im.add(exc_factor.imag());
            a.residual.add(residual);
            for (int k = 0; k < n_trace; ++k) {
                const double dphi =
                    kTwoPi * ion.excited_detuning * (trace_times[k] - schedule.echo_time);
                const std::complex<double> shifted =
                    phasor * std::complex<double>(std::cos(dphi), std::sin(dphi));
                a.trace_re[k].add(shifted.real());
                a.trace_im[k].add(shifted.imag());
            }
        }
    });

    // Chunk-ordered combine keeps results independent of the thread count.
    KahanSum re, im, spin_re, spin_im, exc_re, exc_im, residual;
    std::vector<KahanSum> tr_re(n_trace), tr_im(n_trace);
    for (std::size_t c = 0; c < n_chunks; ++c) {
        re.add(acc[c].re.sum);
        im.add(acc[c].im.sum);
        spin_re.add(acc[c].spin_re.sum);
        spin_im.add(acc[c].spin_im.sum);
        exc_re.add(acc[c].exc_re.sum);
        exc_im.add(acc[c].exc_im.sum);
        residual.add(acc[c].residual.sum);
        for (int k = 0; k < n_trace; ++k) {
            tr_re[k].add(acc[c].trace_re[k].sum);
            tr_im[k].add(acc[c].trace_im[k].sum);
        }
    }

    const double inv_n = 1.0 / static_cast<double>(n_ions);
    const std::complex<double> mean_phasor{re.sum * inv_n, im.sum * inv_n};
    const std::complex<double> mean_spin{spin_re.sum * inv_n, spin_im.sum * inv_n};
    const std::complex<double> mean_exc{exc_re.sum * inv_n, exc_im.sum * inv_n};

    EchoResult out;
    out.diagnostics.absorption_factor = medium.d * medium.d * std::exp(-medium.d);
    out.diagnostics.control_factor = std::pow(medium.eta_control, 4);
    out.diagnostics.homogeneous_factor = std::exp(-2.0 * medium.gamma * schedule.t42);
    out.diagnostics.spin_dephasing_factor = std::norm(mean_spin);
    out.diagnostics.excited_dephasing_factor = std::norm(mean_exc);
    const double deterministic = out.diagnostics.absorption_factor *
                                 out.diagnostics.control_factor *
                                 out.diagnostics.homogeneous_factor;
    out.efficiency = std::norm(mean_phasor) * deterministic;
    out.residual_spin_population = residual.sum * inv_n;
    out.trace_times = std::move(trace_times);
    out.amplitude_trace.resize(n_trace);
    const double amp_scale = std::sqrt(deterministic);
    for (int k = 0; k < n_trace; ++k)
        out.amplitude_trace[k] =
            std::complex<double>(tr_re[k].sum * inv_n, tr_im[k].sum * inv_n) * amp_scale;
    return out;
}

RephasingResult spin_rephasing_efficiency(const DDSequence& dd,
                                          const PulseErrorModel& errors,
                                          std::size_t n_ions, std::uint64_t seed,
                                          int threads) {
    dd.validate();
    errors.validate();
    if (n_ions == 0) throw ParameterError("spin_rephasing_efficiency: empty ensemble");

    const std::size_t n_chunks = (n_ions + kChunk - 1) / kChunk;
    struct ChunkAcc {
        KahanSum re, im, residual;
    };
    std::vector<ChunkAcc> acc(n_chunks);
    parallel_chunks(n_ions, kChunk, threads, [&](std::size_t c, std::size_t b,
                                                 std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const double det = errors.detuning_spread.is_delta()
                                   ? errors.detuning_spread.center
                                   : sample_one(errors.detuning_spread, seed ^ 0x517cc1b7ULL, i);
            const double scale =
                errors.per_ion_angle_scale.is_delta()
                    ? errors.per_ion_angle_scale.center
                    : sample_one(errors.per_ion_angle_scale, seed ^ 0x9d2c5680ULL, i);
            const BlochRotation u =
                dd_block_rotation(dd, det, errors.angle_error, scale, false);
            const BlochVec out = u.apply({1.0, 0.0, 0.0});
            acc[c].re.add(out.x);
            acc[c].im.add(out.y);
            acc[c].residual.add(transfer_probability(u));
        }
    });
    KahanSum re, im, residual;
    for (std::size_t c = 0; c < n_chunks; ++c) {
        re.add(acc[c].re.sum);
        im.add(acc[c].im.sum);
        residual.add(acc[c].residual.sum);
    }
    const double inv_n = 1.0 / static_cast<double>(n_ions);
    RephasingResult r;
    r.rephasing_efficiency = std::norm(std::complex<double>(re.sum * inv_n, im.sum * inv_n));
    r.residual_population = residual.sum * inv_n;
    return r;
}

double estimate_rephasing_from_intercepts(double eff_dd_zero, double eff_nodd_zero) {
    if (!(eff_dd_zero > 0.0 && eff_dd_zero <= 1.0))
        throw ParameterError("DD zero-time intercept must lie in (0, 1]");
    if (!(eff_nodd_zero > 0.0 && eff_nodd_zero <= 1.0))
        throw ParameterError("no-DD zero-time intercept must lie in (0, 1]");
    return std::clamp(eff_dd_zero / eff_nodd_zero, 0.0, 1.0);
}

double noise_from_residual(double residual_population, double calibration,
                           double noise_floor) {
    if (!(residual_population >= 0.0 && residual_population <= 1.0))
        throw ParameterError("residual population must lie in [0, 1]");
    if (!(noise_floor >= 0.0 && noise_floor <= 1.0))
        throw ParameterError("noise floor must lie in [0, 1]");
    if (calibration < 0.0) throw ParameterError("noise calibration must be >= 0");
    return noise_floor + calibration * residual_population;
}

double solve_noise_calibration(double residual_population, double p_n,
                               double noise_floor) {
    if (!(residual_population > 0.0))
        throw ParameterError("calibration needs a nonzero residual anchor");
    if (p_n < noise_floor)
        throw ParameterError("noise level below the floor has no affine solution");
    return (p_n - noise_floor) / residual_population;
}

}  // namespace qmem
