#include "qmem/rffield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "qmem/errors.hpp"
#include "qmem/spectral.hpp"

namespace qmem {

namespace {
constexpr double kMu0 = 4e-7 * kPi;  // T m / A
}

double FieldVec::magnitude() const { return std::hypot(bx, bz); }

ElectrodeLayout ElectrodeLayout::cpw(double signal_width, double gap, double ground_width,
                                     double signal_current) {
    ElectrodeLayout layout;
    layout.cpw_mode = true;
    const double off = 0.5 * signal_width + gap + 0.5 * ground_width;
    layout.strips = {
        {-off, ground_width, 0.5 * signal_current, -1},
        {0.0, signal_width, signal_current, +1},
        {off, ground_width, 0.5 * signal_current, -1},
    };
    layout.validate();
    return layout;
}

double ElectrodeLayout::signal_current() const {
    double total = 0.0;
    for (const auto& s : strips)
        if (s.direction > 0) total += s.current;
    return total;
}

void ElectrodeLayout::validate() const {
    if (strips.empty()) throw ParameterError("electrode layout has no strips");
    for (const auto& s : strips) {
        if (!(s.width > 0.0)) throw ParameterError("strip width must be > 0");
        if (s.current < 0.0) throw ParameterError("strip current magnitude must be >= 0");
        if (s.direction != 1 && s.direction != -1)
            throw ParameterError("strip direction must be +1 or -1");
    }
    // Overlap check on sorted extents.
    std::vector<std::pair<double, double>> spans;
    spans.reserve(strips.size());
    for (const auto& s : strips)
        spans.emplace_back(s.center_x - 0.5 * s.width, s.center_x + 0.5 * s.width);
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i)
        if (spans[i].first < spans[i - 1].second - 1e-18)
            throw ParameterError("electrode strips overlap");
    if (cpw_mode) {
        double net = 0.0;
        for (const auto& s : strips) net += s.direction * s.current;
        if (std::abs(net) > 1e-12 * std::max(signal_current(), 1e-30))
            throw ParameterError("CPW layout requires balanced currents");
    }
}

FieldVec strip_field(const Strip& strip, double x, double depth) {
    // Sheet current along the waveguide axis; integrating line currents over
    // the width gives arctan/log closed forms.
    const double K = strip.direction * strip.current / strip.width;  // A/m
    const double a = strip.center_x - 0.5 * strip.width;
    const double b = strip.center_x + 0.5 * strip.width;
    const double z = depth;
    const double pre = kMu0 * K / (2.0 * kPi);
    FieldVec f;
    f.bx = pre * (std::atan((x - a) / z) - std::atan((x - b) / z));
    f.bz = pre * 0.5 * std::log(((x - b) * (x - b) + z * z) / ((x - a) * (x - a) + z * z));
    return f;
}

FieldVec field_at(const ElectrodeLayout& layout, double x, double depth) {
    layout.validate();
    if (!(depth != 0.0)) {
        for (const auto& s : layout.strips)
            if (x >= s.center_x - 0.5 * s.width && x <= s.center_x + 0.5 * s.width)
                throw ParameterError("field requested inside a conductor");
    }
    FieldVec total;
    for (const auto& s : layout.strips) {
        const FieldVec f = strip_field(s, x, depth);
        total.bx += f.bx;
        total.bz += f.bz;
    }
    return total;
}

FieldMap compute_field_map(const ElectrodeLayout& layout, const GridSpec& grid) {
    layout.validate();
    if (grid.nx < 2 || grid.nz < 2) throw ParameterError("field map grid too small");
    if (!(grid.depth_min > 0.0)) throw ParameterError("field map must start below the surface");
    const double i_ref = layout.signal_current();
    if (!(i_ref > 0.0)) throw ParameterError("layout carries no signal current");

    FieldMap map;
    map.xs.resize(grid.nx);
    map.depths.resize(grid.nz);
    for (std::size_t i = 0; i < grid.nx; ++i)
        map.xs[i] = grid.x_min + (grid.x_max - grid.x_min) * static_cast<double>(i) /
                                     static_cast<double>(grid.nx - 1);
    for (std::size_t j = 0; j < grid.nz; ++j)
        map.depths[j] = grid.depth_min + (grid.depth_max - grid.depth_min) *
                                             static_cast<double>(j) /
                                             static_cast<double>(grid.nz - 1);
    map.b.resize(grid.nx * grid.nz);
    for (std::size_t j = 0; j < grid.nz; ++j)
        for (std::size_t i = 0; i < grid.nx; ++i) {
            FieldVec f = field_at(layout, map.xs[i], map.depths[j]);
            f.bx /= i_ref;
            f.bz /= i_ref;
            map.b[j * grid.nx + i] = f;
        }
    return map;
}

namespace {

double project(const FieldVec& f, FieldProjection p) {
    switch (p) {
        case FieldProjection::Magnitude:
            return f.magnitude();
        case FieldProjection::X:
            return std::abs(f.bx);
        case FieldProjection::Z:
            return std::abs(f.bz);
    }
    return f.magnitude();
}

}  // namespace

RabiMapResult rabi_map(const FieldMap& map, double coupling_hz_per_tesla,
                       double power_to_current, double power_watts,
                       FieldProjection projection) {
    if (!(coupling_hz_per_tesla > 0.0)) throw ParameterError("coupling must be > 0");
    if (power_to_current < 0.0) throw ParameterError("power_to_current must be >= 0");
    if (power_watts < 0.0) throw ParameterError("power must be >= 0");
    RabiMapResult out;
    out.xs = map.xs;
    out.depths = map.depths;
    out.omega.resize(map.b.size());
    const double current = power_to_current * std::sqrt(power_watts);
    for (std::size_t k = 0; k < map.b.size(); ++k)
        out.omega[k] = coupling_hz_per_tesla * project(map.b[k], projection) * current;
    return out;
}

HomogeneityStats homogeneity(const FieldMap& map, const DiskRegion& region,
                             FieldProjection projection) {
    if (!(region.diameter > 0.0)) throw ParameterError("mode disk diameter must be > 0");
    const double r2 = 0.25 * region.diameter * region.diameter;
    HomogeneityStats stats;
    double sum = 0.0, sum2 = 0.0;
    stats.min = std::numeric_limits<double>::infinity();
    stats.max = 0.0;
    for (std::size_t j = 0; j < map.depths.size(); ++j)
        for (std::size_t i = 0; i < map.xs.size(); ++i) {
            const double dx = map.xs[i] - region.center_x;
            const double dz = map.depths[j] - region.center_depth;
            if (dx * dx + dz * dz > r2) continue;
            const double v = project(map.at(i, j), projection);
            sum += v;
            sum2 += v * v;
            stats.min = std::min(stats.min, v);
            stats.max = std::max(stats.max, v);
            ++stats.n_points;
        }
    if (stats.n_points == 0)
        throw ParameterError("mode disk contains no field-map grid points");
    const double n = static_cast<double>(stats.n_points);
    stats.mean = sum / n;
    const double var = std::max(sum2 / n - stats.mean * stats.mean, 0.0);
    stats.rel_std = stats.mean > 0.0 ? std::sqrt(var) / stats.mean : 0.0;
    return stats;
}

}  // namespace qmem
