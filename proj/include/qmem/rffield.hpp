#pragma once

#include <cstddef>
#include <vector>

namespace qmem {

// One surface electrode: infinitely long along the waveguide axis, uniform
// current density across its width, lying at depth 0.
struct Strip {
    double center_x = 0.0;  // m
    double width = 0.0;     // m
    double current = 0.0;   // A (magnitude)
    int direction = 1;      // +1 signal sense, -1 return
};

struct ElectrodeLayout {
    std::vector<Strip> strips;
    bool cpw_mode = false;  // enforce balanced currents (signal = -sum grounds)

    // Three-strip coplanar layout: signal strip at x = 0 flanked by grounds,
    // each ground returning half the signal current.
    static ElectrodeLayout cpw(double signal_width, double gap, double ground_width,
                               double signal_current = 1.0);
    // Net current carried in the +1 direction (normalization reference).
    double signal_current() const;
    void validate() const;
};

struct FieldVec {
    double bx = 0.0;  // T, tangential (across the strips)
    double bz = 0.0;  // T, into the crystal
    double magnitude() const;
};

// Closed-form field of the layout at (x, depth), depth > 0 inside the
// crystal. Throws when the point lies on a conductor.
FieldVec field_at(const ElectrodeLayout& layout, double x, double depth);

// Field of a single uniform strip (building block; exposed for testing).
FieldVec strip_field(const Strip& strip, double x, double depth);

struct FieldMap {
    std::vector<double> xs;      // m
    std::vector<double> depths;  // m
    std::vector<FieldVec> b;     // row-major [depth][x], T per A of signal current

    const FieldVec& at(std::size_t ix, std::size_t iz) const {
        return b[iz * xs.size() + ix];
    }
};

struct GridSpec {
    double x_min = -4e-4, x_max = 4e-4;
    std::size_t nx = 161;
    double depth_min = 1e-6, depth_max = 1e-4;
    std::size_t nz = 100;
};

FieldMap compute_field_map(const ElectrodeLayout& layout, const GridSpec& grid);

enum class FieldProjection { Magnitude, X, Z };

struct RabiMapResult {
    std::vector<double> xs, depths;
    std::vector<double> omega;  // Hz, row-major [depth][x]
};

// Omega(point) = coupling * |B_eff| * power_to_current * sqrt(power).
RabiMapResult rabi_map(const FieldMap& map, double coupling_hz_per_tesla,
                       double power_to_current, double power_watts,
                       FieldProjection projection = FieldProjection::Magnitude);

struct DiskRegion {
    double center_x = 0.0;      // m
    double center_depth = 0.0;  // m
    double diameter = 0.0;      // m
};

struct HomogeneityStats {
    double mean = 0.0;     // T/A
    double rel_std = 0.0;  // std / mean
    double min = 0.0;
    double max = 0.0;
    std::size_t n_points = 0;
};

// |B| statistics over the map points inside the disk (the optical mode).
HomogeneityStats homogeneity(const FieldMap& map, const DiskRegion& region,
                             FieldProjection projection = FieldProjection::Magnitude);

}  // namespace qmem
