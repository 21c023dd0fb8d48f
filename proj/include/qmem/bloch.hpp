#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace qmem {

// 3-vector on the Bloch sphere, ordered (x, y, z); z = +1 is the excited
// (upper) level of the two-level system.
struct BlochVec {
    double x = 0.0, y = 0.0, z = -1.0;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

// 3x3 rotation acting on Bloch vectors.
struct BlochRotation {
    // Row-major.
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static BlochRotation identity() { return {}; }

    // Rotation by `angle` about unit axis (ax, ay, az), right-hand rule:
    // this is the propagator of dr/dt = W x r with W = angle_rate * axis.
    static BlochRotation about_axis(double ax, double ay, double az, double angle) {
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        const double t = 1.0 - c;
        BlochRotation r;
        r.m = {t * ax * ax + c,      t * ax * ay - s * az, t * ax * az + s * ay,
               t * ax * ay + s * az, t * ay * ay + c,      t * ay * az - s * ax,
               t * ax * az - s * ay, t * ay * az + s * ax, t * az * az + c};
        return r;
    }

    static BlochRotation about_z(double angle) { return about_axis(0, 0, 1, angle); }

    // In-plane axis at azimuthal angle `phase` (phase 0 = x, pi/2 = y).
    static BlochRotation about_xy(double phase, double angle) {
        return about_axis(std::cos(phase), std::sin(phase), 0.0, angle);
    }

    BlochVec apply(const BlochVec& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }

    // Composition: (a * b) applies b first, then a.
    friend BlochRotation operator*(const BlochRotation& a, const BlochRotation& b) {
        BlochRotation r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double acc = 0.0;
                for (int k = 0; k < 3; ++k) acc += a.m[3 * i + k] * b.m[3 * k + j];
                r.m[3 * i + j] = acc;
            }
        return r;
    }
};

// Complex coherence rho_eg read off a Bloch vector: c = (x - i y) / 2.
inline std::complex<double> coherence_of(const BlochVec& v) {
    return {0.5 * v.x, -0.5 * v.y};
}

// Excited-level population.
inline double excited_population_of(const BlochVec& v) { return 0.5 * (1.0 + v.z); }

// Ground -> excited transfer probability of a Bloch rotation (population that
// an ideal pi-train should return; what remains is the residual).
inline double transfer_probability(const BlochRotation& u) {
    const BlochVec ground{0.0, 0.0, -1.0};
    return excited_population_of(u.apply(ground));
}

}  // namespace qmem
