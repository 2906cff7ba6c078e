#pragma once

// Closed-form 2x2 linear algebra kernel: singular data via the trace/det of
// A^T A, exponent-rescaled products so that log singular values of very long
// matrix products never underflow.

#include <cmath>
#include <cstdint>
#include <span>

#include "kakeya/errors.hpp"

namespace kakeya {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(Vec2 o) {
        x += o.x;
        y += o.y;
        return *this;
    }

    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::hypot(x, y); }
    Vec2 perp() const { return {-y, x}; }
    Vec2 normalized() const {
        const double n = norm();
        return {x / n, y / n};
    }
    bool is_finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

// Row-major [[a, b], [c, d]].
struct Mat2 {
    double a = 1.0;
    double b = 0.0;
    double c = 0.0;
    double d = 1.0;

    static Mat2 identity() { return {}; }
    static Mat2 diagonal(double u, double v) { return {u, 0.0, 0.0, v}; }
    static Mat2 rotation(double phi) {
        const double co = std::cos(phi), si = std::sin(phi);
        return {co, -si, si, co};
    }

    Vec2 operator*(Vec2 v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Mat2 operator*(double s) const { return {a * s, b * s, c * s, d * s}; }
    Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
    Mat2 operator-(const Mat2& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }

    Mat2 transpose() const { return {a, c, b, d}; }
    double det() const { return a * d - b * c; }
    double trace() const { return a + d; }
    double max_abs() const {
        return std::max(std::max(std::fabs(a), std::fabs(b)), std::max(std::fabs(c), std::fabs(d)));
    }
    double min_entry() const { return std::min(std::min(a, b), std::min(c, d)); }
    bool is_finite() const {
        return std::isfinite(a) && std::isfinite(b) && std::isfinite(c) && std::isfinite(d);
    }

    // Inverse; the caller guarantees invertibility (checked).
    Mat2 inverse() const {
        const double dt = det();
        if (dt == 0.0 || !std::isfinite(dt)) throw SingularInput("Mat2::inverse: singular matrix");
        return {d / dt, -b / dt, -c / dt, a / dt};
    }
};

// Matrix with a power-of-two scale split off: value = mantissa * 2^exponent,
// max-abs-entry of the mantissa kept in [1/2, 2). Keeps products of ~10^4
// contractions representable (plain doubles underflow near word length 350
// for alpha_bar = 0.1). The determinant is tracked multiplicatively in log
// space: the mantissa determinant of a very anisotropic product cancels to
// noise (alpha2/alpha1 below machine epsilon), while the per-factor sum of
// log|det| stays exact.
struct ScaledMat2 {
    Mat2 mantissa;              // max_abs in [1/2, 2)
    std::int64_t exponent = 0;
    double log_abs_det = 0.0;   // log |det(mantissa * 2^exponent)|, tracked per factor

    static ScaledMat2 identity() { return {Mat2::identity(), 0, 0.0}; }

    static ScaledMat2 from(const Mat2& m) {
        const double det = m.det();
        if (det == 0.0 || !m.is_finite()) throw SingularInput("ScaledMat2: singular or non-finite");
        return renormalized(m, 0, std::log(std::fabs(det)));
    }

    ScaledMat2 times(const Mat2& rhs) const {
        const double det = rhs.det();
        if (det == 0.0 || !rhs.is_finite()) throw SingularInput("ScaledMat2: singular or non-finite factor");
        return renormalized(mantissa * rhs, exponent, log_abs_det + std::log(std::fabs(det)));
    }
    ScaledMat2 times(const ScaledMat2& rhs) const {
        return renormalized(mantissa * rhs.mantissa, exponent + rhs.exponent,
                            log_abs_det + rhs.log_abs_det);
    }

    // May under/overflow; the log of any singular value stays exact via
    // the exponent, so prefer svd2(ScaledMat2) for long words.
    Mat2 to_mat2() const {
        const double s = std::ldexp(1.0, static_cast<int>(exponent));
        return mantissa * s;
    }
    Vec2 apply(Vec2 v) const {
        const Vec2 w = mantissa * v;
        const double s = std::ldexp(1.0, static_cast<int>(exponent));
        return w * s;
    }

  private:
    static ScaledMat2 renormalized(const Mat2& m, std::int64_t exponent, double log_abs_det) {
        const double ma = m.max_abs();
        if (ma == 0.0 || !std::isfinite(ma)) throw SingularInput("ScaledMat2: zero or non-finite matrix");
        int e = 0;
        std::frexp(ma, &e);  // ma = f * 2^e, f in [1/2, 1)
        return {m * std::ldexp(1.0, -e), exponent + e, log_abs_det};
    }
};

// Singular values alpha1 >= alpha2 with unit singular directions of A^T A.
// log_alpha* carry the exact magnitude for rescaled inputs.
struct SingularData {
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    Vec2 theta1;
    Vec2 theta2;
    double log_alpha1 = 0.0;
    double log_alpha2 = 0.0;
};

SingularData svd2(const Mat2& m);
SingularData svd2(const ScaledMat2& m);

// Singular value function in log space (d = 2): t*log a1 for t <= 1,
// log a1 + (t-1) log a2 for 1 < t <= 2, (t/2)(log a1 + log a2) above.
// Continuous in t at both breakpoints.
inline double log_phi(const SingularData& s, double t) {
    if (t <= 1.0) return t * s.log_alpha1;
    if (t <= 2.0) return s.log_alpha1 + (t - 1.0) * s.log_alpha2;
    return 0.5 * t * (s.log_alpha1 + s.log_alpha2);
}

// Left-fold product with renormalization after every factor. Empty input
// gives the identity at exponent 0.
ScaledMat2 scaled_product(std::span<const Mat2> factors);

// Max eigenvalue modulus, closed form from trace/det.
double spectral_radius(const Mat2& m);

}  // namespace kakeya
