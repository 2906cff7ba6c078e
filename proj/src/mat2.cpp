#include "kakeya/mat2.hpp"

#include <algorithm>

namespace kakeya {

namespace {

// Deterministic sign convention: nonnegative first coordinate, ties broken
// by nonnegative second coordinate.
Vec2 canonical_sign(Vec2 v) {
    if (v.x < 0.0 || (v.x == 0.0 && v.y < 0.0)) return -v;
    return v;
}

}  // namespace

SingularData svd2(const Mat2& m) {
    if (!m.is_finite()) throw SingularInput("svd2: non-finite entries");
    const double det = m.det();
    if (det == 0.0) throw SingularInput("svd2: singular matrix (|det| = 0)");

    // Eigenproblem of the positive definite A^T A = [[p, q], [q, r]].
    const double p = m.a * m.a + m.c * m.c;
    const double q = m.a * m.b + m.c * m.d;
    const double r = m.b * m.b + m.d * m.d;
    const double mean = 0.5 * (p + r);
    const double disc = std::hypot(0.5 * (p - r), q);
    const double lambda1 = mean + disc;

    SingularData out;
    out.alpha1 = std::sqrt(lambda1);
    out.alpha2 = std::fabs(det) / out.alpha1;  // avoids cancellation in mean - disc
    out.log_alpha1 = std::log(out.alpha1);
    out.log_alpha2 = std::log(out.alpha2);

    if (out.alpha1 - out.alpha2 <= 1e-12 * out.alpha1) {
        // Near-conformal: no preferred axis, fix the canonical one.
        out.theta1 = {1.0, 0.0};
        out.theta2 = {0.0, 1.0};
        return out;
    }

    // Eigenvector of A^T A for lambda1; pick the better-conditioned column.
    const Vec2 cand1{q, lambda1 - p};
    const Vec2 cand2{lambda1 - r, q};
    Vec2 t1 = (cand1.norm2() >= cand2.norm2()) ? cand1 : cand2;
    t1 = canonical_sign(t1.normalized());
    out.theta1 = t1;
    out.theta2 = canonical_sign(t1.perp());
    return out;
}

SingularData svd2(const ScaledMat2& m) {
    if (!m.mantissa.is_finite()) throw SingularInput("svd2: non-finite entries");
    // alpha1 of the mantissa from A^T A (forward stable); alpha2 from the
    // multiplicatively tracked determinant, which survives anisotropy ratios
    // far below machine epsilon.
    const double p = m.mantissa.a * m.mantissa.a + m.mantissa.c * m.mantissa.c;
    const double q = m.mantissa.a * m.mantissa.b + m.mantissa.c * m.mantissa.d;
    const double r = m.mantissa.b * m.mantissa.b + m.mantissa.d * m.mantissa.d;
    const double mean = 0.5 * (p + r);
    const double disc = std::hypot(0.5 * (p - r), q);
    const double lambda1 = mean + disc;

    SingularData out;
    const double log_scale = static_cast<double>(m.exponent) * M_LN2;
    out.log_alpha1 = 0.5 * std::log(lambda1) + log_scale;
    out.log_alpha2 = m.log_abs_det - out.log_alpha1;
    // Plain-double fields may saturate to 0 for extreme exponents; the log
    // fields stay exact.
    out.alpha1 = std::exp(out.log_alpha1);
    out.alpha2 = std::exp(out.log_alpha2);

    if (out.log_alpha1 - out.log_alpha2 <= 1e-12) {
        out.theta1 = {1.0, 0.0};
        out.theta2 = {0.0, 1.0};
        return out;
    }
    const Vec2 cand1{q, lambda1 - p};
    const Vec2 cand2{lambda1 - r, q};
    Vec2 t1 = (cand1.norm2() >= cand2.norm2()) ? cand1 : cand2;
    if (t1.norm2() == 0.0) t1 = {1.0, 0.0};  // conformal fallback after log filter
    t1 = t1.normalized();
    if (t1.x < 0.0 || (t1.x == 0.0 && t1.y < 0.0)) t1 = -t1;
    out.theta1 = t1;
    const Vec2 t2 = t1.perp();
    out.theta2 = (t2.x < 0.0 || (t2.x == 0.0 && t2.y < 0.0)) ? -t2 : t2;
    return out;
}

ScaledMat2 scaled_product(std::span<const Mat2> factors) {
    ScaledMat2 acc = ScaledMat2::identity();
    for (const Mat2& f : factors) acc = acc.times(f);
    return acc;
}

double spectral_radius(const Mat2& m) {
    if (!m.is_finite()) throw SingularInput("spectral_radius: non-finite entries");
    const double half_tr = 0.5 * m.trace();
    const double disc = half_tr * half_tr - m.det();
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        return std::max(std::fabs(half_tr + s), std::fabs(half_tr - s));
    }
    // Complex pair: |lambda|^2 = det > 0.
    return std::sqrt(m.det());
}

}  // namespace kakeya
