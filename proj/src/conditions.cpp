#include "kakeya/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kakeya/errors.hpp"
#include "kakeya/geom.hpp"

namespace kakeya {

namespace {

// Multiply by -1 when all entries are strictly negative; nullopt when any
// entry is zero or signs are mixed. Valid for statements invariant under
// global sign flips (singular values, cone images).
std::optional<Mat2> sign_normalized(const Mat2& m) {
    const bool pos = m.a > 0.0 && m.b > 0.0 && m.c > 0.0 && m.d > 0.0;
    const bool neg = m.a < 0.0 && m.b < 0.0 && m.c < 0.0 && m.d < 0.0;
    if (pos) return m;
    if (neg) return m * -1.0;
    return std::nullopt;
}

bool strictly_positive(const Mat2& m) { return m.min_entry() > 0.0; }

double angle_from_theta(Vec2 v) {
    const Vec2 theta{M_SQRT1_2, M_SQRT1_2};
    const double c = std::fabs(v.dot(theta)) / v.norm();
    return std::acos(std::min(1.0, c));
}

// Direction angle in (0, pi/2) of a vector in the open first quadrant.
double quadrant_angle(Vec2 v) { return std::atan2(v.y, v.x); }

std::string map_label(std::size_t i) { return "map " + std::to_string(i + 1); }

}  // namespace

double Cone::d_constant() const {
    const double c = std::cos(beta);
    return 1.0 / (c * c);
}

bool Cone::contains(Vec2 x) const {
    if (x.norm2() == 0.0) return false;
    return std::cos(beta / 2.0) < std::fabs(theta.dot(x)) / x.norm();
}

ConeSearch find_invariant_cone(const IfsSystem& sys, int block_level, std::uint64_t budget) {
    ConeSearch out;
    std::vector<Mat2> normalized;
    normalized.reserve(sys.size());
    for (std::size_t i = 0; i < sys.size(); ++i) {
        const auto n = sign_normalized(sys.map(i).linear);
        if (!n) {
            out.witness = ConeWitness{i, map_label(i) + " has a zero or mixed-sign entry"};
            return out;
        }
        normalized.push_back(*n);
    }

    // Largest angle between theta and any boundary-ray image over all level-m
    // block products and their transposes.
    double beta_half = 0.0;
    const std::uint64_t count = level_count_checked(sys.size(), block_level, budget);
    (void)count;
    std::vector<std::uint32_t> word(static_cast<std::size_t>(block_level), 0);
    for (;;) {
        Mat2 p = Mat2::identity();
        for (std::uint32_t s : word) p = p * normalized[s];
        for (const Mat2& m : {p, p.transpose()}) {
            beta_half = std::max(beta_half, angle_from_theta(m * Vec2{1.0, 0.0}));
            beta_half = std::max(beta_half, angle_from_theta(m * Vec2{0.0, 1.0}));
        }
        // next word, lexicographic
        int k = block_level - 1;
        while (k >= 0 && ++word[k] == sys.size()) word[k--] = 0;
        if (k < 0) break;
    }

    const double beta = 2.0 * beta_half + 1e-9;
    if (beta >= M_PI / 2.0) {
        out.witness = ConeWitness{0, "boundary-ray images reach the quadrant boundary"};
        return out;
    }
    out.cone = Cone{Vec2{M_SQRT1_2, M_SQRT1_2}, beta, M_PI / 2.0 - beta, block_level};
    return out;
}

X1Report check_x1(const IfsSystem& sys) {
    X1Report rep;
    for (std::size_t i = 0; i < sys.size(); ++i) {
        const auto n = sign_normalized(sys.map(i).linear);
        if (!n)
            throw HypothesisViolated("check_x1: " + map_label(i) +
                                     " is not strictly one-signed");
        const double lo = n->c / n->a;  // w/u
        const double hi = n->d / n->b;  // z/v
        rep.intervals.emplace_back(std::min(lo, hi), std::max(lo, hi));
    }
    rep.disjoint = true;
    for (std::size_t i = 0; i < sys.size() && rep.disjoint; ++i)
        for (std::size_t j = i + 1; j < sys.size(); ++j) {
            const auto& [alo, ahi] = rep.intervals[i];
            const auto& [blo, bhi] = rep.intervals[j];
            if (!(ahi < blo || bhi < alo)) {  // shared endpoint counts as overlap
                rep.disjoint = false;
                rep.offending = std::make_pair(i, j);
                break;
            }
        }
    return rep;
}

namespace {

// Sign of the orientation of (p, q, r) with an absolute epsilon guard scaled
// by the coordinate magnitudes; 0 means degenerate.
int orient_sign(Vec2 p, Vec2 q, Vec2 r) {
    const double v = (q - p).cross(r - p);
    const double scale = std::max({p.norm(), q.norm(), r.norm(), 1.0});
    if (std::fabs(v) <= 1e-12 * scale * scale) return 0;
    return v > 0.0 ? 1 : -1;
}

// Open segments intersecting in exactly one interior point: strictly
// opposite orientations on both sides. Endpoint touches and collinear
// overlaps report false.
bool proper_crossing(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    const int a = orient_sign(p1, p2, q1);
    const int b = orient_sign(p1, p2, q2);
    const int c = orient_sign(q1, q2, p1);
    const int d = orient_sign(q1, q2, p2);
    return a * b < 0 && c * d < 0;
}

bool irreducible_adjacency(const std::vector<std::vector<std::uint8_t>>& m) {
    const std::size_t n = m.size();
    // Reachability closure of Id + M; irreducible iff all pairs reachable.
    std::vector<std::vector<std::uint8_t>> reach(n, std::vector<std::uint8_t>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        reach[i][i] = 1;
        for (std::size_t j = 0; j < n; ++j)
            if (m[i][j]) reach[i][j] = 1;
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            if (reach[i][k])
                for (std::size_t j = 0; j < n; ++j)
                    if (reach[k][j]) reach[i][j] = 1;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (!reach[i][j]) return false;
    // A node with no edge at all cannot satisfy M^n_ii > 0 for n > 0.
    for (std::size_t i = 0; i < n; ++i) {
        bool any = false;
        for (std::size_t j = 0; j < n; ++j) any = any || m[i][j] || m[j][i];
        if (!any) return false;
    }
    return true;
}

double hull_inradius_lower_bound(const Polygon& hull) {
    if (hull.size() < 3) return 0.0;
    Vec2 centroid{};
    for (const Vec2& p : hull) centroid += p;
    centroid = centroid * (1.0 / static_cast<double>(hull.size()));
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const Vec2 a = hull[i];
        const Vec2 b = hull[(i + 1) % hull.size()];
        const Vec2 e = b - a;
        const double len = e.norm();
        if (len == 0.0) continue;
        best = std::min(best, std::fabs(e.cross(centroid - a)) / len);
    }
    return std::isfinite(best) ? best : 0.0;
}

}  // namespace

Corollary54Report check_corollary54(const IfsSystem& sys, std::uint64_t render_budget) {
    Corollary54Report rep;
    const std::size_t k = sys.size();
    for (std::size_t i = 0; i < k; ++i) {
        const auto [x, y] = word_endpoints(sys, i);
        rep.xs.push_back(x);
        rep.ys.push_back(y);
    }
    rep.adjacency.assign(k, std::vector<std::uint8_t>(k, 0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            if (proper_crossing(rep.xs[i], rep.ys[i], rep.xs[j], rep.ys[j]))
                rep.adjacency[i][j] = rep.adjacency[j][i] = 1;
    rep.irreducible = irreducible_adjacency(rep.adjacency);
    rep.verdict = rep.irreducible;
    if (rep.verdict) {
        RenderOptions ro;
        ro.budget = render_budget;
        const PointCloud cloud = render(sys, ro);
        rep.rho_witness = hull_inradius_lower_bound(convex_hull(cloud.points));
    }
    return rep;
}

namespace {
bool coordwise_less(Vec2 a, Vec2 b) { return a.x < b.x && a.y < b.y; }
}  // namespace

Lemma55Report check_lemma55(const IfsSystem& sys) {
    for (std::size_t i = 0; i < sys.size(); ++i)
        if (!strictly_positive(sys.map(i).linear))
            throw HypothesisViolated("check_lemma55: " + map_label(i) +
                                     " must have strictly positive entries");
    Lemma55Report rep;
    for (std::size_t i = 0; i < sys.size(); ++i) {
        const auto [x, y] = word_endpoints(sys, i);
        rep.xs.push_back(x);
        rep.ys.push_back(y);
    }
    rep.holds = true;
    for (std::size_t i = 0; i + 1 < sys.size() && rep.holds; ++i) {
        const std::string si = std::to_string(i + 1), sj = std::to_string(i + 2);
        if (!coordwise_less(rep.xs[i], rep.xs[i + 1])) {
            rep.holds = false;
            rep.first_violation = "x" + si + " !< x" + sj;
        } else if (!coordwise_less(rep.xs[i + 1], rep.ys[i])) {
            rep.holds = false;
            rep.first_violation = "x" + sj + " !< y" + si;
        } else if (!coordwise_less(rep.ys[i], rep.ys[i + 1])) {
            rep.holds = false;
            rep.first_violation = "y" + si + " !< y" + sj;
        }
    }
    if (rep.holds) {
        const Vec2 e{M_SQRT1_2, M_SQRT1_2};
        rep.projection_length = (rep.ys.back() - rep.xs.front()).dot(e);
    }
    return rep;
}

Lemma63Report check_lemma63(const Mat2& a1, const Mat2& a2) {
    if (a1.min_entry() < 0.0 || a2.min_entry() < 0.0)
        throw HypothesisViolated("check_lemma63: matrices must have nonnegative entries");
    if (!(svd2(a1).alpha1 < 1.0) || !(svd2(a2).alpha1 < 1.0))
        throw HypothesisViolated("check_lemma63: both matrices must be contractive");
    if (strictly_positive(a1) && strictly_positive(a2)) {
        // Interval criterion for the pair (only meaningful off the boundary).
        const double lo1 = std::min(a1.c / a1.a, a1.d / a1.b), hi1 = std::max(a1.c / a1.a, a1.d / a1.b);
        const double lo2 = std::min(a2.c / a2.a, a2.d / a2.b), hi2 = std::max(a2.c / a2.a, a2.d / a2.b);
        if (!(hi1 < lo2 || hi2 < lo1))
            throw HypothesisViolated("check_lemma63: interval criterion fails for the pair");
    }
    Lemma63Report rep;
    const Mat2 b2 = (Mat2::identity() - a2).inverse();
    rep.a1b2_minus_id = a1 * b2 - Mat2::identity();
    rep.id_minus_a1_b2 = (Mat2::identity() - a1) * b2;
    rep.margin = std::min(rep.a1b2_minus_id.min_entry(), rep.id_minus_a1_b2.min_entry());
    rep.verdict = rep.margin > 0.0;
    return rep;
}

namespace {

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 e = b - a;
    const double len2 = e.norm2();
    if (len2 == 0.0) return (p - a).norm();
    const double t = std::clamp((p - a).dot(e) / len2, 0.0, 1.0);
    return (p - (a + e * t)).norm();
}

// Certified shared point of two degenerate (point/segment) hulls.
bool degenerate_hulls_touch(const Polygon& a, const Polygon& b, double guard) {
    for (const Vec2& p : a)
        for (std::size_t i = 0; i < std::max<std::size_t>(b.size(), 1) && !b.empty(); ++i)
            if (point_segment_distance(p, b[i % b.size()], b[(i + 1) % b.size()]) <= guard)
                return true;
    for (const Vec2& p : b)
        for (std::size_t i = 0; i < std::max<std::size_t>(a.size(), 1) && !a.empty(); ++i)
            if (point_segment_distance(p, a[i % a.size()], a[(i + 1) % a.size()]) <= guard)
                return true;
    return false;
}

}  // namespace

Prop53Report check_prop53_empirical(const IfsSystem& sys, std::uint64_t render_budget) {
    RenderOptions ro;
    ro.budget = render_budget;
    const PointCloud cloud = render(sys, ro);

    const std::size_t k = sys.size();
    std::vector<Polygon> hulls(k);
    double scale = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        std::vector<Vec2> pts;
        pts.reserve(cloud.points.size());
        const AffineMap& m = sys.map(i);
        for (const Vec2& p : cloud.points) pts.push_back(m.linear * p + m.translation);
        hulls[i] = convex_hull(std::move(pts));
        for (const Vec2& p : hulls[i]) scale = std::max({scale, std::fabs(p.x), std::fabs(p.y)});
    }

    Prop53Report rep;
    // Stopping-set cloud points lie on E_i exactly (images of pi(w 1^inf)),
    // so the hulls are inner approximations of conv(E_i) already; a reported
    // intersection only needs a floating-point guard to be certified.
    // Non-intersection stays "not detected".
    rep.hull_margin = 1e-9 * scale;
    rep.adjacency.assign(k, std::vector<std::uint8_t>(k, 0));
    for (std::size_t i = 0; i < k; ++i) {
        rep.adjacency[i][i] = 1;  // conv(E_i) meets itself
        for (std::size_t j = i + 1; j < k; ++j) {
            bool touch = false;
            if (hulls[i].size() < 3 || hulls[j].size() < 3) {
                touch = degenerate_hulls_touch(hulls[i], hulls[j], rep.hull_margin);
            } else {
                const Polygon inter = convex_clip(hulls[i], hulls[j]);
                touch = inter.size() >= 3 && hull_inradius_lower_bound(inter) >= rep.hull_margin;
            }
            if (touch) rep.adjacency[i][j] = rep.adjacency[j][i] = 1;
        }
    }
    rep.irreducible = irreducible_adjacency(rep.adjacency);
    rep.verdict = rep.irreducible;
    return rep;
}

double projective_contraction_factor(const Mat2& m) {
    if (m.min_entry() < 0.0)
        throw HypothesisViolated("projective_contraction_factor: entries must be nonnegative");
    return std::fabs(m.a * m.d - m.b * m.c) /
           (m.a * m.d + m.b * m.c + 2.0 * std::sqrt(m.a * m.b * m.c * m.d));
}

ContractionReport projective_contraction(const IfsSystem& sys) {
    ContractionReport rep;
    for (std::size_t i = 0; i < sys.size(); ++i) {
        const auto n = sign_normalized(sys.map(i).linear);
        if (!n)
            throw HypothesisViolated("projective_contraction: " + map_label(i) +
                                     " is not strictly one-signed");
        rep.factors.push_back(projective_contraction_factor(*n));
    }
    rep.eta = *std::max_element(rep.factors.begin(), rep.factors.end());
    const ConeSearch cs = find_invariant_cone(sys);
    if (cs.cone) {
        const double cb = std::cos(cs.cone->beta);
        rep.c0 = 4.0 / (cb * cb);
    } else {
        rep.c0 = std::numeric_limits<double>::quiet_NaN();
    }
    return rep;
}

namespace {

// Image of the cone boundary directions under each (sign-normalized) map:
// pairwise-disjoint angle intervals certify the separation condition for
// this cone. Positive maps act monotonically on quadrant directions, so the
// interval endpoints are the boundary-ray images.
struct ConeImageSeparation {
    bool ok = true;
    std::string witness;
    double min_gap = std::numeric_limits<double>::infinity();
};

ConeImageSeparation cone_image_separation(const IfsSystem& sys, const Cone& cone) {
    ConeImageSeparation out;
    const double lo_phi = M_PI / 4.0 - cone.beta / 2.0;
    const double hi_phi = M_PI / 4.0 + cone.beta / 2.0;
    const Vec2 vlo{std::cos(lo_phi), std::sin(lo_phi)};
    const Vec2 vhi{std::cos(hi_phi), std::sin(hi_phi)};
    std::vector<std::pair<double, double>> intervals;
    for (std::size_t i = 0; i < sys.size(); ++i) {
        const Mat2 m = *sign_normalized(sys.map(i).linear);
        const double a0 = quadrant_angle(m * vlo);
        const double a1 = quadrant_angle(m * vhi);
        intervals.emplace_back(std::min(a0, a1), std::max(a0, a1));
    }
    for (std::size_t i = 0; i < sys.size(); ++i)
        for (std::size_t j = i + 1; j < sys.size(); ++j) {
            const auto& [alo, ahi] = intervals[i];
            const auto& [blo, bhi] = intervals[j];
            const double gap = std::max(blo - ahi, alo - bhi);
            out.min_gap = std::min(out.min_gap, gap);
            if (!(gap > 0.0)) {
                out.ok = false;
                out.witness = "cone images of maps " + std::to_string(i + 1) + " and " +
                              std::to_string(j + 1) + " overlap";
                return out;
            }
        }
    return out;
}

IfsSystem subsystem(const IfsSystem& sys, const std::vector<std::size_t>& idx) {
    std::vector<AffineMap> maps;
    for (std::size_t i : idx) maps.push_back(sys.map(i));
    return IfsSystem::from_maps(std::move(maps));
}

// Conjugate the pair (i, j) by a translation so the first map fixes the
// origin; the second map's translation then decides the a2-positivity
// hypothesis of the pair criterion.
std::optional<Vec2> pair_normal_form_translation(const IfsSystem& sys, std::size_t i,
                                                 std::size_t j) {
    const Mat2 id = Mat2::identity();
    const Vec2 tau = (id - sys.map(i).linear).inverse() * sys.map(i).translation;
    const Vec2 a2 = sys.map(j).translation - (id - sys.map(j).linear) * tau;
    if (a2.x > 0.0 && a2.y > 0.0) return a2;
    return std::nullopt;
}

void attempt_corollary54(const IfsSystem& sys, std::vector<std::size_t> subset,
                         std::vector<ProjectionAttempt>& attempts) {
    ProjectionAttempt att;
    att.criterion = "corollary54";
    att.subset = std::move(subset);
    att.applicable = true;
    const IfsSystem& target = sys;
    if (att.subset.empty()) {
        const Corollary54Report r = check_corollary54(target);
        att.passed = r.verdict;
        att.witness_value = r.rho_witness;
        att.detail = r.verdict ? "segment-crossing adjacency irreducible" : "adjacency not irreducible";
    } else {
        const Corollary54Report r = check_corollary54(subsystem(sys, att.subset));
        att.passed = r.verdict;
        att.witness_value = r.rho_witness;
        att.detail = r.verdict ? "segment-crossing adjacency irreducible" : "adjacency not irreducible";
    }
    attempts.push_back(std::move(att));
}

void attempt_lemma55(const IfsSystem& sys, std::vector<std::size_t> subset,
                     std::vector<ProjectionAttempt>& attempts) {
    ProjectionAttempt att;
    att.criterion = "lemma55";
    att.subset = std::move(subset);
    try {
        const Lemma55Report r =
            att.subset.empty() ? check_lemma55(sys) : check_lemma55(subsystem(sys, att.subset));
        att.applicable = true;
        att.passed = r.holds;
        att.witness_value = r.projection_length;
        att.detail = r.holds ? "order chain holds" : r.first_violation;
    } catch (const HypothesisViolated& e) {
        att.applicable = false;
        att.detail = e.what();
    }
    attempts.push_back(std::move(att));
}

void attempt_lemma63(const IfsSystem& sys, std::size_t i, std::size_t j,
                     std::vector<ProjectionAttempt>& attempts) {
    ProjectionAttempt att;
    att.criterion = "lemma63";
    att.subset = {i, j};
    try {
        const auto a2 = pair_normal_form_translation(sys, i, j);
        if (!a2) {
            att.applicable = false;
            att.detail = "pair translation not strictly positive in normal form";
        } else {
            const Lemma63Report r = check_lemma63(sys.map(i).linear, sys.map(j).linear);
            att.applicable = true;
            att.passed = r.verdict;
            att.witness_value = r.margin;
            att.detail = r.verdict ? "both test matrices strictly positive"
                                   : "test matrix has a nonpositive entry";
        }
    } catch (const HypothesisViolated& e) {
        att.applicable = false;
        att.detail = e.what();
    }
    attempts.push_back(std::move(att));
}

std::string subset_label(const std::vector<std::size_t>& subset) {
    if (subset.empty()) return "full system";
    std::string s = "J={";
    for (std::size_t k = 0; k < subset.size(); ++k)
        s += (k ? "," : "") + std::to_string(subset[k] + 1);
    return s + "}";
}

}  // namespace

const char* to_string(KakeyaReport::Verdict v) {
    switch (v) {
        case KakeyaReport::Verdict::Yes: return "yes";
        case KakeyaReport::Verdict::No: return "no";
        default: return "unknown";
    }
}

KakeyaReport full_report(const IfsSystem& sys) {
    KakeyaReport rep;
    const ConeSearch cs = find_invariant_cone(sys);
    rep.cone = cs.cone;
    rep.cone_witness = cs.witness;

    if (!cs.cone) {
        rep.k1a = rep.k1b = rep.k1c = false;
        // Zero or mixed-sign entries defeat the positive-matrix cone
        // construction outright; a degenerate aperture stays inconclusive.
        const bool positivity_failure =
            cs.witness && cs.witness->reason.find("zero or mixed-sign") != std::string::npos;
        rep.verdict = positivity_failure ? KakeyaReport::Verdict::No : KakeyaReport::Verdict::Unknown;
        return rep;
    }

    rep.k1a = rep.k1b = true;  // certified for maps and transposes by construction
    rep.x1 = check_x1(sys);
    const ConeImageSeparation sep = cone_image_separation(sys, *cs.cone);
    rep.k1c = sep.ok;
    rep.k1c_witness = sep.ok ? "" : sep.witness;

    // Projection criteria: the algebraic pair test first (strongest, stable),
    // then segment crossings and the order chain, full system before pairs.
    for (std::size_t i = 0; i < sys.size(); ++i)
        for (std::size_t j = 0; j < sys.size(); ++j)
            if (i != j) attempt_lemma63(sys, i, j, rep.projection);
    attempt_corollary54(sys, {}, rep.projection);
    attempt_lemma55(sys, {}, rep.projection);
    for (std::size_t i = 0; i < sys.size(); ++i)
        for (std::size_t j = 0; j < sys.size(); ++j) {
            if (i == j) continue;
            if (i < j) attempt_corollary54(sys, {i, j}, rep.projection);  // order-insensitive
            attempt_lemma55(sys, {i, j}, rep.projection);
        }

    for (const ProjectionAttempt& att : rep.projection)
        if (att.applicable && att.passed) {
            rep.certified_by = att.criterion + " (" + subset_label(att.subset) + ")";
            break;
        }

    rep.verdict = (rep.k1a && rep.k1b && rep.k1c && !rep.certified_by.empty())
                      ? KakeyaReport::Verdict::Yes
                      : KakeyaReport::Verdict::Unknown;
    return rep;
}

}  // namespace kakeya
