#include "kakeya/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kakeya/errors.hpp"
#include "kakeya/rng.hpp"

namespace kakeya {

void PointCloud::bounding_box(Vec2& lo, Vec2& hi) const {
    lo = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    hi = {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const Vec2& p : points) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }
}

namespace {

Vec2 first_map_fixed_point(const IfsSystem& sys) {
    const AffineMap& m = sys.map(0);
    return (Mat2::identity() - m.linear).inverse() * m.translation;
}

// Streaming split-DFS: emit one representative point per maximal word with
// alpha1(A_w) <= threshold. emit == nullptr counts only.
void split_rec(const IfsSystem& sys, const ScaledMat2& prod, Vec2 offset, double log_threshold,
               Vec2 seed_point, std::uint64_t budget, std::uint64_t& leaves, double& max_log_alpha,
               std::vector<Vec2>* emit) {
    const SingularData sd = svd2(prod);
    if (sd.log_alpha1 <= log_threshold) {
        if (++leaves > budget)
            throw BudgetExceeded("stopping-set render over budget", budget, leaves);
        max_log_alpha = std::max(max_log_alpha, sd.log_alpha1);
        if (emit) emit->push_back(offset + prod.apply(seed_point));
        return;
    }
    for (std::uint32_t i = 0; i < sys.size(); ++i)
        split_rec(sys, prod.times(sys.map(i).linear), offset + prod.apply(sys.map(i).translation),
                  log_threshold, seed_point, budget, leaves, max_log_alpha, emit);
}

std::uint64_t count_leaves(const IfsSystem& sys, double threshold, std::uint64_t budget) {
    std::uint64_t leaves = 0;
    double ml = 0.0;
    split_rec(sys, ScaledMat2::identity(), Vec2{}, std::log(threshold), Vec2{}, budget, leaves, ml,
              nullptr);
    return leaves;
}

}  // namespace

PointCloud render(const IfsSystem& sys, const RenderOptions& opts) {
    if (opts.budget < 1) throw ValidationError("render: budget must be >= 1");
    PointCloud cloud;
    cloud.mode = opts.mode;
    cloud.seed = opts.seed;
    const double radius = sys.invariant_set_radius();

    if (opts.mode == RenderMode::ChaosGame) {
        Vec2 x = first_map_fixed_point(sys);
        cloud.points.reserve(opts.budget);
        const std::uint64_t total = opts.budget + static_cast<std::uint64_t>(opts.burn_in);
        for (std::uint64_t k = 0; k < total; ++k) {
            const auto i = static_cast<std::uint32_t>(splitmix64(opts.seed, k) % sys.size());
            const AffineMap& m = sys.map(i);
            x = m.linear * x + m.translation;
            if (k >= static_cast<std::uint64_t>(opts.burn_in)) cloud.points.push_back(x);
        }
        // Start point is in E, so iterates stay in E up to roundoff; keep the
        // conservative geometric bound anyway.
        cloud.diameter_bound = 2.0 * radius * std::pow(sys.alpha_bar(), opts.burn_in);
        return cloud;
    }

    const double diam_scale = (opts.diameter_scale > 0.0) ? opts.diameter_scale : 2.0 * radius;
    double threshold = opts.stop_threshold;
    if (!(threshold > 0.0)) {
        // Coarsest power of 3/4 whose leaf count still fits the budget.
        threshold = 0.75;
        for (;;) {
            const double next = threshold * 0.75;
            std::uint64_t leaves = 0;
            try {
                leaves = count_leaves(sys, next, opts.budget);
            } catch (const BudgetExceeded&) {
                break;
            }
            threshold = next;
            if (leaves * sys.size() > opts.budget) break;  // next step would overshoot
            if (threshold < 1e-14) break;
        }
    }

    std::uint64_t leaves = 0;
    double max_log_alpha = -std::numeric_limits<double>::infinity();
    split_rec(sys, ScaledMat2::identity(), Vec2{}, std::log(threshold), first_map_fixed_point(sys),
              opts.budget, leaves, max_log_alpha, &cloud.points);
    cloud.diameter_bound = diam_scale * std::exp(max_log_alpha);
    return cloud;
}

double Raster::area() const {
    std::uint64_t n = 0;
    for (std::uint8_t v : occupied) n += v;
    return static_cast<double>(n) * cell_size * cell_size;
}

std::uint64_t Raster::boundary_cells() const {
    std::uint64_t n = 0;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            if (!at(x, y)) continue;
            if (x == 0 || y == 0 || x == width - 1 || y == height - 1 || !at(x - 1, y) ||
                !at(x + 1, y) || !at(x, y - 1) || !at(x, y + 1))
                ++n;
        }
    return n;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1-D squared distance transform (lower envelope of parabolas).
void dt1d(std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
          std::vector<double>& z, int n) {
    int k = 0;
    v[0] = 0;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = 1; q < n; ++q) {
        if (f[q] == kInf) continue;
        if (f[v[0]] == kInf) {
            v[0] = q;
            z[1] = kInf;
            continue;
        }
        double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
        while (s <= z[k]) {
            --k;
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = q - v[k];
        d[q] = (f[v[k]] == kInf) ? kInf : dq * dq + f[v[k]];
    }
}

struct Grid {
    Vec2 origin;
    double h;
    int w, hgt;
};

Grid grid_for(const PointCloud& cloud, double delta, double h) {
    Vec2 lo, hi;
    cloud.bounding_box(lo, hi);
    const double margin = delta + 2.0 * h;
    lo = lo - Vec2{margin, margin};
    hi = hi + Vec2{margin, margin};
    Grid g;
    g.h = h;
    g.origin = {std::floor(lo.x / h) * h, std::floor(lo.y / h) * h};
    g.w = static_cast<int>(std::ceil((hi.x - g.origin.x) / h)) + 1;
    g.hgt = static_cast<int>(std::ceil((hi.y - g.origin.y) / h)) + 1;
    return g;
}

Raster dilate(const PointCloud& cloud, double delta, double h) {
    if (!(h > 0.0) || h > delta / 4.0)
        throw ResolutionError("neighborhood_area: need cell size h <= delta/4, got h = " +
                              std::to_string(h) + ", delta = " + std::to_string(delta));
    const Grid g = grid_for(cloud, delta, h);
    Raster r;
    r.origin = g.origin;
    r.cell_size = h;
    r.width = g.w;
    r.height = g.hgt;
    r.occupied.assign(static_cast<std::size_t>(g.w) * g.hgt, 0);

    const double disk_cells = M_PI * (delta / h + 1.0) * (delta / h + 1.0);
    const double stamp_cost = static_cast<double>(cloud.points.size()) * disk_cells;
    const double edt_cost = 4.0 * static_cast<double>(g.w) * g.hgt;

    if (stamp_cost <= edt_cost) {
        // Disk stamping: exact center-to-point distances.
        const double d2 = delta * delta;
        for (const Vec2& p : cloud.points) {
            const int cx0 = static_cast<int>(std::floor((p.x - delta - g.origin.x) / h));
            const int cx1 = static_cast<int>(std::ceil((p.x + delta - g.origin.x) / h));
            const int cy0 = static_cast<int>(std::floor((p.y - delta - g.origin.y) / h));
            const int cy1 = static_cast<int>(std::ceil((p.y + delta - g.origin.y) / h));
            for (int iy = std::max(0, cy0); iy <= std::min(g.hgt - 1, cy1); ++iy) {
                const double cy = g.origin.y + (iy + 0.5) * h;
                for (int ix = std::max(0, cx0); ix <= std::min(g.w - 1, cx1); ++ix) {
                    const double cx = g.origin.x + (ix + 0.5) * h;
                    const double dx = cx - p.x, dy = cy - p.y;
                    if (dx * dx + dy * dy <= d2) r.set(ix, iy);
                }
            }
        }
        return r;
    }

    // Exact EDT from seed cells; the point-to-cell-center snap adds at most
    // h/sqrt2, absorbed into the reported error bound.
    std::vector<double> f(static_cast<std::size_t>(g.w) * g.hgt, kInf);
    for (const Vec2& p : cloud.points) {
        const int ix = static_cast<int>(std::floor((p.x - g.origin.x) / h));
        const int iy = static_cast<int>(std::floor((p.y - g.origin.y) / h));
        if (ix >= 0 && ix < g.w && iy >= 0 && iy < g.hgt)
            f[static_cast<std::size_t>(iy) * g.w + ix] = 0.0;
    }
    const int n_max = std::max(g.w, g.hgt);
    std::vector<double> col(n_max), dcol(n_max), z(n_max + 1);
    std::vector<int> v(n_max);
    for (int x = 0; x < g.w; ++x) {  // columns
        for (int y = 0; y < g.hgt; ++y) col[y] = f[static_cast<std::size_t>(y) * g.w + x];
        dt1d(col, dcol, v, z, g.hgt);
        for (int y = 0; y < g.hgt; ++y) f[static_cast<std::size_t>(y) * g.w + x] = dcol[y];
    }
    const double thr = (delta / h) * (delta / h);
    for (int y = 0; y < g.hgt; ++y) {  // rows
        for (int x = 0; x < g.w; ++x) col[x] = f[static_cast<std::size_t>(y) * g.w + x];
        dt1d(col, dcol, v, z, g.w);
        for (int x = 0; x < g.w; ++x)
            if (dcol[x] <= thr) r.set(x, y);
    }
    return r;
}

}  // namespace

Raster neighborhood_raster(const PointCloud& cloud, double delta, double h) {
    if (cloud.points.empty()) throw ValidationError("neighborhood_raster: empty cloud");
    return dilate(cloud, delta, h);
}

AreaMeasurement neighborhood_area(const PointCloud& cloud, double delta, double h) {
    const Raster r = neighborhood_raster(cloud, delta, h);
    AreaMeasurement m;
    m.area = r.area();
    m.error_bound = 3.0 * static_cast<double>(r.boundary_cells()) * h * h;
    return m;
}

BoxDimEstimate box_dimension(const IfsSystem& sys, const BoxDimOptions& opts) {
    std::vector<double> deltas = opts.deltas;
    BoxDimEstimate est;

    // Certified diameter upper bound from a probe cloud: every point of the
    // invariant set is within diameter_bound of the cloud.
    RenderOptions coarse;
    coarse.budget = 1u << 14;
    const PointCloud probe = render(sys, coarse);
    Vec2 plo, phi;
    probe.bounding_box(plo, phi);
    const double diam_ub = (phi - plo).norm() + 2.0 * probe.diameter_bound;
    if (!((phi - plo).norm() > 0.0)) throw ValidationError("box_dimension: degenerate attractor");

    if (deltas.empty()) {
        double d = (phi - plo).norm() / 8.0;
        for (int k = 0; k < 12; ++k, d *= M_SQRT1_2) deltas.push_back(d);
    }
    std::sort(deltas.rbegin(), deltas.rend());
    if (!std::is_sorted(deltas.rbegin(), deltas.rend()))
        throw ValidationError("box_dimension: deltas must be strictly decreasing");

    for (double d : deltas) {
        RenderOptions ro;
        ro.mode = RenderMode::StoppingSet;
        ro.budget = opts.render_budget;
        // diameter_bound = diam_ub * alpha1 <= delta/8.
        ro.diameter_scale = diam_ub;
        ro.stop_threshold = d / (8.0 * diam_ub);
        PointCloud cloud;
        try {
            cloud = render(sys, ro);
        } catch (const BudgetExceeded&) {
            if (static_cast<int>(est.deltas.size()) >= opts.min_deltas) {
                est.truncated = true;
                break;
            }
            throw;
        }
        const AreaMeasurement a = neighborhood_area(cloud, d, d / opts.h_ratio);
        est.deltas.push_back(d);
        est.areas.push_back(a.area);
    }

    const int skip = std::min<int>(opts.exclude_largest,
                                   static_cast<int>(est.deltas.size()) - opts.min_deltas);
    const int n0 = std::max(0, skip);
    const int n = static_cast<int>(est.deltas.size()) - n0;
    if (n < 3) throw ValidationError("box_dimension: need at least 3 usable deltas");

    double sx = 0, sy = 0;
    for (int k = 0; k < n; ++k) {
        sx += std::log(est.deltas[n0 + k]);
        sy += std::log(est.areas[n0 + k]);
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, ss_res = 0;
    for (int k = 0; k < n; ++k) {
        const double dx = std::log(est.deltas[n0 + k]) - mx;
        const double dy = std::log(est.areas[n0 + k]) - my;
        sxx += dx * dx;
        sxy += dx * dy;
    }
    est.slope = sxy / sxx;
    est.intercept = my - est.slope * mx;
    for (int k = 0; k < n; ++k) {
        const double resid = std::log(est.areas[n0 + k]) -
                             (est.intercept + est.slope * std::log(est.deltas[n0 + k]));
        ss_res += resid * resid;
    }
    est.stderr_slope = (n > 2) ? std::sqrt(ss_res / (n - 2) / sxx) : 0.0;
    est.dim_estimate = 2.0 - est.slope;
    return est;
}

double kakeya_bound(std::uint64_t m_count, double alpha1, double alpha2, double tau) {
    if (m_count < 1) throw HypothesisViolated("kakeya_bound: M >= 1 required");
    if (!(alpha1 > alpha2) || !(alpha2 > 0.0))
        throw HypothesisViolated("kakeya_bound: need alpha1 > alpha2 > 0");
    if (!(tau >= 0.0) || tau > 1.0) throw HypothesisViolated("kakeya_bound: need 0 <= tau <= 1");
    const double ratio = 2.0 * M_PI * alpha1 / alpha2;
    if (!(ratio > 1.0)) throw HypothesisViolated("kakeya_bound: need 2 pi alpha1/alpha2 > 1");
    return static_cast<double>(m_count) * tau * tau * alpha1 * alpha2 /
           (2.0 * M_SQRT2 * M_PI * std::log(ratio));
}

std::vector<Vec2> Rect::corners() const {
    const Vec2 u = long_axis * (0.5 * len1);
    const Vec2 v = long_axis.perp() * (0.5 * len2);
    return {center - u - v, center + u - v, center + u + v, center - u + v};
}

bool Rect::contains(Vec2 p) const {
    const Vec2 d = p - center;
    return std::fabs(d.dot(long_axis)) <= 0.5 * len1 &&
           std::fabs(d.dot(long_axis.perp())) <= 0.5 * len2;
}

double rect_angle(const Rect& a, const Rect& b) {
    const double cosang = std::fabs(a.long_axis.dot(b.long_axis));
    return std::acos(std::min(1.0, cosang));
}

double rect_overlap_bound(double alpha1, double alpha2, double angle) {
    if (!(alpha1 > alpha2) || !(alpha2 > 0.0) || !(angle > 0.0))
        throw HypothesisViolated("rect_overlap_bound: need alpha1 > alpha2 > 0 and angle > 0");
    return M_SQRT2 * M_PI * alpha2 * alpha2 / (alpha2 / alpha1 + angle);
}

KakeyaVerification verify_kakeya_estimate(const std::vector<Rect>& rects, double tau, double h) {
    if (rects.empty()) throw HypothesisViolated("verify_kakeya_estimate: no rectangles");
    const double a1 = rects.front().len1, a2 = rects.front().len2;
    if (!(a1 > a2) || !(a2 > 0.0))
        throw HypothesisViolated("verify_kakeya_estimate: need len1 > len2 > 0");
    for (std::size_t i = 0; i < rects.size(); ++i) {
        if (std::fabs(rects[i].len1 - a1) > 1e-9 * a1 || std::fabs(rects[i].len2 - a2) > 1e-9 * a2)
            throw HypothesisViolated("verify_kakeya_estimate: rectangle " + std::to_string(i + 1) +
                                     " size differs");
        if (std::fabs(rects[i].long_axis.norm() - 1.0) > 1e-9)
            throw HypothesisViolated("verify_kakeya_estimate: axis not unit");
    }
    const double min_angle = a2 / a1;
    for (std::size_t i = 0; i < rects.size(); ++i)
        for (std::size_t j = i + 1; j < rects.size(); ++j)
            if (rect_angle(rects[i], rects[j]) < min_angle - 1e-12)
                throw HypothesisViolated("verify_kakeya_estimate: rectangles " +
                                         std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                                         " violate the angle hypothesis");

    if (!(h > 0.0)) h = a2 / 32.0;
    Vec2 lo{kInf, kInf}, hi{-kInf, -kInf};
    for (const Rect& r : rects)
        for (const Vec2& c : r.corners()) {
            lo.x = std::min(lo.x, c.x);
            lo.y = std::min(lo.y, c.y);
            hi.x = std::max(hi.x, c.x);
            hi.y = std::max(hi.y, c.y);
        }
    Raster raster;
    raster.origin = {lo.x - 2.0 * h, lo.y - 2.0 * h};
    raster.cell_size = h;
    raster.width = static_cast<int>(std::ceil((hi.x - raster.origin.x) / h)) + 2;
    raster.height = static_cast<int>(std::ceil((hi.y - raster.origin.y) / h)) + 2;
    raster.occupied.assign(static_cast<std::size_t>(raster.width) * raster.height, 0);

    KakeyaVerification out;
    out.min_cover = kInf;
    const double per_rect_margin = 3.0 * (a1 + a2) * h;
    for (const Rect& r : rects) {
        std::uint64_t cells = 0;
        // Scan only the rectangle's bounding box.
        Vec2 rlo{kInf, kInf}, rhi{-kInf, -kInf};
        for (const Vec2& c : r.corners()) {
            rlo.x = std::min(rlo.x, c.x);
            rlo.y = std::min(rlo.y, c.y);
            rhi.x = std::max(rhi.x, c.x);
            rhi.y = std::max(rhi.y, c.y);
        }
        const int x0 = std::max(0, static_cast<int>((rlo.x - raster.origin.x) / h) - 1);
        const int x1 = std::min(raster.width - 1, static_cast<int>((rhi.x - raster.origin.x) / h) + 1);
        const int y0 = std::max(0, static_cast<int>((rlo.y - raster.origin.y) / h) - 1);
        const int y1 = std::min(raster.height - 1, static_cast<int>((rhi.y - raster.origin.y) / h) + 1);
        for (int iy = y0; iy <= y1; ++iy)
            for (int ix = x0; ix <= x1; ++ix) {
                const Vec2 c{raster.origin.x + (ix + 0.5) * h, raster.origin.y + (iy + 0.5) * h};
                if (r.contains(c)) {
                    raster.set(ix, iy);
                    ++cells;
                }
            }
        const double cover = static_cast<double>(cells) * h * h;
        out.min_cover = std::min(out.min_cover, cover);
        if (cover + per_rect_margin < tau * a1 * a2)
            throw HypothesisViolated("verify_kakeya_estimate: covered area below tau a1 a2");
    }

    out.bound = kakeya_bound(rects.size(), a1, a2, tau);
    out.measured = raster.area();
    out.margin = static_cast<double>(rects.size()) * per_rect_margin;
    out.pass = out.measured >= out.bound - out.margin;
    return out;
}

double polygon_area(const Polygon& poly) {
    double s = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % n];
        s += p.cross(q);
    }
    return 0.5 * std::fabs(s);
}

namespace {
double signed_area2(const Polygon& poly) {
    double s = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) s += poly[i].cross(poly[(i + 1) % poly.size()]);
    return s;
}
}  // namespace

Polygon convex_clip(const Polygon& subject, const Polygon& clip) {
    if (subject.empty() || clip.size() < 3) return {};
    Polygon clip_ccw = clip;
    if (signed_area2(clip_ccw) < 0.0) std::reverse(clip_ccw.begin(), clip_ccw.end());

    Polygon out = subject;
    const std::size_t m = clip_ccw.size();
    for (std::size_t e = 0; e < m && !out.empty(); ++e) {
        const Vec2 a = clip_ccw[e];
        const Vec2 b = clip_ccw[(e + 1) % m];
        const Vec2 dir = b - a;
        Polygon in;
        in.swap(out);
        const auto inside = [&](Vec2 p) { return dir.cross(p - a) >= 0.0; };
        for (std::size_t i = 0; i < in.size(); ++i) {
            const Vec2 p = in[i];
            const Vec2 q = in[(i + 1) % in.size()];
            const bool pin = inside(p), qin = inside(q);
            if (pin) out.push_back(p);
            if (pin != qin) {
                const double dp = dir.cross(p - a);
                const double dq = dir.cross(q - a);
                const double t = dp / (dp - dq);
                out.push_back(p + (q - p) * t);
            }
        }
    }
    return out;
}

Polygon convex_hull(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    const std::size_t n = pts.size();
    if (n < 3) return pts;
    Polygon hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {  // lower
        while (k >= 2 && (hull[k - 1] - hull[k - 2]).cross(pts[i] - hull[k - 2]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {  // upper
        while (k >= t && (hull[k - 1] - hull[k - 2]).cross(pts[i] - hull[k - 2]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

}  // namespace kakeya
