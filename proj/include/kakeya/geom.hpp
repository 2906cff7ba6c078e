#pragma once

// Attractor rendering, rasterized delta-neighborhood areas, Minkowski
// dimension regression, and the Kakeya rectangle estimate with its
// rasterization oracle.

#include <cstdint>
#include <vector>

#include "kakeya/ifs.hpp"
#include "kakeya/mat2.hpp"

namespace kakeya {

enum class RenderMode { ChaosGame, StoppingSet };

struct RenderOptions {
    RenderMode mode = RenderMode::StoppingSet;
    std::uint64_t budget = 1u << 16;  // point count target (chaos game: exact; stopping set: cap)
    std::uint64_t seed = 0;           // chaos game only
    // Stopping-set split threshold on alpha1(A_w); <= 0 derives the coarsest
    // threshold whose leaf count stays within budget.
    double stop_threshold = 0.0;
    // Certified bound on diam(E) used for diameter_bound = scale * alpha1;
    // <= 0 falls back to the generic 2 max|a_i| / (1 - alpha_bar).
    double diameter_scale = 0.0;
    int burn_in = 100;
};

struct PointCloud {
    std::vector<Vec2> points;
    RenderMode mode = RenderMode::StoppingSet;
    std::uint64_t seed = 0;
    // Hausdorff distance bound between the cloud and the invariant set.
    double diameter_bound = 0.0;

    void bounding_box(Vec2& lo, Vec2& hi) const;
};

PointCloud render(const IfsSystem& sys, const RenderOptions& opts);

// Occupancy grid; cell (ix, iy) covers origin + [ix, ix+1) x [iy, iy+1) * h.
struct Raster {
    Vec2 origin;
    double cell_size = 1.0;
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> occupied;  // row-major, width * height

    bool at(int ix, int iy) const { return occupied[static_cast<std::size_t>(iy) * width + ix] != 0; }
    void set(int ix, int iy, bool v = true) {
        occupied[static_cast<std::size_t>(iy) * width + ix] = v ? 1 : 0;
    }
    double area() const;
    // Count of occupied cells bordering an unoccupied cell (4-neighborhood)
    // or the frame; boundary length is roughly this times cell_size.
    std::uint64_t boundary_cells() const;
};

struct AreaMeasurement {
    double area = 0.0;
    double error_bound = 0.0;  // two-sided rasterization slack
};

// L^2 of the delta-neighborhood of the cloud, measured on a grid of cell
// size h (h <= delta/4 required). Exact Euclidean distance transform or
// disk stamping, whichever is cheaper.
AreaMeasurement neighborhood_area(const PointCloud& cloud, double delta, double h);

// Occupancy raster of the same dilation, for image output.
Raster neighborhood_raster(const PointCloud& cloud, double delta, double h);

struct BoxDimOptions {
    std::vector<double> deltas;            // empty: auto, 12 values at ratio 2^-1/2
    std::uint64_t render_budget = 1u << 23;  // per-delta leaf cap
    int exclude_largest = 2;               // transient-regime prefix dropped from the fit
    double h_ratio = 8.0;                  // h = delta / h_ratio
    int min_deltas = 5;
};

struct BoxDimEstimate {
    std::vector<double> deltas;
    std::vector<double> areas;
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    double dim_estimate = 0.0;  // 2 - slope
    bool truncated = false;     // delta list was cut to respect the render budget
};

BoxDimEstimate box_dimension(const IfsSystem& sys, const BoxDimOptions& opts = {});

// Proposition-style lower bound M tau^2 a1 a2 / (2 sqrt2 pi log(2 pi a1/a2)).
double kakeya_bound(std::uint64_t m_count, double alpha1, double alpha2, double tau);

// Rectangle by center, unit long-axis direction and side lengths len1 > len2.
struct Rect {
    Vec2 center;
    Vec2 long_axis;  // unit
    double len1 = 1.0;
    double len2 = 0.5;

    std::vector<Vec2> corners() const;
    bool contains(Vec2 p) const;
    double area() const { return len1 * len2; }
};

// Smaller angle between the long sides, in [0, pi/2].
double rect_angle(const Rect& a, const Rect& b);

// Overlap bound sqrt2 pi a2^2 / (a2/a1 + angle) from the estimate's proof;
// valid when the angle hypothesis angle >= a2/a1 holds.
double rect_overlap_bound(double alpha1, double alpha2, double angle);

struct KakeyaVerification {
    double bound = 0.0;       // analytic lower bound for L^2(F)
    double measured = 0.0;    // rasterized L^2(F)
    double margin = 0.0;      // rasterization slack subtracted before comparing
    bool pass = false;
    double min_cover = 0.0;   // min_i measured L^2(F cap R_i)
};

// F is the union of the rectangles. Checks the size/angle/cover hypotheses
// (HypothesisViolated otherwise) and compares the rasterized area with the
// analytic bound. h <= alpha2/8 recommended; pass h = 0 for alpha2/32.
KakeyaVerification verify_kakeya_estimate(const std::vector<Rect>& rects, double tau, double h = 0.0);

// Convex polygon helpers (exact predicates on doubles, CCW orientation).
using Polygon = std::vector<Vec2>;
double polygon_area(const Polygon& poly);
Polygon convex_clip(const Polygon& subject, const Polygon& clip);
Polygon convex_hull(std::vector<Vec2> pts);

}  // namespace kakeya
