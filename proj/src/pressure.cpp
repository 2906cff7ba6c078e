#include "kakeya/pressure.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "kakeya/errors.hpp"
#include "kakeya/rng.hpp"

namespace kakeya {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Streaming log-sum-exp with Kahan-compensated mantissa accumulation.
struct LogSumExp {
    double max_log = -kInf;
    double sum = 0.0;
    double comp = 0.0;

    void add_scaled(double s) {  // accumulate exp(s - max_log), compensated
        const double y = s - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    void push(double x) {
        if (x <= max_log) {
            add_scaled(std::exp(x - max_log));
            return;
        }
        if (max_log == -kInf) {
            max_log = x;
            sum = 1.0;
            comp = 0.0;
            return;
        }
        const double scale = std::exp(max_log - x);
        sum *= scale;
        comp *= scale;
        max_log = x;
        add_scaled(1.0);
    }
    void merge(const LogSumExp& o) {  // fixed-order merge keeps determinism
        if (o.max_log == -kInf) return;
        if (max_log == -kInf) {
            *this = o;
            return;
        }
        if (o.max_log <= max_log) {
            add_scaled(o.sum * std::exp(o.max_log - max_log));
        } else {
            const double scale = std::exp(max_log - o.max_log);
            sum = o.sum + sum * scale;
            comp *= scale;
            max_log = o.max_log;
        }
    }
    double value() const { return max_log + std::log(sum); }
};

void level_lse_rec(const IfsSystem& sys, const ScaledMat2& prod, int remaining, double t,
                   LogSumExp& acc) {
    if (remaining == 0) {
        acc.push(log_phi(svd2(prod), t));
        return;
    }
    for (std::uint32_t i = 0; i < sys.size(); ++i)
        level_lse_rec(sys, prod.times(sys.map(i).linear), remaining - 1, t, acc);
}

// Parallel level sum over a fixed partition tree: partitions are the words
// of a fixed prefix depth in lexicographic order, merged in that order, so
// the result is bit-identical for any thread count.
double parallel_level_log_sum(const IfsSystem& sys, double t, int n, int threads,
                              std::uint64_t budget) {
    level_count_checked(sys.size(), n, budget);
    const std::size_t kappa = sys.size();
    int prefix_depth = 0;
    std::uint64_t partitions = 1;
    while (prefix_depth < n && partitions < 64) {
        partitions *= kappa;
        ++prefix_depth;
    }

    std::vector<LogSumExp> partial(partitions);
    std::atomic<std::uint64_t> next{0};
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(partitions)));

    const auto run = [&]() {
        for (;;) {
            const std::uint64_t p = next.fetch_add(1);
            if (p >= partitions) return;
            ScaledMat2 prod = ScaledMat2::identity();
            std::uint64_t rest = p;
            // digits of p in base kappa, most significant first
            std::uint64_t pow = 1;
            for (int k = 1; k < prefix_depth; ++k) pow *= kappa;
            for (int k = 0; k < prefix_depth; ++k) {
                prod = prod.times(sys.map(rest / pow).linear);
                rest %= pow;
                pow /= kappa;
            }
            level_lse_rec(sys, prod, n - prefix_depth, t, partial[p]);
        }
    };
    if (workers == 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(run);
        for (auto& th : pool) th.join();
    }

    LogSumExp total;
    for (const LogSumExp& p : partial) total.merge(p);
    return total.value();
}

}  // namespace

PressureBound pressure_bounds(const IfsSystem& sys, double t, int level, double d_constant,
                              int threads, std::uint64_t budget) {
    if (level < 1) throw ValidationError("pressure_bounds: level must be >= 1");
    if (t < 0.0) throw ValidationError("pressure_bounds: t must be >= 0");
    if (!(d_constant >= 1.0)) throw ValidationError("pressure_bounds: d_constant must be >= 1");
    PressureBound pb;
    pb.t = t;
    pb.level = level;
    pb.d_constant = d_constant;
    pb.upper = parallel_level_log_sum(sys, t, level, threads, budget) / level;
    pb.lower = pb.upper - std::log(d_constant) / level;
    return pb;
}

std::optional<double> exact_multiplicative_d(const IfsSystem& sys) {
    bool conformal = true;
    for (std::size_t i = 0; i < sys.size() && conformal; ++i) {
        const SingularData& s = sys.map_singular(i);
        conformal = (s.alpha1 - s.alpha2) <= 1e-12 * s.alpha1;
    }
    if (conformal) return 1.0;

    bool diag = true, first_dominant = true, second_dominant = true;
    for (std::size_t i = 0; i < sys.size() && diag; ++i) {
        const Mat2& m = sys.map(i).linear;
        diag = (m.b == 0.0 && m.c == 0.0);
        first_dominant = first_dominant && std::fabs(m.a) >= std::fabs(m.d);
        second_dominant = second_dominant && std::fabs(m.d) >= std::fabs(m.a);
    }
    if (diag && (first_dominant || second_dominant)) return 1.0;
    return std::nullopt;
}

namespace {

// Sign-normalized linear parts: singular values are unchanged and the
// normalized maps preserve the standard quadrant cone.
std::vector<Mat2> one_signed_maps(const IfsSystem& sys) {
    std::vector<Mat2> maps;
    for (std::size_t i = 0; i < sys.size(); ++i) {
        const Mat2& m = sys.map(i).linear;
        if (m.min_entry() > 0.0)
            maps.push_back(m);
        else if (m.a < 0.0 && m.b < 0.0 && m.c < 0.0 && m.d < 0.0)
            maps.push_back(m * -1.0);
        else
            throw HypothesisViolated("pressure_ratio_bounds: maps must be strictly one-signed");
    }
    return maps;
}

// All products of the given word length (exponent-rescaled).
std::vector<ScaledMat2> all_products(const std::vector<Mat2>& maps, int len) {
    std::vector<ScaledMat2> out;
    struct Frame {
        ScaledMat2 prod;
        int rem;
    };
    std::vector<Frame> stack{{ScaledMat2::identity(), len}};
    while (!stack.empty()) {
        const Frame f = stack.back();
        stack.pop_back();
        if (f.rem == 0) {
            out.push_back(f.prod);
            continue;
        }
        for (std::size_t i = maps.size(); i-- > 0;)
            stack.push_back({f.prod.times(maps[i]), f.rem - 1});
    }
    return out;
}

PressureInterval ratio_bounds_impl(const std::vector<ScaledMat2>& words_m,
                                   const std::vector<ScaledMat2>& words_m1, const Cone& cone,
                                   double t, int grid, int threads) {
    const double e = (t <= 1.0) ? t : 2.0 - t;
    const double p = (t <= 1.0) ? 0.0 : t - 1.0;
    const double phi_lo = M_PI / 4.0 - cone.beta / 2.0;
    const double dphi = cone.beta / (grid - 1);
    std::vector<double> ratio(static_cast<std::size_t>(grid));

    const auto log_s = [&](const std::vector<ScaledMat2>& words, Vec2 u) {
        LogSumExp lse;
        for (const ScaledMat2& w : words) {
            const double log_norm =
                std::log((w.mantissa * u).norm()) + static_cast<double>(w.exponent) * M_LN2;
            lse.push(p * w.log_abs_det + e * log_norm);
        }
        return lse.value();
    };

    std::atomic<int> next{0};
    const auto run = [&]() {
        for (;;) {
            const int g = next.fetch_add(1);
            if (g >= grid) return;
            const double phi = phi_lo + g * dphi;
            const Vec2 u{std::cos(phi), std::sin(phi)};
            ratio[static_cast<std::size_t>(g)] = log_s(words_m1, u) - log_s(words_m, u);
        }
    };
    const int workers = std::max(1, std::min(threads, grid));
    if (workers == 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(run);
        for (auto& th : pool) th.join();
    }

    double rmin = kInf, rmax = -kInf;
    for (double r : ratio) {
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
    }
    // |d/dphi log S| <= e / cos(beta) via |A_w u| >= cos(beta) alpha1(A_w);
    // every direction is within dphi/2 of a grid point.
    const double slack = (2.0 * std::max(e, 0.0) / std::cos(cone.beta)) * (dphi / 2.0);
    return {rmin - slack, rmax + slack};
}

// Exact pressure for t > 2: phi^t = |det|^{t/2} is multiplicative.
PressureInterval det_pressure(const IfsSystem& sys, double t) {
    LogSumExp lse;
    for (std::size_t i = 0; i < sys.size(); ++i) {
        const SingularData& s = sys.map_singular(i);
        lse.push(0.5 * t * (s.log_alpha1 + s.log_alpha2));
    }
    const double v = lse.value();
    return {v, v};
}

}  // namespace

PressureInterval pressure_ratio_bounds(const IfsSystem& sys, double t, const Cone& cone, int depth,
                                       int grid, int threads) {
    if (t < 0.0) throw ValidationError("pressure_ratio_bounds: t must be >= 0");
    if (t > 2.0) return det_pressure(sys, t);
    if (depth < 1 || grid < 2) throw ValidationError("pressure_ratio_bounds: bad depth/grid");
    const std::vector<Mat2> maps = one_signed_maps(sys);
    const std::vector<ScaledMat2> words_m = all_products(maps, depth);
    const std::vector<ScaledMat2> words_m1 = all_products(maps, depth + 1);
    return ratio_bounds_impl(words_m, words_m1, cone, t, grid, threads);
}

namespace {

struct BoundProvider {
    enum class Kind { LevelSum, Ratio, UpperOnly } kind = Kind::LevelSum;
    // level-sum state
    double d_constant = 1.0;
    int level = 8;
    // ratio state
    std::optional<Cone> cone;
    int depth = 6;
    int grid = 513;
};

}  // namespace

DimensionBracket dimension_bracket(const IfsSystem& sys, const BracketOptions& opts) {
    if (!(opts.tol > 0.0)) throw ValidationError("dimension_bracket: tol must be positive");

    const double slope_floor = -std::log(sys.alpha_bar());  // lower bound on |P'|
    BoundProvider prov;
    DimensionBracket out;
    out.tol = opts.tol;

    if (opts.d_constant) {
        prov.kind = BoundProvider::Kind::LevelSum;
        prov.d_constant = *opts.d_constant;
        out.method = "level-sum";
    } else if (const auto d1 = exact_multiplicative_d(sys)) {
        prov.kind = BoundProvider::Kind::LevelSum;
        prov.d_constant = *d1;
        out.method = "exact-multiplicative";
    } else if (const ConeSearch cs = find_invariant_cone(sys); cs.cone) {
        prov.kind = BoundProvider::Kind::Ratio;
        prov.cone = cs.cone;
        out.method = "perron-ratio";
        out.d_constant = cs.cone->d_constant();
    } else {
        prov.kind = BoundProvider::Kind::UpperOnly;
        prov.d_constant = kInf;
        out.method = "level-sum";
        out.lower_certified = false;
    }
    if (prov.kind == BoundProvider::Kind::LevelSum) {
        out.d_constant = prov.d_constant;
        // Escalate the level until the D-induced slack permits the tolerance.
        while (std::log(prov.d_constant) / (prov.level * slope_floor) > opts.tol / 2.0 &&
               prov.level < opts.max_level)
            prov.level *= 2;
        prov.level = std::min(prov.level, opts.max_level);
    }

    // Cached word products for the ratio provider, rebuilt per escalation round.
    std::vector<Mat2> one_signed;
    std::vector<ScaledMat2> words_m, words_m1;
    if (prov.kind == BoundProvider::Kind::Ratio) {
        one_signed = one_signed_maps(sys);
        const double arc = prov.cone->beta;
        const double target_log_slack = 0.25 * opts.tol * slope_floor;
        const int want_grid =
            static_cast<int>(std::ceil(arc / (std::cos(prov.cone->beta) * target_log_slack))) + 1;
        prov.grid = std::clamp(want_grid, 513, opts.max_grid);
    }
    const auto rebuild_words = [&]() {
        words_m = all_products(one_signed, prov.depth);
        words_m1 = all_products(one_signed, prov.depth + 1);
    };
    if (prov.kind == BoundProvider::Kind::Ratio) rebuild_words();

    const auto bounds_at = [&](double t) -> PressureInterval {
        switch (prov.kind) {
            case BoundProvider::Kind::Ratio:
                if (t > 2.0) return det_pressure(sys, t);
                return ratio_bounds_impl(words_m, words_m1, *prov.cone, t, prov.grid, opts.threads);
            case BoundProvider::Kind::UpperOnly: {
                const PressureBound pb =
                    pressure_bounds(sys, t, prov.level, 1.0, opts.threads, opts.max_cylinders);
                return {-kInf, pb.upper};
            }
            default: {
                const PressureBound pb = pressure_bounds(sys, t, prov.level, prov.d_constant,
                                                         opts.threads, opts.max_cylinders);
                return {pb.lower, pb.upper};
            }
        }
    };

    // Anchors: P(0) = log kappa > 0 certifies t_lo = 0; extend the right end
    // by doubling until the upper bound is nonpositive.
    double t_lo = 0.0, t_hi = 4.0;
    for (int k = 0; k < 8 && bounds_at(t_hi).hi > 0.0; ++k) t_hi *= 2.0;
    if (bounds_at(t_hi).hi > 0.0)
        throw ValidationError("dimension_bracket: upper bound stays positive (non-contractive?)");

    const auto bisect = [&](double target_resolution) {
        // Largest t with certified lower >= 0.
        double lo = t_lo, hi = t_hi;
        while (hi - lo > target_resolution) {
            const double mid = 0.5 * (lo + hi);
            (bounds_at(mid).lo >= 0.0 ? lo : hi) = mid;
        }
        t_lo = lo;
        // Smallest tested t with certified upper <= 0.
        lo = t_lo;
        hi = t_hi;
        while (hi - lo > target_resolution) {
            const double mid = 0.5 * (lo + hi);
            (bounds_at(mid).hi <= 0.0 ? hi : lo) = mid;
        }
        t_hi = hi;
    };

    const double resolution = std::max(opts.tol / 8.0, 1e-14);
    if (prov.kind == BoundProvider::Kind::Ratio) {
        // Deepen the test function until the certified width fits the
        // tolerance or the caps bite; the grid is already tolerance-sized.
        for (;;) {
            bisect(resolution);
            if (t_hi - t_lo <= opts.tol) break;
            const bool can_deepen =
                prov.depth + 1 <= opts.max_depth &&
                std::pow(double(sys.size()), prov.depth + 2) <= double(opts.max_cylinders);
            if (!can_deepen) break;
            prov.depth += 1;
            rebuild_words();
        }
        out.level = prov.depth;
        out.grid = prov.grid;
    } else {
        bisect(resolution);
        if (prov.kind == BoundProvider::Kind::UpperOnly) t_lo = 0.0;
        out.level = prov.level;
    }

    out.t_lo = t_lo;
    out.t_hi = t_hi;
    out.tolerance_met = (t_hi - t_lo <= opts.tol) && out.lower_certified;
    return out;
}

PerturbationBounds perturbation_bounds(const IfsSystem& sys, double eps, double d_prime) {
    double delta = kInf;       // min coefficient after sign normalization
    double min_det = kInf;     // min |det|
    double max_det = 0.0;
    for (std::size_t i = 0; i < sys.size(); ++i) {
        const Mat2& raw = sys.map(i).linear;
        Mat2 m = raw;
        if (raw.max_abs() > 0.0 && raw.a < 0.0 && raw.b < 0.0 && raw.c < 0.0 && raw.d < 0.0)
            m = raw * -1.0;
        if (!(m.min_entry() > 0.0))
            throw HypothesisViolated("perturbation_bounds: map " + std::to_string(i + 1) +
                                     " is not strictly one-signed");
        delta = std::min(delta, m.min_entry());
        min_det = std::min(min_det, std::fabs(m.det()));
        max_det = std::max(max_det, std::fabs(m.det()));
    }
    if (!(eps > 0.0) || !(eps < delta))
        throw HypothesisViolated("perturbation_bounds: need 0 < eps < min coefficient (" +
                                 std::to_string(delta) + ")");
    if (!(max_det < d_prime) || !(d_prime < 1.0))
        throw HypothesisViolated("perturbation_bounds: need max |det| < d_prime < 1");
    if (!(max_det + 8.0 * eps < d_prime))
        throw HypothesisViolated("perturbation_bounds: need max |det| + 8 eps < d_prime");

    PerturbationBounds pb;
    pb.eps = eps;
    pb.eps1 = eps / delta;
    pb.eps2 = 8.0 * eps / min_det;
    if (!(pb.eps2 < 1.0))
        throw HypothesisViolated("perturbation_bounds: 8 eps / min |det| must stay below 1");
    pb.t_cap = std::max(2.0 * std::log(double(sys.size())) / std::fabs(std::log(d_prime)), 2.0);
    pb.lambda1 = (1.0 - pb.eps1) / (1.0 + pb.eps1) * std::pow(1.0 - pb.eps2, pb.t_cap / 2.0);
    pb.lambda2 = (1.0 + pb.eps1) / (1.0 - pb.eps1) * std::pow(1.0 + pb.eps2, pb.t_cap / 2.0);
    pb.shift_lo = -std::log(pb.lambda2);
    pb.shift_hi = -std::log(pb.lambda1);
    return pb;
}

namespace {

// Word with lexicographic index `idx` at the given level.
Word word_from_index(std::uint64_t idx, int level, std::size_t kappa) {
    Word w;
    w.symbols.resize(static_cast<std::size_t>(level));
    for (int k = level - 1; k >= 0; --k) {
        w.symbols[static_cast<std::size_t>(k)] = static_cast<std::uint32_t>(idx % kappa);
        idx /= kappa;
    }
    return w;
}

}  // namespace

GibbsReport gibbs_report(const IfsSystem& sys, double t, int level, std::uint64_t samples,
                         std::uint64_t seed, std::uint64_t budget) {
    if (level < 2) throw ValidationError("gibbs_report: level must be >= 2");
    if (t < 0.0) throw ValidationError("gibbs_report: t must be >= 0");
    if (samples < 2) throw ValidationError("gibbs_report: need at least 2 samples");

    GibbsReport rep;
    rep.t = t;
    rep.level = level;
    rep.samples = samples;
    rep.seed = seed;

    const std::size_t kappa = sys.size();
    double table_size = 1.0;
    for (int k = 0; k < level; ++k) table_size *= double(kappa);
    rep.table_mode = table_size <= double(std::min<std::uint64_t>(budget, 1u << 20));

    std::vector<double> cum;       // cumulative weights for table sampling
    std::vector<double> la1, la2;  // per-word singular logs
    if (rep.table_mode) {
        const auto n_words = static_cast<std::size_t>(table_size);
        std::vector<double> logphi(n_words);
        la1.resize(n_words);
        la2.resize(n_words);
        std::size_t idx = 0;
        LogSumExp lse;
        enumerate_level(sys, level, budget, [&](const Cylinder& c) {
            const double lp = log_phi(c.singular, t);
            logphi[idx] = lp;
            la1[idx] = c.singular.log_alpha1;
            la2[idx] = c.singular.log_alpha2;
            lse.push(lp);
            ++idx;
        });
        const double log_total = lse.value();
        cum.resize(n_words);
        double acc = 0.0;
        for (std::size_t k = 0; k < n_words; ++k) {
            acc += std::exp(logphi[k] - log_total);
            cum[k] = acc;
        }
        if (n_words <= 4096) {
            rep.weights.resize(n_words);
            double prev = 0.0;
            for (std::size_t k = 0; k < n_words; ++k) {
                rep.weights[k] = cum[k] - prev;
                prev = cum[k];
            }
        }
    }

    double mean1 = 0.0, mean2 = 0.0, m2_1 = 0.0, m2_2 = 0.0;
    double worst_log_ratio = kInf;
    std::uint64_t counter = 0;

    for (std::uint64_t s = 0; s < samples; ++s) {
        Word w;
        if (rep.table_mode) {
            const double u = uniform01(seed, counter++);
            const auto it = std::lower_bound(cum.begin(), cum.end(), u);
            const auto idx = static_cast<std::uint64_t>(it - cum.begin());
            w = word_from_index(std::min<std::uint64_t>(idx, cum.size() - 1), level, kappa);
        } else {
            // Sequential symbol-by-symbol growth with per-step renormalization.
            ScaledMat2 prod = ScaledMat2::identity();
            double parent_logphi = 0.0;
            for (int k = 0; k < level; ++k) {
                std::vector<double> cw(kappa);
                double acc = 0.0;
                for (std::size_t i = 0; i < kappa; ++i) {
                    const ScaledMat2 child = prod.times(sys.map(i).linear);
                    acc += std::exp(log_phi(svd2(child), t) - parent_logphi);
                    cw[i] = acc;
                }
                const double u = uniform01(seed, counter++) * acc;
                std::size_t pick = kappa - 1;
                for (std::size_t i = 0; i < kappa; ++i)
                    if (u <= cw[i]) {
                        pick = i;
                        break;
                    }
                w.symbols.push_back(static_cast<std::uint32_t>(pick));
                prod = prod.times(sys.map(pick).linear);
                parent_logphi = log_phi(svd2(prod), t);
            }
        }

        double l1, l2;
        if (rep.table_mode) {
            std::uint64_t idx = 0;
            for (std::uint32_t sym : w.symbols) idx = idx * kappa + sym;
            l1 = la1[idx];
            l2 = la2[idx];
        } else {
            const SingularData sd = cylinder(sys, w).singular;
            l1 = sd.log_alpha1;
            l2 = sd.log_alpha2;
        }
        const double x1 = l1 / level, x2 = l2 / level;
        const double d1 = x1 - mean1, d2 = x2 - mean2;
        mean1 += d1 / double(s + 1);
        mean2 += d2 / double(s + 1);
        m2_1 += d1 * (x1 - mean1);
        m2_2 += d2 * (x2 - mean2);

        // Quasi-multiplicativity at a random prefix split.
        const auto split =
            1 + static_cast<std::size_t>(splitmix64(seed, counter++) % std::uint64_t(level - 1));
        Word head, tail;
        head.symbols.assign(w.symbols.begin(), w.symbols.begin() + split);
        tail.symbols.assign(w.symbols.begin() + split, w.symbols.end());
        const double whole = log_phi(cylinder(sys, w).singular, t);
        const double parts = log_phi(cylinder(sys, head).singular, t) +
                             log_phi(cylinder(sys, tail).singular, t);
        worst_log_ratio = std::min(worst_log_ratio, whole - parts);
    }

    rep.lyapunov1 = std::exp(mean1);
    rep.lyapunov2 = std::exp(mean2);
    rep.stderr1 = std::sqrt(m2_1 / double(samples - 1) / double(samples));
    rep.stderr2 = std::sqrt(m2_2 / double(samples - 1) / double(samples));
    const double denom = mean1 + (t - 1.0) * mean2;
    rep.gamma1 = mean1 / denom;
    rep.gamma2 = mean2 / denom;
    rep.quasi_mult_worst = std::exp(worst_log_ratio);
    return rep;
}

}  // namespace kakeya
