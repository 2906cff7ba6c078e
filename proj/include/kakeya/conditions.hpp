#pragma once

// Kakeya-type hypothesis checks: invariant-cone search (cone invariance for
// the maps and their transposes, separation of cone images), the interval
// separation criterion for positive matrices, the projection-condition
// criteria (segment crossings + irreducibility, coordinatewise order chain,
// algebraic pair test), and the projective contraction factor.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kakeya/ifs.hpp"

namespace kakeya {

// Symmetric double cone X(theta, beta) = { x != 0 : cos(beta/2) < |theta.x|/|x| }.
struct Cone {
    Vec2 theta;
    double beta = 0.0;    // in (0, pi/2)
    double margin = 0.0;  // pi/2 - beta
    int block_level = 1;  // products of this word length were certified

    // Supermultiplicativity constant cos^-2(beta), valid along word lengths
    // that are multiples of block_level.
    double d_constant() const;
    bool contains(Vec2 x) const;
};

struct ConeWitness {
    std::size_t map_index = 0;
    std::string reason;
};

struct ConeSearch {
    std::optional<Cone> cone;
    std::optional<ConeWitness> witness;
};

// Canonical cone around theta = (1,1)/sqrt2 for strictly positive (or, after
// multiplication by -1, strictly negative) matrices: beta is twice the
// largest angle between theta and any boundary-ray image under the level-m
// block products and their transposes, plus a 1e-9 interior margin.
ConeSearch find_invariant_cone(const IfsSystem& sys, int block_level = 1,
                               std::uint64_t budget = kDefaultCylinderBudget);

struct X1Report {
    std::vector<std::pair<double, double>> intervals;  // [w/u, z/v], orientation-normalized
    bool disjoint = false;
    std::optional<std::pair<std::size_t, std::size_t>> offending;  // 0-based pair
};

// Pairwise-disjoint interval criterion for positive matrices; implies the
// cone-image separation (K1c). Throws HypothesisViolated unless every map is
// strictly one-signed.
X1Report check_x1(const IfsSystem& sys);

struct Corollary54Report {
    std::vector<Vec2> xs, ys;                 // per-map segment endpoints
    std::vector<std::vector<std::uint8_t>> adjacency;
    bool irreducible = false;
    bool verdict = false;
    double rho_witness = 0.0;  // inradius lower bound of conv(E) from a rendered hull
};

Corollary54Report check_corollary54(const IfsSystem& sys, std::uint64_t render_budget = 1u << 15);

struct Lemma55Report {
    std::vector<Vec2> xs, ys;
    bool holds = false;
    std::string first_violation;   // e.g. "x1 !< x2"
    double projection_length = 0.0;  // (y_kappa - x_1) . e for e = (1,1)/sqrt2
};

// Strict coordinatewise chain x_i < x_{i+1} < y_i < y_{i+1}. Requires all
// linear parts strictly positive (literally; a globally negated map moves
// points differently, so no sign normalization here).
Lemma55Report check_lemma55(const IfsSystem& sys);

struct Lemma63Report {
    bool verdict = false;
    Mat2 a1b2_minus_id;
    Mat2 id_minus_a1_b2;
    double margin = 0.0;  // min entry across both test matrices
};

// Algebraic pair criterion: with B2 = (Id - A2)^-1, both A1 B2 - Id and
// (Id - A1) B2 strictly positive makes {A1, A2 + a2} stably of Kakeya type
// for every strictly positive a2. Requires positive contractive inputs
// satisfying the interval criterion.
Lemma63Report check_lemma63(const Mat2& a1, const Mat2& a2);

struct Prop53Report {
    std::vector<std::vector<std::uint8_t>> adjacency;
    bool irreducible = false;
    bool verdict = false;       // flagged approximate: inner hulls only certify intersections
    double hull_margin = 0.0;   // required overlap depth (rendering diameter bound)
};

Prop53Report check_prop53_empirical(const IfsSystem& sys, std::uint64_t render_budget = 1u << 15);

struct ContractionReport {
    std::vector<double> factors;  // per-map |ad-bc| / (ad+bc+2 sqrt(abcd))
    double eta = 0.0;             // max factor
    double c0 = 0.0;              // angle-vs-log-tangent metric equivalence constant
};

// Exact projective contraction factor of each positive map on positive-slope
// lines, evaluated at the maximizer s0 = (1/2) log(ac/bd).
ContractionReport projective_contraction(const IfsSystem& sys);

// The closed-form factor for a single matrix with nonnegative entries (no
// contractivity requirement; rank-one inputs give 0).
double projective_contraction_factor(const Mat2& m);

struct ProjectionAttempt {
    std::string criterion;              // "corollary54" | "lemma55" | "lemma63"
    std::vector<std::size_t> subset;    // 0-based map indices, empty = full system
    bool applicable = false;
    bool passed = false;
    double witness_value = 0.0;
    std::string detail;
};

struct KakeyaReport {
    enum class Verdict { Yes, No, Unknown };
    Verdict verdict = Verdict::Unknown;
    std::optional<Cone> cone;
    std::optional<ConeWitness> cone_witness;
    bool k1a = false;
    bool k1b = false;
    bool k1c = false;
    std::string k1c_witness;
    std::optional<X1Report> x1;
    std::vector<ProjectionAttempt> projection;
    std::string certified_by;  // criterion that certified the projection condition
};

const char* to_string(KakeyaReport::Verdict v);

// Runs the cone finder, the interval criterion, and the projection criteria
// (full system and every 2-subset). Verdict "yes" needs the cone conditions
// plus one certified projection criterion; "no" is only claimed when strict
// one-signedness fails (the cone construction for this family is impossible);
// anything else stays "unknown".
KakeyaReport full_report(const IfsSystem& sys);

}  // namespace kakeya
