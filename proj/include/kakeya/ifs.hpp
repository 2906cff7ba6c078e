#pragma once

// Affine-IFS data model: symbol words, validated systems, cylinder maps,
// depth-first enumeration with prefix-product reuse, stopping sets.

#include <compare>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "kakeya/mat2.hpp"

namespace kakeya {

// Finite symbol sequence over the alphabet {0, .., kappa-1} (0-based in
// code, printed 1-based in diagnostics).
struct Word {
    std::vector<std::uint32_t> symbols;

    Word() = default;
    explicit Word(std::vector<std::uint32_t> s) : symbols(std::move(s)) {}

    std::size_t length() const { return symbols.size(); }
    bool empty() const { return symbols.empty(); }

    // i^- : drop the last symbol.
    Word parent() const {
        Word w = *this;
        if (!w.symbols.empty()) w.symbols.pop_back();
        return w;
    }

    // Juxtaposition ij.
    Word concat(const Word& o) const {
        Word w = *this;
        w.symbols.insert(w.symbols.end(), o.symbols.begin(), o.symbols.end());
        return w;
    }

    bool is_prefix_of(const Word& o) const {
        if (length() > o.length()) return false;
        for (std::size_t k = 0; k < length(); ++k)
            if (symbols[k] != o.symbols[k]) return false;
        return true;
    }

    // Common beginning of the two words.
    static Word common_prefix(const Word& u, const Word& v) {
        Word w;
        const std::size_t n = std::min(u.length(), v.length());
        for (std::size_t k = 0; k < n && u.symbols[k] == v.symbols[k]; ++k)
            w.symbols.push_back(u.symbols[k]);
        return w;
    }

    auto operator<=>(const Word&) const = default;
};

struct AffineMap {
    Mat2 linear;
    Vec2 translation;
};

// Validated ordered collection of contractive invertible affine maps.
class IfsSystem {
  public:
    // Throws ValidationError (with the offending map index) unless
    // kappa >= 2, every |det| > 0 and every operator norm < 1 - 1e-9.
    static IfsSystem from_maps(std::vector<AffineMap> maps);

    std::size_t size() const { return maps_.size(); }
    const std::vector<AffineMap>& maps() const { return maps_; }
    const AffineMap& map(std::size_t i) const { return maps_[i]; }
    const SingularData& map_singular(std::size_t i) const { return singular_[i]; }

    double alpha_bar() const { return alpha_bar_; }      // max_i alpha1(A_i)
    double alpha_lower() const { return alpha_lower_; }  // min_i alpha2(A_i)

    // max_i |a_i| / (1 - alpha_bar): every point of the invariant set lies
    // in the closed ball of this radius around the origin.
    double invariant_set_radius() const { return radius_; }

  private:
    IfsSystem() = default;
    std::vector<AffineMap> maps_;
    std::vector<SingularData> singular_;
    double alpha_bar_ = 0.0;
    double alpha_lower_ = 0.0;
    double radius_ = 0.0;
};

// Composed cylinder map x -> A_w x + a_w together with its singular data.
struct Cylinder {
    Word word;
    ScaledMat2 product;   // A_w
    Vec2 offset;          // a_w = sum_n A_{w|n-1} a_{w_n}
    SingularData singular;
};

// Parse + validate the JSON config {"maps":[{"A":[[a,b],[c,d]],"t":[x,y]},...]}.
// Map order defines the symbol indexing.
IfsSystem load_system(std::string_view json_text);

Cylinder cylinder(const IfsSystem& sys, const Word& w);

// x_i = pi(i 1^inf), y_i = pi(i kappa^inf), geometric series in closed form.
std::pair<Vec2, Vec2> word_endpoints(const IfsSystem& sys, std::size_t i);

inline constexpr std::uint64_t kDefaultCylinderBudget = 1ull << 26;

// kappa^n if it fits the budget, otherwise throws BudgetExceeded.
std::uint64_t level_count_checked(std::size_t kappa, int n, std::uint64_t budget);

namespace detail {

template <class Visitor>
void enumerate_rec(const IfsSystem& sys, int remaining, Cylinder& node, Visitor&& visit) {
    if (remaining == 0) {
        visit(static_cast<const Cylinder&>(node));
        return;
    }
    const ScaledMat2 parent_product = node.product;
    const Vec2 parent_offset = node.offset;
    for (std::uint32_t i = 0; i < sys.size(); ++i) {
        node.word.symbols.push_back(i);
        node.product = parent_product.times(sys.map(i).linear);
        node.offset = parent_offset + parent_product.apply(sys.map(i).translation);
        node.singular = svd2(node.product);
        enumerate_rec(sys, remaining - 1, node, visit);
        node.word.symbols.pop_back();
    }
    node.product = parent_product;
    node.offset = parent_offset;
}

}  // namespace detail

// Visits every cylinder of the subtree rooted at `prefix` whose word extends
// it by exactly `depth` symbols, depth-first in lexicographic order, one
// matrix multiply per node. The Cylinder reference passed to the visitor is
// reused between calls; copy it if it must outlive the visit.
template <class Visitor>
void enumerate_subtree(const IfsSystem& sys, const Cylinder& prefix, int depth, std::uint64_t budget,
                       Visitor&& visit) {
    level_count_checked(sys.size(), depth, budget);
    Cylinder node = prefix;
    detail::enumerate_rec(sys, depth, node, visit);
}

// All kappa^n cylinders of level n, lexicographic.
template <class Visitor>
void enumerate_level(const IfsSystem& sys, int n, std::uint64_t budget, Visitor&& visit) {
    Cylinder root{Word{}, ScaledMat2::identity(), Vec2{}, svd2(Mat2::identity())};
    enumerate_subtree(sys, root, n, budget, std::forward<Visitor>(visit));
}

// Maximal incomparable word set with log phi^t(A_w) <= log r < log phi^t(A_w-),
// convention phi^t(A_empty) = 1 (so r >= 1 yields the empty word alone).
std::vector<Cylinder> stopping_set(const IfsSystem& sys, double t, double r,
                                   std::uint64_t budget = kDefaultCylinderBudget);

}  // namespace kakeya
