#include "kakeya/ifs.hpp"

#include <cmath>
#include <string>

#include "json.hpp"

namespace kakeya {

namespace {
constexpr double kContractivityMargin = 1e-9;
}

IfsSystem IfsSystem::from_maps(std::vector<AffineMap> maps) {
    if (maps.size() < 2)
        throw ValidationError("IfsSystem: need at least 2 maps, got " + std::to_string(maps.size()));
    IfsSystem sys;
    sys.maps_ = std::move(maps);
    sys.singular_.reserve(sys.maps_.size());
    sys.alpha_bar_ = 0.0;
    sys.alpha_lower_ = 1.0;
    double max_translation = 0.0;
    for (std::size_t i = 0; i < sys.maps_.size(); ++i) {
        const AffineMap& m = sys.maps_[i];
        if (!m.linear.is_finite() || !m.translation.is_finite())
            throw ValidationError("map " + std::to_string(i + 1) + ": non-finite entries",
                                  static_cast<long>(i));
        if (m.linear.det() == 0.0)
            throw ValidationError("map " + std::to_string(i + 1) + ": linear part not invertible",
                                  static_cast<long>(i));
        SingularData sd;
        try {
            sd = svd2(m.linear);
        } catch (const SingularInput& e) {
            throw ValidationError("map " + std::to_string(i + 1) + ": " + e.what(),
                                  static_cast<long>(i));
        }
        if (!(sd.alpha1 < 1.0 - kContractivityMargin))
            throw ValidationError("map " + std::to_string(i + 1) + ": not strictly contractive (norm " +
                                      std::to_string(sd.alpha1) + ")",
                                  static_cast<long>(i));
        sys.alpha_bar_ = std::max(sys.alpha_bar_, sd.alpha1);
        sys.alpha_lower_ = std::min(sys.alpha_lower_, sd.alpha2);
        max_translation = std::max(max_translation, m.translation.norm());
        sys.singular_.push_back(sd);
    }
    sys.radius_ = max_translation / (1.0 - sys.alpha_bar_);
    return sys;
}

IfsSystem load_system(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config parse failed: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("maps") || !doc["maps"].is_array())
        throw ParseError("config must be an object with a \"maps\" array");

    std::vector<AffineMap> maps;
    std::size_t idx = 0;
    for (const auto& entry : doc["maps"]) {
        ++idx;
        const std::string where = "maps[" + std::to_string(idx) + "]";
        if (!entry.is_object() || !entry.contains("A") || !entry.contains("t"))
            throw ParseError(where + ": expected {\"A\":[[a,b],[c,d]],\"t\":[x,y]}");
        const auto& A = entry["A"];
        const auto& t = entry["t"];
        if (!A.is_array() || A.size() != 2 || !A[0].is_array() || A[0].size() != 2 ||
            !A[1].is_array() || A[1].size() != 2)
            throw ParseError(where + ".A: expected a 2x2 array of numbers");
        if (!t.is_array() || t.size() != 2) throw ParseError(where + ".t: expected [x, y]");
        try {
            AffineMap m;
            m.linear = {A[0][0].get<double>(), A[0][1].get<double>(), A[1][0].get<double>(),
                        A[1][1].get<double>()};
            m.translation = {t[0].get<double>(), t[1].get<double>()};
            maps.push_back(m);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(where + ": " + e.what());
        }
    }
    return IfsSystem::from_maps(std::move(maps));
}

Cylinder cylinder(const IfsSystem& sys, const Word& w) {
    Cylinder c{Word{}, ScaledMat2::identity(), Vec2{}, svd2(Mat2::identity())};
    for (std::uint32_t i : w.symbols) {
        if (i >= sys.size())
            throw ValidationError("cylinder: symbol " + std::to_string(i + 1) + " out of range");
        c.offset += c.product.apply(sys.map(i).translation);
        c.product = c.product.times(sys.map(i).linear);
    }
    c.word = w;
    c.singular = svd2(c.product);
    return c;
}

std::pair<Vec2, Vec2> word_endpoints(const IfsSystem& sys, std::size_t i) {
    if (i >= sys.size()) throw ValidationError("word_endpoints: map index out of range");
    const Mat2 id = Mat2::identity();
    const AffineMap& first = sys.map(0);
    const AffineMap& last = sys.map(sys.size() - 1);
    // Id - A is invertible since alpha1(A) < 1.
    const Vec2 fix_first = (id - first.linear).inverse() * first.translation;
    const Vec2 fix_last = (id - last.linear).inverse() * last.translation;
    const AffineMap& m = sys.map(i);
    const Vec2 x = m.translation + m.linear * fix_first;
    const Vec2 y = m.translation + m.linear * fix_last;
    return {x, y};
}

std::uint64_t level_count_checked(std::size_t kappa, int n, std::uint64_t budget) {
    if (n < 0) throw ValidationError("level must be >= 0");
    std::uint64_t count = 1;
    for (int k = 0; k < n; ++k) {
        if (count > budget / kappa + 1)
            throw BudgetExceeded("level enumeration over budget", budget,
                                 count * static_cast<std::uint64_t>(kappa));
        count *= kappa;
    }
    if (count > budget) throw BudgetExceeded("level enumeration over budget", budget, count);
    return count;
}

namespace {

void stopping_rec(const IfsSystem& sys, double t, double log_r, Cylinder& node,
                  std::uint64_t budget, std::uint64_t& visited, std::vector<Cylinder>& out) {
    if (++visited > budget) throw BudgetExceeded("stopping_set over budget", budget, visited);
    if (log_phi(node.singular, t) <= log_r) {
        out.push_back(node);
        return;
    }
    const ScaledMat2 parent_product = node.product;
    const Vec2 parent_offset = node.offset;
    for (std::uint32_t i = 0; i < sys.size(); ++i) {
        node.word.symbols.push_back(i);
        node.product = parent_product.times(sys.map(i).linear);
        node.offset = parent_offset + parent_product.apply(sys.map(i).translation);
        node.singular = svd2(node.product);
        stopping_rec(sys, t, log_r, node, budget, visited, out);
        node.word.symbols.pop_back();
    }
    node.product = parent_product;
    node.offset = parent_offset;
}

}  // namespace

std::vector<Cylinder> stopping_set(const IfsSystem& sys, double t, double r, std::uint64_t budget) {
    if (!(r > 0.0)) throw ValidationError("stopping_set: r must be positive");
    if (t < 0.0) throw ValidationError("stopping_set: t must be >= 0");
    std::vector<Cylinder> out;
    Cylinder root{Word{}, ScaledMat2::identity(), Vec2{}, svd2(Mat2::identity())};
    std::uint64_t visited = 0;
    stopping_rec(sys, t, std::log(r), root, budget, visited, out);
    return out;
}

}  // namespace kakeya
