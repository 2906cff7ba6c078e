#include "kakeya/fixtures.hpp"

#include <cstdio>

#include "kakeya/errors.hpp"

namespace kakeya {
namespace fixtures {

IfsSystem edgar(double r, double eps, Vec2 a1, Vec2 a2) {
    return IfsSystem::from_maps({{Mat2{r, r + eps, eps, r}, a1}, {Mat2{r, eps, r + eps, r}, a2}});
}

IfsSystem pair64(Vec2 a2) {
    return IfsSystem::from_maps({{Mat2{0.35, 0.40, 0.30, 0.35}, {0.0, 0.0}},
                                 {Mat2{0.40, 0.45, 0.45, 0.50}, a2}});
}

IfsSystem family65(std::size_t kappa, Vec2 a2) {
    if (kappa < 3) throw ValidationError("family65: kappa must be >= 3");
    std::vector<AffineMap> maps{{Mat2{0.35, 0.40, 0.30, 0.35}, {0.0, 0.0}},
                                {Mat2{0.40, 0.45, 0.45, 0.50}, a2}};
    for (std::size_t j = 3; j <= kappa; ++j) {
        const double dj = static_cast<double>(j);
        maps.push_back({Mat2{0.5, 0.5, 1.0 / (3.0 * dj - 1.0), 1.0 / (3.0 * dj)},
                        {0.5 * (dj - 2.0), 0.25 * (dj - 2.0)}});
    }
    return IfsSystem::from_maps(std::move(maps));
}

IfsSystem unit_interval() {
    return IfsSystem::from_maps({{Mat2::diagonal(0.5, 0.5), {0.0, 0.0}},
                                 {Mat2::diagonal(0.5, 0.5), {0.5, 0.0}}});
}

IfsSystem corner_squares() {
    std::vector<AffineMap> maps;
    for (double ty : {0.0, 0.75})
        for (double tx : {0.0, 0.75})
            maps.push_back({Mat2::diagonal(0.25, 0.25), {tx, ty}});
    return IfsSystem::from_maps(std::move(maps));
}

std::vector<Description> catalog() {
    return {
        {"edgar", "--r R --eps E [--a1 x,y --a2 x,y]",
         "two-map family A1=[[r,r+e],[e,r]], A2=A1^T; defaults a1=(-0.3,-0.3), a2=(0.3,0.3)"},
        {"pair64", "[--a2 x,y]", "positive pair with the algebraic projection certificate; a1=0"},
        {"family65", "--kappa K [--a2 x,y]",
         "pair64 plus maps [[1/2,1/2],[1/(3j-1),1/(3j)]] for j=3..kappa"},
        {"interval", "", "two maps x/2, x/2+(1/2,0); attractor = unit segment"},
        {"squares4", "", "four maps x/4 + 3/4*corner; strongly separated Cantor product"},
    };
}

std::string to_config_json(const IfsSystem& sys) {
    std::string out = "{\"maps\":[";
    char buf[256];
    for (std::size_t i = 0; i < sys.size(); ++i) {
        const AffineMap& m = sys.map(i);
        std::snprintf(buf, sizeof buf,
                      "%s{\"A\":[[%.17g,%.17g],[%.17g,%.17g]],\"t\":[%.17g,%.17g]}",
                      i ? "," : "", m.linear.a, m.linear.b, m.linear.c, m.linear.d,
                      m.translation.x, m.translation.y);
        out += buf;
    }
    out += "]}";
    return out;
}

}  // namespace fixtures
}  // namespace kakeya
