#pragma once

// Built-in example systems used by the CLI and the test suites.

#include <cstddef>
#include <string>
#include <vector>

#include "kakeya/ifs.hpp"

namespace kakeya {
namespace fixtures {

// Two-map family A1 = [[r, r+eps],[eps, r]], A2 = A1^T; eps = 0 is the
// classical overlapping pair whose singularity dimension is 1 at r = 1/3.
IfsSystem edgar(double r, double eps, Vec2 a1 = {-0.3, -0.3}, Vec2 a2 = {0.3, 0.3});

// The concrete positive pair with A1 = [[0.35,0.40],[0.30,0.35]],
// A2 = [[0.40,0.45],[0.45,0.50]], a1 = 0.
IfsSystem pair64(Vec2 a2 = {1.0, 1.0});

// pair64 extended by maps [[1/2, 1/2],[1/(3j-1), 1/(3j)]] for j = 3..kappa.
IfsSystem family65(std::size_t kappa, Vec2 a2 = {1.0, 1.0});

// Two maps x/2 and x/2 + (1/2, 0): the unit segment.
IfsSystem unit_interval();

// Four maps x/4 + corner offsets 3/4 * {0,1}^2: strongly separated
// product-Cantor attractor in the unit square.
IfsSystem corner_squares();

struct Description {
    std::string name;
    std::string parameters;
    std::string summary;
};

std::vector<Description> catalog();

// Canonical JSON config of a system (used for digests and --dump).
std::string to_config_json(const IfsSystem& sys);

}  // namespace fixtures
}  // namespace kakeya
