#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace kakeya {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed configuration document.
struct ParseError : Error {
    using Error::Error;
};

// Structurally valid input violating a model invariant (contractivity,
// invertibility, kappa >= 2, ...). `map_index` is 0-based, -1 if global.
struct ValidationError : Error {
    explicit ValidationError(const std::string& what, long map_index = -1)
        : Error(what), map_index(map_index) {}
    long map_index = -1;
};

// Singular or non-finite matrix fed to a kernel that requires invertibility.
struct SingularInput : Error {
    using Error::Error;
};

struct BudgetExceeded : Error {
    BudgetExceeded(const std::string& what, std::uint64_t budget, std::uint64_t requested)
        : Error(what + " (budget " + std::to_string(budget) + ", requested " +
                std::to_string(requested) + ")"),
          budget(budget),
          requested(requested) {}
    std::uint64_t budget = 0;
    std::uint64_t requested = 0;
};

// A checkable hypothesis of a lemma/proposition does not hold for the input.
struct HypothesisViolated : Error {
    using Error::Error;
};

// Raster cell size too coarse for the requested dilation radius.
struct ResolutionError : Error {
    using Error::Error;
};

// Start vector is too close to the invariant hyperplane (cone entry).
struct NearHyperplane : Error {
    using Error::Error;
};

// Cone entry iteration cap reached without certified entry.
struct NoEntry : Error {
    using Error::Error;
};

}  // namespace kakeya
