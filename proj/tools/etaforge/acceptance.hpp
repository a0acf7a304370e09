#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace etaforge::cli {

struct CriterionResult {
    int index = 0;
    std::string name;    // stable slug
    std::string formula; // the property verified, spelled out
    bool pass = false;
    std::string detail;  // measured extremes (deterministic for a given seed)
    double seconds = 0.0;
};

// The thirteen acceptance properties, in fixed order. Deterministic for a
// given seed — the reported details never depend on threads or wall time.
// quick shrinks instance counts and grid resolutions and loosens the affected
// tolerances accordingly.
std::vector<CriterionResult> run_acceptance(bool quick, std::uint64_t seed, int threads);

// Slot-indexed parallel map: fn(i) for i in [0, n), any thread count yields
// the same result layout. Worker exceptions are rethrown on the caller.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

} // namespace etaforge::cli
