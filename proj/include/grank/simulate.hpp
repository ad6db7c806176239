#pragma once

#include <cstdint>
#include <vector>

#include "grank/graph.hpp"
#include "grank/ingest.hpp"

namespace grank {

struct SimConfig {
    std::uint64_t n_sessions = 1;
    std::uint64_t seed = 0;
    std::size_t max_steps = 10'000;           // per-session visit cap
    std::vector<double> start_distribution;   // empty = uniform; else length n,
                                              // nonnegative, sums to 1 (1e-12)
};

/// Samples sessions from W: at page i the next draw follows row i, a diagonal
/// draw terminates the session, an off-diagonal draw continues there.
/// Deterministic for fixed (W, cfg): session s uses its own engine seeded from
/// substream_seed(cfg.seed, s), so any thread count produces the identical
/// log. Sessions hitting max_steps are cut and counted in force_terminations.
VisitLog simulate_sessions(const RowStochasticMatrix& w, const SimConfig& cfg,
                           unsigned threads = 1);

} // namespace grank
