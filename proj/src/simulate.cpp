#include "grank/simulate.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <sstream>

#include "grank/rng.hpp"
#include "parallel.hpp"

namespace grank {

namespace {

void check_config(const RowStochasticMatrix& w, const SimConfig& cfg) {
    if (cfg.n_sessions < 1) {
        throw Error("session count must be at least 1");
    }
    if (cfg.max_steps < 1) {
        throw Error("per-session step cap must be at least 1");
    }
    if (!cfg.start_distribution.empty()) {
        if (cfg.start_distribution.size() != w.size()) {
            std::ostringstream msg;
            msg << "start distribution has " << cfg.start_distribution.size()
                << " entries, matrix has " << w.size() << " nodes";
            throw Error(msg.str());
        }
        double sum = 0.0;
        for (double p : cfg.start_distribution) {
            if (!std::isfinite(p) || p < 0.0) {
                throw Error("start distribution entries must be finite and nonnegative");
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            std::ostringstream msg;
            msg << "start distribution sums to " << sum << ", expected 1";
            throw Error(msg.str());
        }
    }
}

NodeId sample_start(const SimConfig& cfg, std::size_t n, std::mt19937_64& engine) {
    const double u = uniform01(engine);
    if (cfg.start_distribution.empty()) {
        const auto idx = static_cast<std::size_t>(u * static_cast<double>(n));
        return static_cast<NodeId>(std::min(idx, n - 1));
    }
    double cum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        cum += cfg.start_distribution[j];
        if (u < cum) {
            return static_cast<NodeId>(j);
        }
    }
    return static_cast<NodeId>(n - 1);
}

NodeId sample_row(const RowStochasticMatrix& w, NodeId i, std::mt19937_64& engine) {
    const double u = uniform01(engine);
    const auto targets = w.row_targets(i);
    const auto weights = w.row_weights(i);
    double cum = 0.0;
    for (std::size_t k = 0; k < targets.size(); ++k) {
        cum += weights[k];
        if (u < cum) {
            return targets[k];
        }
    }
    return targets.back(); // row sums to 1 up to rounding; u landed in the gap
}

} // namespace

VisitLog simulate_sessions(const RowStochasticMatrix& w, const SimConfig& cfg,
                           unsigned threads) {
    check_config(w, cfg);
    const std::size_t n = w.size();

    VisitLog log;
    log.sessions.resize(cfg.n_sessions);
    std::atomic<std::uint64_t> forced{0};

    detail::parallel_chunks(cfg.n_sessions, threads, [&](std::size_t lo, std::size_t hi) {
        std::uint64_t forced_local = 0;
        for (std::size_t s = lo; s < hi; ++s) {
            std::mt19937_64 engine(substream_seed(cfg.seed, s));
            std::vector<NodeId>& session = log.sessions[s];

            NodeId current = sample_start(cfg, n, engine);
            session.push_back(current);
            while (true) {
                if (session.size() >= cfg.max_steps) {
                    ++forced_local; // cut at the cap; termination not sampled
                    break;
                }
                const NodeId next = sample_row(w, current, engine);
                if (next == current) {
                    break; // diagonal draw: session terminates here
                }
                session.push_back(next);
                current = next;
            }
        }
        forced.fetch_add(forced_local, std::memory_order_relaxed);
    });

    log.force_terminations = forced.load();
    return log;
}

} // namespace grank
