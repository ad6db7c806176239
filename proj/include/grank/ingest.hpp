#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "grank/graph.hpp"

namespace grank {

/// Ordered page-visit sessions. Each session terminates at its last page.
struct VisitLog {
    std::vector<std::vector<NodeId>> sessions;
    std::uint64_t force_terminations = 0; // sessions cut at the step cap
};

/// Per-node visit tallies: the node-local sufficient statistic for
/// estimating allocation weights. Invariant: for every node,
/// terminations + sum of outgoing transition counts == visits.
class VisitCounts {
public:
    using TransitionRow = std::vector<std::pair<NodeId, std::uint64_t>>;

    explicit VisitCounts(std::size_t n)
        : visits_(n, 0), terminations_(n, 0), transitions_(n) {}

    /// Canonicalizes (sorts targets, merges duplicates) and checks the
    /// count invariant; throws Error when it fails.
    static VisitCounts from_parts(std::vector<std::uint64_t> visits,
                                  std::vector<std::uint64_t> terminations,
                                  std::vector<TransitionRow> transitions);

    std::size_t size() const noexcept { return visits_.size(); }
    std::uint64_t visits(std::size_t i) const { return visits_[i]; }
    std::uint64_t terminations(std::size_t i) const { return terminations_[i]; }
    std::span<const std::pair<NodeId, std::uint64_t>> transitions(std::size_t i) const {
        return transitions_[i];
    }

    std::uint64_t total_visits() const;

    bool operator==(const VisitCounts&) const = default;

private:
    std::vector<std::uint64_t> visits_;
    std::vector<std::uint64_t> terminations_;
    std::vector<TransitionRow> transitions_;
};

/// Per-row L1 distance between the allocation rows estimated from two count
/// snapshots. Rows lacking visits in either snapshot carry no distance.
struct DriftReport {
    struct Row {
        std::optional<double> distance; // in [0, 2]; empty = insufficient data
        bool flagged = false;
    };

    double threshold = 0.0;
    std::vector<Row> rows;

    std::size_t flagged_count() const;
};

/// Counting pass over a visit log: a session of length L contributes L
/// visits, L - 1 transitions and one termination at its last page. Additive
/// across sessions, so partition counts merge to whole-log counts.
VisitCounts accumulate(const VisitLog& log, std::size_t n);

/// Entrywise sum of two count snapshots of the same dimension.
VisitCounts merge_counts(const VisitCounts& a, const VisitCounts& b);

/// Allocation-weight estimate: w_ij = transitions_ij / visits_i for j != i
/// and w_ii = (terminations_i + transitions_ii) / visits_i, renormalized
/// exactly per row; damping is then coupled from the diagonal. Nodes with no
/// visits get a self-sink or uniform row per `policy`.
GeneralizedModel estimate_model(const VisitCounts& counts,
                                DanglingPolicy policy = DanglingPolicy::SelfSink,
                                double eps = kDefaultEps);

/// Stability probe for node-local updating: L1 distance between old and new
/// estimated rows (termination mass included), flagged above `threshold`.
DriftReport row_drift(const VisitCounts& old_counts, const VisitCounts& new_counts,
                      double threshold);

} // namespace grank
