#include "grank/ingest.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace grank {

VisitCounts VisitCounts::from_parts(std::vector<std::uint64_t> visits,
                                    std::vector<std::uint64_t> terminations,
                                    std::vector<TransitionRow> transitions) {
    const std::size_t n = visits.size();
    if (terminations.size() != n || transitions.size() != n) {
        throw Error("visit-count arrays disagree on node count");
    }

    for (std::size_t i = 0; i < n; ++i) {
        TransitionRow& row = transitions[i];
        std::sort(row.begin(), row.end());
        TransitionRow merged;
        merged.reserve(row.size());
        std::uint64_t outgoing = 0;
        for (const auto& [target, count] : row) {
            if (static_cast<std::size_t>(target) >= n) {
                std::ostringstream msg;
                msg << "transition target " << target << " at node " << i
                    << " outside [0, " << n << ")";
                throw Error(msg.str());
            }
            if (!merged.empty() && merged.back().first == target) {
                merged.back().second += count;
            } else {
                merged.emplace_back(target, count);
            }
            outgoing += count;
        }
        if (terminations[i] + outgoing != visits[i]) {
            std::ostringstream msg;
            msg << "node " << i << ": terminations (" << terminations[i]
                << ") + transitions (" << outgoing << ") != visits (" << visits[i] << ")";
            throw Error(msg.str());
        }
        row = std::move(merged);
    }

    VisitCounts counts(n);
    counts.visits_ = std::move(visits);
    counts.terminations_ = std::move(terminations);
    counts.transitions_ = std::move(transitions);
    return counts;
}

std::uint64_t VisitCounts::total_visits() const {
    std::uint64_t total = 0;
    for (std::uint64_t v : visits_) {
        total += v;
    }
    return total;
}

std::size_t DriftReport::flagged_count() const {
    std::size_t count = 0;
    for (const Row& row : rows) {
        count += row.flagged ? 1 : 0;
    }
    return count;
}

VisitCounts accumulate(const VisitLog& log, std::size_t n) {
    if (n == 0) {
        throw Error("node count must be at least 1");
    }
    std::vector<std::uint64_t> visits(n, 0);
    std::vector<std::uint64_t> terminations(n, 0);
    std::vector<std::map<NodeId, std::uint64_t>> transitions(n);

    for (std::size_t s = 0; s < log.sessions.size(); ++s) {
        const auto& session = log.sessions[s];
        if (session.empty()) {
            std::ostringstream msg;
            msg << "session " << s << " is empty";
            throw Error(msg.str());
        }
        for (NodeId page : session) {
            if (static_cast<std::size_t>(page) >= n) {
                std::ostringstream msg;
                msg << "session " << s << ": node id " << page << " outside [0, " << n << ")";
                throw Error(msg.str());
            }
            ++visits[page];
        }
        for (std::size_t k = 0; k + 1 < session.size(); ++k) {
            ++transitions[session[k]][session[k + 1]];
        }
        ++terminations[session.back()];
    }

    std::vector<VisitCounts::TransitionRow> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows[i].assign(transitions[i].begin(), transitions[i].end());
    }
    return VisitCounts::from_parts(std::move(visits), std::move(terminations),
                                   std::move(rows));
}

VisitCounts merge_counts(const VisitCounts& a, const VisitCounts& b) {
    const std::size_t n = a.size();
    if (b.size() != n) {
        std::ostringstream msg;
        msg << "cannot merge counts over " << n << " and " << b.size() << " nodes";
        throw Error(msg.str());
    }

    std::vector<std::uint64_t> visits(n);
    std::vector<std::uint64_t> terminations(n);
    std::vector<VisitCounts::TransitionRow> transitions(n);
    for (std::size_t i = 0; i < n; ++i) {
        visits[i] = a.visits(i) + b.visits(i);
        terminations[i] = a.terminations(i) + b.terminations(i);
        const auto ra = a.transitions(i);
        const auto rb = b.transitions(i);
        transitions[i].assign(ra.begin(), ra.end());
        transitions[i].insert(transitions[i].end(), rb.begin(), rb.end());
    }
    return VisitCounts::from_parts(std::move(visits), std::move(terminations),
                                   std::move(transitions));
}

namespace {

/// Estimated allocation row for a node with visits > 0: termination and
/// self-transition mass folded into the diagonal, renormalized to an exact
/// unit sum, targets ascending.
std::vector<std::pair<NodeId, double>> estimated_row(const VisitCounts& counts,
                                                     std::size_t i) {
    const double v = static_cast<double>(counts.visits(i));
    double diagonal = static_cast<double>(counts.terminations(i)) / v;

    std::vector<std::pair<NodeId, double>> row;
    for (const auto& [target, count] : counts.transitions(i)) {
        const double share = static_cast<double>(count) / v;
        if (static_cast<std::size_t>(target) == i) {
            diagonal += share;
        } else {
            row.emplace_back(target, share);
        }
    }
    if (diagonal > 0.0) {
        row.emplace_back(static_cast<NodeId>(i), diagonal);
        std::sort(row.begin(), row.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
    }
    double sum = 0.0;
    for (const auto& [target, share] : row) {
        sum += share;
    }
    for (auto& [target, share] : row) {
        share /= sum;
    }
    return row;
}

} // namespace

GeneralizedModel estimate_model(const VisitCounts& counts, DanglingPolicy policy,
                                double eps) {
    const std::size_t n = counts.size();

    CsrLayout csr;
    csr.n = n;
    csr.row_offsets.assign(n + 1, 0);

    for (std::size_t i = 0; i < n; ++i) {
        if (counts.visits(i) == 0) {
            if (policy == DanglingPolicy::SelfSink) {
                csr.cols.push_back(static_cast<NodeId>(i));
                csr.vals.push_back(1.0);
            } else {
                const double share = 1.0 / static_cast<double>(n);
                for (std::size_t j = 0; j < n; ++j) {
                    csr.cols.push_back(static_cast<NodeId>(j));
                    csr.vals.push_back(share);
                }
            }
        } else {
            for (const auto& [target, share] : estimated_row(counts, i)) {
                csr.cols.push_back(target);
                csr.vals.push_back(share);
            }
        }
        csr.row_offsets[i + 1] = csr.cols.size();
    }

    RowStochasticMatrix w = RowStochasticMatrix::from_csr(std::move(csr));
    DampingVector a = couple_damping(w, eps);
    return GeneralizedModel(std::move(w), std::move(a));
}

DriftReport row_drift(const VisitCounts& old_counts, const VisitCounts& new_counts,
                      double threshold) {
    const std::size_t n = old_counts.size();
    if (new_counts.size() != n) {
        std::ostringstream msg;
        msg << "cannot compare counts over " << n << " and " << new_counts.size()
            << " nodes";
        throw Error(msg.str());
    }
    if (!(threshold > 0.0 && threshold <= 2.0)) {
        std::ostringstream msg;
        msg << "drift threshold must lie in (0, 2], got " << threshold;
        throw Error(msg.str());
    }

    DriftReport report;
    report.threshold = threshold;
    report.rows.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (old_counts.visits(i) == 0 || new_counts.visits(i) == 0) {
            continue; // insufficient data; no distance
        }
        const auto old_row = estimated_row(old_counts, i);
        const auto new_row = estimated_row(new_counts, i);

        double distance = 0.0;
        std::size_t p = 0;
        std::size_t q = 0;
        while (p < old_row.size() || q < new_row.size()) {
            if (q == new_row.size() ||
                (p < old_row.size() && old_row[p].first < new_row[q].first)) {
                distance += std::abs(old_row[p].second);
                ++p;
            } else if (p == old_row.size() || new_row[q].first < old_row[p].first) {
                distance += std::abs(new_row[q].second);
                ++q;
            } else {
                distance += std::abs(old_row[p].second - new_row[q].second);
                ++p;
                ++q;
            }
        }
        report.rows[i].distance = distance;
        report.rows[i].flagged = distance > threshold;
    }
    return report;
}

} // namespace grank
