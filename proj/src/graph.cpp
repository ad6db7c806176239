#include "grank/graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace grank {

namespace {

void check_structure(const CsrLayout& m) {
    if (m.n == 0) {
        throw Error("matrix dimension must be at least 1");
    }
    if (m.row_offsets.size() != m.n + 1) {
        std::ostringstream msg;
        msg << "row offset array has " << m.row_offsets.size() << " entries, expected "
            << (m.n + 1);
        throw Error(msg.str());
    }
    if (m.row_offsets.front() != 0 || m.row_offsets.back() != m.cols.size() ||
        m.cols.size() != m.vals.size()) {
        throw Error("inconsistent compressed-row arrays");
    }
    for (std::size_t i = 0; i < m.n; ++i) {
        if (m.row_offsets[i] > m.row_offsets[i + 1]) {
            std::ostringstream msg;
            msg << "row offsets decrease at row " << i;
            throw Error(msg.str());
        }
    }
    for (NodeId c : m.cols) {
        if (static_cast<std::size_t>(c) >= m.n) {
            std::ostringstream msg;
            msg << "column index " << c << " outside [0, " << m.n << ")";
            throw Error(msg.str());
        }
    }
}

} // namespace

std::string to_string(Violation::Kind kind) {
    switch (kind) {
    case Violation::Kind::RowSum: return "row-sum";
    case Violation::Kind::WeightRange: return "weight-range";
    case Violation::Kind::OutOfOrder: return "out-of-order";
    case Violation::Kind::DuplicateEntry: return "duplicate-entry";
    }
    return "unknown";
}

ValidationReport validate(const CsrLayout& candidate, double row_tol) {
    check_structure(candidate);

    ValidationReport report;
    for (std::size_t i = 0; i < candidate.n; ++i) {
        const std::size_t begin = candidate.row_offsets[i];
        const std::size_t end = candidate.row_offsets[i + 1];

        double sum = 0.0;
        for (std::size_t k = begin; k < end; ++k) {
            const double w = candidate.vals[k];
            if (!std::isfinite(w) || w < 0.0 || w > 1.0) {
                report.violations.push_back({i, Violation::Kind::WeightRange, w});
            }
            sum += w;
            if (k > begin) {
                const NodeId prev = candidate.cols[k - 1];
                const NodeId cur = candidate.cols[k];
                if (cur == prev) {
                    report.violations.push_back(
                        {i, Violation::Kind::DuplicateEntry, static_cast<double>(cur)});
                } else if (cur < prev) {
                    report.violations.push_back(
                        {i, Violation::Kind::OutOfOrder, static_cast<double>(cur)});
                }
            }
        }
        if (!(std::abs(sum - 1.0) <= row_tol)) {
            report.violations.push_back({i, Violation::Kind::RowSum, sum});
        }
    }
    return report;
}

RowStochasticMatrix RowStochasticMatrix::from_csr(CsrLayout candidate, double row_tol) {
    ValidationReport report = validate(candidate, row_tol);
    if (!report.ok()) {
        std::ostringstream msg;
        msg << "matrix is not row-stochastic (" << report.violations.size() << " violation"
            << (report.violations.size() == 1 ? "" : "s") << "):";
        const std::size_t shown = std::min<std::size_t>(report.violations.size(), 8);
        for (std::size_t k = 0; k < shown; ++k) {
            const Violation& v = report.violations[k];
            msg << " [row " << v.row << " " << to_string(v.kind) << " " << v.measured << "]";
        }
        if (shown < report.violations.size()) {
            msg << " ...";
        }
        throw Error(msg.str());
    }

    // Rows inside tolerance are renormalized to an exact unit sum.
    for (std::size_t i = 0; i < candidate.n; ++i) {
        double sum = 0.0;
        for (std::size_t k = candidate.row_offsets[i]; k < candidate.row_offsets[i + 1]; ++k) {
            sum += candidate.vals[k];
        }
        if (sum != 1.0) {
            for (std::size_t k = candidate.row_offsets[i]; k < candidate.row_offsets[i + 1];
                 ++k) {
                candidate.vals[k] /= sum;
            }
        }
    }
    return RowStochasticMatrix(std::move(candidate));
}

double RowStochasticMatrix::diagonal(std::size_t i) const {
    const auto targets = row_targets(i);
    const auto it = std::lower_bound(targets.begin(), targets.end(), static_cast<NodeId>(i));
    if (it != targets.end() && *it == static_cast<NodeId>(i)) {
        return row_weights(i)[static_cast<std::size_t>(it - targets.begin())];
    }
    return 0.0;
}

namespace {

std::vector<Edge> checked_sorted_edges(std::span<const Edge> edges, std::size_t n) {
    if (n == 0) {
        throw Error("node count must be at least 1");
    }
    std::vector<Edge> sorted(edges.begin(), edges.end());
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        const Edge& e = sorted[k];
        if (e.source >= n || e.target >= n) {
            std::ostringstream msg;
            msg << "edge " << k << " (" << e.source << " -> " << e.target
                << ") outside node range [0, " << n << ")";
            throw Error(msg.str());
        }
        if (!std::isfinite(e.weight) || e.weight < 0.0) {
            std::ostringstream msg;
            msg << "edge " << k << " (" << e.source << " -> " << e.target
                << ") has invalid weight " << e.weight;
            throw Error(msg.str());
        }
    }
    // Weight participates in the key so duplicate groups accumulate in a
    // fixed order whatever the input permutation.
    std::sort(sorted.begin(), sorted.end(), [](const Edge& a, const Edge& b) {
        if (a.source != b.source) return a.source < b.source;
        if (a.target != b.target) return a.target < b.target;
        return a.weight < b.weight;
    });
    return sorted;
}

} // namespace

CsrLayout csr_from_edges(std::span<const Edge> edges, std::size_t n) {
    const std::vector<Edge> sorted = checked_sorted_edges(edges, n);

    CsrLayout csr;
    csr.n = n;
    csr.row_offsets.assign(n + 1, 0);
    csr.cols.reserve(sorted.size());
    csr.vals.reserve(sorted.size());
    for (const Edge& e : sorted) {
        ++csr.row_offsets[e.source + 1];
        csr.cols.push_back(e.target);
        csr.vals.push_back(e.weight);
    }
    for (std::size_t i = 0; i < n; ++i) {
        csr.row_offsets[i + 1] += csr.row_offsets[i];
    }
    return csr;
}

RowStochasticMatrix from_edge_list(std::span<const Edge> edges, std::size_t n,
                                   DanglingPolicy policy) {
    const std::vector<Edge> sorted = checked_sorted_edges(edges, n);

    CsrLayout csr;
    csr.n = n;
    csr.row_offsets.assign(n + 1, 0);
    csr.cols.reserve(sorted.size() + n);
    csr.vals.reserve(sorted.size() + n);

    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t row_begin = csr.cols.size();
        double total = 0.0;
        while (k < sorted.size() && sorted[k].source == i) {
            const NodeId j = sorted[k].target;
            double w = 0.0;
            while (k < sorted.size() && sorted[k].source == i && sorted[k].target == j) {
                w += sorted[k].weight;
                ++k;
            }
            if (w > 0.0) {
                csr.cols.push_back(j);
                csr.vals.push_back(w);
                total += w;
            }
        }
        if (total > 0.0) {
            for (std::size_t p = row_begin; p < csr.cols.size(); ++p) {
                csr.vals[p] /= total;
            }
        } else {
            csr.cols.resize(row_begin);
            csr.vals.resize(row_begin);
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
        }
        csr.row_offsets[i + 1] = csr.cols.size();
    }
    return RowStochasticMatrix::from_csr(std::move(csr));
}

DampingVector::DampingVector(std::vector<double> values, double eps) : eps_(eps) {
    if (!(eps > 0.0 && eps < 0.5)) {
        std::ostringstream msg;
        msg << "clamp bound must lie in (0, 0.5), got " << eps;
        throw Error(msg.str());
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double a = values[i];
        if (!std::isfinite(a) || a < 0.0 || a > 1.0) {
            std::ostringstream msg;
            msg << "damping value " << a << " at node " << i << " outside [0, 1]";
            throw Error(msg.str());
        }
        values[i] = std::clamp(a, eps, 1.0 - eps);
    }
    a_ = std::move(values);
}

DampingVector DampingVector::uniform(std::size_t n, double alpha, double eps) {
    return DampingVector(std::vector<double>(n, alpha), eps);
}

double DampingVector::max_value() const {
    double m = 0.0;
    for (double a : a_) {
        m = std::max(m, a);
    }
    return m;
}

DampingVector couple_damping(const RowStochasticMatrix& w, double eps) {
    std::vector<double> a(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        a[i] = 1.0 - w.diagonal(i);
    }
    return DampingVector(std::move(a), eps);
}

GeneralizedModel::GeneralizedModel(RowStochasticMatrix transition, DampingVector damping)
    : w_(std::move(transition)), a_(std::move(damping)) {
    if (w_.size() != a_.size()) {
        std::ostringstream msg;
        msg << "dimension mismatch: matrix has " << w_.size() << " nodes, damping vector "
            << a_.size();
        throw Error(msg.str());
    }
}

GeneralizedModel coupled_model(RowStochasticMatrix w, double eps) {
    DampingVector a = couple_damping(w, eps);
    return GeneralizedModel(std::move(w), std::move(a));
}

} // namespace grank
