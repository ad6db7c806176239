#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "grank/error.hpp"

namespace grank {

using NodeId = std::uint32_t;

/// Clamp bound keeping damping values strictly inside (0, 1).
inline constexpr double kDefaultEps = 1e-6;

/// Tolerance on row sums when validating row-stochasticity.
inline constexpr double kDefaultRowTol = 1e-9;

/// One weighted directed edge. Weights are arbitrary nonnegative values
/// until row normalization turns them into allocation proportions.
struct Edge {
    NodeId source = 0;
    NodeId target = 0;
    double weight = 0.0;
};

/// Completion rule for rows with no outgoing weight.
enum class DanglingPolicy { SelfSink, Uniform };

/// Raw compressed-row storage. Carries no invariants of its own; it is the
/// candidate input to validate() and the backing store of RowStochasticMatrix.
struct CsrLayout {
    std::size_t n = 0;
    std::vector<std::size_t> row_offsets; // size n + 1
    std::vector<NodeId> cols;
    std::vector<double> vals;
};

struct Violation {
    enum class Kind { RowSum, WeightRange, OutOfOrder, DuplicateEntry };

    std::size_t row = 0;
    Kind kind = Kind::RowSum;
    double measured = 0.0; // row sum, offending weight, or column index
};

std::string to_string(Violation::Kind kind);

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
};

/// Checks every row-stochastic invariant on a raw candidate and reports all
/// violating rows. Structural defects (inconsistent array sizes, column
/// indices outside [0, n), n == 0) throw before any numeric check runs.
ValidationReport validate(const CsrLayout& candidate, double row_tol = kDefaultRowTol);

/// Sparse nonnegative square matrix with unit row sums, canonical compressed
/// row form (strictly increasing columns, no duplicates). Immutable after
/// construction.
class RowStochasticMatrix {
public:
    /// Validates `candidate` at `row_tol` and renormalizes each row to an
    /// exact unit sum. Throws Error describing the violations otherwise.
    static RowStochasticMatrix from_csr(CsrLayout candidate, double row_tol = kDefaultRowTol);

    std::size_t size() const noexcept { return csr_.n; }
    std::size_t nnz() const noexcept { return csr_.cols.size(); }

    std::span<const NodeId> row_targets(std::size_t i) const {
        return {csr_.cols.data() + csr_.row_offsets[i],
                csr_.row_offsets[i + 1] - csr_.row_offsets[i]};
    }
    std::span<const double> row_weights(std::size_t i) const {
        return {csr_.vals.data() + csr_.row_offsets[i],
                csr_.row_offsets[i + 1] - csr_.row_offsets[i]};
    }

    /// Stored diagonal weight of row i, or 0 when absent.
    double diagonal(std::size_t i) const;

    const CsrLayout& layout() const noexcept { return csr_; }

private:
    explicit RowStochasticMatrix(CsrLayout csr) : csr_(std::move(csr)) {}

    CsrLayout csr_;
};

/// Builds the raw candidate for validation: entries sorted by (row, column),
/// duplicates preserved so validate() can report them.
CsrLayout csr_from_edges(std::span<const Edge> edges, std::size_t n);

/// Builds a row-stochastic matrix from raw weighted edges: duplicates are
/// summed, rows with positive total weight are normalized to unit sum, and
/// rows with no weight are completed per `policy`. The result is canonical
/// and bit-identical for any input ordering of the same edge multiset.
RowStochasticMatrix from_edge_list(std::span<const Edge> edges, std::size_t n,
                                   DanglingPolicy policy = DanglingPolicy::SelfSink);

/// Per-node damping values, each clamped into [eps, 1 - eps]. Values outside
/// [0, 1] or non-finite are rejected.
class DampingVector {
public:
    explicit DampingVector(std::vector<double> values, double eps = kDefaultEps);

    static DampingVector uniform(std::size_t n, double alpha, double eps = kDefaultEps);

    std::size_t size() const noexcept { return a_.size(); }
    double operator[](std::size_t i) const { return a_[i]; }
    std::span<const double> values() const noexcept { return a_; }
    double clamp_bound() const noexcept { return eps_; }

    /// Largest damping value; the contraction factor of the walk sum.
    double max_value() const;

private:
    std::vector<double> a_;
    double eps_;
};

/// a_ii = clamp(1 - w_ii, eps, 1 - eps); rows without a stored diagonal count
/// as w_ii = 0.
DampingVector couple_damping(const RowStochasticMatrix& w, double eps = kDefaultEps);

/// A validated (W, A) pair of consistent dimension.
class GeneralizedModel {
public:
    GeneralizedModel(RowStochasticMatrix transition, DampingVector damping);

    const RowStochasticMatrix& transition() const noexcept { return w_; }
    const DampingVector& damping() const noexcept { return a_; }
    std::size_t size() const noexcept { return w_.size(); }

private:
    RowStochasticMatrix w_;
    DampingVector a_;
};

/// Convenience: pair a matrix with its coupled damping vector.
GeneralizedModel coupled_model(RowStochasticMatrix w, double eps = kDefaultEps);

} // namespace grank
