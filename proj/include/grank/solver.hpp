#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "grank/graph.hpp"

namespace grank {

/// Dense matrix of accumulated walk-weighted influence values. Rows sum to 1
/// (forced by W being row-stochastic) and all entries are nonnegative.
class EffectsMatrix {
public:
    explicit EffectsMatrix(std::size_t n) : n_(n), values_(n * n, 0.0) {}

    std::size_t size() const noexcept { return n_; }

    double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return values_[i * n_ + j]; }

    std::span<const double> row(std::size_t i) const { return {values_.data() + i * n_, n_}; }
    std::span<double> row(std::size_t i) { return {values_.data() + i * n_, n_}; }

    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::size_t n_;
    std::vector<double> values_; // row-major
};

enum class AveragingMode { FullN, ExcludeDiagonal };

struct CentralityVector {
    std::vector<double> scores;
    AveragingMode mode = AveragingMode::FullN;
    bool normalized = true;

    std::size_t size() const noexcept { return scores.size(); }
};

struct SolveOptions {
    double tol = 1e-12;          // L1 residual of the fixed-point map
    std::size_t max_iters = 10'000;
    unsigned threads = 0;        // 0 = hardware concurrency; results are
                                 // identical for every thread count
};

struct IterativeResult {
    CentralityVector centrality;
    std::size_t iterations = 0;
    double residual = 0.0; // L1 step size at the accepted iterate
};

inline constexpr std::size_t kDefaultDenseCap = 4096;
inline constexpr double kDenseDefectBound = 1e-10;

/// Solves (I - AW) V = (I - A) by pivoted LU factorization. The returned
/// matrix satisfies the defect bound kDenseDefectBound in the max norm;
/// exceeding it signals an invariant violation upstream and throws.
EffectsMatrix total_effects_dense(const GeneralizedModel& model,
                                  std::size_t dense_cap = kDefaultDenseCap);

/// Exact K-term partial sum (sum_{k=0..K} (AW)^k)(I - A). The truncation
/// error is bounded entrywise by a_max^(K+1) / (1 - a_max).
EffectsMatrix total_effects_series(const GeneralizedModel& model, std::size_t order);

/// Smallest K with a_max^(K+1) / (1 - a_max) <= tol.
std::size_t series_order_for_tolerance(double a_max, double tol);

/// Max-norm of (I - AW) V - (I - A); the dense route's verification defect.
double solve_defect(const GeneralizedModel& model, const EffectsMatrix& effects);

/// Column averages of an effects matrix. FullN divides column sums by n and
/// carries exact unit mass; ExcludeDiagonal drops v_jj, divides by n - 1 and
/// renormalizes only when asked. ExcludeDiagonal requires n >= 2.
CentralityVector centrality(const EffectsMatrix& effects, AveragingMode mode,
                            bool renormalize = false);

/// Fixed-point solve of r = (1 - alpha)/n + alpha W^T r, stopping when the
/// L1 step falls to opts.tol. Throws ConvergenceError past opts.max_iters.
IterativeResult classical_pagerank(const RowStochasticMatrix& w, double alpha,
                                   const SolveOptions& opts = {});

/// Centrality of the generalized model without materializing V: solves
/// (I - W^T A) y = (1/n) 1 by fixed point and returns (I - A) y, normalized.
/// Contraction factor is max_i a_ii. Full-n averaging only; the
/// diagonal-excluded variant needs the dense effects matrix.
IterativeResult generalized_centrality(const GeneralizedModel& model,
                                       const SolveOptions& opts = {});

} // namespace grank
