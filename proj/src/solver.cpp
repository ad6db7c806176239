#include "grank/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "parallel.hpp"

namespace grank {

namespace {

// Negative rounding noise on structurally-zero entries is pinned to zero;
// anything below this is a genuine defect and is left visible.
constexpr double kNegativeNoise = -1e-12;

// Threads only pay off once rows are plentiful.
constexpr std::size_t kParallelRowThreshold = 1 << 15;

void check_options(const SolveOptions& opts) {
    if (!(opts.tol > 0.0)) {
        throw Error("solve tolerance must be positive");
    }
    if (opts.max_iters < 1) {
        throw Error("iteration cap must be at least 1");
    }
}

// Compressed rows of W^T: row j lists the sources i with w_ij > 0.
struct TransposedCsr {
    std::vector<std::size_t> offsets;
    std::vector<NodeId> sources;
    std::vector<double> weights;
};

TransposedCsr build_transpose(const RowStochasticMatrix& w) {
    const std::size_t n = w.size();
    const CsrLayout& csr = w.layout();

    TransposedCsr t;
    t.offsets.assign(n + 1, 0);
    for (NodeId c : csr.cols) {
        ++t.offsets[static_cast<std::size_t>(c) + 1];
    }
    for (std::size_t j = 0; j < n; ++j) {
        t.offsets[j + 1] += t.offsets[j];
    }
    t.sources.resize(csr.cols.size());
    t.weights.resize(csr.cols.size());

    std::vector<std::size_t> cursor(t.offsets.begin(), t.offsets.end() - 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = csr.row_offsets[i]; k < csr.row_offsets[i + 1]; ++k) {
            const std::size_t pos = cursor[csr.cols[k]]++;
            t.sources[pos] = static_cast<NodeId>(i);
            t.weights[pos] = csr.vals[k];
        }
    }
    return t;
}

struct FixedPointOutcome {
    std::size_t iterations = 0;
    double residual = 0.0;
};

// Iterates y <- base + W^T (diag(damping) y) until the L1 step reaches
// opts.tol. New entries are computed row-parallel; the residual reduction is
// a serial ascending pass, so every thread count yields identical bits.
FixedPointOutcome run_transposed_fixed_point(const TransposedCsr& wt,
                                             std::span<const double> damping, double base,
                                             std::vector<double>& y,
                                             const SolveOptions& opts) {
    const std::size_t n = y.size();
    const unsigned threads =
        n >= kParallelRowThreshold ? detail::resolve_threads(opts.threads) : 1;

    std::vector<double> scaled(n);
    std::vector<double> next(n);

    FixedPointOutcome out;
    while (true) {
        detail::parallel_chunks(n, threads, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                scaled[i] = damping[i] * y[i];
            }
        });
        detail::parallel_chunks(n, threads, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t j = lo; j < hi; ++j) {
                double acc = 0.0;
                for (std::size_t k = wt.offsets[j]; k < wt.offsets[j + 1]; ++k) {
                    acc += wt.weights[k] * scaled[wt.sources[k]];
                }
                next[j] = base + acc;
            }
        });

        double residual = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            residual += std::abs(next[j] - y[j]);
        }
        y.swap(next);
        ++out.iterations;
        out.residual = residual;

        if (residual <= opts.tol) {
            return out;
        }
        if (out.iterations >= opts.max_iters) {
            std::ostringstream msg;
            msg << "fixed-point solve did not reach tolerance " << opts.tol << " in "
                << opts.max_iters << " iterations (last L1 step " << residual << ")";
            throw ConvergenceError(msg.str(), out.iterations, residual);
        }
    }
}

// Exact unit mass via a deterministic ascending-index sum.
void normalize_l1(std::vector<double>& r) {
    double sum = 0.0;
    for (double v : r) {
        sum += v;
    }
    for (double& v : r) {
        v /= sum;
    }
}

} // namespace

EffectsMatrix total_effects_dense(const GeneralizedModel& model, std::size_t dense_cap) {
    const std::size_t n = model.size();
    if (n > dense_cap) {
        std::ostringstream msg;
        msg << "dense solve capped at n = " << dense_cap << ", got " << n;
        throw Error(msg.str());
    }
    const RowStochasticMatrix& w = model.transition();
    const std::span<const double> a = model.damping().values();

    using Index = Eigen::Index;
    const Index ni = static_cast<Index>(n);
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(ni, ni);
    for (std::size_t i = 0; i < n; ++i) {
        const auto targets = w.row_targets(i);
        const auto weights = w.row_weights(i);
        for (std::size_t k = 0; k < targets.size(); ++k) {
            system(static_cast<Index>(i), static_cast<Index>(targets[k])) -= a[i] * weights[k];
        }
    }
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(ni, ni);
    for (std::size_t i = 0; i < n; ++i) {
        rhs(static_cast<Index>(i), static_cast<Index>(i)) = 1.0 - a[i];
    }

    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
    const Eigen::MatrixXd solution = lu.solve(rhs);

    EffectsMatrix effects(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double v = solution(static_cast<Index>(i), static_cast<Index>(j));
            if (v < 0.0 && v > kNegativeNoise) {
                v = 0.0;
            }
            effects(i, j) = v;
        }
    }

    const double defect = solve_defect(model, effects);
    if (!(defect <= kDenseDefectBound)) {
        std::ostringstream msg;
        msg << "dense solve defect " << defect << " exceeds " << kDenseDefectBound
            << "; inputs violate an upstream invariant";
        throw Error(msg.str());
    }
    return effects;
}

double solve_defect(const GeneralizedModel& model, const EffectsMatrix& effects) {
    const std::size_t n = model.size();
    if (effects.size() != n) {
        throw Error("effects matrix dimension does not match model");
    }
    const RowStochasticMatrix& w = model.transition();
    const std::span<const double> a = model.damping().values();

    double defect = 0.0;
    std::vector<double> acc(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(acc.begin(), acc.end(), 0.0);
        const auto targets = w.row_targets(i);
        const auto weights = w.row_weights(i);
        for (std::size_t k = 0; k < targets.size(); ++k) {
            const auto vk = effects.row(targets[k]);
            const double wk = weights[k];
            for (std::size_t j = 0; j < n; ++j) {
                acc[j] += wk * vk[j];
            }
        }
        const auto vi = effects.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            double d = vi[j] - a[i] * acc[j];
            if (j == i) {
                d -= 1.0 - a[i];
            }
            defect = std::max(defect, std::abs(d));
        }
    }
    return defect;
}

EffectsMatrix total_effects_series(const GeneralizedModel& model, std::size_t order) {
    const std::size_t n = model.size();
    const RowStochasticMatrix& w = model.transition();
    const std::span<const double> a = model.damping().values();

    EffectsMatrix total(n);
    std::vector<double> term(n * n, 0.0);
    std::vector<double> next(n * n, 0.0);

    // k = 0 term: I - A.
    for (std::size_t i = 0; i < n; ++i) {
        term[i * n + i] = 1.0 - a[i];
        total(i, i) = 1.0 - a[i];
    }

    for (std::size_t k = 1; k <= order; ++k) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double* out = next.data() + i * n;
            const auto targets = w.row_targets(i);
            const auto weights = w.row_weights(i);
            for (std::size_t e = 0; e < targets.size(); ++e) {
                const double f = a[i] * weights[e];
                const double* src = term.data() + static_cast<std::size_t>(targets[e]) * n;
                for (std::size_t j = 0; j < n; ++j) {
                    out[j] += f * src[j];
                }
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            auto row = total.row(i);
            const double* src = next.data() + i * n;
            for (std::size_t j = 0; j < n; ++j) {
                row[j] += src[j];
            }
        }
        term.swap(next);
    }
    return total;
}

std::size_t series_order_for_tolerance(double a_max, double tol) {
    if (!(a_max > 0.0 && a_max < 1.0)) {
        throw Error("contraction factor must lie in (0, 1)");
    }
    if (!(tol > 0.0)) {
        throw Error("tolerance must be positive");
    }
    const double target = tol * (1.0 - a_max);
    double estimate = std::log(target) / std::log(a_max) - 1.0;
    std::size_t order = estimate > 0.0 ? static_cast<std::size_t>(std::ceil(estimate)) : 0;
    while (std::pow(a_max, static_cast<double>(order) + 1.0) / (1.0 - a_max) > tol) {
        ++order;
    }
    return order;
}

CentralityVector centrality(const EffectsMatrix& effects, AveragingMode mode,
                            bool renormalize) {
    const std::size_t n = effects.size();
    if (n == 0) {
        throw Error("effects matrix is empty");
    }
    if (mode == AveragingMode::ExcludeDiagonal && n < 2) {
        throw Error("diagonal-excluded averaging needs at least 2 nodes");
    }

    std::vector<double> column_sums(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = effects.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            column_sums[j] += row[j];
        }
    }

    CentralityVector result;
    result.mode = mode;
    result.scores.resize(n);
    if (mode == AveragingMode::FullN) {
        for (std::size_t j = 0; j < n; ++j) {
            result.scores[j] = column_sums[j] / static_cast<double>(n);
        }
        normalize_l1(result.scores); // column means carry unit mass already;
                                     // this removes the last float residue
        result.normalized = true;
    } else {
        for (std::size_t j = 0; j < n; ++j) {
            result.scores[j] = (column_sums[j] - effects(j, j)) / static_cast<double>(n - 1);
        }
        if (renormalize) {
            normalize_l1(result.scores);
        }
        result.normalized = renormalize;
    }
    return result;
}

IterativeResult classical_pagerank(const RowStochasticMatrix& w, double alpha,
                                   const SolveOptions& opts) {
    check_options(opts);
    if (!(alpha > 0.0 && alpha < 1.0)) {
        std::ostringstream msg;
        msg << "damping factor must lie in (0, 1), got " << alpha;
        throw Error(msg.str());
    }

    const std::size_t n = w.size();
    const TransposedCsr wt = build_transpose(w);
    const std::vector<double> damping(n, alpha);
    std::vector<double> scores(n, 1.0 / static_cast<double>(n));

    const FixedPointOutcome outcome = run_transposed_fixed_point(
        wt, damping, (1.0 - alpha) / static_cast<double>(n), scores, opts);

    normalize_l1(scores);
    return {{std::move(scores), AveragingMode::FullN, true}, outcome.iterations,
            outcome.residual};
}

IterativeResult generalized_centrality(const GeneralizedModel& model,
                                       const SolveOptions& opts) {
    check_options(opts);

    const std::size_t n = model.size();
    const TransposedCsr wt = build_transpose(model.transition());
    const std::span<const double> a = model.damping().values();
    std::vector<double> y(n, 1.0 / static_cast<double>(n));

    const FixedPointOutcome outcome =
        run_transposed_fixed_point(wt, a, 1.0 / static_cast<double>(n), y, opts);

    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
        scores[i] = (1.0 - a[i]) * y[i];
    }
    normalize_l1(scores);
    return {{std::move(scores), AveragingMode::FullN, true}, outcome.iterations,
            outcome.residual};
}

} // namespace grank
