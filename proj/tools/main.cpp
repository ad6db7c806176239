#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "grank/graph.hpp"
#include "grank/ingest.hpp"
#include "grank/io.hpp"
#include "grank/simulate.hpp"
#include "grank/solver.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1; // domain or validation failure
constexpr int kExitUsage = 2;
constexpr double kCrosscheckBound = 1e-8;

/// Flag combinations that are wrong before any I/O happens.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_f6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

/// Writes to a file when a path is given, else to stdout.
class OutputTarget {
public:
    explicit OutputTarget(const std::string& path) : path_(path) {
        if (!path_.empty()) {
            file_.open(path_);
            if (!file_) {
                throw grank::Error("cannot open '" + path_ + "' for writing");
            }
        }
    }

    std::ostream& stream() { return path_.empty() ? std::cout : file_; }

    void finish() {
        stream().flush();
        if (!stream()) {
            throw grank::Error("write failed" +
                               (path_.empty() ? std::string() : " on '" + path_ + "'"));
        }
    }

private:
    std::string path_;
    std::ofstream file_;
};

grank::DanglingPolicy parse_policy(const std::string& name) {
    if (name == "sink") {
        return grank::DanglingPolicy::SelfSink;
    }
    if (name == "uniform") {
        return grank::DanglingPolicy::Uniform;
    }
    throw UsageError("unknown policy '" + name + "' (expected sink or uniform)");
}

std::size_t resolve_node_count(std::size_t inferred, std::size_t override_n,
                               const char* what) {
    const std::size_t n = override_n > 0 ? override_n : inferred;
    if (n == 0) {
        throw grank::Error(std::string(what) +
                           " contains no data and no --nodes override was given");
    }
    return n;
}

grank::RowStochasticMatrix load_matrix(const std::string& path, std::size_t override_n,
                                       grank::DanglingPolicy policy) {
    const auto data = grank::read_edge_list_file(path);
    const std::size_t n = resolve_node_count(data.inferred_n, override_n, "edge list");
    return grank::from_edge_list(data.edges, n, policy);
}

void check_solve_flags(const grank::SolveOptions& solve) {
    if (!(solve.tol > 0.0)) {
        throw UsageError("--tol must be positive");
    }
    if (solve.max_iters < 1) {
        throw UsageError("--max-iters must be at least 1");
    }
}

// ---------------------------------------------------------------------------
// rank

struct RankConfig {
    std::string edges_path;
    std::size_t nodes = 0;
    double alpha = 0.85;
    bool alpha_given = false;
    bool coupled = false;
    std::string damping_path;
    std::string solver = "iterative";
    std::string mode = "full";
    bool renormalize = false;
    double eps = grank::kDefaultEps;
    grank::SolveOptions solve;
    std::string dangling = "sink";
    std::string format = "tsv";
    bool pretty = false;
    std::string labels_path;
    std::string out_path;
};

int run_rank(const RankConfig& cfg) {
    // Flag consistency first, before any file is touched.
    if (cfg.solver != "iterative" && cfg.solver != "dense") {
        throw UsageError("--solver must be iterative or dense");
    }
    if (cfg.mode != "full" && cfg.mode != "exclude-diag") {
        throw UsageError("--mode must be full or exclude-diag");
    }
    const bool exclude_diag = cfg.mode == "exclude-diag";
    if (exclude_diag && cfg.solver == "iterative") {
        throw UsageError("--mode exclude-diag needs the diagonal of the effects matrix; "
                         "use --solver dense");
    }
    if (cfg.alpha_given && !(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
        throw UsageError("--alpha must lie strictly between 0 and 1");
    }
    if (cfg.format != "tsv" && cfg.format != "json") {
        throw UsageError("--format must be tsv or json");
    }
    check_solve_flags(cfg.solve);
    const grank::DanglingPolicy dangling = parse_policy(cfg.dangling);

    const auto w = load_matrix(cfg.edges_path, cfg.nodes, dangling);
    const std::size_t n = w.size();

    const bool classical = !cfg.coupled && cfg.damping_path.empty();
    const auto make_damping = [&]() -> grank::DampingVector {
        if (cfg.coupled) {
            return grank::couple_damping(w, cfg.eps);
        }
        if (!cfg.damping_path.empty()) {
            return grank::read_damping_file(cfg.damping_path, n, cfg.eps);
        }
        return grank::DampingVector::uniform(n, cfg.alpha, cfg.eps);
    };

    std::vector<double> scores;
    std::size_t iterations = 0;
    double residual = 0.0;
    if (cfg.solver == "iterative") {
        grank::IterativeResult result =
            classical ? grank::classical_pagerank(w, cfg.alpha, cfg.solve)
                      : grank::generalized_centrality(
                            grank::GeneralizedModel(w, make_damping()), cfg.solve);
        scores = std::move(result.centrality.scores);
        iterations = result.iterations;
        residual = result.residual;
    } else {
        const grank::GeneralizedModel model(w, make_damping());
        const auto effects = grank::total_effects_dense(model);
        auto r = grank::centrality(effects,
                                   exclude_diag ? grank::AveragingMode::ExcludeDiagonal
                                                : grank::AveragingMode::FullN,
                                   cfg.renormalize);
        scores = std::move(r.scores);
        residual = grank::solve_defect(model, effects);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) {
            return scores[a] > scores[b];
        }
        return a < b;
    });

    OutputTarget target(cfg.out_path);
    std::ostream& out = target.stream();
    if (cfg.pretty) {
        std::vector<std::string> labels;
        if (!cfg.labels_path.empty()) {
            labels = grank::read_labels_file(cfg.labels_path, n);
        }
        out << "rank\tid";
        if (!labels.empty()) {
            out << "\tlabel";
        }
        out << "\tscore\n";
        for (std::size_t pos = 0; pos < order.size(); ++pos) {
            const std::size_t id = order[pos];
            out << (pos + 1) << '\t' << id;
            if (!labels.empty()) {
                out << '\t' << labels[id];
            }
            out << '\t' << fmt_f6(scores[id]) << '\n';
        }
    } else if (cfg.format == "tsv") {
        for (const std::size_t id : order) {
            out << id << '\t' << fmt_g17(scores[id]) << '\n';
        }
    } else {
        nlohmann::ordered_json doc;
        doc["n"] = n;
        doc["mode"] = exclude_diag ? "exclude_diagonal" : "full_n";
        auto scores_json = nlohmann::ordered_json::array();
        for (const std::size_t id : order) {
            scores_json.push_back({{"id", id}, {"score", scores[id]}});
        }
        doc["scores"] = std::move(scores_json);
        doc["iterations"] = iterations;
        doc["residual"] = residual;
        out << doc.dump(2) << '\n';
    }
    target.finish();
    return kExitOk;
}

// ---------------------------------------------------------------------------
// estimate

struct EstimateConfig {
    std::string log_path;
    std::size_t nodes = 0;
    std::string counts_out;
    std::string model_out;
    std::string policy = "sink";
    double eps = grank::kDefaultEps;
};

int run_estimate(const EstimateConfig& cfg) {
    const grank::DanglingPolicy policy = parse_policy(cfg.policy);

    const auto data = grank::read_visit_log_file(cfg.log_path);
    const std::size_t n = resolve_node_count(data.inferred_n, cfg.nodes, "visit log");

    const auto counts = grank::accumulate(data.log, n);
    const auto model = grank::estimate_model(counts, policy, cfg.eps);

    if (!cfg.counts_out.empty()) {
        grank::write_counts_file(cfg.counts_out, counts);
    }
    // The estimated edge list is the whole model: coupling reconstructs the
    // damping values from the stored diagonal.
    if (!cfg.model_out.empty()) {
        grank::write_edge_list_file(cfg.model_out, model.transition());
    } else {
        grank::write_edge_list(std::cout, model.transition());
        std::cout.flush();
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateConfig {
    std::string edges_path;
    std::size_t nodes = 0;
    std::uint64_t sessions = 0;
    std::uint64_t seed = 0;
    std::string out_path;
    std::size_t max_steps = 10'000;
    unsigned threads = 1;
    std::string dangling = "sink";
};

int run_simulate(const SimulateConfig& cfg) {
    const grank::DanglingPolicy dangling = parse_policy(cfg.dangling);
    if (cfg.sessions < 1) {
        throw UsageError("--sessions must be at least 1");
    }
    if (cfg.max_steps < 1) {
        throw UsageError("--max-steps must be at least 1");
    }

    const auto w = load_matrix(cfg.edges_path, cfg.nodes, dangling);

    grank::SimConfig sim;
    sim.n_sessions = cfg.sessions;
    sim.seed = cfg.seed;
    sim.max_steps = cfg.max_steps;
    const auto log = grank::simulate_sessions(w, sim, cfg.threads);

    grank::write_visit_log_file(cfg.out_path, log);

    std::uint64_t visits = 0;
    for (const auto& session : log.sessions) {
        visits += session.size();
    }
    std::cerr << "sessions=" << log.sessions.size() << " visits=" << visits
              << " force_terminations=" << log.force_terminations << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// drift

struct DriftConfig {
    std::string old_path;
    std::string new_path;
    double threshold = 0.1;
    std::string format = "tsv";
    std::string out_path;
};

int run_drift(const DriftConfig& cfg) {
    if (!(cfg.threshold > 0.0 && cfg.threshold <= 2.0)) {
        throw UsageError("--threshold must lie in (0, 2]");
    }
    if (cfg.format != "tsv" && cfg.format != "json") {
        throw UsageError("--format must be tsv or json");
    }

    const auto old_counts = grank::read_counts_file(cfg.old_path);
    const auto new_counts = grank::read_counts_file(cfg.new_path);
    const auto report = grank::row_drift(old_counts, new_counts, cfg.threshold);

    OutputTarget target(cfg.out_path);
    std::ostream& out = target.stream();
    if (cfg.format == "tsv") {
        for (std::size_t i = 0; i < report.rows.size(); ++i) {
            const auto& row = report.rows[i];
            if (row.distance) {
                out << i << '\t' << fmt_g17(*row.distance) << '\t'
                    << (row.flagged ? "drift" : "ok") << '\n';
            } else {
                out << i << "\t-\tinsufficient\n";
            }
        }
    } else {
        nlohmann::ordered_json doc;
        doc["threshold"] = report.threshold;
        doc["flagged"] = report.flagged_count();
        auto rows = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < report.rows.size(); ++i) {
            const auto& row = report.rows[i];
            nlohmann::ordered_json entry;
            entry["id"] = i;
            if (row.distance) {
                entry["status"] = row.flagged ? "drift" : "ok";
                entry["distance"] = *row.distance;
            } else {
                entry["status"] = "insufficient";
            }
            rows.push_back(std::move(entry));
        }
        doc["rows"] = std::move(rows);
        out << doc.dump(2) << '\n';
    }
    target.finish();
    return kExitOk;
}

// ---------------------------------------------------------------------------
// validate

struct ValidateConfig {
    std::string edges_path;
    std::size_t nodes = 0;
};

int run_validate(const ValidateConfig& cfg) {
    const auto data = grank::read_edge_list_file(cfg.edges_path);
    const std::size_t n = resolve_node_count(data.inferred_n, cfg.nodes, "edge list");

    const auto candidate = grank::csr_from_edges(data.edges, n);
    const auto report = grank::validate(candidate);
    if (report.ok()) {
        std::cout << "ok\n";
        return kExitOk;
    }
    for (const auto& violation : report.violations) {
        std::cout << "row " << violation.row << ": " << grank::to_string(violation.kind)
                  << ' ' << fmt_g17(violation.measured) << '\n';
    }
    std::cout << "invalid (" << report.violations.size() << " violation"
              << (report.violations.size() == 1 ? "" : "s") << ")\n";
    return kExitFailure;
}

// ---------------------------------------------------------------------------
// crosscheck

struct CrosscheckConfig {
    std::string edges_path;
    std::size_t nodes = 0;
    double alpha = 0.85;
    bool alpha_given = false;
    bool coupled = false;
    double eps = grank::kDefaultEps;
    grank::SolveOptions solve;
    std::string dangling = "sink";
};

int run_crosscheck(const CrosscheckConfig& cfg) {
    if (cfg.alpha_given && !(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
        throw UsageError("--alpha must lie strictly between 0 and 1");
    }
    check_solve_flags(cfg.solve);
    const grank::DanglingPolicy dangling = parse_policy(cfg.dangling);

    const auto w = load_matrix(cfg.edges_path, cfg.nodes, dangling);
    const std::size_t n = w.size();

    // Without --alpha the check runs on the coupled heterogeneous model.
    const grank::DampingVector damping =
        cfg.alpha_given ? grank::DampingVector::uniform(n, cfg.alpha, cfg.eps)
                        : grank::couple_damping(w, cfg.eps);
    const grank::GeneralizedModel model(w, damping);

    const auto dense = grank::centrality(grank::total_effects_dense(model),
                                         grank::AveragingMode::FullN);
    const grank::IterativeResult iterative =
        cfg.alpha_given ? grank::classical_pagerank(w, cfg.alpha, cfg.solve)
                        : grank::generalized_centrality(model, cfg.solve);

    double discrepancy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        discrepancy += std::abs(dense.scores[i] - iterative.centrality.scores[i]);
    }
    std::cout << "l1_discrepancy\t" << fmt_g17(discrepancy) << '\n';
    return discrepancy <= kCrosscheckBound ? kExitOk : kExitFailure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Centrality for valued graphs with per-node damping: total-effects "
                 "scores, visitation-log estimation, and surfer simulation"};
    app.require_subcommand(1);

    RankConfig rank;
    CLI::App* rank_cmd =
        app.add_subcommand("rank", "Compute centrality scores from an edge list");
    rank_cmd->add_option("--edges", rank.edges_path, "edge list file")->required();
    rank_cmd->add_option("--nodes", rank.nodes, "node count override (default: inferred)");
    auto* alpha_opt = rank_cmd->add_option(
        "--alpha", rank.alpha, "uniform damping factor (classical mode; default 0.85)");
    auto* coupled_opt = rank_cmd->add_flag(
        "--coupled", rank.coupled, "derive per-node damping from the stored diagonal");
    auto* damping_opt = rank_cmd->add_option("--damping", rank.damping_path,
                                             "per-node damping file (node<TAB>value)");
    alpha_opt->excludes(coupled_opt)->excludes(damping_opt);
    coupled_opt->excludes(damping_opt);
    rank_cmd->add_option("--solver", rank.solver, "iterative (default) or dense");
    rank_cmd->add_option("--mode", rank.mode,
                         "averaging: full (default) or exclude-diag (dense only)");
    rank_cmd->add_flag("--renormalize", rank.renormalize,
                       "rescale exclude-diag scores to unit sum");
    rank_cmd->add_option("--eps", rank.eps, "damping clamp bound (default 1e-6)");
    rank_cmd->add_option("--tol", rank.solve.tol, "L1 convergence tolerance (default 1e-12)");
    rank_cmd->add_option("--max-iters", rank.solve.max_iters, "iteration cap (default 10000)");
    rank_cmd->add_option("--dangling", rank.dangling,
                         "rows without outflow: sink (default) or uniform");
    auto* format_opt = rank_cmd->add_option("--format", rank.format, "tsv (default) or json");
    auto* pretty_opt =
        rank_cmd->add_flag("--pretty", rank.pretty, "human-readable 6-decimal table");
    pretty_opt->excludes(format_opt);
    rank_cmd->add_option("--labels", rank.labels_path,
                         "node label file (display only, --pretty output)");
    rank_cmd->add_option("--out", rank.out_path, "output file (default stdout)");

    EstimateConfig estimate;
    CLI::App* estimate_cmd = app.add_subcommand(
        "estimate", "Estimate allocation weights and damping from a visit log");
    estimate_cmd->add_option("--log", estimate.log_path, "visit log file")->required();
    estimate_cmd->add_option("--nodes", estimate.nodes, "node count override");
    estimate_cmd->add_option("--counts-out", estimate.counts_out,
                             "write the counts snapshot here");
    estimate_cmd->add_option("--model-out", estimate.model_out,
                             "write the estimated edge list here (default stdout)");
    estimate_cmd->add_option("--policy", estimate.policy,
                             "rows for unvisited nodes: sink (default) or uniform");
    estimate_cmd->add_option("--eps", estimate.eps, "damping clamp bound");

    SimulateConfig simulate;
    CLI::App* simulate_cmd =
        app.add_subcommand("simulate", "Generate a visit log from an edge list");
    simulate_cmd->add_option("--edges", simulate.edges_path, "edge list file")->required();
    simulate_cmd->add_option("--nodes", simulate.nodes, "node count override");
    simulate_cmd->add_option("--sessions", simulate.sessions, "session count")->required();
    simulate_cmd->add_option("--seed", simulate.seed, "64-bit seed")->required();
    simulate_cmd->add_option("--out", simulate.out_path, "visit log output file")->required();
    simulate_cmd->add_option("--max-steps", simulate.max_steps,
                             "per-session visit cap (default 10000)");
    simulate_cmd->add_option("--threads", simulate.threads,
                             "worker threads; the log never depends on this");
    simulate_cmd->add_option("--dangling", simulate.dangling, "sink (default) or uniform");

    DriftConfig drift;
    CLI::App* drift_cmd =
        app.add_subcommand("drift", "Compare allocation rows across two count snapshots");
    drift_cmd->add_option("--old", drift.old_path, "older counts snapshot")->required();
    drift_cmd->add_option("--new", drift.new_path, "newer counts snapshot")->required();
    drift_cmd->add_option("--threshold", drift.threshold,
                          "flagging threshold in (0, 2] (default 0.1)");
    drift_cmd->add_option("--format", drift.format, "tsv (default) or json");
    drift_cmd->add_option("--out", drift.out_path, "output file (default stdout)");

    ValidateConfig validate_cfg;
    CLI::App* validate_cmd = app.add_subcommand(
        "validate", "Check an edge list against the row-stochastic invariants");
    validate_cmd->add_option("--edges", validate_cfg.edges_path, "edge list file")->required();
    validate_cmd->add_option("--nodes", validate_cfg.nodes, "node count override");

    CrosscheckConfig crosscheck;
    CLI::App* crosscheck_cmd = app.add_subcommand(
        "crosscheck", "Run the dense and iterative routes and compare the scores");
    crosscheck_cmd->add_option("--edges", crosscheck.edges_path, "edge list file")->required();
    crosscheck_cmd->add_option("--nodes", crosscheck.nodes, "node count override");
    auto* cc_alpha = crosscheck_cmd->add_option(
        "--alpha", crosscheck.alpha, "uniform damping (checks the classical solver)");
    auto* cc_coupled = crosscheck_cmd->add_flag(
        "--coupled", crosscheck.coupled, "coupled per-node damping (default)");
    cc_alpha->excludes(cc_coupled);
    crosscheck_cmd->add_option("--eps", crosscheck.eps, "damping clamp bound");
    crosscheck_cmd->add_option("--tol", crosscheck.solve.tol, "iterative tolerance");
    crosscheck_cmd->add_option("--max-iters", crosscheck.solve.max_iters, "iteration cap");
    crosscheck_cmd->add_option("--dangling", crosscheck.dangling, "sink (default) or uniform");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }
    rank.alpha_given = alpha_opt->count() > 0;
    crosscheck.alpha_given = cc_alpha->count() > 0;

    try {
        if (rank_cmd->parsed()) {
            return run_rank(rank);
        }
        if (estimate_cmd->parsed()) {
            return run_estimate(estimate);
        }
        if (simulate_cmd->parsed()) {
            return run_simulate(simulate);
        }
        if (drift_cmd->parsed()) {
            return run_drift(drift);
        }
        if (validate_cmd->parsed()) {
            return run_validate(validate_cfg);
        }
        if (crosscheck_cmd->parsed()) {
            return run_crosscheck(crosscheck);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}
