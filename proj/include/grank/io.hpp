#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "grank/graph.hpp"
#include "grank/ingest.hpp"

namespace grank {

// Text formats. All are line-oriented, tab- or comma-separated, with
// `#`-prefixed comment lines and blank lines ignored on input. Writers emit
// canonical ascending order and 17-significant-digit weights, so identical
// data serializes to identical bytes.

/// Edge list: one `source<TAB>target<TAB>weight` per line, 0-based ids.
struct EdgeListData {
    std::vector<Edge> edges;
    std::size_t inferred_n = 0; // max index + 1 over all lines, 0 when empty
};

EdgeListData read_edge_list(std::istream& in);
EdgeListData read_edge_list_file(const std::string& path);
void write_edge_list(std::ostream& out, const RowStochasticMatrix& w);
void write_edge_list_file(const std::string& path, const RowStochasticMatrix& w);

/// Visit log: one session per line as comma-separated 0-based node ids.
struct VisitLogData {
    VisitLog log;
    std::size_t inferred_n = 0;
};

VisitLogData read_visit_log(std::istream& in);
VisitLogData read_visit_log_file(const std::string& path);
void write_visit_log(std::ostream& out, const VisitLog& log);
void write_visit_log_file(const std::string& path, const VisitLog& log);

/// Counts snapshot: for each node, a `i<TAB>visits<TAB>terminations` line
/// followed by that node's `i<TAB>j<TAB>count` transition lines. The first
/// line mentioning a node is its header; every node appears. Snapshots from
/// different batches are merged by reading both and summing.
VisitCounts read_counts(std::istream& in);
VisitCounts read_counts_file(const std::string& path);
void write_counts(std::ostream& out, const VisitCounts& counts);
void write_counts_file(const std::string& path, const VisitCounts& counts);

/// Damping file: one `node<TAB>value` per line; every node in [0, n) exactly
/// once; values clamped into [eps, 1 - eps] like any damping input.
DampingVector read_damping_file(const std::string& path, std::size_t n,
                                double eps = kDefaultEps);

/// Label file: `node<TAB>label` per line; unlisted nodes default to their id.
std::vector<std::string> read_labels_file(const std::string& path, std::size_t n);

} // namespace grank
