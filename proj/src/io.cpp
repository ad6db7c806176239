#include "grank/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string_view>

namespace grank {

namespace {

std::string fmt_weight(double w) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", w);
    return buf;
}

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
    std::ostringstream msg;
    msg << "line " << line_no << ": " << what;
    throw ParseError(msg.str());
}

bool skip_line(const std::string& line) {
    for (char c : line) {
        if (c == '#') {
            return true;
        }
        if (!std::isspace(static_cast<unsigned char>(c))) {
            return false;
        }
    }
    return true; // blank
}

struct FieldReader {
    const std::string& line;
    std::size_t line_no;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) {
            ++pos;
        }
    }

    std::string_view next_token(const char* what) {
        skip_ws();
        const std::size_t start = pos;
        while (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos]))) {
            ++pos;
        }
        if (start == pos) {
            parse_fail(line_no, std::string("missing ") + what);
        }
        return std::string_view(line).substr(start, pos - start);
    }

    NodeId next_node(const char* what) {
        const std::string_view tok = next_token(what);
        std::uint64_t value = 0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
        if (ec != std::errc{} || ptr != tok.data() + tok.size() ||
            value > std::numeric_limits<NodeId>::max()) {
            parse_fail(line_no, std::string("invalid ") + what + " '" + std::string(tok) + "'");
        }
        return static_cast<NodeId>(value);
    }

    std::uint64_t next_count(const char* what) {
        const std::string_view tok = next_token(what);
        std::uint64_t value = 0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
        if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
            parse_fail(line_no, std::string("invalid ") + what + " '" + std::string(tok) + "'");
        }
        return value;
    }

    double next_double(const char* what) {
        const std::string_view tok = next_token(what);
        // from_chars for double is incomplete on some toolchains; strtod on a
        // bounded copy keeps parsing locale-independent enough for C locale use.
        const std::string copy(tok);
        char* end = nullptr;
        const double value = std::strtod(copy.c_str(), &end);
        if (end != copy.c_str() + copy.size()) {
            parse_fail(line_no, std::string("invalid ") + what + " '" + copy + "'");
        }
        return value;
    }

    void expect_end() {
        skip_ws();
        if (pos != line.size()) {
            parse_fail(line_no, "unexpected trailing data '" + line.substr(pos) + "'");
        }
    }
};

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open '" + path + "' for reading");
    }
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot open '" + path + "' for writing");
    }
    return out;
}

void check_stream_wrote(std::ostream& out, const std::string& what) {
    if (!out) {
        throw Error("write failed: " + what);
    }
}

} // namespace

EdgeListData read_edge_list(std::istream& in) {
    EdgeListData data;
    std::string line;
    std::size_t line_no = 0;
    std::size_t max_id = 0;
    bool any = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (skip_line(line)) {
            continue;
        }
        FieldReader fields{line, line_no};
        Edge e;
        e.source = fields.next_node("source id");
        e.target = fields.next_node("target id");
        e.weight = fields.next_double("weight");
        fields.expect_end();
        data.edges.push_back(e);
        max_id = std::max({max_id, static_cast<std::size_t>(e.source),
                           static_cast<std::size_t>(e.target)});
        any = true;
    }
    data.inferred_n = any ? max_id + 1 : 0;
    return data;
}

EdgeListData read_edge_list_file(const std::string& path) {
    std::ifstream in = open_input(path);
    return read_edge_list(in);
}

void write_edge_list(std::ostream& out, const RowStochasticMatrix& w) {
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto targets = w.row_targets(i);
        const auto weights = w.row_weights(i);
        for (std::size_t k = 0; k < targets.size(); ++k) {
            out << i << '\t' << targets[k] << '\t' << fmt_weight(weights[k]) << '\n';
        }
    }
    check_stream_wrote(out, "edge list");
}

void write_edge_list_file(const std::string& path, const RowStochasticMatrix& w) {
    std::ofstream out = open_output(path);
    write_edge_list(out, w);
}

VisitLogData read_visit_log(std::istream& in) {
    VisitLogData data;
    std::string line;
    std::size_t line_no = 0;
    std::size_t max_id = 0;
    bool any = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (skip_line(line)) {
            continue;
        }
        std::vector<NodeId> session;
        std::size_t start = 0;
        while (start <= line.size()) {
            std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                comma = line.size();
            }
            std::string token = line.substr(start, comma - start);
            // allow surrounding spaces around each id
            const auto first = token.find_first_not_of(" \t");
            if (first == std::string::npos) {
                parse_fail(line_no, "empty node id");
            }
            const auto last = token.find_last_not_of(" \t");
            token = token.substr(first, last - first + 1);

            std::uint64_t value = 0;
            const auto [ptr, ec] =
                std::from_chars(token.data(), token.data() + token.size(), value);
            if (ec != std::errc{} || ptr != token.data() + token.size() ||
                value > std::numeric_limits<NodeId>::max()) {
                parse_fail(line_no, "invalid node id '" + token + "'");
            }
            session.push_back(static_cast<NodeId>(value));
            max_id = std::max(max_id, static_cast<std::size_t>(value));
            any = true;
            if (comma == line.size()) {
                break;
            }
            start = comma + 1;
        }
        data.log.sessions.push_back(std::move(session));
    }
    data.inferred_n = any ? max_id + 1 : 0;
    return data;
}

VisitLogData read_visit_log_file(const std::string& path) {
    std::ifstream in = open_input(path);
    return read_visit_log(in);
}

void write_visit_log(std::ostream& out, const VisitLog& log) {
    for (const auto& session : log.sessions) {
        for (std::size_t k = 0; k < session.size(); ++k) {
            if (k > 0) {
                out << ',';
            }
            out << session[k];
        }
        out << '\n';
    }
    check_stream_wrote(out, "visit log");
}

void write_visit_log_file(const std::string& path, const VisitLog& log) {
    std::ofstream out = open_output(path);
    write_visit_log(out, log);
}

VisitCounts read_counts(std::istream& in) {
    struct NodeBlock {
        std::uint64_t visits = 0;
        std::uint64_t terminations = 0;
        VisitCounts::TransitionRow transitions;
    };
    std::map<NodeId, NodeBlock> blocks;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (skip_line(line)) {
            continue;
        }
        FieldReader fields{line, line_no};
        const NodeId i = fields.next_node("node id");
        const auto it = blocks.find(i);
        if (it == blocks.end()) {
            NodeBlock block;
            block.visits = fields.next_count("visit count");
            block.terminations = fields.next_count("termination count");
            fields.expect_end();
            blocks.emplace(i, std::move(block));
        } else {
            const NodeId j = fields.next_node("target id");
            const std::uint64_t count = fields.next_count("transition count");
            fields.expect_end();
            it->second.transitions.emplace_back(j, count);
        }
    }
    if (blocks.empty()) {
        throw ParseError("counts snapshot contains no node lines");
    }

    const std::size_t n = static_cast<std::size_t>(blocks.rbegin()->first) + 1;
    if (blocks.size() != n) {
        std::ostringstream msg;
        msg << "counts snapshot covers " << blocks.size() << " nodes but the highest id is "
            << (n - 1) << "; every node needs a header line";
        throw ParseError(msg.str());
    }

    std::vector<std::uint64_t> visits(n, 0);
    std::vector<std::uint64_t> terminations(n, 0);
    std::vector<VisitCounts::TransitionRow> transitions(n);
    for (auto& [i, block] : blocks) {
        visits[i] = block.visits;
        terminations[i] = block.terminations;
        transitions[i] = std::move(block.transitions);
    }
    return VisitCounts::from_parts(std::move(visits), std::move(terminations),
                                   std::move(transitions));
}

VisitCounts read_counts_file(const std::string& path) {
    std::ifstream in = open_input(path);
    return read_counts(in);
}

void write_counts(std::ostream& out, const VisitCounts& counts) {
    for (std::size_t i = 0; i < counts.size(); ++i) {
        out << i << '\t' << counts.visits(i) << '\t' << counts.terminations(i) << '\n';
        for (const auto& [target, count] : counts.transitions(i)) {
            out << i << '\t' << target << '\t' << count << '\n';
        }
    }
    check_stream_wrote(out, "counts snapshot");
}

void write_counts_file(const std::string& path, const VisitCounts& counts) {
    std::ofstream out = open_output(path);
    write_counts(out, counts);
}

DampingVector read_damping_file(const std::string& path, std::size_t n, double eps) {
    std::ifstream in = open_input(path);

    std::vector<double> values(n, -1.0);
    std::vector<bool> seen(n, false);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (skip_line(line)) {
            continue;
        }
        FieldReader fields{line, line_no};
        const NodeId i = fields.next_node("node id");
        const double a = fields.next_double("damping value");
        fields.expect_end();
        if (static_cast<std::size_t>(i) >= n) {
            parse_fail(line_no, "node id outside [0, " + std::to_string(n) + ")");
        }
        if (seen[i]) {
            parse_fail(line_no, "duplicate damping entry for node " + std::to_string(i));
        }
        seen[i] = true;
        values[i] = a;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!seen[i]) {
            throw ParseError("damping file is missing node " + std::to_string(i));
        }
    }
    return DampingVector(std::move(values), eps);
}

std::vector<std::string> read_labels_file(const std::string& path, std::size_t n) {
    std::ifstream in = open_input(path);

    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = std::to_string(i);
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (skip_line(line)) {
            continue;
        }
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            parse_fail(line_no, "expected `id<TAB>label`");
        }
        const std::string id_token = line.substr(0, tab);
        std::uint64_t value = 0;
        const auto [ptr, ec] =
            std::from_chars(id_token.data(), id_token.data() + id_token.size(), value);
        if (ec != std::errc{} || ptr != id_token.data() + id_token.size()) {
            parse_fail(line_no, "invalid node id '" + id_token + "'");
        }
        if (value >= n) {
            parse_fail(line_no, "node id outside [0, " + std::to_string(n) + ")");
        }
        labels[value] = line.substr(tab + 1);
    }
    return labels;
}

} // namespace grank
