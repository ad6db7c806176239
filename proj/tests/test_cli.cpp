#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "grank/io.hpp"
#include "support/models.hpp"
#include "support/subprocess.hpp"

using testsupport::CommandResult;
using testsupport::run_cli;
using testsupport::ScratchDir;

namespace {

const char* kTwoCycle = "0\t1\t1\n1\t0\t1\n";
// hub 0 points at both spokes; each spoke points back at the hub
const char* kStar3 = "0\t1\t1\n0\t2\t1\n1\t0\t1\n2\t0\t1\n";
const char* kWorked = "0\t0\t0.2\n0\t1\t0.8\n1\t0\t0.6\n1\t1\t0.4\n";

std::vector<std::pair<long, double>> parse_rank_tsv(const std::string& text) {
    std::vector<std::pair<long, double>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream fields(line);
        long id = -1;
        double score = 0.0;
        fields >> id >> score;
        rows.emplace_back(id, score);
    }
    return rows;
}

} // namespace

TEST_CASE("rank: two-cycle symmetry with ties broken by id") {
    ScratchDir dir;
    dir.write("edges.tsv", kTwoCycle);
    const auto result = run_cli(dir, "rank --edges " + dir.file("edges.tsv") + " --alpha 0.85");
    REQUIRE(result.exit_code == 0);
    const auto rows = parse_rank_tsv(result.out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].first == 0);
    CHECK(rows[1].first == 1);
    CHECK(rows[0].second == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rows[1].second == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("rank: star graph scores to four decimals") {
    ScratchDir dir;
    dir.write("edges.tsv", kStar3);
    const auto result = run_cli(dir, "rank --edges " + dir.file("edges.tsv") + " --alpha 0.5");
    REQUIRE(result.exit_code == 0);
    const auto rows = parse_rank_tsv(result.out);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].first == 0);
    CHECK(std::round(rows[0].second * 1e4) / 1e4 == doctest::Approx(0.4444));
    CHECK(std::round(rows[1].second * 1e4) / 1e4 == doctest::Approx(0.2778));
    CHECK(std::round(rows[2].second * 1e4) / 1e4 == doctest::Approx(0.2778));
}

TEST_CASE("rank: coupled model reproduces the worked fixture") {
    ScratchDir dir;
    dir.write("edges.tsv", kWorked);
    for (const char* solver : {"iterative", "dense"}) {
        const auto result =
            run_cli(dir, "rank --edges " + dir.file("edges.tsv") + " --coupled --solver " +
                             solver);
        REQUIRE(result.exit_code == 0);
        const auto rows = parse_rank_tsv(result.out);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].first == 1);
        CHECK(rows[0].second == doctest::Approx(0.7254902).epsilon(1e-6));
        CHECK(rows[1].second == doctest::Approx(0.2745098).epsilon(1e-6));
    }
}

TEST_CASE("rank: JSON and TSV carry identical values and the agreed keys") {
    ScratchDir dir;
    dir.write("edges.tsv", kWorked);
    const std::string base = "rank --edges " + dir.file("edges.tsv") + " --coupled";
    const auto tsv = run_cli(dir, base);
    const auto json = run_cli(dir, base + " --format json");
    REQUIRE(tsv.exit_code == 0);
    REQUIRE(json.exit_code == 0);

    const auto doc = nlohmann::json::parse(json.out);
    REQUIRE(doc.contains("n"));
    REQUIRE(doc.contains("mode"));
    REQUIRE(doc.contains("scores"));
    REQUIRE(doc.contains("iterations"));
    REQUIRE(doc.contains("residual"));
    CHECK(doc["n"] == 2);
    CHECK(doc["mode"] == "full_n");

    const auto rows = parse_rank_tsv(tsv.out);
    REQUIRE(doc["scores"].size() == rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        CHECK(doc["scores"][k]["id"].get<long>() == rows[k].first);
        // %.17g and the JSON dump round-trip the same double exactly
        CHECK(doc["scores"][k]["score"].get<double>() == rows[k].second);
    }
}

TEST_CASE("rank: explicit damping file matches the coupled shortcut") {
    ScratchDir dir;
    dir.write("edges.tsv", kWorked);
    dir.write("damping.tsv", "0\t0.8\n1\t0.6\n");
    const auto coupled =
        run_cli(dir, "rank --edges " + dir.file("edges.tsv") + " --coupled");
    const auto file =
        run_cli(dir, "rank --edges " + dir.file("edges.tsv") + " --damping " +
                         dir.file("damping.tsv"));
    REQUIRE(coupled.exit_code == 0);
    REQUIRE(file.exit_code == 0);
    CHECK(coupled.out == file.out);

    dir.write("short.tsv", "0\t0.8\n");
    const auto missing =
        run_cli(dir, "rank --edges " + dir.file("edges.tsv") + " --damping " +
                         dir.file("short.tsv"));
    CHECK(missing.exit_code == 1);
}

TEST_CASE("rank: exclude-diag needs the dense solver") {
    ScratchDir dir;
    dir.write("edges.tsv", kTwoCycle);
    const auto rejected = run_cli(
        dir, "rank --edges " + dir.file("edges.tsv") + " --alpha 0.5 --mode exclude-diag");
    CHECK(rejected.exit_code == 2);

    const auto dense =
        run_cli(dir, "rank --edges " + dir.file("edges.tsv") +
                         " --alpha 0.5 --mode exclude-diag --solver dense --format json");
    REQUIRE(dense.exit_code == 0);
    CHECK(nlohmann::json::parse(dense.out)["mode"] == "exclude_diagonal");
}

TEST_CASE("usage errors exit with 2 and do not touch files") {
    ScratchDir dir;
    dir.write("edges.tsv", kTwoCycle);
    CHECK(run_cli(dir, "rank").exit_code == 2);                       // missing --edges
    CHECK(run_cli(dir, "rank --edges x --alpha 1.5").exit_code == 2); // bad alpha, no I/O
    CHECK(run_cli(dir, "nonsense").exit_code == 2);
    CHECK(run_cli(dir, "rank --edges " + dir.file("edges.tsv") + " --alpha 0.5 --coupled")
              .exit_code == 2);
    CHECK(run_cli(dir, "").exit_code == 2);
    CHECK(run_cli(dir, "--help").exit_code == 0);
    CHECK(run_cli(dir, "rank --edges " + dir.file("edges.tsv") + " --tol 0").exit_code == 2);
}

TEST_CASE("missing or malformed inputs exit with 1") {
    ScratchDir dir;
    CHECK(run_cli(dir, "rank --edges " + dir.file("absent.tsv")).exit_code == 1);
    dir.write("broken.tsv", "0\t1\tnot-a-number\n");
    CHECK(run_cli(dir, "rank --edges " + dir.file("broken.tsv")).exit_code == 1);
}

TEST_CASE("validate prints row diagnostics and sets the exit code") {
    ScratchDir dir;
    dir.write("good.tsv", kWorked);
    const auto ok = run_cli(dir, "validate --edges " + dir.file("good.tsv"));
    CHECK(ok.exit_code == 0);
    CHECK(ok.out == "ok\n");

    dir.write("bad.tsv", "0\t0\t0.2\n0\t1\t0.7\n1\t0\t1\n");
    const auto bad = run_cli(dir, "validate --edges " + dir.file("bad.tsv"));
    CHECK(bad.exit_code == 1);
    const std::string tag = "row 0: row-sum ";
    const auto pos = bad.out.find(tag);
    REQUIRE(pos != std::string::npos);
    CHECK(std::stod(bad.out.substr(pos + tag.size())) == doctest::Approx(0.9));
}

TEST_CASE("simulate: byte-identical across repeats and thread counts") {
    ScratchDir dir;
    dir.write("edges.tsv", kWorked);
    const std::string base = "simulate --edges " + dir.file("edges.tsv") +
                             " --sessions 2000 --seed 7 --out ";
    REQUIRE(run_cli(dir, base + dir.file("a.log")).exit_code == 0);
    REQUIRE(run_cli(dir, base + dir.file("b.log")).exit_code == 0);
    REQUIRE(run_cli(dir, base + dir.file("c.log") + " --threads 4").exit_code == 0);

    const auto a = testsupport::slurp(dir.file("a.log"));
    CHECK(a == testsupport::slurp(dir.file("b.log")));
    CHECK(a == testsupport::slurp(dir.file("c.log")));
    CHECK_FALSE(a.empty());

    const auto summary = run_cli(dir, base + dir.file("d.log"));
    CHECK(summary.err.find("force_terminations=0") != std::string::npos);
}

TEST_CASE("estimate and drift round trip through files") {
    ScratchDir dir;
    dir.write("edges.tsv", kWorked);
    REQUIRE(run_cli(dir, "simulate --edges " + dir.file("edges.tsv") +
                             " --sessions 30000 --seed 11 --out " + dir.file("old.log"))
                .exit_code == 0);
    REQUIRE(run_cli(dir, "simulate --edges " + dir.file("edges.tsv") +
                             " --sessions 30000 --seed 12 --out " + dir.file("new.log"))
                .exit_code == 0);

    REQUIRE(run_cli(dir, "estimate --log " + dir.file("old.log") + " --counts-out " +
                             dir.file("old.counts") + " --model-out " + dir.file("model.tsv"))
                .exit_code == 0);
    REQUIRE(run_cli(dir, "estimate --log " + dir.file("new.log") + " --counts-out " +
                             dir.file("new.counts"))
                .exit_code == 0);

    // The estimated model is close to the truth, so reranking it stays close.
    const auto truth = run_cli(dir, "rank --edges " + dir.file("edges.tsv") + " --coupled");
    const auto est = run_cli(dir, "rank --edges " + dir.file("model.tsv") + " --coupled");
    const auto t_rows = parse_rank_tsv(truth.out);
    const auto e_rows = parse_rank_tsv(est.out);
    REQUIRE(t_rows.size() == e_rows.size());
    for (std::size_t k = 0; k < t_rows.size(); ++k) {
        CHECK(t_rows[k].first == e_rows[k].first);
        CHECK(std::abs(t_rows[k].second - e_rows[k].second) <= 0.02);
    }

    // Same generating matrix on both sides: no drift at a tight threshold.
    const auto drift = run_cli(dir, "drift --old " + dir.file("old.counts") + " --new " +
                                        dir.file("new.counts") + " --threshold 0.05");
    REQUIRE(drift.exit_code == 0);
    CHECK(drift.out.find("insufficient") == std::string::npos);
    CHECK(drift.out.find("drift") == std::string::npos);

    // A shifted snapshot must flag: reuse old counts against a hand-made one.
    dir.write("skewed.counts", "0\t10\t10\n1\t1\t1\n");
    const auto flagged = run_cli(dir, "drift --old " + dir.file("old.counts") + " --new " +
                                          dir.file("skewed.counts") + " --threshold 0.3");
    CHECK(flagged.exit_code == 0);
    CHECK(flagged.out.find("drift") != std::string::npos);

    const auto bad_threshold = run_cli(dir, "drift --old " + dir.file("old.counts") +
                                                " --new " + dir.file("new.counts") +
                                                " --threshold 3");
    CHECK(bad_threshold.exit_code == 2);
}

TEST_CASE("every subcommand is byte-deterministic across repeats") {
    ScratchDir dir;
    dir.write("edges.tsv", kWorked);
    REQUIRE(run_cli(dir, "simulate --edges " + dir.file("edges.tsv") +
                             " --sessions 5000 --seed 3 --out " + dir.file("s.log"))
                .exit_code == 0);
    REQUIRE(run_cli(dir, "estimate --log " + dir.file("s.log") + " --counts-out " +
                             dir.file("c1.counts"))
                .exit_code == 0);
    REQUIRE(run_cli(dir, "estimate --log " + dir.file("s.log") + " --counts-out " +
                             dir.file("c2.counts"))
                .exit_code == 0);
    CHECK(testsupport::slurp(dir.file("c1.counts")) ==
          testsupport::slurp(dir.file("c2.counts")));

    const std::vector<std::string> commands = {
        "rank --edges " + dir.file("edges.tsv") + " --coupled --format json",
        "rank --edges " + dir.file("edges.tsv") + " --alpha 0.85",
        "rank --edges " + dir.file("edges.tsv") + " --coupled --solver dense --pretty",
        "estimate --log " + dir.file("s.log"),
        "drift --old " + dir.file("c1.counts") + " --new " + dir.file("c2.counts") +
            " --threshold 0.1",
        "validate --edges " + dir.file("edges.tsv"),
        "crosscheck --edges " + dir.file("edges.tsv"),
        "crosscheck --edges " + dir.file("edges.tsv") + " --alpha 0.6",
    };
    for (const auto& command : commands) {
        CAPTURE(command);
        const auto first = run_cli(dir, command);
        const auto second = run_cli(dir, command);
        CHECK(first.exit_code == second.exit_code);
        CHECK(first.out == second.out);
        CHECK_FALSE(first.out.empty());
    }
}

TEST_CASE("crosscheck stays green on seeded random models") {
    ScratchDir dir;
    std::size_t index = 0;
    for (const std::size_t n : {std::size_t{5}, std::size_t{50}, std::size_t{200}}) {
        const std::size_t per_size = n == 200 ? 16 : 17; // 50 models in total
        for (std::size_t k = 0; k < per_size; ++k, ++index) {
            const auto w = testsupport::random_row_stochastic(n, 6, 1000 + index);
            std::ostringstream file;
            grank::write_edge_list(file, w);
            const std::string name = "model" + std::to_string(index) + ".tsv";
            dir.write(name, file.str());

            const auto coupled = run_cli(dir, "crosscheck --edges " + dir.file(name));
            CAPTURE(index);
            CHECK(coupled.exit_code == 0);
        }
    }
}

TEST_CASE("labels decorate the pretty table only") {
    ScratchDir dir;
    dir.write("edges.tsv", kStar3);
    dir.write("labels.tsv", "0\thub\n1\tleft spoke\n");
    const auto pretty =
        run_cli(dir, "rank --edges " + dir.file("edges.tsv") + " --alpha 0.5 --pretty "
                     "--labels " + dir.file("labels.tsv"));
    REQUIRE(pretty.exit_code == 0);
    CHECK(pretty.out.find("hub") != std::string::npos);
    CHECK(pretty.out.find("left spoke") != std::string::npos);
    CHECK(pretty.out.find("\t2\t2\t") != std::string::npos); // unlabeled id fallback

    const auto tsv = run_cli(dir, "rank --edges " + dir.file("edges.tsv") +
                                      " --alpha 0.5 --labels " + dir.file("labels.tsv"));
    REQUIRE(tsv.exit_code == 0);
    CHECK(tsv.out.find("hub") == std::string::npos);
}
