#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "refine/cli.hpp"
#include "refine/harness.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace refine;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli_main(args, out, err);
    return CliResult{code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("refine-cli-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

const fs::path kDemoScript = fs::path(REFINE_DATA_DIR) / "demo_script.json";
const fs::path kDemoCorpus = fs::path(REFINE_DATA_DIR) / "demo_corpus.jsonl";

} // namespace

TEST_CASE("templates subcommand prints the prompt set") {
    const auto result = run_cli({"templates"});
    CHECK(result.code == 0);
    CHECK(result.out.find("Please list the defects of answer {a} to the question {q}.") !=
          std::string::npos);
    CHECK(result.out.find("is not optimal because that {d}") != std::string::npos);
    CHECK(result.out.find("Do not reply anything else than a number!") !=
          std::string::npos);
    CHECK(result.out.find("may be suboptimal") != std::string::npos);
}

TEST_CASE("ask requires a question") {
    const auto result = run_cli({"ask"});
    CHECK(result.code == 1);
    CHECK_FALSE(result.err.empty());
}

TEST_CASE("ask runs the scripted demo end to end") {
    const auto result = run_cli({"ask", "--question", "Who was the father of Shinkansen?",
                                 "--max-iters", "3", "--mode", "full", "--backend",
                                 "scripted", "--script", kDemoScript.string()});
    CHECK(result.code == 0);
    // votes "2" then "1": the first refinement wins, the second is rejected
    CHECK(result.out ==
          "Shinji Sogō, the president of Japanese National Railways, is known as the "
          "father of Shinkansen for championing the Tōkaidō Shinkansen project that "
          "opened in 1964.\n");
}

TEST_CASE("ask --verbose narrates the loop on stderr") {
    const auto result = run_cli({"ask", "--question", "Who was the father of Shinkansen?",
                                 "--backend", "scripted", "--script",
                                 kDemoScript.string(), "--verbose"});
    CHECK(result.code == 0);
    CHECK(result.err.find("[round 0] initial") != std::string::npos);
    CHECK(result.err.find("[round 1] defect") != std::string::npos);
    CHECK(result.err.find("stop: vote_rejected") != std::string::npos);
}

TEST_CASE("ask writes a transcript when asked") {
    TempDir dir;
    const auto out_path = dir.path / "session.jsonl";
    const auto result = run_cli({"ask", "--question", "Who was the father of Shinkansen?",
                                 "--backend", "scripted", "--script",
                                 kDemoScript.string(), "--out", out_path.string()});
    CHECK(result.code == 0);
    const auto transcripts = read_transcripts(out_path);
    REQUIRE(transcripts.size() == 1);
    CHECK(transcripts[0].stop_reason == StopReason::VoteRejected);
    CHECK(transcripts[0].records.size() == 2);
}

TEST_CASE("ask maps flag misuse to exit 1") {
    CHECK(run_cli({"ask", "--question", "q?", "--backend", "scripted"}).code == 1);
    CHECK(run_cli({"ask", "--question", "q?", "--mode", "bogus"}).code == 1);
    CHECK(run_cli({"ask", "--question", "   "}).code == 1);
    CHECK(run_cli({"bogus-subcommand"}).code == 1);
    CHECK(run_cli({}).code == 1);
}

TEST_CASE("missing script file is a runtime error") {
    const auto result = run_cli({"ask", "--question", "q?", "--backend", "scripted",
                                 "--script", "/nonexistent/script.json"});
    CHECK(result.code == 2);
    CHECK_FALSE(result.err.empty());
}

TEST_CASE("an aborted session still prints the best answer but fails") {
    TempDir dir;
    const auto script = dir.path / "thin.json";
    std::ofstream(script) << R"({"initial":[{"content":"only the initial"}]})";
    const auto result = run_cli({"ask", "--question", "q?", "--backend", "scripted",
                                 "--script", script.string(), "--max-iters", "2"});
    CHECK(result.code == 2);
    CHECK(result.out == "only the initial\n");
    CHECK(result.err.find("backend error") != std::string::npos);
}

TEST_CASE("help exits zero") {
    CHECK(run_cli({"--help"}).code == 0);
    CHECK(run_cli({"ask", "--help"}).code == 0);
}

TEST_CASE("corpus then report round-trip through files") {
    TempDir dir;
    const auto out_path = dir.path / "batch.jsonl";

    const auto corpus_result =
        run_cli({"corpus", "--file", kDemoCorpus.string(), "--modes", "full", "--out",
                 out_path.string(), "--backend", "scripted", "--script",
                 kDemoScript.string(), "--max-iters", "1"});
    CHECK(corpus_result.code == 0);
    // demo script has material for one full session; the other four items
    // record backend errors without sinking the batch
    const auto transcripts = read_transcripts(out_path);
    REQUIRE(transcripts.size() == 5);
    CHECK(transcripts[0].query.id == "q1");

    SUBCASE("report without prices emits token columns only") {
        const auto report_result = run_cli({"report", "--in", out_path.string()});
        CHECK(report_result.code == 0);
        CHECK(report_result.out.find("tokens:") != std::string::npos);
        CHECK(report_result.out.find("pricing") == std::string::npos);
    }
    SUBCASE("report with prices adds monetary columns") {
        const auto prices = fs::path(REFINE_DATA_DIR) / "prices.example.json";
        const auto report_result = run_cli({"report", "--in", out_path.string(),
                                            "--prices", prices.string(), "--model",
                                            "gpt-3.5-turbo"});
        CHECK(report_result.code == 0);
        CHECK(report_result.out.find("pricing") != std::string::npos);
        CHECK(report_result.out.find("gpt-4") != std::string::npos);
    }
}

TEST_CASE("corpus with all three modes multiplies the output") {
    TempDir dir;
    const auto script = dir.path / "big.json";
    {
        // plenty of material: 15 sessions, 1 round each
        std::ostringstream body;
        auto repeat = [](const std::string& item, int n) {
            std::string list;
            for (int i = 0; i < n; ++i) {
                if (i) list += ",";
                list += item;
            }
            return list;
        };
        body << "{\"initial\":[" << repeat(R"({"content":"A0"})", 15) << "],"
             << "\"defect\":[" << repeat(R"({"content":"dd"})", 15) << "],"
             << "\"optimize\":[" << repeat(R"({"content":"CC"})", 15) << "],"
             << "\"blind_optimize\":[" << repeat(R"({"content":"BB"})", 15) << "],"
             << "\"vote\":[" << repeat(R"({"content":"2"})", 15) << "]}";
        std::ofstream(script) << body.str();
    }
    const auto out_path = dir.path / "all-modes.jsonl";
    const auto result = run_cli({"corpus", "--file", kDemoCorpus.string(), "--modes",
                                 "full,blind,reckless", "--out", out_path.string(),
                                 "--backend", "scripted", "--script", script.string(),
                                 "--max-iters", "1"});
    CHECK(result.code == 0);
    CHECK(read_transcripts(out_path).size() == 15);
}

TEST_CASE("report on a missing file is a runtime error") {
    CHECK(run_cli({"report", "--in", "/nonexistent/t.jsonl"}).code == 2);
}
