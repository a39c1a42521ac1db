#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "chronocal/chronocal.hpp"
#include "support/cli_runner.hpp"

using namespace chronocal;

namespace {

const std::string kExe = CHRONOCAL_CLI_PATH;

std::vector<json> read_jsonl(const clirun::fs::path& p) {
    std::ifstream in(p);
    std::vector<json> out;
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) out.push_back(json::parse(line));
    return out;
}

json read_json(const clirun::fs::path& p) { return json::parse(clirun::read_file(p)); }

void write_text(const clirun::fs::path& p, const std::string& text) { std::ofstream(p) << text; }

class Cli : public ::testing::Test {
protected:
    clirun::Workdir w{CHRONOCAL_FIXTURE_DIR};
};

}  // namespace

TEST_F(Cli, OracleAdjustZeroesExactlyTheChangedIds) {
    ASSERT_EQ(w.run(kExe, "adjust --qa qa_oracle.jsonl --strategy oracle --out adj.jsonl"), 0);
    const auto rows = read_jsonl(w / "adj.jsonl");
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_TRUE(rows[0].contains("_meta"));
    std::set<std::string> zeroed;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double adj = rows[i]["adjusted_confidence"];
        if (adj == 0.0) zeroed.insert(rows[i]["id"].get<std::string>());
        else EXPECT_EQ(adj, rows[i]["confidence"].get<double>());
    }
    EXPECT_EQ(zeroed, (std::set<std::string>{"q2", "q4"}));
}

TEST_F(Cli, EvalDurationOnGoldIsZero) {
    std::string preds;
    for (const auto& f : read_jsonl(w / "facts.jsonl"))
        if (f.contains("duration_seconds"))
            preds += json{{"id", f["id"]}, {"point_log_seconds", std::log(f["duration_seconds"].get<double>())}}.dump() + "\n";
    write_text(w / "gold_preds.jsonl", preds);
    std::string log;
    ASSERT_EQ(w.run(kExe, "eval-duration --predictions gold_preds.jsonl --gold facts.jsonl --split train --out r.json", &log), 0)
        << log;
    const auto r = read_json(w / "r.json");
    EXPECT_NEAR(r["y_mae"].get<double>(), 0.0, 1e-9);
    EXPECT_NEAR(r["ls_mse"].get<double>(), 0.0, 1e-18);
    EXPECT_EQ(r["counts"]["examples"], 40);
}

TEST_F(Cli, OutputsCarryMetaAndResolvedConfig) {
    ASSERT_EQ(w.run(kExe, "stats --input facts.jsonl --out s.json"), 0);
    const auto s = read_json(w / "s.json");
    EXPECT_EQ(s.begin().key(), "_meta");
    EXPECT_EQ(s["_meta"]["tool"], "chronocal");
    EXPECT_EQ(s["_meta"]["version"], kToolVersion);
    EXPECT_EQ(s["_meta"]["command"], "stats");
    const auto cfg = read_json(w / "s.json.config.json");
    EXPECT_EQ(cfg["config_digest"], s["_meta"]["config_digest"]);
    EXPECT_EQ(cfg["options"]["split"], "all");
    EXPECT_EQ(cfg["options"]["lenient"], false);
    EXPECT_EQ(s["count"], 62);
}

TEST_F(Cli, DigestTracksOptions) {
    ASSERT_EQ(w.run(kExe, "stats --input facts.jsonl --out a.json"), 0);
    ASSERT_EQ(w.run(kExe, "stats --input facts.jsonl --out a.json --split all"), 0);
    const auto same = read_json(w / "a.json")["_meta"]["config_digest"];
    ASSERT_EQ(w.run(kExe, "stats --input facts.jsonl --out b.json"), 0);
    ASSERT_EQ(w.run(kExe, "stats --input facts.jsonl --out a.json --split test"), 0);
    EXPECT_NE(read_json(w / "a.json")["_meta"]["config_digest"], same);
    EXPECT_NE(read_json(w / "b.json")["_meta"]["config_digest"], same);
}

TEST_F(Cli, ConfigFileFromFlagOrEnvironment) {
    ASSERT_EQ(w.run(kExe, "--config train.toml train --input facts.jsonl --out m1.json"), 0);
    ASSERT_EQ(w.run(kExe, "train --input facts.jsonl --out m2.json", nullptr, "CHRONOCAL_CONFIG=train.toml"), 0);
    ASSERT_EQ(w.run(kExe, "train --input facts.jsonl --out m3.json --dimension 512 --epochs 8 --seed 3"), 0);
    for (const char* f : {"m1.json", "m2.json", "m3.json"}) {
        const auto m = read_json(w / f);
        EXPECT_EQ(m["dimension"], 512) << f;
        EXPECT_EQ(m["training"]["epochs"], 8) << f;
    }
    auto body = [&](const char* f) {
        auto m = read_json(w / f);
        m.erase("_meta");
        return m;
    };
    EXPECT_EQ(body("m1.json"), body("m2.json"));
    EXPECT_EQ(body("m1.json"), body("m3.json"));
}

TEST_F(Cli, ExitCodes) {
    std::string log;
    EXPECT_EQ(w.run(kExe, "stats --input facts.jsonl --out s.json --no-such-flag", &log), 1);
    EXPECT_EQ(w.run(kExe, "stats --input missing.jsonl --out s.json", &log), 1);
    EXPECT_EQ(w.run(kExe, "frobnicate", &log), 1);

    write_text(w / "bad.jsonl", "{\"id\":\"a\",\"answer\":\"x\",\"confidence\":1.5,\"gold_at_training\":[\"x\"],\"gold_at_query\":[\"x\"]}\n");
    EXPECT_EQ(w.run(kExe, "adjust --qa bad.jsonl --strategy none --out x.jsonl", &log), 1);
    EXPECT_NE(log.find("bad.jsonl: line 1"), std::string::npos) << log;
    EXPECT_FALSE(clirun::fs::exists(w / "x.jsonl"));

    // Id mismatch across files.
    EXPECT_EQ(w.run(kExe, "adjust --qa corpus_a.jsonl --durations calib_durations.jsonl --misalignment-seconds 1e8 --out x.jsonl", &log), 1);
    EXPECT_NE(log.find("no duration prediction for QA id 'r0'"), std::string::npos) << log;

    EXPECT_EQ(w.run(kExe, "train --input facts.jsonl --out m.json --dimension 64 --lr 1e308", &log), 2) << log;
    EXPECT_NE(log.find("contract violation"), std::string::npos) << log;
}

TEST_F(Cli, LenientSkipsBadRecords) {
    write_text(w / "mixed.jsonl",
               clirun::read_file(w / "qa_oracle.jsonl") +
                   "{\"id\":\"q9\",\"answer\":\"x\",\"confidence\":2,\"gold_at_training\":[\"x\"],\"gold_at_query\":[\"x\"]}\n");
    std::string log;
    EXPECT_EQ(w.run(kExe, "adjust --qa mixed.jsonl --strategy none --out x.jsonl"), 1);
    ASSERT_EQ(w.run(kExe, "adjust --qa mixed.jsonl --strategy none --out x.jsonl --lenient", &log), 0);
    EXPECT_NE(log.find("warning: mixed.jsonl"), std::string::npos) << log;
    EXPECT_EQ(read_jsonl(w / "x.jsonl").size(), 5u);
}

TEST_F(Cli, DatesTakePrecedenceOverSeconds) {
    ASSERT_EQ(w.run(kExe, "adjust --qa calib_qa.jsonl --durations calib_durations.jsonl --train-date 2018 "
                          "--query-date 2021 --misalignment-seconds 1 --out a.jsonl"), 0);
    ASSERT_EQ(w.run(kExe, "adjust --qa calib_qa.jsonl --durations calib_durations.jsonl "
                          "--misalignment-seconds 94608000 --out b.jsonl"), 0);
    auto a = read_jsonl(w / "a.jsonl"), b = read_jsonl(w / "b.jsonl");
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 1; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
    std::string log;
    EXPECT_EQ(w.run(kExe, "adjust --qa calib_qa.jsonl --durations calib_durations.jsonl --train-date 2018 --out c.jsonl", &log), 1);
}

TEST_F(Cli, UniformKeepsTotalConfidence) {
    ASSERT_EQ(w.run(kExe, "adjust --qa calib_qa.jsonl --durations calib_durations.jsonl --misalignment-seconds 94608000 "
                          "--out cdf.jsonl"), 0);
    ASSERT_EQ(w.run(kExe, "adjust --qa calib_qa.jsonl --durations calib_durations.jsonl --misalignment-seconds 94608000 "
                          "--strategy uniform --out uni.jsonl"), 0);
    double a = 0, b = 0;
    for (const auto& r : read_jsonl(w / "cdf.jsonl"))
        if (!r.contains("_meta")) a += r["adjusted_confidence"].get<double>();
    for (const auto& r : read_jsonl(w / "uni.jsonl"))
        if (!r.contains("_meta")) b += r["adjusted_confidence"].get<double>();
    EXPECT_NEAR(a, b, 1e-9);
}

TEST_F(Cli, EnsembleReports) {
    ASSERT_EQ(w.run(kExe, "ensemble --closed closed.jsonl --open open.jsonl --durations hybrid_durations.jsonl "
                          "--train-date 2018 --query-date 2021 --out h.jsonl --report h.json"), 0);
    const auto h = read_json(w / "h.json");
    EXPECT_EQ(h["em_pct"], 100.0);
    EXPECT_EQ(h["updated_path_pct"], 40.0);
    ASSERT_EQ(w.run(kExe, "ensemble --closed closed.jsonl --open open.jsonl --durations hybrid_durations.jsonl "
                          "--train-date 2018 --query-date 2021 --p-star 1.1 --out h.jsonl"), 1);

    ASSERT_EQ(w.run(kExe, "ensemble --mode two-corpus --corpus-a corpus_a.jsonl --corpus-b corpus_b.jsonl "
                          "--durations rerank_durations.jsonl --query-date 2021 --out r.jsonl --report r.json"), 0);
    const auto r = read_json(w / "r.json");
    EXPECT_EQ(r["em_pct"], 100.0);
    EXPECT_EQ(r["count"], 12);
    std::string log;
    EXPECT_EQ(w.run(kExe, "ensemble --mode two-corpus --corpus-a corpus_a.jsonl --corpus-b calib_qa.jsonl "
                          "--durations rerank_durations.jsonl --query-date 2021 --out r.jsonl", &log), 1);
}
