#pragma once

// Runs the chronocal binary inside scratch copies of the fixture directory.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace clirun {

namespace fs = std::filesystem;

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Scratch directory holding a copy of every fixture; removed on destruction.
class Workdir {
public:
    explicit Workdir(const fs::path& fixtures) {
        std::random_device rd;
        dir_ = fs::temp_directory_path() / ("chronocal-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(dir_);
        for (const auto& e : fs::directory_iterator(fixtures)) fs::copy_file(e.path(), dir_ / e.path().filename());
    }
    ~Workdir() {
        std::error_code ec;
        fs::remove_all(dir_, ec);
    }
    Workdir(const Workdir&) = delete;
    Workdir& operator=(const Workdir&) = delete;

    const fs::path& path() const { return dir_; }
    fs::path operator/(const std::string& name) const { return dir_ / name; }

    /// Exit status of `chronocal <args>` run with this directory as cwd.
    /// Combined stdout and stderr land in `output`.
    int run(const std::string& exe, const std::string& args, std::string* output = nullptr,
            const std::string& env = {}) const {
        const fs::path log = dir_ / ".log";
        const std::string cmd = "cd '" + dir_.string() + "' && " + env + (env.empty() ? "" : " ") + "'" + exe + "' " +
                                args + " > '" + log.string() + "' 2>&1";
        const int status = std::system(cmd.c_str());
        if (output) *output = read_file(log);
        fs::remove(log);
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

private:
    fs::path dir_;
};

/// One invocation of every subcommand over the committed fixtures, in
/// dependency order.
inline std::vector<std::pair<std::string, std::string>> pipeline() {
    return {
        {"ingest", "ingest --input facts.jsonl --out ingested.jsonl --cloze"},
        {"ingest", "ingest --input mctaco_dev.jsonl --kind mctaco --out ingested_mctaco.jsonl --cloze"},
        {"stats", "stats --input facts.jsonl --split train --out stats.json"},
        {"train", "--config train.toml train --input facts.jsonl --out classifier.json"},
        {"train", "--config train.toml train --kind regressor --input facts.jsonl --out regressor.json"},
        {"predict", "predict --input facts.jsonl --split test --model classifier.json --out pred_cls.jsonl"},
        {"predict", "predict --input facts.jsonl --split test --model regressor.json --out pred_reg.jsonl"},
        {"predict", "predict --input facts.jsonl --split test --baseline random --reference facts.jsonl --out pred_rand.jsonl"},
        {"predict", "predict --input facts.jsonl --split test --baseline average --reference facts.jsonl --out pred_avg.jsonl"},
        {"predict", "predict --input facts.jsonl --split test --baseline upperbound --out pred_ub.jsonl"},
        {"predict", "predict --input mctaco_dev.jsonl --kind mctaco --model classifier.json --out pred_mdev.jsonl"},
        {"predict", "predict --input mctaco_test.jsonl --kind mctaco --model classifier.json --out pred_mtest.jsonl"},
        {"eval-duration", "eval-duration --predictions pred_cls.jsonl --gold facts.jsonl --split test --out eval_cls.json --table eval_cls.txt"},
        {"eval-duration", "eval-duration --predictions pred_reg.jsonl --gold facts.jsonl --split test --out eval_reg.json"},
        {"eval-mctaco", "eval-mctaco --predictions pred_mdev.jsonl --predictions pred_mtest.jsonl --dev mctaco_dev.jsonl "
                        "--test mctaco_test.jsonl --out eval_mctaco.json"},
        {"adjust", "adjust --qa qa_oracle.jsonl --strategy oracle --out adj_oracle4.jsonl"},
        {"adjust", "adjust --qa calib_qa.jsonl --durations calib_durations.jsonl --train-date 2018 --query-date 2021 "
                   "--out adj_cdf.jsonl"},
        {"adjust", "adjust --qa calib_qa.jsonl --durations calib_durations.jsonl --strategy uniform "
                   "--misalignment-seconds 94608000 --out adj_uniform.jsonl"},
        {"adjust", "adjust --qa calib_qa.jsonl --durations calib_durations.jsonl --strategy expectation "
                   "--train-date 2018 --query-date 2021 --out adj_exp.jsonl"},
        {"eval-calibration", "eval-calibration --system base=calib_qa.jsonl --system oracle=calib_oracle.jsonl "
                             "--out report.json"},
        {"eval-calibration", "eval-calibration --system cdf=adj_cdf.jsonl --system uniform=adj_uniform.jsonl "
                             "--target 60 --out report_adj.json --table report_adj.txt"},
        {"ensemble", "ensemble --closed closed.jsonl --open open.jsonl --durations hybrid_durations.jsonl "
                     "--train-date 2018 --query-date 2021 --out hybrid.jsonl --report hybrid.json"},
        {"ensemble", "ensemble --mode two-corpus --corpus-a corpus_a.jsonl --corpus-b corpus_b.jsonl "
                     "--durations rerank_durations.jsonl --query-date 2021-06 --out rerank.jsonl --report rerank.json"},
    };
}

/// The golden report is `report.json` from the pipeline above.
inline constexpr const char* kGoldenReport = "report.json";

}  // namespace clirun
