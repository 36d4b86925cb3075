#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "support.hpp"
#include "viprof/io.hpp"

using namespace viprof::testing;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string output;  // stdout and stderr together
};

Run cli(const std::string& args, const ScratchDir& dir) {
    const auto log = dir / "cli.log";
    const std::string cmd = std::string("'") + VIPROF_CLI_PATH + "' " + args + " > '" + log.string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    r.output = ss.str();
    return r;
}

std::string slurp(const fs::path& p) { return viprof::io::read_text_file(p); }

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

} // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with 1") {
    ScratchDir dir("cli_usage");
    CHECK(cli("--help", dir).code == 0);
    CHECK(cli("eval --help", dir).code == 0);
    CHECK(cli("", dir).code == 1);
    CHECK(cli("frobnicate", dir).code == 1);
    CHECK(cli("folds --k 5", dir).code == 1);
    CHECK(cli("stats --corpus x --format yaml", dir).code == 1);
    const auto unknown = cli("stats --corpus x --bogus-flag", dir);
    CHECK(unknown.code == 1);
    CHECK(unknown.output.find("--bogus-flag") != std::string::npos);
    CHECK(unknown.output.find("Usage:") != std::string::npos);
}

TEST_CASE("synth output is byte-identical for a seed") {
    ScratchDir dir("cli_synth");
    const std::string args = " --profiles 5 --images-min 1 --images-max 2 --tweets 2 --seed 11";
    REQUIRE(cli("synth --out " + q(dir / "a") + args, dir).code == 0);
    REQUIRE(cli("synth --out " + q(dir / "b") + args, dir).code == 0);
    for (const char* f : {"embeddings.jsonl", "corpus/truth.txt", "corpus/images.csv", "corpus/u0003.xml"})
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    CHECK(cli("synth --out " + q(dir / "c") + " --age-classes 0", dir).code == 1);
}

TEST_CASE("data errors exit with 2 and name the path") {
    ScratchDir dir("cli_data");
    const auto r = cli("stats --corpus " + q(dir / "nowhere.json"), dir);
    CHECK(r.code == 2);
    CHECK(r.output.find("nowhere.json") != std::string::npos);

    const auto ev = cli("eval --method t1 --corpus " + q(dir / "gone.json") + " --folds " + q(dir / "f.json"), dir);
    CHECK(ev.code == 2);
    CHECK(ev.output.find("gone.json") != std::string::npos);

    std::ofstream(dir / "bad.json") << "{ not json";
    const auto bad = cli("stats --corpus " + q(dir / "bad.json"), dir);
    CHECK(bad.code == 2);
    CHECK(bad.output.find("bad.json") != std::string::npos);
}

TEST_CASE("end-to-end run is reproducible") {
    ScratchDir dir("cli_e2e");
    const auto data = dir / "data";
    REQUIRE(cli("synth --out " + q(data) +
                       " --profiles 12 --age-classes 2 --images-min 2 --images-max 3 --tweets 4 --seed 3",
                   dir)
                .code == 0);
    CHECK(fs::exists(data / "corpus" / "truth.txt"));
    CHECK(fs::exists(data / "embeddings.jsonl"));
    CHECK(fs::exists(data / "run_config.json"));

    const auto snap = dir / "corpus.json";
    REQUIRE(cli("ingest --root " + q(data / "corpus") + " --out " + q(snap), dir).code == 0);
    const auto stats = cli("stats --corpus " + q(snap) + " --format markdown", dir);
    CHECK(stats.code == 0);
    CHECK(stats.output.find("| EN |") != std::string::npos);

    REQUIRE(cli("folds --corpus " + q(snap) + " --k 3 --task gender --seed 1 --out " + q(dir / "folds.json"), dir)
                .code == 0);
    // strict age folds cannot be built: each age class has 6 profiles
    CHECK(cli("folds --corpus " + q(snap) + " --k 8 --task age --out " + q(dir / "f.json"), dir).code == 2);

    const std::string common = "--corpus " + q(snap) + " --embeddings " + q(data / "embeddings.jsonl") +
                               " --folds " + q(dir / "folds.json") + " --task gender";
    REQUIRE(cli("eval --method v4 " + common + " --out " + q(dir / "r1.json"), dir).code == 0);
    REQUIRE(cli("-j 3 eval --method v4 " + common + " --out " + q(dir / "r2.json"), dir).code == 0);
    CHECK(slurp(dir / "r1.json") == slurp(dir / "r2.json"));
    CHECK(fs::exists(dir / "r1.json.config.json"));

    const auto md = cli("eval --method v3 --source retweets --format markdown " + common, dir);
    CHECK(md.code == 0);
    CHECK(md.output.find("V3: LL-CNN (retweets)") != std::string::npos);

    // a gender plan used for an age task needs the explicit flag
    const std::string age_common = "--corpus " + q(snap) + " --embeddings " + q(data / "embeddings.jsonl") +
                                   " --folds " + q(dir / "folds.json") + " --task age";
    CHECK(cli("eval --method v4 " + age_common, dir).code == 1);
    CHECK(cli("eval --method v4 --shared-folds " + age_common, dir).code == 0);

    CHECK(cli("eval-scenarios --variant c " + common + " --out " + q(dir / "sc.json"), dir).code == 0);
    CHECK(cli("eval-per-image --train-source tweets " + common + " --out " + q(dir / "pi.json"), dir).code == 0);
    CHECK(cli("eval-thousand-words --chunk 10 " + common + " --out " + q(dir / "tw.json"), dir).code == 0);
    // text method without embeddings
    CHECK(cli("eval --method t1 --corpus " + q(snap) + " --folds " + q(dir / "folds.json"), dir).code == 0);
    CHECK(cli("eval --method v4 --corpus " + q(snap) + " --folds " + q(dir / "folds.json"), dir).code == 1);

    const auto an = dir / "analysis";
    REQUIRE(cli("analyze --corpus " + q(snap) + " --embeddings " + q(data / "embeddings.jsonl") +
                       " --group-by gender --top 6 --out " + q(an),
                   dir)
                .code == 0);
    for (const char* f : {"histograms.json", "differences.json", "differences.md", "cloud_female_en.csv",
                          "run_config.json"})
        CHECK(fs::exists(an / f));
    CHECK(cli("analyze --corpus " + q(snap) + " --embeddings " + q(data / "embeddings.jsonl") +
                     " --top 5 --out " + q(an),
                 dir)
              .code == 1);

    const auto feats = dir / "feats";
    REQUIRE(cli("featurize visual --corpus " + q(snap) + " --embeddings " + q(data / "embeddings.jsonl") +
                       " --out " + q(feats / "protos.jsonl"),
                   dir)
                .code == 0);
    REQUIRE(cli("train --features " + q(feats / "protos.jsonl") + " --labels " + q(snap) + " --out " +
                       q(dir / "model.json"),
                   dir)
                .code == 0);
    CHECK(slurp(dir / "model.json").find("\"classes\"") != std::string::npos);
    CHECK(cli("featurize text --corpus " + q(snap) + " --folds " + q(dir / "folds.json") + " --k 50 --out " +
                     q(feats / "text"),
                 dir)
              .code == 0);
}

}
