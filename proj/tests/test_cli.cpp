#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

#ifdef GWRS_BIN_PATH

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(GWRS_BIN_PATH) + " " + args + " 2>&1";
    RunResult r;
    std::FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    while (std::fgets(buf, sizeof buf, pipe) != nullptr) r.output += buf;
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

/// Last line of the output that parses as a JSON object.
json last_json(const std::string& text) {
    std::string line;
    std::string best;
    for (std::size_t pos = 0; pos <= text.size();) {
        const std::size_t nl = text.find('\n', pos);
        line = text.substr(pos, nl == std::string::npos ? nl : nl - pos);
        if (!line.empty() && line.front() == '{') best = line;
        if (nl == std::string::npos) break;
        pos = nl + 1;
    }
    REQUIRE(!best.empty());
    return json::parse(best);
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("gwrs_cli_" + std::to_string(static_cast<unsigned>(::getpid())));
        fs::create_directories(path);
    }
    ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
};

fs::path write_text(const fs::path& dir, const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream out(p);
    out << text;
    return p;
}

const std::string kIntervalSpec = R"({"type":"box","lo":[-0.5],"hi":[0.5]})";
const std::string kBallSpec = R"({"type":"ball","center":[0.1,-0.05],"radius":0.43})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("norm of the unit interval matches the lattice closed form") {
    TempDir tmp;
    const fs::path spec = write_text(tmp.path, "interval.spec", kIntervalSpec);
    RunResult r = run_cli("norm --shape " + spec.string() + " --k 2 --n 1024");
    REQUIRE(r.exit_code == 0);
    json row = last_json(r.output);
    CHECK(row["k"] == 2);
    const double expect = 2.0 / 3.0 + 1.0 / (3.0 * 512.0 * 512.0);
    CHECK(row["power_value"].get<double>() == doctest::Approx(expect).epsilon(1e-12));
    CHECK(row["method"] == "recursive");
    CHECK(row["measure"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fourier method agrees with the recursive one") {
    TempDir tmp;
    const fs::path spec = write_text(tmp.path, "interval.spec", kIntervalSpec);
    RunResult a = run_cli("norm --shape " + spec.string() + " --k 2 --n 256");
    RunResult b = run_cli("norm --shape " + spec.string() + " --k 2 --n 256 --method fourier");
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    CHECK(last_json(a.output)["power_value"].get<double>() ==
          doctest::Approx(last_json(b.output)["power_value"].get<double>()).epsilon(1e-12));
    CHECK(last_json(b.output)["method"] == "fourier-u2");
    // fourier evaluation exists only at order 2
    CHECK(run_cli("norm --shape " + spec.string() + " --k 3 --method fourier").exit_code == 2);
}

TEST_CASE("empty difference shape reports zero norm") {
    TempDir tmp;
    const fs::path spec = write_text(
        tmp.path, "empty.spec",
        R"({"type":"difference","minuend":{"type":"ball","center":[0.0],"radius":0.3},)"
        R"("subtrahend":{"type":"ball","center":[0.0],"radius":0.4}})");
    RunResult r = run_cli("norm --shape " + spec.string() + " --k 3 --n 64");
    REQUIRE(r.exit_code == 0);
    json row = last_json(r.output);
    CHECK(row["power_value"] == 0.0);
    CHECK(row["norm_value"] == 0.0);
}

TEST_CASE("compare-star reports a ratio near one for a ball") {
    TempDir tmp;
    const fs::path spec = write_text(tmp.path, "ball.spec", kBallSpec);
    RunResult r = run_cli("norm --shape " + spec.string() + " --k 2 --n 128 --compare-star");
    REQUIRE(r.exit_code == 0);
    json row = last_json(r.output);
    CHECK(row["star_ratio"].get<double>() == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(run_cli("").exit_code == 2);                      // no subcommand
    CHECK(run_cli("norm").exit_code == 2);                  // no input
    CHECK(run_cli("norm --shape nope.spec --k 2").exit_code == 2);
    TempDir tmp;
    const fs::path spec = write_text(tmp.path, "i.spec", kIntervalSpec);
    RunResult prep = run_cli("rearrange --shape " + spec.string() + " --n 64 --out-dir " +
                             tmp.path.string());
    REQUIRE(prep.exit_code == 0);
    // both input kinds at once
    CHECK(run_cli("norm --shape " + spec.string() + " --grid-in " +
                  (tmp.path / "star.grid").string() + " --k 2")
              .exit_code == 2);
    // contradictory dimension
    CHECK(run_cli("norm --shape " + spec.string() + " --d 2 --k 2").exit_code == 2);
}

TEST_CASE("budget overflow exits with code 3") {
    TempDir tmp;
    const fs::path spec = write_text(tmp.path, "ball2.spec", kBallSpec);
    RunResult r = run_cli("norm --shape " + spec.string() + " --k 4 --n 2048");
    CHECK(r.exit_code == 3);
    CHECK(r.output.find("budget") != std::string::npos);
}

TEST_CASE("help text lists the subcommands") {
    RunResult r = run_cli("--help");
    CHECK(r.exit_code == 0);
    for (const char* name : {"norm", "chain", "stability", "rearrange"}) {
        CHECK(r.output.find(name) != std::string::npos);
    }
}

TEST_CASE("rearrange emits star grid and profiles that pass the bathtub check") {
    TempDir tmp;
    const fs::path spec = write_text(tmp.path, "ball.spec", kBallSpec);
    RunResult r = run_cli("rearrange --shape " + spec.string() + " --n 96 --out-dir " +
                          tmp.path.string() + " --bathtub-check");
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(tmp.path / "star.grid"));
    CHECK(fs::exists(tmp.path / "f_star.profile"));
    CHECK(fs::exists(tmp.path / "F.profile"));

    // the emitted star grid feeds back into the norm command
    RunResult n = run_cli("norm --grid-in " + (tmp.path / "star.grid").string() + " --k 2");
    CHECK(n.exit_code == 0);
}

TEST_CASE("chain on a grid input is monotone under the default slack") {
    TempDir tmp;
    const fs::path spec = write_text(tmp.path, "i.spec", kIntervalSpec);
    RunResult r = run_cli("chain --shape " + spec.string() + " --k 2 --n 256 --assert-monotone");
    REQUIRE(r.exit_code == 0);
    json row = last_json(r.output);
    CHECK(row["monotone_violation"].get<double>() <= 1e-8);
    CHECK(row["terms"].size() == 3);
}

TEST_CASE("chain rejects a profile that is not nonincreasing") {
    TempDir tmp;
    const fs::path bad = write_text(tmp.path, "bad.profile",
                                    "# profile step\n0 1\n0.5 2\n1 0\n");
    RunResult r = run_cli("chain --profile-in " + bad.string() + " --k 2 --assert-monotone");
    CHECK(r.exit_code == 4);
    CHECK(r.output.find("nonincreasing") != std::string::npos);
}

TEST_CASE("chain accepts a valid rearrangement profile") {
    TempDir tmp;
    // the exact unit-interval autocorrelation rearrangement 1 - t/2
    const fs::path good = write_text(tmp.path, "tent.profile",
                                     "# profile linear\n0 1\n2 0\n");
    RunResult r = run_cli("chain --profile-in " + good.string() + " --k 2 --assert-monotone");
    REQUIRE(r.exit_code == 0);
    json row = last_json(r.output);
    CHECK(row["measure"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    // the supplied tent IS the order-2 ball profile: all terms equal
    const auto terms = row["terms"];
    REQUIRE(terms.size() == 3);
    CHECK(terms[0].get<double>() == doctest::Approx(terms[2].get<double>()).epsilon(1e-10));
}

TEST_CASE("stability writes records and a plot table") {
    TempDir tmp;
    RunResult r = run_cli("stability --out-dir " + tmp.path.string() +
                          " --d 1 --k 2 --n 128 --amplitudes 0.0,0.3 --seeds 1,2");
    REQUIRE(r.exit_code == 0);
    REQUIRE(fs::exists(tmp.path / "records.jsonl"));
    REQUIRE(fs::exists(tmp.path / "plot.tsv"));
    std::ifstream rec(tmp.path / "records.jsonl");
    std::string line;
    int rows = 0;
    while (std::getline(rec, line)) {
        if (line.empty()) continue;
        json row = json::parse(line);
        CHECK(row["delta"].get<double>() >= 0.0);
        CHECK(row["epsilon"].get<double>() >= 0.0);
        ++rows;
    }
    CHECK(rows == 4);
    json summary = last_json(r.output);
    CHECK(summary["records"] == 4);
    CHECK(run_cli("stability --out-dir " + (tmp.path / "missing").string()).exit_code == 2);
}

TEST_CASE("threads option does not change results") {
    TempDir tmp;
    const fs::path spec = write_text(tmp.path, "ball.spec", kBallSpec);
    RunResult a = run_cli("norm --shape " + spec.string() + " --k 2 --n 96 --threads 1");
    RunResult b = run_cli("norm --shape " + spec.string() + " --k 2 --n 96 --threads 7");
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    CHECK(last_json(a.output)["power_value"].get<double>() ==
          last_json(b.output)["power_value"].get<double>());
}

}  // TEST_SUITE("cli")

#endif  // GWRS_BIN_PATH
