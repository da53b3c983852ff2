#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "dfaudit_cli_test";

int run_cli(const std::string& args) {
    const std::string command = std::string(DFAUDIT_BIN) + " " + args;
    const int status = std::system(command.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out);
    out << content;
}

struct Workspace {
    Workspace() {
        fs::remove_all(kWork);
        fs::create_directories(kWork);
    }
};

} // namespace

TEST_CASE("help exits zero, unknown flags exit one, missing files exit two") {
    Workspace ws;
    CHECK(run_cli("--help > /dev/null 2>&1") == 0);
    CHECK(run_cli("audit --no-such-flag > /dev/null 2>&1") == 1);
    CHECK(run_cli("stats --in " + (kWork / "missing.csv").string() + " > /dev/null 2>&1") == 2);
    CHECK(run_cli("> /dev/null 2>&1") == 1); // a subcommand is required
}

TEST_CASE("the synth-audit-report pipeline is deterministic end to end") {
    Workspace ws;
    write(kWork / "synth.json", R"({
      "name": "case1",
      "n_samples": 4000,
      "fake_fraction": 0.5,
      "seed": 11,
      "samples_per_identity": 4,
      "attributes": [
        {"name": "Male", "prevalence": 0.5, "undefined_rate": 0.05,
         "bias": {"err_pos_fake": 0.2, "err_neg_fake": 0.1,
                   "err_pos_pristine": 0.2, "err_neg_pristine": 0.1}},
        {"name": "Young", "prevalence": 0.3, "undefined_rate": 0.1}
      ]
    })");
    REQUIRE(run_cli("synth --config " + (kWork / "synth.json").string() + " --out-dir " +
                    kWork.string() + " 2> /dev/null") == 0);
    CHECK(fs::exists(kWork / "annotations.csv"));
    CHECK(fs::exists(kWork / "predictions.csv"));
    CHECK(fs::exists(kWork / "manifest.json"));
    CHECK(fs::exists(kWork / "registry.txt"));

    const std::string audit_args = "audit --annotations " + (kWork / "annotations.csv").string() +
                                   " --predictions " + (kWork / "predictions.csv").string() +
                                   " --registry " + (kWork / "registry.txt").string() +
                                   " --min-count 100 --seed 42 --control-reps 2";
    REQUIRE(run_cli(audit_args + " --out " + (kWork / "r1.json").string()) == 0);
    REQUIRE(run_cli(audit_args + " --out " + (kWork / "r2.json").string()) == 0);
    CHECK(slurp(kWork / "r1.json") == slurp(kWork / "r2.json")); // byte-identical

    REQUIRE(run_cli("report --in " + (kWork / "r1.json").string() + " --format text --out " +
                    (kWork / "table.txt").string()) == 0);
    const std::string table = slurp(kWork / "table.txt");
    CHECK(table.find("Male") != std::string::npos);
    CHECK(table.find("Rel. Perf.") != std::string::npos);

    REQUIRE(run_cli("report --in " + (kWork / "r1.json").string() +
                    " --kind rp-vs-crp --format svg --out " + (kWork / "plot.svg").string()) ==
            0);
    CHECK(slurp(kWork / "plot.svg").find("<svg") == 0);

    REQUIRE(run_cli("report --in " + (kWork / "r1.json").string() +
                    " --kind pdrp-vs-ddrp --format csv --out " + (kWork / "sc.csv").string()) ==
            0);
    CHECK(slurp(kWork / "sc.csv").rfind("attribute,x,y\n", 0) == 0);
}

TEST_CASE("filter-annotations turns confidences into a labels file") {
    Workspace ws;
    write(kWork / "conf.csv",
          "sample_id,attribute,decision,confidence\n"
          "s1,Male,1,0.95\n"
          "s1,Young,-1,0.85\n"
          "s2,Male,-1,0.90\n");
    REQUIRE(run_cli("filter-annotations --in " + (kWork / "conf.csv").string() +
                    " --threshold 0.9 --out " + (kWork / "ann.csv").string()) == 0);
    const std::string csv = slurp(kWork / "ann.csv");
    CHECK(csv.rfind("sample_id,Male,", 0) == 0); // default 47-attribute header
    CHECK(csv.find("\ns1,1,") != std::string::npos);  // 0.95 kept
    CHECK(csv.find("\ns2,-1,") != std::string::npos); // 0.90 not below the bar
    // s1 Young at 0.85 must be undefined
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    std::getline(lines, line); // s1 row
    CHECK(line.substr(0, 7) == "s1,1,0,");
}

TEST_CASE("legacy sentinel rendering flows through the report subcommand") {
    Workspace ws;
    write(kWork / "report.json", R"({
      "provenance": {"seed": 1, "reps": 1, "replacement": false, "min_count": 1,
                      "n_samples": 10, "annotations_digest": "x", "predictions_digest": "y"},
      "rows": [{
        "attribute": "Blond Hair", "category": "Hair",
        "counts": {"pos": 5, "neg": 5},
        "errors": {
          "data": {"balanced": {"pos": 0.0, "neg": 0.0},
                    "fake": {"pos": 0.0, "neg": 0.0},
                    "pristine": {"pos": 0.0, "neg": 0.0}},
          "control": {"balanced": {"pos": 0.1, "neg": 0.0},
                       "fake": {"pos": 0.1, "neg": 0.0},
                       "pristine": {"pos": 0.1, "neg": 0.0}}
        },
        "control_std": {"balanced": null, "fake": null, "pristine": null},
        "degenerate": [],
        "rp_data": {"kind": "both_perfect"},
        "rp_control": {"kind": "neg_group_perfect"},
        "crp": {"kind": "both_perfect", "side": "data"},
        "pdrp": {"kind": "degenerate", "side": "control"},
        "ddrp": {"kind": "both_perfect", "side": "data"}
      }]
    })");
    REQUIRE(run_cli("report --in " + (kWork / "report.json").string() +
                    " --format text --legacy-sentinels --out " +
                    (kWork / "legacy.txt").string()) == 0);
    const std::string legacy = slurp(kWork / "legacy.txt");
    CHECK(legacy.find("All correct") != std::string::npos); // both groups perfect
    CHECK(legacy.find("All wrong") != std::string::npos);   // only the negative side perfect
    CHECK(legacy.find("n/a (") == std::string::npos);

    REQUIRE(run_cli("report --in " + (kWork / "report.json").string() + " --format text --out " +
                    (kWork / "modern.txt").string()) == 0);
    const std::string modern = slurp(kWork / "modern.txt");
    CHECK(modern.find("n/a (both perfect)") != std::string::npos);
    CHECK(modern.find("All correct") == std::string::npos);
}

TEST_CASE("split produces subject-exclusive csv output") {
    Workspace ws;
    std::string manifest = R"({"name":"m","identities":{)";
    for (int i = 0; i < 10; ++i) {
        manifest += "\"s" + std::to_string(i) + "\":\"id" + std::to_string(i) + "\"";
        if (i != 9) manifest += ',';
    }
    manifest += "}}";
    write(kWork / "manifest.json", manifest);
    REQUIRE(run_cli("split --manifest " + (kWork / "manifest.json").string() +
                    " --ratios 0.6,0.2,0.2 --seed 5 --out " + (kWork / "splits.csv").string()) ==
            0);
    const std::string csv = slurp(kWork / "splits.csv");
    CHECK(csv.rfind("identity_id,split\n", 0) == 0);
    std::size_t train = 0, val = 0, test = 0;
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    while (std::getline(lines, line)) {
        if (line.find(",train") != std::string::npos) ++train;
        if (line.find(",val") != std::string::npos) ++val;
        if (line.find(",test") != std::string::npos) ++test;
    }
    CHECK(train == 6);
    CHECK(val == 2);
    CHECK(test == 2);
}

TEST_CASE("the seed falls back to the environment variable") {
    Workspace ws;
    std::string manifest = R"({"name":"m","identities":{)";
    for (int i = 0; i < 30; ++i) {
        manifest += "\"s" + std::to_string(i) + "\":\"id" + std::to_string(i) + "\"";
        if (i != 29) manifest += ',';
    }
    manifest += "}}";
    write(kWork / "manifest.json", manifest);
    const std::string base = "split --manifest " + (kWork / "manifest.json").string() +
                             " --ratios 0.6,0.2,0.2 --out ";
    const std::string env_command = "env DFAUDIT_SEED=77 " + std::string(DFAUDIT_BIN) + " " +
                                    base + (kWork / "env.csv").string();
    REQUIRE(WEXITSTATUS(std::system(env_command.c_str())) == 0);
    REQUIRE(run_cli(base + (kWork / "flag.csv").string() + " --seed 77") == 0);
    CHECK(slurp(kWork / "env.csv") == slurp(kWork / "flag.csv"));
}
