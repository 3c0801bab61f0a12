#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "trusthmd/cli.hpp"
#include "trusthmd/harness.hpp"

using namespace trusthmd;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli_main(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& f) const { return (path / f).string(); }
};

std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("bad usage exits 2 with usage text") {
    const Run missing = run({"train", "-o", "/tmp/x.model"});
    CHECK(missing.code == 2);
    CHECK(missing.err.find("--data") != std::string::npos);
    CHECK(missing.err.find("Usage") != std::string::npos);

    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"synth", "--regime", "ood", "--out-dir", "/tmp/x", "--bogus"}).code == 2);
    CHECK(run({"train", "--data", "d.csv", "-o", "m", "--members", "lots"}).code == 2);
}

TEST_CASE("help exits 0") {
    const Run r = run({"--help"});
    CHECK(r.code == 0);
    for (const char* sub : {"train", "predict", "sweep-threshold", "sweep-size", "synth"}) {
        CHECK(r.out.find(sub) != std::string::npos);
    }
}

TEST_CASE("runtime failures exit 1") {
    const Run r = run({"train", "--data", "/nonexistent.csv", "-o", "/tmp/never.model"});
    CHECK(r.code == 1);
    CHECK(r.err.find("nonexistent") != std::string::npos);
}

TEST_CASE("predict on a unanimous benign sample") {
    TempDir dir("trusthmd_cli_predict");
    {
        std::ofstream csv(dir / "train.csv");
        csv << "f0,f1,label,app\n";
        for (int i = 0; i < 40; ++i) {
            const bool malware = i % 2 == 1;
            csv << (malware ? 10 : -10) + 0.1 * (i % 5) << ',' << (malware ? 10 : -10) - 0.1 * (i % 3) << ','
                << (malware ? "malware" : "benign") << ",app" << i % 4 << '\n';
        }
        std::ofstream probe(dir / "probe.csv");
        probe << "f0,f1\n-10,-10\n";
    }
    REQUIRE(run({"train", "--data", dir / "train.csv", "-m", "7", "-o", dir / "model.txt"}).code == 0);
    const Run r = run({"predict", "--model", dir / "model.txt", "--data", dir / "probe.csv"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("benign") != std::string::npos);
    CHECK(r.out.find("0.000000") != std::string::npos);
    CHECK(r.out.find("uncertain") == std::string::npos);
}

TEST_CASE("synth, train, sweeps") {
    TempDir dir("trusthmd_cli_pipeline");
    const std::string d = dir.path.string();
    REQUIRE(run({"synth", "--regime", "overlap", "--separation", "0.5", "--n-train", "200", "--n-test", "100",
                 "--n-unknown", "60", "--dim", "3", "--seed", "2", "--out-dir", d})
                .code == 0);
    REQUIRE(run({"train", "--data", dir / "dataset.csv", "--manifest", dir / "manifest.json", "-m", "9", "-o",
                 dir / "model.txt"})
                .code == 0);

    const Run sweep = run({"sweep-threshold", "--model", dir / "model.txt", "--data", dir / "dataset.csv",
                           "--manifest", dir / "manifest.json", "--thresholds", "0,0.5,1", "-o", dir / "s.json"});
    REQUIRE(sweep.code == 0);
    const ThresholdSweepReport r = threshold_report_from_json(slurp(dir / "s.json"));
    CHECK(r.points.size() == 3);
    CHECK(r.n_known == 100);
    CHECK(r.n_unknown == 60);
    CHECK(r.points[2].known_rejection_rate == 0.0);

    REQUIRE(run({"sweep-threshold", "--model", dir / "model.txt", "--data", dir / "dataset.csv", "--manifest",
                 dir / "manifest.json", "--grid-points", "5", "-o", dir / "s.csv"})
                .code == 0);
    const std::string csv = slurp(dir / "s.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);

    REQUIRE(run({"sweep-size", "--data", dir / "dataset.csv", "--manifest", dir / "manifest.json", "--m-grid",
                 "1,3", "--eval", "unknown", "-o", dir / "m.json"})
                .code == 0);
    const StabilityReport s = stability_report_from_json(slurp(dir / "m.json"));
    CHECK(s.points.size() == 2);
    CHECK(s.points[0].mean_entropy == 0.0);
    CHECK(s.n_eval == 60);

    CHECK(run({"sweep-size", "--data", dir / "dataset.csv", "--m-grid", "3,1", "-o", dir / "bad.json"}).code == 1);
    CHECK(run({"predict", "--model", dir / "model.txt", "--data", dir / "dataset.csv", "--threshold", "-1"}).code ==
          1);
}
