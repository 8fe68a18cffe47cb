#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using biofuse::cli::kExitData;
using biofuse::cli::kExitOk;
using biofuse::cli::kExitUsage;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("biofuse_cli_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = biofuse::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"synth"}).code == kExitUsage);
  CHECK(run({"extract", "--modality", "ecg", "--out", "x.csv"}).code == kExitUsage);
  const auto help = run({"--help"});
  CHECK(help.code == kExitOk);
  CHECK(help.out.find("fuse-eval") != std::string::npos);
  CHECK(run({"--version"}).out == "0.1.0\n");

  TempDir tmp;
  write_text(tmp / "bad.json", R"({"classifer": {"type": "knn"}})");
  const auto r = run({"synth", "--config", tmp / "bad.json", "--out", tmp / "d"});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("classifer") != std::string::npos);
  CHECK(run({"synth", "--out", tmp / "d", "--boundaries-s", "5", "2", "7"}).code == kExitUsage);
}

TEST_CASE("data errors exit with 2") {
  TempDir tmp;
  CHECK(run({"extract", "--data", tmp / "nothing", "--modality", "eeg", "--out", tmp / "f.csv"}).code ==
        kExitData);
  CHECK(run({"evaluate", "--features", tmp / "missing.csv", "--out", tmp / "r.csv"}).code == kExitData);

  REQUIRE(run({"synth", "--out", tmp / "data", "--trial-count", "2", "--seed", "1"}).code == kExitOk);
  const auto r = run({"extract", "--data", tmp / "data", "--modality", "eeg", "--channels", "C3,Oz", "--out",
                      tmp / "f.csv"});
  CHECK(r.code == kExitData);
  CHECK(r.err.find("Oz") != std::string::npos);
  CHECK_FALSE(fs::exists(tmp / "f.csv"));
  CHECK(run({"erders", "--data", tmp / "data", "--channel", "Pz", "--out", tmp / "c.csv"}).code == kExitData);
}

TEST_CASE("end-to-end pipeline writes its artifacts and manifests") {
  TempDir tmp;
  write_text(tmp / "cfg.jsonc", R"({
    // small and fast
    "classifier": {"type": "knn", "folds": 2},
    "selection": {"max_iterations": 10, "forest": {"tree_count": 20}}
  })");
  const std::string cfg = tmp / "cfg.jsonc";
  REQUIRE(run({"synth", "--config", cfg, "--out", tmp / "data", "--trial-count", "4", "--seed", "5"}).code ==
          kExitOk);
  CHECK(fs::exists(tmp / "data.manifest.json"));

  REQUIRE(run({"extract", "--config", cfg, "--data", tmp / "data", "--modality", "emg", "--out",
               tmp / "emg.csv"})
              .code == kExitOk);
  const auto manifest = nlohmann::json::parse(slurp(tmp / "emg.csv.manifest.json"));
  CHECK(manifest["command"] == "extract");
  CHECK(manifest["outputs"].size() == 1);
  CHECK(manifest["inputs"].size() >= 4);
  CHECK(manifest["outputs"][0]["sha256"].get<std::string>().size() == 64);
  CHECK(manifest["details"]["features"] == 25);

  REQUIRE(run({"select", "--config", cfg, "--features", tmp / "emg.csv", "--out", tmp / "sel.csv", "--max-rows",
               "300"})
              .code == kExitOk);
  REQUIRE(run({"train", "--config", cfg, "--features", tmp / "emg.csv", "--selection", tmp / "sel.csv", "--out",
               tmp / "model.json"})
              .code == kExitOk);
  REQUIRE(run({"evaluate", "--config", cfg, "--features", tmp / "emg.csv", "--selection", tmp / "sel.csv",
               "--model", tmp / "model.json", "--out", tmp / "fit.csv"})
              .code == kExitOk);
  const auto cv = run({"evaluate", "--config", cfg, "--features", tmp / "emg.csv", "--out", tmp / "cv.csv",
                       "--confusion-svg", tmp / "cm.svg"});
  REQUIRE(cv.code == kExitOk);
  CHECK(cv.out.find("knn: accuracy") != std::string::npos);
  CHECK(slurp(tmp / "cm.svg").rfind("<svg", 0) == 0);

  REQUIRE(run({"report", "--inputs", tmp / "fit.csv", tmp / "cv.csv", "--out", tmp / "summary.csv"}).code ==
          kExitOk);
  CHECK_FALSE(slurp(tmp / "summary.csv").empty());

  REQUIRE(run({"fuse-eval", "--config", cfg, "--data", tmp / "data", "--case", "eeg-noise", "--out",
               tmp / "fuse.csv"})
              .code == kExitOk);
  CHECK(slurp(tmp / "fuse.csv").rfind("case,modality_noised", 0) == 0);

  REQUIRE(run({"erders", "--data", tmp / "data", "--out", tmp / "erd.csv", "--svg", tmp / "erd.svg"}).code ==
          kExitOk);
  CHECK(fs::file_size(tmp / "erd.csv") > 0);

  // Outputs never replace inputs.
  CHECK(run({"select", "--config", cfg, "--features", tmp / "emg.csv", "--out", tmp / "emg.csv"}).code ==
        kExitUsage);
}

TEST_CASE("same seed gives byte-identical outputs") {
  TempDir tmp;
  write_text(tmp / "cfg.json", R"({"classifier": {"type": "mlp", "folds": 2}})");
  const std::string cfg = tmp / "cfg.json";
  auto pipeline = [&](const std::string& tag, const std::string& seed) {
    const std::string data = tmp / ("data_" + tag);
    REQUIRE(run({"synth", "--out", data, "--trial-count", "4", "--seed", seed}).code == kExitOk);
    REQUIRE(run({"extract", "--data", data, "--modality", "eeg", "--out", tmp / (tag + "_eeg.csv")}).code ==
            kExitOk);
    REQUIRE(run({"evaluate", "--config", cfg, "--seed", seed, "--features", tmp / (tag + "_eeg.csv"), "--out",
                 tmp / (tag + "_report.csv")})
                .code == kExitOk);
  };
  pipeline("a", "11");
  pipeline("b", "11");
  pipeline("c", "12");
  CHECK(slurp(tmp / "a_eeg.csv") == slurp(tmp / "b_eeg.csv"));
  CHECK(slurp(tmp / "a_report.csv") == slurp(tmp / "b_report.csv"));
  CHECK(slurp(tmp / "a_eeg.csv") != slurp(tmp / "c_eeg.csv"));
}
