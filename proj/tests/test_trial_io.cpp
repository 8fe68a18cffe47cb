#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "biofuse/errors.hpp"
#include "biofuse/trial_io.hpp"

using namespace biofuse;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("biofuse_io_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Trial make_trial(int id) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(id));
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  Eigen::MatrixXd eeg(3, 400), emg(2, 800);
  for (Eigen::Index i = 0; i < eeg.size(); ++i) eeg(i) = u(rng);
  for (Eigen::Index i = 0; i < emg.size(); ++i) emg(i) = u(rng);
  Trial t;
  t.trial_id = id;
  t.source = "unit-test";
  t.eeg = LabeledRecording{Recording(Modality::Eeg, {"C3", "Cz", "C4"}, 100.0, eeg, id),
                           StageSegmentation({80, 180, 300}, 400)};
  t.emg = LabeledRecording{Recording(Modality::Emg, {"A", "B"}, 200.0, emg, id),
                           StageSegmentation({160, 360, 600}, 800)};
  return t;
}

}  // namespace

TEST_CASE("trials survive a write and read round trip") {
  TempDir dir;
  const Trial t = make_trial(4);
  write_trial(dir.path, t, 9);
  CHECK(fs::exists(trial_csv_path(dir.path, 4, Modality::Eeg)));
  CHECK(fs::exists(trial_csv_path(dir.path, 4, Modality::Emg)));
  CHECK(fs::exists(trial_meta_path(dir.path, 4)));

  const Trial back = read_trial(dir.path, 4);
  CHECK(back.trial_id == 4);
  CHECK(back.source == "unit-test");
  for (Modality m : {Modality::Eeg, Modality::Emg}) {
    const auto& a = t.get(m);
    const auto& b = back.get(m);
    CHECK(b.recording.channel_names() == a.recording.channel_names());
    CHECK(b.recording.sampling_rate_hz() == a.recording.sampling_rate_hz());
    CHECK(b.stages.boundaries() == a.stages.boundaries());
    CHECK(b.recording.trial_id() == 4);
    CHECK((b.recording.samples() - a.recording.samples()).cwiseAbs().maxCoeff() <= 5e-10);
  }
}

TEST_CASE("metadata sidecar carries the documented fields") {
  TempDir dir;
  write_trial(dir.path, make_trial(2));
  std::ifstream in(trial_meta_path(dir.path, 2));
  const auto meta = nlohmann::json::parse(in);
  CHECK(meta.at("format_version") == kTrialMetaVersion);
  CHECK(meta.at("trial_id") == 2);
  CHECK(meta.at("sampling_rate_hz").at("eeg") == 100.0);
  CHECK(meta.at("stage_boundaries").at("emg").size() == 3);
}

TEST_CASE("trials are listed and loaded in ascending id order") {
  TempDir dir;
  for (int id : {7, 1, 12}) write_trial(dir.path, make_trial(id));
  CHECK(list_trials(dir.path) == std::vector<int>{1, 7, 12});
  const auto recs = load_modality(dir.path, Modality::Emg);
  REQUIRE(recs.size() == 3);
  CHECK(recs[0].recording.trial_id() == 1);
  CHECK(recs[2].recording.trial_id() == 12);
}

TEST_CASE("an empty or absent directory is a data error") {
  TempDir dir;
  CHECK_THROWS_AS(load_modality(dir.path, Modality::Eeg), DataError);
  CHECK_THROWS_AS(list_trials(dir.path / "nope"), DataError);
}

TEST_CASE("malformed sample files are reported with the row") {
  TempDir dir;
  const auto path = dir.path / "bad.csv";
  {
    std::ofstream f(path);
    f << "A,B\n1.0,2.0\n3.0,oops\n";
  }
  std::vector<std::string> names;
  try {
    read_samples_csv(path, names);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  {
    std::ofstream f(path);
    f << "A,B\n1.0\n";
  }
  CHECK_THROWS_AS(read_samples_csv(path, names), DataError);
  {
    std::ofstream f(path);
    f << "A,B\n1.0,2.0,3.0\n";
  }
  CHECK_THROWS_AS(read_samples_csv(path, names), DataError);
}

TEST_CASE("a trial without the requested modality is a data error") {
  TempDir dir;
  Trial t = make_trial(5);
  t.emg.reset();
  write_trial(dir.path, t);
  const Trial back = read_trial(dir.path, 5);
  CHECK(back.eeg.has_value());
  CHECK_FALSE(back.emg.has_value());
  CHECK_THROWS_AS(back.get(Modality::Emg), DataError);
}
