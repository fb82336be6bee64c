#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unistd.h>

#include <fstream>
#include <sstream>

#include "graspseg/cli.hpp"
#include "graspseg/io.hpp"

using namespace graspseg;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int n = 0;
    path = fs::temp_directory_path() / ("graspseg_cli_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& s) const { return (path / s).string(); }
};

struct Run {
  int status;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int st = run_command(args, out, err);
  return {st, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

double iou_oracle(const BinaryMask& a, const BinaryMask& b) {
  std::size_t i = 0, u = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    i += a[k] && b[k];
    u += a[k] || b[k];
  }
  return u == 0 ? 1.0 : static_cast<double>(i) / static_cast<double>(u);
}

}  // namespace

TEST_CASE("usage errors exit with 2, processing errors with 1") {
  TempDir t;
  CHECK(run({}).status == kExitUsage);
  CHECK(run({"fgseg", "--bogus"}).status == kExitUsage);
  CHECK(run({"nosuch"}).status == kExitUsage);
  CHECK(run({"--help"}).status == kExitOk);
  const auto bad = run({"eval-ap", "--pred", t / "missing.json", "--gt", t / "missing.json"});
  CHECK(bad.status == kExitUsage);
  std::ofstream(t / "broken.json") << "{not json";
  const auto fail = run({"eval-ap", "--pred", t / "broken.json", "--gt", t / "broken.json"});
  CHECK(fail.status == kExitFailure);
  CHECK(fail.err.find("error:") != std::string::npos);
}

TEST_CASE("synth, fgseg and eval-miou on a two-scene bundle") {
  TempDir t;
  const auto syn = run({"synth", "--out", t / "scenes", "--count", "2", "--seed", "5"});
  REQUIRE(syn.status == 0);
  CHECK(list_frames(t / "scenes").size() == 2);
  CHECK(fs::exists(t / "scenes/provenance.json"));

  const auto fg = run({"fgseg", "--in", t / "scenes", "--out", t / "fg", "--debug"});
  REQUIRE(fg.status == 0);
  CHECK(fs::exists(t / "fg/scene_0000.png"));
  CHECK(fs::exists(t / "fg/debug/scene_0000.trimap.png"));
  const auto prov = read_json(t / "fg/provenance.json");
  CHECK(prov["command"] == "fgseg");
  CHECK(prov["params"].contains("lambda"));

  const auto same = run({"eval-miou", "--pred", t / "scenes", "--gt", t / "scenes", "--pred-suffix", ".fg.png", "--gt-suffix", ".fg.png"});
  REQUIRE(same.status == 0);
  CHECK(same.out.find("overall mIoU 1.000") != std::string::npos);

  const auto real = run({"eval-miou", "--pred", t / "fg", "--gt", t / "scenes", "--gt-suffix", ".fg.png", "--out", t / "report.json"});
  REQUIRE(real.status == 0);
  CHECK(read_json(t / "report.json")["overall_miou"].get<double>() >= 0.9);
}

TEST_CASE("annotate with perfect manipulator masks recovers the object") {
  TempDir t;
  REQUIRE(run({"synth", "--out", t / "scenes", "--count", "2", "--seed", "17"}).status == 0);
  const auto ann = run({"annotate", "--in", t / "scenes", "--srn-masks", t / "scenes", "--srn-suffix", ".arm.png", "--out", t / "obj"});
  REQUIRE(ann.status == 0);
  for (const auto& id : {"scene_0000", "scene_0001"}) {
    const auto got = load_mask_png(t.path / "obj" / (std::string(id) + ".png"));
    const auto want = load_mask_png(t.path / "scenes" / (std::string(id) + ".object.png"));
    CHECK(iou_oracle(got, want) >= 0.98);
  }
  CHECK_NOTHROW(load_annotations(t / "obj/annotations.json"));
}

TEST_CASE("config file supplies options and flags win") {
  TempDir t;
  std::ofstream(t / "cfg.toml") << "[synth]\ncount = 3\nwidth = 64\nheight = 48\nprefix = \"cfg\"\n";
  REQUIRE(run({"synth", "--config", t / "cfg.toml", "--out", t / "a"}).status == 0);
  CHECK(list_frames(t / "a").size() == 3);
  CHECK(load_rgb_png(t.path / "a" / "cfg_0000.rgb.png").width() == 64);
  REQUIRE(run({"synth", "--config", t / "cfg.toml", "--out", t / "b", "--count", "1"}).status == 0);
  CHECK(list_frames(t / "b").size() == 1);
}

TEST_CASE("repeated runs write identical bytes") {
  TempDir t;
  for (const char* d : {"a", "b"}) {
    REQUIRE(run({"synth", "--out", t / (std::string(d) + "/s"), "--count", "2", "--width", "160", "--height", "120", "--seed", "9"}).status == 0);
    REQUIRE(run({"fgseg", "--in", t / "a/s", "--out", t / (std::string(d) + "/f"), "--seed", "9"}).status == 0);
  }
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(t.path / "a")) {
    if (!e.is_regular_file()) continue;
    const auto other = t.path / "b" / fs::relative(e.path(), t.path / "a");
    CHECK(slurp(e.path()) == slurp(other));
    ++compared;
  }
  CHECK(compared > 10);
}
