#include <doctest.h>

#include <fstream>
#include <sstream>

#include "eegpref/error.hpp"
#include "eegpref/pipeline.hpp"
#include "support.hpp"

using namespace eegpref;
using eegpref::testing::TempDir;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PipelineConfig quick_config(const fs::path& input, const fs::path& out) {
  PipelineConfig c;
  c.input = input;
  c.out = out;
  c.length = 128;
  c.input_dim = 32;
  c.hidden = {8, 4};
  c.epochs = 3;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("config text parsing") {
  const auto kv = parse_config_text(
      "# comment\n[pipeline]\nlambda = 10   # trailing\ntransform = \"tanh:2\"\n\nout = \"a # b\"\n");
  CHECK(kv.at("lambda") == "10");
  CHECK(kv.at("transform") == "tanh:2");
  CHECK(kv.at("out") == "a # b");
  CHECK_THROWS_AS(parse_config_text("lambda 10\n"), Error);

  PipelineConfig c;
  CHECK_THROWS_AS(apply_setting(c, "no_such_key", "1"), Error);
  CHECK_THROWS_AS(apply_setting(c, "epochs", "many"), Error);
  apply_setting(c, "hidden", "64, 16,4");
  CHECK(c.hidden == std::vector<std::size_t>{64, 16, 4});
}

TEST_CASE("flags override the config file which overrides defaults") {
  TempDir dir("config");
  write_text(dir / "c.toml", "lambda = 50\nepochs = 7\nseed = 9\n");
  const auto resolved = resolve_config(dir / "c.toml", {{"epochs", "3"}});
  CHECK(resolved.lambda == 50.0);
  CHECK(resolved.epochs == 3);
  CHECK(resolved.seed == 9);
  CHECK(resolved.batch_size == PipelineConfig{}.batch_size);

  const auto no_file = resolve_config(std::nullopt, {{"seed", "11"}});
  CHECK(no_file.seed == 11);
  CHECK(no_file.lambda == kDefaultLambda);
  CHECK_THROWS_AS(resolve_config(dir / "missing.toml", {}), Error);
}

TEST_CASE("resolved config text round-trips") {
  TempDir dir("roundtrip");
  auto c = quick_config("in.csv", "out dir");
  c.transform = TransformKind::tanh_scaled(0.25);
  c.learning_rate = 3.3e-4;
  c.optimizer = "sgd";
  c.momentum = 0.9;
  const auto text = to_config_text(c);
  write_text(dir / "m.toml", text);
  const auto back = resolve_config(dir / "m.toml", {});
  CHECK(to_config_text(back) == text);
  for (const auto& key : pipeline_keys()) CHECK(text.find(key + " = ") != std::string::npos);
}

TEST_CASE("config validation") {
  auto c = quick_config("x", "y");
  c.split = 1.0;
  CHECK_THROWS_AS(validate(c), Error);
  c = quick_config("x", "y");
  c.lambda = -1.0;
  CHECK_THROWS_AS(validate(c), Error);
  c = quick_config("x", "y");
  c.epochs = 0;
  CHECK_THROWS_AS(validate(c), Error);
  CHECK_NOTHROW(validate(quick_config("x", "y")));
}

TEST_CASE("pipeline writes every artifact and is byte-deterministic") {
  TempDir dir("pipeline");
  write_canonical_csv(generate_synthetic({.n = 60, .seed = 8, .length = 160}), dir / "data.csv");
  run_pipeline(quick_config(dir / "data.csv", dir / "a"));
  run_pipeline(quick_config(dir / "data.csv", dir / "b"));
  for (const char* name : {"run-manifest.toml", "lowfreq.csv", "model.json", "baseline-model.json", "report.json",
                           "class-stats.json", "fig1-signals.csv", "fig1-signals.svg", "fig1-multiple.csv",
                           "fig2-lowfreq.csv", "fig2-lowfreq.svg", "fig3-history.csv", "fig3-history.svg"}) {
    CHECK_MESSAGE(fs::exists(dir / "a" / name), name);
  }
  for (const char* name : {"model.json", "baseline-model.json", "report.json", "lowfreq.csv", "fig1-signals.csv",
                           "fig1-multiple.csv", "fig2-lowfreq.csv", "fig3-history.csv"}) {
    CHECK_MESSAGE(slurp(dir / "a" / name) == slurp(dir / "b" / name), name);
  }
  CHECK_FALSE(fs::exists(dir / "a.staging"));

  // rerunning into the same directory replaces it
  CHECK_NOTHROW(run_pipeline(quick_config(dir / "data.csv", dir / "a")));
  CHECK(slurp(dir / "a/model.json") == slurp(dir / "b/model.json"));
}

TEST_CASE("pipeline failures leave nothing behind") {
  TempDir dir("pipeline-fail");
  try {
    run_pipeline(quick_config(dir / "absent.csv", dir / "out"));
    FAIL("expected IoFailure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoFailure);
  }
  CHECK_FALSE(fs::exists(dir / "out"));
  CHECK_FALSE(fs::exists(dir / "out.staging"));

  // a directory that is not an earlier output is never replaced
  fs::create_directories(dir / "precious");
  write_text(dir / "precious/keep.txt", "x");
  write_canonical_csv(generate_synthetic({.n = 20, .seed = 1, .length = 64}), dir / "d.csv");
  CHECK_THROWS_AS(run_pipeline(quick_config(dir / "d.csv", dir / "precious")), Error);
  CHECK(fs::exists(dir / "precious/keep.txt"));
}

TEST_CASE("figure series") {
  const auto ds = generate_synthetic({.n = 20, .seed = 2, .length = 64});
  const auto one = signal_series(ds, 1);
  CHECK(one.size() == 2);
  CHECK(signal_series(ds, 5).size() == 10);
  const auto low = lowfreq_series(ds, {1600.0}, 1);
  CHECK(low.size() == 4);
  for (const auto& s : low) CHECK(s.points.size() == 64);
}
