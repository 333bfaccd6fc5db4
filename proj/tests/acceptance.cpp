// Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
// when any gated criterion fails. The real-data check only runs when
// EEGPREF_REAL_DATA points at a manifest or canonical CSV.

#include <sys/wait.h>

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "eegpref/augment.hpp"
#include "eegpref/evaluation.hpp"
#include "eegpref/mlp.hpp"
#include "eegpref/signal.hpp"
#include "eegpref/smoother.hpp"

namespace fs = std::filesystem;
using namespace eegpref;

namespace {

struct Outcome {
  bool pass{true};
  std::string detail;
};

class Gate {
 public:
  // `budget_s` of 0 means no runtime bound.
  void run(const std::string& name, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = body();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0.0 && secs >= budget_s) outcome.pass = false;
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.2fs", secs);
    std::cout << (outcome.pass ? "PASS" : "FAIL") << "  " << name << "  [" << timing
              << (budget_s > 0.0 ? " / budget " + std::to_string(static_cast<int>(budget_s)) + "s" : std::string())
              << "]  " << outcome.detail << std::endl;
    failed_ = failed_ || !outcome.pass;
  }

  void skip(const std::string& name, const std::string& why) {
    std::cout << "SKIP  " << name << "  " << why << std::endl;
  }

  bool failed() const noexcept { return failed_; }

 private:
  bool failed_{false};
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::vector<double> gaussian(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, scale);
  std::vector<double> out(n);
  for (auto& v : out) v = dist(gen);
  return out;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + EEGPREF_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

// ─── spline ─────────────────────────────────────────────────────────────────

std::vector<double> dense_solve(const std::vector<double>& y, double lambda) {
  using MatrixL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  const auto n = static_cast<Eigen::Index>(y.size());
  MatrixL d = MatrixL::Zero(n - 2, n);
  for (Eigen::Index r = 0; r + 2 < n; ++r) {
    d(r, r) = 1.0L;
    d(r, r + 1) = -2.0L;
    d(r, r + 2) = 1.0L;
  }
  const MatrixL a = MatrixL::Identity(n, n) + static_cast<long double>(lambda) * d.transpose() * d;
  VectorL rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) rhs(i) = y[static_cast<std::size_t>(i)];
  const VectorL z = a.fullPivLu().solve(rhs);
  std::vector<double> out(y.size());
  for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = static_cast<double>(z(i));
  return out;
}

Outcome spline_suite() {
  double identity = 0.0, linear = 0.0, mean_rel = 0.0, dense = 0.0, ols = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto y = gaussian(512, seed, 3.0);
    identity = std::max(identity, max_diff(smooth_whittaker(y, {0.0}), y));

    std::vector<double> line(512);
    for (std::size_t i = 0; i < line.size(); ++i) line[i] = 2.0 - 0.37 * static_cast<double>(i) + static_cast<double>(seed);
    double scale = 0.0;
    for (double v : line) scale = std::max(scale, std::abs(v));
    for (double lambda : {1.0, 1e3, 1e9}) linear = std::max(linear, max_diff(smooth_whittaker(line, {lambda}), line) / scale);

    auto shifted = y;
    for (auto& v : shifted) v += 25.0;
    const double total = std::accumulate(shifted.begin(), shifted.end(), 0.0);
    for (double lambda : {1.0, 1600.0, 1e8}) {
      const auto z = smooth_whittaker(shifted, {lambda});
      mean_rel = std::max(mean_rel, std::abs(std::accumulate(z.begin(), z.end(), 0.0) - total) / std::abs(total));
    }

    // closed-form least-squares line
    auto noisy = gaussian(400, seed + 50, 2.0);
    for (std::size_t i = 0; i < noisy.size(); ++i) noisy[i] += 0.02 * static_cast<double>(i);
    const double n = static_cast<double>(noisy.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < noisy.size(); ++i) {
      const double x = static_cast<double>(i);
      sx += x;
      sy += noisy[i];
      sxx += x * x;
      sxy += x * noisy[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    const auto z = smooth_whittaker(noisy, {1e12});
    const auto [lo, hi] = std::minmax_element(noisy.begin(), noisy.end());
    for (std::size_t i = 0; i < z.size(); ++i) {
      ols = std::max(ols, std::abs(z[i] - (intercept + slope * static_cast<double>(i))) / (*hi - *lo));
    }
  }
  for (std::size_t n = 4; n <= 12; ++n) {
    for (double lambda : {0.5, 10.0, 1600.0, 1e6}) {
      const auto y = gaussian(n, 100 + n, 3.0);
      dense = std::max(dense, max_diff(smooth_whittaker(y, {lambda}), dense_solve(y, lambda)));
    }
  }
  const bool pass = identity <= 1e-10 && linear <= 1e-8 && mean_rel <= 1e-9 && dense <= 1e-9 && ols < 1e-3;
  return {pass, "identity " + fmt(identity) + ", linear rel " + fmt(linear) + ", mean rel " + fmt(mean_rel) +
                    ", dense " + fmt(dense) + ", OLS/range " + fmt(ols)};
}

// ─── gradients ──────────────────────────────────────────────────────────────

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = dist(gen);
  return m;
}

Vector random_targets(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = static_cast<double>(gen() & 1U);
  return y;
}

Outcome gradient_suite() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 gen(seed + 7000);
    const std::size_t in = 1 + gen() % 16;
    const std::vector<std::size_t> hidden{1 + gen() % 16, 1 + gen() % 16};
    auto model = init_mlp(in, hidden, seed);
    // move off the relu kinks that zero biases make reachable
    std::normal_distribution<double> bias(0.0, 0.5);
    for (auto& layer : model.layers)
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = bias(gen);
    const auto x = random_matrix(8, static_cast<Eigen::Index>(in), seed + 1);
    worst = std::max(worst, grad_check(model, x, random_targets(8, seed + 2)));
  }

  // single sample through a bare sigmoid unit: dL/db = p - y
  double spot = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 gen(seed + 9000);
    std::normal_distribution<double> dist;
    MlpModel unit;
    unit.layers.push_back({{3, 1, Activation::Sigmoid}, random_matrix(1, 3, seed + 11), Vector::Constant(1, dist(gen))});
    const auto x = random_matrix(1, 3, seed + 12);
    const auto y = random_targets(1, seed + 13);
    const double p = forward(unit, x)(0);
    spot = std::max(spot, std::abs(backward(unit, x, y).bias[0](0) - (p - y(0))));
  }
  return {worst < 1e-4 && spot <= 1e-12, "max rel error " + fmt(worst) + " over 20 nets, dL/db spot " + fmt(spot)};
}

// ─── bootstrap ──────────────────────────────────────────────────────────────

Outcome bootstrap_suite() {
  Rng64 rng(123456789);
  std::vector<double> counts(50, 0.0);
  for (auto i : bootstrap_indices(50, 100000, rng)) counts[i] += 1.0;
  double stat = 0.0;
  for (double c : counts) stat += (c - 2000.0) * (c - 2000.0) / 2000.0;
  const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(49.0), stat));

  std::vector<LowFreqComponent> pool;
  for (std::size_t i = 0; i < 100; ++i) {
    pool.push_back({"c" + std::to_string(i), i < 60 ? Label::Like : Label::Dislike, gaussian(16, i)});
  }
  std::map<Label, std::set<std::vector<double>>> members;
  for (const auto& c : pool) members[c.label].insert(c.values);

  bool sizes = true, membership = true;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    for (std::size_t m : {1u, 2u, 3u, 5u}) {
      const auto out = bootstrap_dataset(pool, {m, seed});
      const auto like = static_cast<std::size_t>(
          std::count_if(out.begin(), out.end(), [](const auto& c) { return c.label == Label::Like; }));
      sizes = sizes && out.size() == 100 * m && like == 60 * m;
      for (const auto& c : out) membership = membership && members[c.label].count(c.values) == 1;
    }
  }
  return {p > 0.001 && sizes && membership, "chi-square p " + fmt(p) + ", sizes " + (sizes ? "exact" : "WRONG") +
                                                ", membership " + (membership ? "ok" : "FABRICATED")};
}

// ─── band power ─────────────────────────────────────────────────────────────

Outcome band_power_check() {
  std::vector<double> tone(256);
  for (std::size_t i = 0; i < tone.size(); ++i) tone[i] = std::sin(2.0 * std::numbers::pi * 10.0 * static_cast<double>(i) / 128.0);
  const Signal s{"tone", Label::Like, tone, 128.0};
  const auto bands = canonical_bands(128.0);
  const auto powers = band_powers(s, bands);
  // time-domain energy is the independent total (Parseval, one-sided doubling)
  double energy = 0.0;
  const double mean = std::accumulate(tone.begin(), tone.end(), 0.0) / 256.0;
  for (double v : tone) energy += (v - mean) * (v - mean);
  const double one_sided_total = energy * 256.0 / 2.0;
  const double fraction = powers[2] / one_sided_total;
  return {fraction > 0.999, "alpha fraction " + fmt(fraction)};
}

// ─── metrics ────────────────────────────────────────────────────────────────

Outcome metrics_oracle() {
  std::mt19937_64 gen(31337);
  bool exact = true;
  std::vector<Label> p(1000), t(1000);
  for (std::size_t i = 0; i < 1000; ++i) {
    p[i] = gen() & 1U ? Label::Like : Label::Dislike;
    t[i] = gen() & 1U ? Label::Like : Label::Dislike;
  }
  std::size_t cells[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < 1000; ++i) ++cells[encode(p[i])][encode(t[i])];
  const auto m = compute_metrics(p, t);
  exact = m.tp == cells[1][1] && m.fp == cells[1][0] && m.fn == cells[0][1] && m.tn == cells[0][0] &&
          m.accuracy == static_cast<double>(cells[1][1] + cells[0][0]) / 1000.0;

  auto labels = [](std::initializer_list<int> bits) {
    std::vector<Label> out;
    for (int b : bits) out.push_back(b ? Label::Like : Label::Dislike);
    return out;
  };
  const auto w = compute_metrics(labels({1, 0, 0, 1}), labels({1, 0, 1, 1}));
  const bool worked = w.tp == 2 && w.fp == 0 && w.fn == 1 && w.tn == 1 && w.accuracy == 0.75 && w.precision == 1.0 &&
                      std::abs(w.recall - 2.0 / 3.0) < 1e-15 && std::abs(w.f1 - 0.8) < 1e-15;
  return {exact && worked, std::string("recount ") + (exact ? "exact" : "MISMATCH") + ", worked example acc " +
                               fmt(w.accuracy) + " f1 " + fmt(w.f1)};
}

// ─── end to end ─────────────────────────────────────────────────────────────

Outcome determinism(const fs::path& work) {
  const auto data = work / "det.csv";
  if (cli("synth --n 1000 --seed 42 --out " + q(data)) != 0) return {false, "synth failed"};
  for (const char* run : {"a", "b"}) {
    if (cli("pipeline --in " + q(data) + " --out " + q(work / run)) != 0) return {false, "pipeline failed"};
  }
  std::vector<std::string> differing;
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(work / "a")) {
    const auto name = entry.path().filename().string();
    const bool gated = name == "model.json" || name == "baseline-model.json" || name == "report.json" ||
                       entry.path().extension() == ".csv";
    if (!gated) continue;
    ++compared;
    if (slurp(entry.path()) != slurp(work / "b" / name)) differing.push_back(name);
  }
  return {differing.empty() && compared >= 7,
          std::to_string(compared) + " artifacts compared, " + std::to_string(differing.size()) + " differ"};
}

Outcome synthetic_gate(const fs::path& work) {
  const auto data = work / "syn.csv";
  const auto report = work / "report.json";
  if (cli("synth --n 1000 --seed 42 --out " + q(data)) != 0) return {false, "synth failed"};
  if (cli("compare --in " + q(data) + " --seed 42 --out " + q(report)) != 0) return {false, "compare failed"};
  const auto doc = nlohmann::json::parse(slurp(report));
  const double full = doc.at("arms").at("full").at("val_metrics").at("accuracy").get<double>();
  const double baseline = doc.at("arms").at("baseline").at("val_metrics").at("accuracy").get<double>();
  return {full >= 0.90, "full val accuracy " + fmt(full) + " (>= 0.90), baseline " + fmt(baseline)};
}

Outcome real_data(const fs::path& input, const fs::path& work) {
  const auto report = work / "real-report.json";
  if (cli("compare --in " + q(input) + " --seed 42 --out " + q(report)) != 0) return {false, "compare failed"};
  const auto doc = nlohmann::json::parse(slurp(report));
  const double full = doc.at("arms").at("full").at("val_metrics").at("accuracy").get<double>();
  const auto n = doc.at("dataset").at("size").get<std::size_t>();
  return {full >= 0.85, std::to_string(n) + " signals, full val accuracy " + fmt(full) + " (>= 0.85)"};
}

}  // namespace

int main() {
  std::random_device rd;
  const auto work = fs::temp_directory_path() / ("eegpref-acceptance-" + std::to_string(rd()));
  fs::create_directories(work);

  Gate gate;
  gate.run("spline suite", 5.0, spline_suite);
  gate.run("gradient suite", 10.0, gradient_suite);
  gate.run("determinism", 0.0, [&] { return determinism(work); });
  gate.run("bootstrap statistics", 0.0, bootstrap_suite);
  gate.run("band power", 0.0, band_power_check);
  gate.run("metrics oracle", 0.0, metrics_oracle);
  gate.run("end-to-end synthetic gate", 120.0, [&] { return synthetic_gate(work); });

  // Best-effort, not gated: a missing dataset is reported, a present one is scored.
  if (const char* real = std::getenv("EEGPREF_REAL_DATA"); real != nullptr && fs::exists(real)) {
    Gate best_effort;
    best_effort.run("real-data reproduction (not gated)", 0.0, [&] { return real_data(real, work); });
  } else {
    gate.skip("real-data reproduction (not gated)", "set EEGPREF_REAL_DATA to a manifest; see scripts/reproduce_real.sh");
  }

  std::error_code ignored;
  fs::remove_all(work, ignored);
  return gate.failed() ? 1 : 0;
}
