#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "eegpref/error.hpp"
#include "eegpref/signal.hpp"
#include "support.hpp"

using namespace eegpref;
using eegpref::testing::random_vector;
using eegpref::testing::TempDir;

namespace {

void write_lines(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
}

void write_samples(const std::filesystem::path& path, const std::vector<double>& samples) {
  std::ofstream out(path);
  out.precision(17);
  for (double v : samples) out << v << "\n";
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no eegpref::Error thrown");
  return ErrorCode::InvalidArgument;
}

std::vector<double> sine(double freq_hz, double fs, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / fs);
  return out;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double pop_sigma(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

TEST_CASE("ingest reads a manifest and keeps lengths and order") {
  TempDir dir("ingest");
  std::filesystem::create_directories(dir / "raw");
  write_samples(dir / "raw/a.txt", random_vector(512, 1));
  write_samples(dir / "raw/b.txt", random_vector(480, 2));
  write_lines(dir / "manifest.csv", "id,label,file\nfirst,Like,raw/a.txt\nsecond,dislike,raw/b.txt\n");
  const auto ds = ingest_raw(dir / "manifest.csv");
  REQUIRE(ds.size() == 2);
  CHECK(ds.signals[0].id == "first");
  CHECK(ds.signals[0].samples.size() == 512);
  CHECK(ds.signals[0].label == Label::Like);
  CHECK(ds.signals[1].id == "second");
  CHECK(ds.signals[1].samples.size() == 480);
  CHECK(ds.signals[1].label == Label::Dislike);
  CHECK(is_manifest_csv(dir / "manifest.csv"));
}

TEST_CASE("ingest errors") {
  TempDir dir("ingest-err");
  write_samples(dir / "a.txt", random_vector(32, 1));

  write_lines(dir / "empty.csv", "id,label,file\n");
  CHECK(code_of([&] { ingest_raw(dir / "empty.csv"); }) == ErrorCode::EmptyDataset);

  write_lines(dir / "dup.csv", "id,label,file\nx,like,a.txt\nx,like,a.txt\n");
  CHECK(code_of([&] { ingest_raw(dir / "dup.csv"); }) == ErrorCode::DuplicateId);

  write_lines(dir / "label.csv", "id,label,file\nx,like,a.txt\ny,meh,a.txt\n");
  try {
    ingest_raw(dir / "label.csv");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }

  write_lines(dir / "bad.txt", "1.0\n2.0\nabc\n");
  write_lines(dir / "badfile.csv", "id,label,file\nx,like,bad.txt\n");
  try {
    ingest_raw(dir / "badfile.csv");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("bad.txt:3") != std::string::npos);
  }
}

TEST_CASE("labels parse case-insensitively") {
  for (const char* text : {"Like", "like", "LIKE"}) CHECK(parse_label(text) == Label::Like);
  CHECK(parse_label("DisLike") == Label::Dislike);
  CHECK(encode(Label::Like) == 1);
  CHECK(encode(Label::Dislike) == 0);
  CHECK_THROWS_AS(parse_label("neutral"), Error);
}

TEST_CASE("canonical CSV round-trips bit for bit") {
  TempDir dir("canonical");
  const auto ds = generate_synthetic({.n = 12, .balance = 0.5, .dislike_sigma_mult = 2.0, .seed = 3, .length = 64});
  write_canonical_csv(ds, dir / "c.csv");
  const auto back = read_canonical_csv(dir / "c.csv");
  REQUIRE(back.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.signals[i].id == ds.signals[i].id);
    CHECK(back.signals[i].label == ds.signals[i].label);
    CHECK(back.signals[i].samples == ds.signals[i].samples);
  }
  CHECK_FALSE(is_manifest_csv(dir / "c.csv"));
}

TEST_CASE("resample examples") {
  const auto y = random_vector(40, 5);
  CHECK(resample_to_length(y, 40) == y);
  const std::vector<double> two{0.0, 1.0};
  const auto three = resample_to_length(two, 3);
  REQUIRE(three.size() == 3);
  CHECK(three[0] == 0.0);
  CHECK(three[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(three[2] == 1.0);
  const std::vector<double> flat(17, 4.25);
  for (std::size_t len : {2u, 5u, 100u}) {
    for (double v : resample_to_length(flat, len)) CHECK(v == 4.25);
  }
  CHECK(code_of([&] { resample_to_length(y, 1); }) == ErrorCode::LengthTooSmall);
}

TEST_CASE("resample keeps endpoints and bounds") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto y = random_vector(8 + seed * 7, seed, 10.0);
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    for (std::size_t len : {2u, 3u, 64u, 512u, 1000u}) {
      const auto z = resample_to_length(y, len);
      REQUIRE(z.size() == len);
      CHECK(z.front() == y.front());
      CHECK(z.back() == y.back());
      for (double v : z) {
        CHECK(v >= *lo);
        CHECK(v <= *hi);
      }
    }
  }
}

TEST_CASE("z-score examples") {
  const auto z = normalize_zscore(std::vector<double>{1.0, 2.0, 3.0});
  CHECK(z[0] == doctest::Approx(-1.224745).epsilon(1e-6));
  CHECK(z[1] == doctest::Approx(0.0));
  CHECK(z[2] == doctest::Approx(1.224745).epsilon(1e-6));
  for (double v : normalize_zscore(std::vector<double>{5.0, 5.0, 5.0})) CHECK(v == 0.0);
  CHECK(code_of([] { normalize_zscore(std::vector<double>{1.0, INFINITY}); }) == ErrorCode::NonFiniteInput);
}

TEST_CASE("z-score moments, idempotence and affine invariance") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto y = random_vector(512, seed + 10, 30.0);
    for (auto& v : y) v += 200.0;
    const auto z = normalize_zscore(y);
    CHECK(std::abs(mean(z)) < 1e-10);
    CHECK(std::abs(pop_sigma(z) - 1.0) < 1e-10);
    CHECK(eegpref::testing::max_abs_diff(normalize_zscore(z), z) <= 1e-9);
    const double a = 0.3 + static_cast<double>(seed), b = -17.0 * static_cast<double>(seed);
    std::vector<double> affine(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) affine[i] = a * y[i] + b;
    CHECK(eegpref::testing::max_abs_diff(normalize_zscore(affine), z) <= 1e-9);
  }
}

TEST_CASE("band power puts pure tones in the right band") {
  const auto bands = canonical_bands(128.0);
  Signal alpha{"a", Label::Like, sine(10.0, 128.0, 256), 128.0};
  const auto p = band_powers(alpha, bands);
  const double total = power_spectrum(alpha.samples, 128.0).total_non_dc();
  CHECK(p[2] / total > 0.999);

  Signal delta{"d", Label::Like, sine(2.0, 128.0, 256), 128.0};
  const auto q = band_powers(delta, bands);
  CHECK(q[0] / power_spectrum(delta.samples, 128.0).total_non_dc() > 0.999);

  Signal flat{"f", Label::Like, std::vector<double>(256, 3.0), 128.0};
  for (double v : band_powers(flat, bands)) CHECK(v == 0.0);

  Signal tiny{"t", Label::Like, std::vector<double>(15, 1.0), 128.0};
  CHECK(code_of([&] { band_powers(tiny, bands); }) == ErrorCode::SignalTooShort);
}

TEST_CASE("band power obeys Parseval") {
  // Independent oracle: time-domain energy of the mean-removed signal equals
  // (1/N) * sum over all N DFT bins of |X_k|^2, and the one-sided spectrum
  // counts bins 1..N/2-1 twice.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t n = 256;
    auto y = random_vector(n, seed + 40);
    const double m = mean(y);
    double energy = 0.0;
    for (double v : y) energy += (v - m) * (v - m);
    const auto spectrum = power_spectrum(y, 128.0);
    double two_sided = 0.0;
    for (std::size_t k = 1; k < spectrum.power.size(); ++k) {
      two_sided += (k == n / 2 ? 1.0 : 2.0) * spectrum.power[k];
    }
    CHECK(two_sided / static_cast<double>(n) == doctest::Approx(energy).epsilon(1e-9));

    const Signal s{"p", Label::Like, y, 128.0};
    const auto named = band_powers(s, canonical_bands(128.0));
    const double named_sum = std::accumulate(named.begin(), named.end(), 0.0);
    CHECK(named_sum <= spectrum.total_non_dc() * (1.0 + 1e-12));

    const std::vector<BandDefinition> cover{{BandName::Delta, 0.0, 20.0}, {BandName::Gamma, 20.0, 64.0}};
    const auto covered = band_powers(s, cover);
    CHECK(covered[0] + covered[1] == doctest::Approx(spectrum.total_non_dc()).epsilon(1e-9));
  }
}

TEST_CASE("class variance statistics") {
  Dataset ds;
  for (int i = 0; i < 40; ++i) {
    const bool like = i % 2 == 0;
    ds.signals.push_back({"s" + std::to_string(i), like ? Label::Like : Label::Dislike,
                          random_vector(256, 500 + i, like ? 1.0 : 2.0), 128.0});
  }
  const auto stats = class_variance_stats(ds);
  CHECK(stats.like.count == 20);
  CHECK(stats.dislike.count == 20);
  REQUIRE(stats.like.variance);
  REQUIRE(stats.dislike.variance);
  CHECK(stats.dislike.variance->mean_variance > stats.like.variance->mean_variance);
  CHECK(stats.like.variance->min_variance <= stats.like.variance->mean_variance);
  CHECK(stats.like.variance->mean_variance <= stats.like.variance->max_variance);

  // unbiased variance, recomputed by hand
  const std::vector<double> v{1.0, 2.0, 4.0, 7.0};
  CHECK(sample_variance(v) == doctest::Approx(7.0).epsilon(1e-15));
}

TEST_CASE("class variance statistics are symmetric and tolerate one class") {
  Dataset ds;
  const auto y = random_vector(64, 9);
  ds.signals.push_back({"a", Label::Like, y, 128.0});
  ds.signals.push_back({"b", Label::Dislike, y, 128.0});
  const auto stats = class_variance_stats(ds);
  CHECK(stats.like.variance->mean_variance == stats.dislike.variance->mean_variance);
  CHECK(stats.like.variance->mean_amplitude == stats.dislike.variance->mean_amplitude);

  Dataset one;
  one.signals.push_back({"a", Label::Like, y, 128.0});
  const auto single = class_variance_stats(one);
  CHECK(single.like.count == 1);
  CHECK(single.dislike.count == 0);
  CHECK_FALSE(single.dislike.variance.has_value());
}

TEST_CASE("synthetic generator") {
  const SynthConfig small{.n = 10, .seed = 7};
  const auto a = generate_synthetic(small);
  const auto b = generate_synthetic(small);
  REQUIRE(a.size() == 10);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.signals[i].id == b.signals[i].id);
    CHECK(a.signals[i].label == b.signals[i].label);
    CHECK(a.signals[i].samples == b.signals[i].samples);
  }

  const auto hundred = generate_synthetic({.n = 100, .balance = 0.5});
  CHECK(hundred.count(Label::Like) == 50);
  CHECK(hundred.count(Label::Dislike) == 50);
  CHECK_NOTHROW(validate(hundred));

  const auto stats = class_variance_stats(generate_synthetic({.n = 200, .dislike_sigma_mult = 2.0}));
  CHECK(stats.dislike.variance->mean_variance > stats.like.variance->mean_variance);

  CHECK(code_of([] { generate_synthetic({.n = 10, .balance = 0.0}); }) == ErrorCode::BadBalance);
  CHECK(code_of([] { generate_synthetic({.n = 10, .balance = 1.0}); }) == ErrorCode::BadBalance);
}

TEST_CASE("different seeds give different data") {
  const auto a = generate_synthetic({.n = 4, .seed = 1});
  const auto b = generate_synthetic({.n = 4, .seed = 2});
  CHECK(a.signals[0].samples != b.signals[0].samples);
}
