#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eegpref {

inline constexpr double kDefaultSamplingRateHz = 128.0;
inline constexpr std::size_t kDefaultSignalLength = 512;
inline constexpr std::size_t kMinSignalLength = 8;

// Like is the positive class.
enum class Label : int { Dislike = 0, Like = 1 };

inline constexpr int encode(Label label) noexcept { return static_cast<int>(label); }
std::string_view to_string(Label label) noexcept;
// Case-insensitive; throws ParseError on anything but like/dislike.
Label parse_label(std::string_view text);

struct Signal {
  std::string id;
  Label label{Label::Like};
  std::vector<double> samples;
  double sampling_rate_hz{kDefaultSamplingRateHz};
};

// Throws if the signal violates its invariants (length, finiteness, rate).
void validate(const Signal& signal);

struct Dataset {
  std::vector<Signal> signals;
  std::string source;

  std::size_t size() const noexcept { return signals.size(); }
  bool empty() const noexcept { return signals.empty(); }
  std::size_t count(Label label) const noexcept;
};

// Checks non-emptiness, id uniqueness and every signal's invariants.
void validate(const Dataset& dataset);

// ─── Ingestion and the canonical fixed-length CSV ───────────────────────────

// Reads a manifest CSV with header `id,label,file`; `file` is relative to the
// manifest's directory and holds one decimal sample per line.
Dataset ingest_raw(const std::filesystem::path& manifest_path,
                   double sampling_rate_hz = kDefaultSamplingRateHz);

// `id,label,v0,...,v{L-1}`; every signal must share one length.
void write_canonical_csv(const Dataset& dataset, const std::filesystem::path& path);
Dataset read_canonical_csv(const std::filesystem::path& path,
                           double sampling_rate_hz = kDefaultSamplingRateHz);

// True when the CSV header looks like a manifest (`id,label,file`).
bool is_manifest_csv(const std::filesystem::path& path);

// ─── Per-signal transforms ──────────────────────────────────────────────────

// Linear interpolation onto `length` points spanning [0, n-1].
std::vector<double> resample_to_length(std::span<const double> samples, std::size_t length);
Signal resample_to_length(const Signal& signal, std::size_t length);
Dataset resample_to_length(const Dataset& dataset, std::size_t length);

// (x - mean) / population sigma; all zeros when sigma < 1e-12.
std::vector<double> normalize_zscore(std::span<const double> samples);

// ─── Spectral bands ─────────────────────────────────────────────────────────

enum class BandName { Delta, Theta, Alpha, Beta, Gamma };
std::string_view to_string(BandName name) noexcept;

struct BandDefinition {
  BandName name;
  double f_lo_hz;
  double f_hi_hz;
};

// delta [1,4), theta [4,8), alpha [8,13), beta [13,22), gamma [32, nyquist].
// 22-32 Hz is deliberately left unassigned.
std::array<BandDefinition, 5> canonical_bands(double sampling_rate_hz);

// Squared DFT magnitudes of the mean-removed signal for bins 0..n/2, and the
// matching bin frequencies.
struct PowerSpectrum {
  std::vector<double> freqs_hz;
  std::vector<double> power;

  // Sum over bins 1..n/2 (DC excluded).
  double total_non_dc() const noexcept;
};

PowerSpectrum power_spectrum(std::span<const double> samples, double sampling_rate_hz);

// Power summed over bins with f_lo <= f < f_hi. A band whose upper edge is the
// Nyquist frequency also takes the Nyquist bin. The DC bin never counts.
std::vector<double> band_powers(const Signal& signal, std::span<const BandDefinition> bands);

// ─── Per-class statistics ───────────────────────────────────────────────────

struct VarianceSummary {
  double mean_variance{0.0};
  double min_variance{0.0};
  double max_variance{0.0};
  double mean_amplitude{0.0};
};

struct ClassSummary {
  std::size_t count{0};
  std::optional<VarianceSummary> variance;  // present iff count > 0
};

struct ClassStats {
  ClassSummary like;
  ClassSummary dislike;

  const ClassSummary& of(Label label) const noexcept {
    return label == Label::Like ? like : dislike;
  }
};

// Unbiased (n-1) sample variance.
double sample_variance(std::span<const double> samples);

ClassStats class_variance_stats(const Dataset& dataset);

// ─── Synthetic data ─────────────────────────────────────────────────────────

struct SynthConfig {
  std::size_t n{1000};
  double balance{0.5};  // fraction of Like signals
  double dislike_sigma_mult{2.0};
  std::uint64_t seed{42};
  std::size_t length{kDefaultSignalLength};
  double sampling_rate_hz{kDefaultSamplingRateHz};
};

// Class-conditional generator: a smooth trend built from a seeded template of
// 2-4 sinusoids below 4 Hz (Dislike signals carry larger amplitudes, every
// signal adds gain and phase jitter) plus white noise whose sigma is scaled by
// dislike_sigma_mult for Dislike signals. Deterministic in its arguments.
Dataset generate_synthetic(const SynthConfig& config);

}  // namespace eegpref
