#include "eegpref/signal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "eegpref/error.hpp"
#include "eegpref/rng.hpp"
#include "text.hpp"

namespace eegpref {

namespace {

bool all_finite(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double v) { return std::isfinite(v); });
}

double mean_of(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::string where(const std::filesystem::path& path, std::size_t line_no) {
  return path.string() + ":" + std::to_string(line_no);
}

std::vector<double> read_signal_file(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  std::vector<double> samples;
  samples.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto field = text::trim(lines[i]);
    if (field.empty()) continue;
    const auto value = text::parse_double(field);
    if (!value || !std::isfinite(*value)) {
      throw Error(ErrorCode::ParseError,
                  where(path, i + 1) + ": expected a finite sample, got '" + std::string(field) + "'");
    }
    samples.push_back(*value);
  }
  return samples;
}

void check_unique(const Dataset& dataset) {
  std::unordered_set<std::string> seen;
  for (const auto& s : dataset.signals) {
    if (!seen.insert(s.id).second) throw Error(ErrorCode::DuplicateId, "duplicate id '" + s.id + "'");
  }
}

std::vector<std::string_view> header_fields(const std::string& line) {
  auto fields = text::split(line, ',');
  for (auto& f : fields) f = text::trim(f);
  return fields;
}

}  // namespace

std::string_view to_string(Label label) noexcept {
  return label == Label::Like ? "Like" : "Dislike";
}

Label parse_label(std::string_view text) {
  const auto lowered = text::to_lower(text::trim(text));
  if (lowered == "like") return Label::Like;
  if (lowered == "dislike") return Label::Dislike;
  throw Error(ErrorCode::ParseError, "unknown label '" + std::string(text) + "'");
}

void validate(const Signal& signal) {
  if (signal.samples.size() < kMinSignalLength) {
    throw Error(ErrorCode::SignalTooShort, "signal '" + signal.id + "' has " +
                                               std::to_string(signal.samples.size()) +
                                               " samples, need at least 8");
  }
  if (!all_finite(signal.samples)) {
    throw Error(ErrorCode::NonFiniteInput, "signal '" + signal.id + "' has non-finite samples");
  }
  if (!(signal.sampling_rate_hz > 0.0) || !std::isfinite(signal.sampling_rate_hz)) {
    throw Error(ErrorCode::InvalidArgument, "signal '" + signal.id + "' has a bad sampling rate");
  }
}

std::size_t Dataset::count(Label label) const noexcept {
  return static_cast<std::size_t>(std::count_if(
      signals.begin(), signals.end(), [label](const Signal& s) { return s.label == label; }));
}

void validate(const Dataset& dataset) {
  if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "dataset has no signals");
  check_unique(dataset);
  for (const auto& s : dataset.signals) validate(s);
}

Dataset ingest_raw(const std::filesystem::path& manifest_path, double sampling_rate_hz) {
  const auto lines = read_lines(manifest_path);
  if (lines.empty()) throw Error(ErrorCode::ParseError, where(manifest_path, 1) + ": missing header");
  const auto header = header_fields(lines.front());
  if (header.size() != 3 || header[0] != "id" || header[1] != "label" || header[2] != "file") {
    throw Error(ErrorCode::ParseError, where(manifest_path, 1) + ": header must be id,label,file");
  }

  const auto base = manifest_path.parent_path();
  Dataset dataset;
  dataset.source = manifest_path.string();
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const auto fields = header_fields(lines[i]);
    if (fields.size() != 3 || fields[0].empty() || fields[2].empty()) {
      throw Error(ErrorCode::ParseError, where(manifest_path, i + 1) + ": expected id,label,file");
    }
    Signal signal;
    signal.id = std::string(fields[0]);
    try {
      signal.label = parse_label(fields[1]);
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, where(manifest_path, i + 1) + ": " + e.what());
    }
    signal.samples = read_signal_file(base / std::string(fields[2]));
    signal.sampling_rate_hz = sampling_rate_hz;
    dataset.signals.push_back(std::move(signal));
  }
  if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, manifest_path.string() + " has no rows");
  validate(dataset);
  return dataset;
}

void write_canonical_csv(const Dataset& dataset, const std::filesystem::path& path) {
  if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "nothing to write");
  const auto length = dataset.signals.front().samples.size();
  std::ostringstream out;
  out << "id,label";
  for (std::size_t j = 0; j < length; ++j) out << ",v" << j;
  out << '\n';
  for (const auto& s : dataset.signals) {
    if (s.samples.size() != length) {
      throw Error(ErrorCode::LengthMismatch, "signal '" + s.id + "' differs in length; resample first");
    }
    out << s.id << ',' << to_string(s.label);
    for (double v : s.samples) out << ',' << text::format_double(v);
    out << '\n';
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  file << out.str();
  if (!file) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

Dataset read_canonical_csv(const std::filesystem::path& path, double sampling_rate_hz) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw Error(ErrorCode::ParseError, where(path, 1) + ": missing header");
  const auto header = header_fields(lines.front());
  if (header.size() < 3 || header[0] != "id" || header[1] != "label" || header[2] != "v0") {
    throw Error(ErrorCode::ParseError, where(path, 1) + ": header must be id,label,v0,...");
  }
  const std::size_t length = header.size() - 2;

  Dataset dataset;
  dataset.source = path.string();
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const auto fields = text::split(lines[i], ',');
    if (fields.size() != length + 2) {
      throw Error(ErrorCode::ParseError, where(path, i + 1) + ": expected " +
                                             std::to_string(length + 2) + " fields, got " +
                                             std::to_string(fields.size()));
    }
    Signal signal;
    signal.id = std::string(text::trim(fields[0]));
    try {
      signal.label = parse_label(fields[1]);
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, where(path, i + 1) + ": " + e.what());
    }
    signal.samples.reserve(length);
    for (std::size_t j = 0; j < length; ++j) {
      const auto value = text::parse_double(fields[j + 2]);
      if (!value || !std::isfinite(*value)) {
        throw Error(ErrorCode::ParseError,
                    where(path, i + 1) + ": bad sample in column v" + std::to_string(j));
      }
      signal.samples.push_back(*value);
    }
    signal.sampling_rate_hz = sampling_rate_hz;
    dataset.signals.push_back(std::move(signal));
  }
  if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, path.string() + " has no rows");
  validate(dataset);
  return dataset;
}

bool is_manifest_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = header_fields(line);
  return header.size() == 3 && header[0] == "id" && header[1] == "label" && header[2] == "file";
}

std::vector<double> resample_to_length(std::span<const double> samples, std::size_t length) {
  if (length < 2) throw Error(ErrorCode::LengthTooSmall, "resample length must be >= 2");
  if (samples.empty()) throw Error(ErrorCode::LengthTooSmall, "cannot resample an empty signal");
  const std::size_t n = samples.size();
  if (n == length) return {samples.begin(), samples.end()};
  if (n == 1) return std::vector<double>(length, samples.front());

  std::vector<double> out(length);
  const double step = static_cast<double>(n - 1) / static_cast<double>(length - 1);
  out.front() = samples.front();
  out.back() = samples.back();
  for (std::size_t j = 1; j + 1 < length; ++j) {
    const double t = static_cast<double>(j) * step;
    const auto i = std::min(static_cast<std::size_t>(t), n - 2);
    const double frac = t - static_cast<double>(i);
    const double a = samples[i];
    const double b = samples[i + 1];
    // Clamp so rounding never leaves the segment's range.
    out[j] = std::clamp(a + frac * (b - a), std::min(a, b), std::max(a, b));
  }
  return out;
}

Signal resample_to_length(const Signal& signal, std::size_t length) {
  Signal out = signal;
  out.samples = resample_to_length(signal.samples, length);
  return out;
}

Dataset resample_to_length(const Dataset& dataset, std::size_t length) {
  Dataset out;
  out.source = dataset.source;
  out.signals.reserve(dataset.size());
  for (const auto& s : dataset.signals) out.signals.push_back(resample_to_length(s, length));
  return out;
}

std::vector<double> normalize_zscore(std::span<const double> samples) {
  if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "cannot normalize an empty sequence");
  if (!all_finite(samples)) throw Error(ErrorCode::NonFiniteInput, "normalize_zscore: non-finite input");
  const double mu = mean_of(samples);
  double ss = 0.0;
  for (double x : samples) ss += (x - mu) * (x - mu);
  const double sigma = std::sqrt(ss / static_cast<double>(samples.size()));
  std::vector<double> out(samples.size(), 0.0);
  if (sigma < 1e-12) return out;
  for (std::size_t i = 0; i < samples.size(); ++i) out[i] = (samples[i] - mu) / sigma;
  return out;
}

std::string_view to_string(BandName name) noexcept {
  switch (name) {
    case BandName::Delta: return "delta";
    case BandName::Theta: return "theta";
    case BandName::Alpha: return "alpha";
    case BandName::Beta: return "beta";
    case BandName::Gamma: return "gamma";
  }
  return "unknown";
}

std::array<BandDefinition, 5> canonical_bands(double sampling_rate_hz) {
  const double nyquist = sampling_rate_hz / 2.0;
  if (!(nyquist > 32.0)) {
    throw Error(ErrorCode::InvalidArgument, "gamma band needs a Nyquist frequency above 32 Hz");
  }
  return {{{BandName::Delta, 1.0, 4.0},
           {BandName::Theta, 4.0, 8.0},
           {BandName::Alpha, 8.0, 13.0},
           {BandName::Beta, 13.0, 22.0},
           {BandName::Gamma, 32.0, nyquist}}};
}

double PowerSpectrum::total_non_dc() const noexcept {
  return std::accumulate(power.begin() + (power.empty() ? 0 : 1), power.end(), 0.0);
}

PowerSpectrum power_spectrum(std::span<const double> samples, double sampling_rate_hz) {
  const std::size_t n = samples.size();
  if (n < 16) throw Error(ErrorCode::SignalTooShort, "band powers need at least 16 samples");
  if (!all_finite(samples)) throw Error(ErrorCode::NonFiniteInput, "power_spectrum: non-finite input");

  const double mu = mean_of(samples);
  std::vector<double> centred(n);
  for (std::size_t i = 0; i < n; ++i) centred[i] = samples[i] - mu;

  // Direct DFT over the one-sided bins with a twiddle table indexed by (k*t) mod n.
  std::vector<double> cos_table(n), sin_table(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
    cos_table[m] = std::cos(angle);
    sin_table[m] = std::sin(angle);
  }

  PowerSpectrum spectrum;
  const std::size_t bins = n / 2 + 1;
  spectrum.freqs_hz.resize(bins);
  spectrum.power.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    double re = 0.0;
    double im = 0.0;
    std::size_t idx = 0;
    for (std::size_t t = 0; t < n; ++t) {
      re += centred[t] * cos_table[idx];
      im -= centred[t] * sin_table[idx];
      idx += k;
      if (idx >= n) idx -= n;
    }
    spectrum.freqs_hz[k] = static_cast<double>(k) * sampling_rate_hz / static_cast<double>(n);
    spectrum.power[k] = re * re + im * im;
  }
  return spectrum;
}

std::vector<double> band_powers(const Signal& signal, std::span<const BandDefinition> bands) {
  if (!(signal.sampling_rate_hz > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "band_powers needs a sampling rate");
  }
  const auto spectrum = power_spectrum(signal.samples, signal.sampling_rate_hz);
  const double nyquist = signal.sampling_rate_hz / 2.0;
  const std::size_t last = spectrum.power.size() - 1;
  const bool even = signal.samples.size() % 2 == 0;

  std::vector<double> out;
  out.reserve(bands.size());
  for (const auto& band : bands) {
    if (!(band.f_lo_hz >= 0.0 && band.f_lo_hz < band.f_hi_hz)) {
      throw Error(ErrorCode::InvalidArgument, "band '" + std::string(to_string(band.name)) +
                                                  "' needs 0 <= f_lo < f_hi");
    }
    const bool closes_at_nyquist = std::abs(band.f_hi_hz - nyquist) <= 1e-9 * nyquist;
    double sum = 0.0;
    for (std::size_t k = 1; k < spectrum.power.size(); ++k) {
      const double f = spectrum.freqs_hz[k];
      const bool nyquist_bin = even && k == last;
      if ((f >= band.f_lo_hz && f < band.f_hi_hz) || (nyquist_bin && closes_at_nyquist)) {
        sum += spectrum.power[k];
      }
    }
    out.push_back(sum);
  }
  return out;
}

double sample_variance(std::span<const double> samples) {
  if (samples.size() < 2) return 0.0;
  const double mu = mean_of(samples);
  double ss = 0.0;
  for (double x : samples) ss += (x - mu) * (x - mu);
  return ss / static_cast<double>(samples.size() - 1);
}

ClassStats class_variance_stats(const Dataset& dataset) {
  if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "class_variance_stats on empty dataset");

  auto summarise = [&](Label label) {
    ClassSummary summary;
    VarianceSummary v;
    double var_sum = 0.0;
    double amp_sum = 0.0;
    for (const auto& s : dataset.signals) {
      if (s.label != label) continue;
      const double var = sample_variance(s.samples);
      double abs_sum = 0.0;
      for (double x : s.samples) abs_sum += std::abs(x);
      if (summary.count == 0) {
        v.min_variance = v.max_variance = var;
      } else {
        v.min_variance = std::min(v.min_variance, var);
        v.max_variance = std::max(v.max_variance, var);
      }
      var_sum += var;
      amp_sum += abs_sum / static_cast<double>(s.samples.size());
      ++summary.count;
    }
    if (summary.count > 0) {
      v.mean_variance = var_sum / static_cast<double>(summary.count);
      v.mean_amplitude = amp_sum / static_cast<double>(summary.count);
      summary.variance = v;
    }
    return summary;
  };
  return {summarise(Label::Like), summarise(Label::Dislike)};
}

Dataset generate_synthetic(const SynthConfig& config) {
  if (config.n < 2) throw Error(ErrorCode::InvalidArgument, "synthetic dataset needs n >= 2");
  if (!(config.balance > 0.0 && config.balance < 1.0)) {
    throw Error(ErrorCode::BadBalance, "balance must lie strictly between 0 and 1");
  }
  if (!(config.dislike_sigma_mult >= 1.0) || !std::isfinite(config.dislike_sigma_mult)) {
    throw Error(ErrorCode::InvalidArgument, "dislike_sigma_mult must be >= 1");
  }
  if (config.length < kMinSignalLength) {
    throw Error(ErrorCode::SignalTooShort, "synthetic length must be >= 8");
  }
  if (!(config.sampling_rate_hz > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "sampling rate must be positive");
  }

  // Trend: a dataset-wide template of 2-4 sinusoids in [0.2, 3) Hz. Each
  // signal scales it by a class gain (Dislike trends are larger) times a
  // per-signal gain jitter, and jitters each component's phase. Noise sigma is
  // 10 device units for Like.
  constexpr double kTrendFreqLo = 0.2;
  constexpr double kTrendFreqHi = 3.0;
  constexpr double kTemplateAmpLo = 4.0, kTemplateAmpHi = 8.0;
  constexpr double kDislikeGain = 2.2;
  constexpr double kGainJitterLo = 0.8, kGainJitterHi = 1.2;
  constexpr double kPhaseJitter = 0.2;  // radians, std of a normal draw
  constexpr double kNoiseSigma = 5.0;

  struct Component {
    double freq;
    double phase;
    double amp;
  };

  Rng64 rng(config.seed);
  std::vector<Component> trend(2 + static_cast<std::size_t>(rng.next_below(3)));
  for (auto& c : trend) {
    c.freq = rng.next_uniform(kTrendFreqLo, kTrendFreqHi);
    c.phase = rng.next_uniform(0.0, 2.0 * std::numbers::pi);
    c.amp = rng.next_uniform(kTemplateAmpLo, kTemplateAmpHi);
  }

  const auto n_like = static_cast<std::size_t>(std::clamp<long long>(
      std::llround(static_cast<double>(config.n) * config.balance), 1,
      static_cast<long long>(config.n) - 1));
  std::vector<Label> labels(config.n, Label::Dislike);
  std::fill_n(labels.begin(), n_like, Label::Like);
  for (std::size_t i = config.n - 1; i > 0; --i) {
    std::swap(labels[i], labels[rng.next_below(i + 1)]);
  }

  const auto width = std::to_string(config.n - 1).size();
  Dataset dataset;
  dataset.source = "synthetic(n=" + std::to_string(config.n) + ",seed=" + std::to_string(config.seed) + ")";
  dataset.signals.reserve(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    Signal s;
    auto digits = std::to_string(i);
    s.id = "syn-" + std::string(width - digits.size(), '0') + digits;
    s.label = labels[i];
    s.sampling_rate_hz = config.sampling_rate_hz;
    s.samples.assign(config.length, 0.0);

    const bool dislike = s.label == Label::Dislike;
    const double gain = (dislike ? kDislikeGain : 1.0) * rng.next_uniform(kGainJitterLo, kGainJitterHi);
    for (const auto& c : trend) {
      const double phase = c.phase + kPhaseJitter * rng.next_gaussian();
      for (std::size_t t = 0; t < config.length; ++t) {
        const double time = static_cast<double>(t) / config.sampling_rate_hz;
        s.samples[t] += gain * c.amp * std::sin(2.0 * std::numbers::pi * c.freq * time + phase);
      }
    }
    const double sigma = kNoiseSigma * (dislike ? config.dislike_sigma_mult : 1.0);
    for (double& x : s.samples) x += sigma * rng.next_gaussian();
    dataset.signals.push_back(std::move(s));
  }
  return dataset;
}

}  // namespace eegpref
