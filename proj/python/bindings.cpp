// Python bindings for the core operations. Sequences come in as anything
// convertible to a list of floats (numpy arrays included) and go out as numpy
// arrays; datasets and models are exposed as plain classes.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "eegpref/augment.hpp"
#include "eegpref/error.hpp"
#include "eegpref/evaluation.hpp"
#include "eegpref/mlp.hpp"
#include "eegpref/pipeline.hpp"
#include "eegpref/signal.hpp"
#include "eegpref/smoother.hpp"

namespace py = pybind11;
using namespace eegpref;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

PipelineConfig config_from(const py::dict& settings) {
  PipelineConfig config;
  for (const auto& [key, value] : settings) {
    apply_setting(config, py::str(key), py::str(value));
  }
  return config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "EEG Like/Dislike classification core";

  static py::exception<Error> error_type(m, "EegprefError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object instance = py::reinterpret_borrow<py::object>(error_type.ptr())(e.what());
      instance.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), instance.ptr());
    }
  });

  py::enum_<Label>(m, "Label").value("Dislike", Label::Dislike).value("Like", Label::Like);
  m.def("parse_label", &parse_label, py::arg("text"));

  py::class_<Signal>(m, "Signal")
      .def(py::init([](std::string id, Label label, std::vector<double> samples, double fs) {
             return Signal{std::move(id), label, std::move(samples), fs};
           }),
           py::arg("id"), py::arg("label"), py::arg("samples"), py::arg("sampling_rate_hz") = kDefaultSamplingRateHz)
      .def_readwrite("id", &Signal::id)
      .def_readwrite("label", &Signal::label)
      .def_property(
          "samples", [](const Signal& s) { return to_array(s.samples); },
          [](Signal& s, std::vector<double> v) { s.samples = std::move(v); })
      .def_readwrite("sampling_rate_hz", &Signal::sampling_rate_hz)
      .def("__repr__", [](const Signal& s) {
        return "<Signal " + s.id + " " + std::string(to_string(s.label)) + " n=" + std::to_string(s.samples.size()) +
               ">";
      });

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def_readwrite("signals", &Dataset::signals)
      .def_readwrite("source", &Dataset::source)
      .def("count", &Dataset::count, py::arg("label"))
      .def("__len__", &Dataset::size);

  // signal-core
  m.def("ingest_raw", &ingest_raw, py::arg("manifest"), py::arg("sampling_rate_hz") = kDefaultSamplingRateHz);
  m.def("read_canonical_csv", &read_canonical_csv, py::arg("path"),
        py::arg("sampling_rate_hz") = kDefaultSamplingRateHz);
  m.def("write_canonical_csv", &write_canonical_csv, py::arg("dataset"), py::arg("path"));
  m.def(
      "resample_to_length",
      [](const std::vector<double>& x, std::size_t length) { return to_array(resample_to_length(x, length)); },
      py::arg("samples"), py::arg("length"));
  m.def(
      "normalize_zscore", [](const std::vector<double>& x) { return to_array(normalize_zscore(x)); },
      py::arg("samples"));
  m.def(
      "band_powers",
      [](const std::vector<double>& x, double fs) {
        const Signal s{"", Label::Like, x, fs};
        const auto bands = canonical_bands(fs);
        const auto powers = band_powers(s, bands);
        py::dict out;
        for (std::size_t i = 0; i < bands.size(); ++i) out[py::str(std::string(to_string(bands[i].name)))] = powers[i];
        return out;
      },
      py::arg("samples"), py::arg("sampling_rate_hz") = kDefaultSamplingRateHz,
      "Power in the five canonical bands, keyed by band name.");
  m.def(
      "class_variance_stats",
      [](const Dataset& d) { return py::module_::import("json").attr("loads")(class_stats_to_json(class_variance_stats(d))); },
      py::arg("dataset"));
  m.def(
      "generate_synthetic",
      [](std::size_t n, double balance, double mult, std::uint64_t seed, std::size_t length, double fs) {
        return generate_synthetic({n, balance, mult, seed, length, fs});
      },
      py::arg("n") = 1000, py::arg("balance") = 0.5, py::arg("dislike_sigma_mult") = 2.0, py::arg("seed") = 42,
      py::arg("length") = kDefaultSignalLength, py::arg("sampling_rate_hz") = kDefaultSamplingRateHz);

  // spline-filter
  m.def(
      "smooth_whittaker",
      [](const std::vector<double>& x, double lambda) { return to_array(smooth_whittaker(x, {lambda})); },
      py::arg("samples"), py::arg("lam") = kDefaultLambda);
  m.def(
      "highfreq_residual",
      [](const std::vector<double>& x, double lambda) { return to_array(highfreq_residual(x, {lambda})); },
      py::arg("samples"), py::arg("lam") = kDefaultLambda);

  // augment
  m.def(
      "nonlinear_transform",
      [](const std::vector<double>& x, const std::string& kind) {
        return to_array(nonlinear_transform(x, parse_transform(kind)));
      },
      py::arg("values"), py::arg("kind") = "signed-log");
  m.def(
      "bootstrap_indices",
      [](std::size_t n, std::size_t count, std::uint64_t seed) {
        Rng64 rng(seed);
        return bootstrap_indices(n, count, rng);
      },
      py::arg("n"), py::arg("m"), py::arg("seed"));

  // ann
  py::class_<MlpModel>(m, "MlpModel")
      .def_property_readonly("input_dim", &MlpModel::input_dim)
      .def_property_readonly("parameter_count", &MlpModel::parameter_count)
      .def_property_readonly("weights",
                             [](const MlpModel& model) {
                               std::vector<Matrix> out;
                               for (const auto& l : model.layers) out.push_back(l.weights);
                               return out;
                             })
      .def("to_json", &model_to_json)
      .def_static("from_json", &model_from_json, py::arg("text"));
  m.def("init_mlp", &init_mlp, py::arg("input_dim"), py::arg("hidden") = kDefaultHidden, py::arg("seed") = 0);
  m.def("forward", &forward, py::arg("model"), py::arg("batch"));
  m.def("bce_loss", &bce_loss, py::arg("probabilities"), py::arg("targets"));
  m.def("grad_check", &grad_check, py::arg("model"), py::arg("batch"), py::arg("targets"), py::arg("h") = 1e-5);
  m.def("predict_labels", &predict_labels, py::arg("model"), py::arg("batch"), py::arg("threshold") = 0.5);
  m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
  m.def("load_model", &load_model, py::arg("path"));

  // eval-report
  py::class_<Metrics>(m, "Metrics")
      .def_readonly("tp", &Metrics::tp)
      .def_readonly("fp", &Metrics::fp)
      .def_readonly("tn", &Metrics::tn)
      .def_readonly("fn", &Metrics::fn)
      .def_readonly("accuracy", &Metrics::accuracy)
      .def_readonly("precision", &Metrics::precision)
      .def_readonly("recall", &Metrics::recall)
      .def_readonly("f1", &Metrics::f1);
  m.def("compute_metrics", &compute_metrics, py::arg("predictions"), py::arg("truths"));
  m.def(
      "stratified_split",
      [](const Dataset& d, double fraction, std::uint64_t seed) {
        auto split = stratified_split(d, {fraction, seed});
        return py::make_tuple(std::move(split.train), std::move(split.validation));
      },
      py::arg("dataset"), py::arg("train_fraction") = 0.8, py::arg("seed") = 0);

  // Whole-run entry points take the same keys as the CLI config file.
  m.def(
      "compare_pipelines",
      [](const Dataset& dataset, const py::dict& settings) {
        const auto config = config_from(settings);
        validate(config);
        const auto resampled = resample_to_length(dataset, config.length);
        std::string text;
        {
          py::gil_scoped_release release;
          text = report_to_json(compare_pipelines(resampled, baseline_arm(), full_arm(config), compare_settings(config)));
        }
        return text;
      },
      py::arg("dataset"), py::arg("settings") = py::dict(), "Report JSON text for the baseline and full arms.");
  m.def(
      "run_pipeline",
      [](const py::dict& settings) {
        const auto config = config_from(settings);
        std::string text;
        {
          py::gil_scoped_release release;
          text = report_to_json(run_pipeline(config));
        }
        return text;
      },
      py::arg("settings"), "Runs every stage and writes the artifacts; returns the report JSON text.");
  m.attr("pipeline_keys") = pipeline_keys();
}
