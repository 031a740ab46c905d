#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "spamsim/analytics.hpp"
#include "spamsim/cli.hpp"
#include "spamsim/experiment.hpp"
#include "spamsim/io.hpp"

namespace py = pybind11;
using namespace spamsim;

namespace {

RunConfig resolve(const std::string& config_json) {
  return config_json.empty() ? RunConfig{ExperimentConfig{}, ErrorModel::reference_defaults()}
                             : parse_run_config(config_json);
}

Sequence sequence_for(const std::string& encoding, const std::string& state) {
  const auto v = parse_qubit_value(state);
  return build_sequence(encoding_catalog(parse_encoding(encoding)),
                        v == QubitValue::Zero ? Preparation::Zero : Preparation::One);
}

}  // namespace

PYBIND11_MODULE(_spamsim, m) {
  m.doc() = "Monte Carlo simulator of trapped-ion qubit state preparation and measurement";
  m.attr("__version__") = version();

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InseparableDistributions>(m, "InseparableDistributions", PyExc_ValueError);

  m.def(
      "run",
      [](const std::string& config_json) {
        const auto rc = resolve(config_json);
        ExperimentResult res;
        {
          py::gil_scoped_release release;
          res = run_experiment(rc.experiment, rc.model);
        }
        return dump_json(summary_to_json(res.summary, rc.experiment));
      },
      py::arg("config_json") = "",
      "Run an experiment from a JSON config string; returns the summary JSON.");

  m.def(
      "predict_rejection",
      [](const std::string& encoding, const std::string& state, bool exact, bool include_decay) {
        const auto s = sequence_for(encoding, state);
        const auto model = ErrorModel::reference_defaults();
        const PredictOptions opt{include_decay, false};
        return exact ? predict_rejection_exact(s, model, opt) : predict_rejection(s, model, opt);
      },
      py::arg("encoding"), py::arg("state"), py::arg("exact") = false, py::arg("include_decay") = false);

  m.def(
      "evaluate_flags",
      [](const std::string& pattern, bool strict) {
        if (pattern.size() != kDetectionCount) throw ConfigError("pattern needs one b/d per detection");
        DetectionOutcomes o{};
        for (std::size_t i = 0; i < kDetectionCount; ++i) {
          if (pattern[i] != 'b' && pattern[i] != 'd') throw ConfigError("pattern characters must be b or d");
          o[i] = pattern[i] == 'b' ? Outcome::Bright : Outcome::Dark;
        }
        const auto v = evaluate_flags(o, strict);
        py::object inferred = py::none();
        if (v.inferred) inferred = py::int_(*v.inferred == QubitValue::Zero ? 0 : 1);
        return py::make_tuple(v.flagged, std::string(to_string(v.reason)), inferred);
      },
      py::arg("pattern"), py::arg("strict") = false,
      "Flag verdict for an R0..R5 pattern such as 'bddbbb': (flagged, reason, inferred).");

  m.def(
      "wilson_interval",
      [](std::uint64_t k, std::uint64_t n, double z) {
        const auto i = wilson_interval(k, n, z);
        return py::make_tuple(i.lo, i.hi);
      },
      py::arg("k"), py::arg("n"), py::arg("z") = 1.0);

  m.def(
      "detection_error_budget",
      [](double bright, double dark, double decay) {
        const auto b = detection_error_budget(bright, dark, decay);
        return py::dict(py::arg("bright_total") = b.bright_total, py::arg("dark_total") = b.dark_total,
                        py::arg("average") = b.average);
      },
      py::arg("bright_error"), py::arg("dark_error"), py::arg("decay_error"));

  m.def("bias_closed_form", &bias_closed_form, py::arg("gamma"), py::arg("p0") = 0.5);

  m.def(
      "fit_lifetime",
      [](const std::vector<double>& delays, const std::vector<bool>& decayed) {
        if (delays.size() != decayed.size()) throw ConfigError("delays and decayed differ in length");
        std::vector<std::pair<double, bool>> samples;
        for (std::size_t i = 0; i < delays.size(); ++i) samples.emplace_back(delays[i], decayed[i]);
        const auto fit = fit_lifetime(bin_lifetime_samples(samples));
        return py::make_tuple(fit.tau, fit.tau_stderr);
      },
      py::arg("delays"), py::arg("decayed"), "Maximum-likelihood lifetime; returns (tau, stderr).");

  m.def(
      "calibrate_threshold",
      [](const std::vector<std::int64_t>& bright, const std::vector<std::int64_t>& dark) {
        const auto b = CountHistogram::from_samples(bright, 1, HistogramLabel::Bright);
        const auto d = CountHistogram::from_samples(dark, 1, HistogramLabel::Dark);
        return dump_json(calibration_to_json(calibrate_threshold(b, d), FitMethod::Moments));
      },
      py::arg("bright_counts"), py::arg("dark_counts"));

  m.def(
      "simulate_counts",
      [](double fluorescing, std::size_t samples, std::uint64_t seed) {
        return simulate_counts(DetectionModel{}, fluorescing, samples, seed);
      },
      py::arg("fluorescing"), py::arg("samples"), py::arg("seed"));

  m.def(
      "main",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
