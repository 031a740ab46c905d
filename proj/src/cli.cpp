#include "spamsim/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "spamsim/analytics.hpp"
#include "spamsim/experiment.hpp"
#include "spamsim/io.hpp"

#ifndef SPAMSIM_VERSION
#define SPAMSIM_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;

namespace spamsim {

const char* version() { return SPAMSIM_VERSION; }

namespace {

struct ModelOptions {
  std::string config_path;
  bool reference_model = false;
};

void add_model_options(CLI::App* cmd, ModelOptions& m) {
  cmd->add_option("--config", m.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_flag("--reference-model", m.reference_model, "Use the built-in reference error model, ignoring any model in --config");
}

struct Loaded {
  RunConfig config;
  bool seed_in_config = false;
};

Loaded load_config(const ModelOptions& m) {
  Loaded l;
  if (!m.config_path.empty()) {
    const std::string text = read_text_file(m.config_path);
    l.config = parse_run_config(text);
    const Json j = Json::parse(text);
    l.seed_in_config = j.contains("experiment") && j["experiment"].contains("seed");
  }
  if (m.reference_model) l.config.model = ErrorModel::reference_defaults();
  return l;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, const Loaded* loaded) {
  if (flag) return *flag;
  if (loaded && loaded->seed_in_config) return loaded->config.experiment.seed;
  if (const char* env = std::getenv("SPAMSIM_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw ConfigError(std::string("SPAMSIM_SEED is not an unsigned integer: ") + env);
    }
  }
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(' ', used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(std::string(what) + ": not a number: '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError(std::string(what) + ": empty list");
  return out;
}

std::string fmt6(double x) {
  std::ostringstream s;
  s << std::setprecision(6) << x;
  return s.str();
}

// Manifest written next to a command's outputs.
class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& args)
      : command_(std::move(command)), args_(args), start_(std::chrono::steady_clock::now()) {}

  void set_config(const std::string& path) { config_path_ = path; }
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  void set_resolved(Json resolved) { resolved_ = std::move(resolved); }
  void add_output(const fs::path& p) { outputs_.push_back(p.string()); }

  void write(const fs::path& path) {
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    Json j;
    j["command"] = command_;
    j["tool_version"] = version();
    j["arguments"] = args_;
    j["config_path"] = config_path_.empty() ? Json(nullptr) : Json(config_path_);
    j["seed"] = seed_ ? Json(*seed_) : Json(nullptr);
    j["resolved_config"] = resolved_;
    j["outputs"] = outputs_;
    j["wall_clock_seconds"] = round_sig(seconds);
    write_text_file(path, dump_json(j, 2) + "\n");
  }

 private:
  std::string command_;
  std::vector<std::string> args_;
  std::string config_path_;
  std::optional<std::uint64_t> seed_;
  Json resolved_ = Json::object();
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point start_;
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

void print_summary(std::ostream& out, const ExperimentSummary& s) {
  for (const auto& st : s.states) {
    const auto& fin = st.final_stage();
    out << "prepared " << to_string(st.prepared) << ": shots " << st.shots << ", rejected "
        << fmt6(st.rejected_fraction) << ", error " << (fin.error ? fmt6(fin.error->point) : "n/a");
    if (fin.error) out << " [" << fmt6(fin.error->interval.lo) << ", " << fmt6(fin.error->interval.hi) << "]";
    out << '\n';
  }
  if (const auto& avg = s.average_error.back()) out << "average error " << fmt6(*avg) << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monte Carlo simulator and analytics for heralded qubit state preparation and measurement"};
  app.name("spamsim");
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  // run
  ModelOptions run_model;
  std::optional<std::uint64_t> run_shots, run_seed;
  std::optional<int> run_attempts;
  std::string run_encoding, run_mode, run_out;
  unsigned run_threads = 1;
  bool run_records = false, run_strict = false;
  auto* run = app.add_subcommand("run", "Run a SPAM experiment and write summary, histograms and manifest");
  add_model_options(run, run_model);
  run->add_option("--shots", run_shots, "Shots per prepared state");
  run->add_option("--seed", run_seed, "Master seed (falls back to the config, then SPAMSIM_SEED)");
  run->add_option("--encoding", run_encoding, "Qubit encoding: O, M or G");
  run->add_option("--mode", run_mode, "post-select or rus");
  run->add_option("--max-attempts", run_attempts, "Preparation attempts in rus mode");
  run->add_option("--out", run_out, "Output directory")->required();
  run->add_option("--threads", run_threads, "Worker threads")->check(CLI::Range(1U, 1024U));
  run->add_flag("--records", run_records, "Also write per-shot records.csv");
  run->add_flag("--strict", run_strict, "Flag R3 bright followed by R4 dark");

  // calibrate-threshold
  std::string cal_bright, cal_dark, cal_method = "moments", cal_out;
  auto* cal = app.add_subcommand("calibrate-threshold", "Fit bright/dark count histograms and place the threshold");
  cal->add_option("--bright", cal_bright, "Bright histogram CSV (bin_low,frequency)")->required();
  cal->add_option("--dark", cal_dark, "Dark histogram CSV (bin_low,frequency)")->required();
  cal->add_option("--method", cal_method, "moments or least-squares")
      ->check(CLI::IsMember({"moments", "least-squares"}));
  cal->add_option("--out", cal_out, "Write the calibration JSON here instead of stdout");

  // simulate-histograms
  ModelOptions hist_model;
  std::size_t hist_samples = 1000;
  std::optional<std::uint64_t> hist_seed;
  std::int64_t hist_width = 1;
  std::string hist_out;
  auto* hist = app.add_subcommand("simulate-histograms", "Sample bright and dark count histograms");
  add_model_options(hist, hist_model);
  hist->add_option("--samples", hist_samples, "Detections per histogram")->check(CLI::PositiveNumber);
  hist->add_option("--seed", hist_seed, "Master seed");
  hist->add_option("--bin-width", hist_width, "Histogram bin width")->check(CLI::PositiveNumber);
  hist->add_option("--out", hist_out, "Output directory")->required();

  // predict-rejection
  ModelOptions pred_model;
  bool pred_decay = false, pred_strict = false;
  std::string pred_out;
  auto* pred = app.add_subcommand("predict-rejection", "Expected rejected fraction for every encoding and state");
  add_model_options(pred, pred_model);
  pred->add_flag("--include-decay", pred_decay, "Count metastable decay as a failure channel");
  pred->add_flag("--strict", pred_strict, "Flag R3 bright followed by R4 dark");
  pred->add_option("--out", pred_out, "Write the table as JSON");

  // bias-scan
  ModelOptions bias_model;
  std::string bias_curve = "all", bias_grid = "0.6,0.7,0.8,0.9,1.0", bias_out;
  std::uint64_t bias_shots = 100000;
  std::optional<std::uint64_t> bias_seed;
  unsigned bias_threads = 1;
  auto* bias = app.add_subcommand("bias-scan", "Post-selection bias against transfer pulse duration");
  add_model_options(bias, bias_model);
  bias->add_option("--curve", bias_curve, "O0, O1, M0, G0 or all");
  bias->add_option("--t-grid", bias_grid, "Comma-separated durations in units of t_pi");
  bias->add_option("--shots", bias_shots, "Shots per grid point");
  bias->add_option("--seed", bias_seed, "Master seed");
  bias->add_option("--threads", bias_threads, "Worker threads")->check(CLI::Range(1U, 1024U));
  bias->add_option("--out", bias_out, "Write CSV here instead of stdout");

  // lifetime-fit
  std::string life_in, life_out;
  double life_z = 1.96;
  auto* life = app.add_subcommand("lifetime-fit", "Fit the metastable lifetime to decay samples");
  life->add_option("--samples", life_in, "CSV of delay,decayed[,trials]")->required();
  life->add_option("--z", life_z, "Interval half-width in standard errors")->check(CLI::PositiveNumber);
  life->add_option("--out", life_out, "Write the fit JSON here instead of stdout");

  // simulate-lifetime
  double sim_tau = 27.2;
  std::string sim_delays = "5,10,20,30", sim_out;
  std::size_t sim_count = 10000;
  std::optional<std::uint64_t> sim_seed;
  auto* sim = app.add_subcommand("simulate-lifetime", "Generate Bernoulli decay samples");
  sim->add_option("--tau", sim_tau, "Lifetime in seconds")->check(CLI::PositiveNumber);
  sim->add_option("--delays", sim_delays, "Comma-separated delays in seconds");
  sim->add_option("--count", sim_count, "Number of samples")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "Master seed");
  sim->add_option("--out", sim_out, "Output CSV")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  Manifest manifest(command, args);

  try {
    if (*run) {
      Loaded loaded = load_config(run_model);
      ExperimentConfig& cfg = loaded.config.experiment;
      if (run_shots) cfg.shots = *run_shots;
      if (!run_encoding.empty()) cfg.encoding = parse_encoding(run_encoding);
      if (!run_mode.empty()) cfg.mode = parse_run_mode(run_mode);
      if (run_attempts) cfg.max_attempts = *run_attempts;
      if (cfg.mode == RunMode::RepeatUntilSuccess && !run_attempts && cfg.max_attempts == 1) cfg.max_attempts = 10;
      if (run_strict) cfg.strict_flags = true;
      cfg.seed = resolve_seed(run_seed, &loaded);
      cfg.threads = run_threads;
      cfg.keep_records = run_records;
      cfg.validate();

      const fs::path dir(run_out);
      ensure_dir(dir);
      manifest.set_config(run_model.config_path);
      manifest.set_seed(cfg.seed);
      manifest.set_resolved(to_json(loaded.config));

      const ExperimentResult result = run_experiment(cfg, loaded.config.model);
      const fs::path summary_path = dir / "summary.json";
      write_text_file(summary_path, dump_json(summary_to_json(result.summary, cfg), 2) + "\n");
      manifest.add_output(summary_path);
      for (std::size_t l = 0; l < kDetectionCount; ++l) {
        const fs::path p = dir / ("histogram_" + std::string(to_string(static_cast<DetectLabel>(l))) + ".csv");
        write_text_file(p, histogram_to_csv(result.tallies.histograms()[l]));
        manifest.add_output(p);
      }
      if (run_records) {
        const fs::path p = dir / "records.csv";
        write_text_file(p, records_to_csv(result.records));
        manifest.add_output(p);
      }
      const fs::path manifest_path = dir / "manifest.json";
      manifest.write(manifest_path);
      print_summary(out, result.summary);
      out << "wrote " << summary_path.string() << '\n';
      return kExitOk;
    }

    if (*cal) {
      const CountHistogram bright = histogram_from_csv(read_text_file(cal_bright), HistogramLabel::Bright);
      const CountHistogram dark = histogram_from_csv(read_text_file(cal_dark), HistogramLabel::Dark);
      const FitMethod method = cal_method == "moments" ? FitMethod::Moments : FitMethod::LeastSquares;
      const ThresholdCalibration c = calibrate_threshold(bright, dark, method);
      const std::string text = dump_json(calibration_to_json(c, method), 2) + "\n";
      if (cal_out.empty()) {
        out << text;
      } else {
        write_text_file(cal_out, text);
        manifest.add_output(cal_out);
        manifest.write(cal_out + ".manifest.json");
      }
      return kExitOk;
    }

    if (*hist) {
      const Loaded loaded = load_config(hist_model);
      const std::uint64_t seed = resolve_seed(hist_seed, &loaded);
      const DetectionModel& det = loaded.config.model.detection();
      const fs::path dir(hist_out);
      ensure_dir(dir);
      manifest.set_config(hist_model.config_path);
      manifest.set_seed(seed);
      manifest.set_resolved(to_json(loaded.config));
      const auto bright = CountHistogram::from_samples(simulate_counts(det, 1.0, hist_samples, splitmix64(seed)),
                                                       hist_width, HistogramLabel::Bright);
      const auto dark = CountHistogram::from_samples(simulate_counts(det, 0.0, hist_samples, splitmix64(seed + 1)),
                                                     hist_width, HistogramLabel::Dark);
      write_text_file(dir / "bright.csv", histogram_to_csv(bright));
      write_text_file(dir / "dark.csv", histogram_to_csv(dark));
      manifest.add_output(dir / "bright.csv");
      manifest.add_output(dir / "dark.csv");
      manifest.write(dir / "manifest.json");
      out << "wrote " << (dir / "bright.csv").string() << " and " << (dir / "dark.csv").string() << '\n';
      return kExitOk;
    }

    if (*pred) {
      const Loaded loaded = load_config(pred_model);
      PredictOptions opts{pred_decay, pred_strict};
      Json rows = Json::array();
      out << "encoding state first_order exact\n";
      for (EncodingName e : {EncodingName::Optical, EncodingName::Metastable, EncodingName::Ground}) {
        for (QubitValue v : {QubitValue::Zero, QubitValue::One}) {
          const Sequence seq =
              build_sequence(encoding_catalog(e), v == QubitValue::Zero ? Preparation::Zero : Preparation::One);
          const double first = predict_rejection(seq, loaded.config.model, opts);
          const double exact = predict_rejection_exact(seq, loaded.config.model, opts);
          out << short_name(e) << ' ' << to_string(v) << ' ' << fmt6(first) << ' ' << fmt6(exact) << '\n';
          rows.push_back({{"encoding", std::string(to_string(e))},
                          {"state", std::string(to_string(v))},
                          {"first_order", round_sig(first)},
                          {"exact", round_sig(exact)}});
        }
      }
      if (!pred_out.empty()) {
        Json j{{"include_decay", pred_decay}, {"strict_flags", pred_strict}, {"rows", rows}};
        write_text_file(pred_out, dump_json(j, 2) + "\n");
        manifest.set_config(pred_model.config_path);
        manifest.set_resolved(to_json(loaded.config));
        manifest.add_output(pred_out);
        manifest.write(pred_out + ".manifest.json");
      }
      return kExitOk;
    }

    if (*bias) {
      const Loaded loaded = load_config(bias_model);
      std::vector<BiasCurve> curves;
      if (bias_curve == "all") {
        curves = all_bias_curves();
      } else {
        curves.push_back(parse_bias_curve(bias_curve));
      }
      if (bias_shots < 1) throw ConfigError("--shots must be at least 1");
      BiasScanConfig bc;
      bc.t_grid = parse_list(bias_grid, "--t-grid");
      bc.shots_per_point = bias_shots;
      bc.seed = resolve_seed(bias_seed, &loaded);
      bc.threads = bias_threads;
      std::string csv;
      for (BiasCurve c : curves) {
        bc.curve = c;
        const std::string part = bias_to_csv(c, run_bias_scan(bc, loaded.config.model));
        csv += csv.empty() ? part : part.substr(part.find('\n') + 1);
      }
      if (bias_out.empty()) {
        out << csv;
      } else {
        write_text_file(bias_out, csv);
        manifest.set_config(bias_model.config_path);
        manifest.set_seed(bc.seed);
        manifest.set_resolved(to_json(loaded.config));
        manifest.add_output(bias_out);
        manifest.write(bias_out + ".manifest.json");
      }
      return kExitOk;
    }

    if (*life) {
      const auto obs = lifetime_observations_from_csv(read_text_file(life_in));
      const LifetimeFit fit = fit_lifetime(obs);
      const Interval ci = fit.interval(life_z);
      Json j{{"tau", round_sig(fit.tau)},
             {"tau_stderr", round_sig(fit.tau_stderr)},
             {"z", life_z},
             {"interval", {round_sig(ci.lo), round_sig(ci.hi)}},
             {"delays", obs.size()}};
      const std::string text = dump_json(j, 2) + "\n";
      if (life_out.empty()) {
        out << text;
      } else {
        write_text_file(life_out, text);
        manifest.add_output(life_out);
        manifest.write(life_out + ".manifest.json");
      }
      return kExitOk;
    }

    if (*sim) {
      const std::uint64_t seed = resolve_seed(sim_seed, nullptr);
      const auto samples = simulate_lifetime_samples(sim_tau, parse_list(sim_delays, "--delays"), sim_count, seed);
      write_text_file(sim_out, lifetime_samples_to_csv(samples));
      manifest.set_seed(seed);
      manifest.add_output(sim_out);
      manifest.write(sim_out + ".manifest.json");
      return kExitOk;
    }
  } catch (const InseparableDistributions& e) {
    err << "error: " << e.what() << '\n';
    return kExitInseparable;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace spamsim
