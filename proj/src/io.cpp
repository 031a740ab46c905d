#include "spamsim/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace spamsim {
namespace {

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
T get_or(const Json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

double number_or(const Json& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return j.at(key).get<double>();
}

StateLabel state_from_json(const Json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + ": expected a state label string");
  try {
    return StateLabel::parse(j.get<std::string>());
  } catch (const std::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

std::string format_g(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json prob(double x) { return std::isfinite(x) ? Json(round_sig(x)) : Json(nullptr); }

Json stage_to_json(const StageSummary& s) {
  Json j;
  j["stage"] = std::string(s.name);
  j["kept"] = s.kept;
  j["retention"] = prob(s.retention);
  if (s.error) {
    j["errors"] = s.error->successes;
    j["error"] = prob(s.error->point);
    j["error_interval"] = {prob(s.error->interval.lo), prob(s.error->interval.hi)};
  } else {
    j["errors"] = 0;
    j["error"] = nullptr;
    j["error_interval"] = nullptr;
  }
  return j;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(field.begin());
    out.push_back(field);
  }
  return out;
}

template <class T>
bool parse_number(const std::string& s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Yields the numeric rows of a CSV, skipping a header line and blank lines.
std::vector<std::vector<std::string>> csv_rows(const std::string& text, std::size_t min_cols,
                                               std::size_t max_cols) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split(line);
    if (fields.empty() || (fields.size() == 1 && fields[0].empty())) continue;
    double probe = 0.0;
    if (first && !parse_number(fields[0], probe)) {
      first = false;
      continue;  // header
    }
    first = false;
    if (fields.size() < min_cols || fields.size() > max_cols) {
      throw ConfigError("CSV line " + std::to_string(line_no) + ": expected " + std::to_string(min_cols) +
                        (min_cols == max_cols ? "" : "-" + std::to_string(max_cols)) + " columns");
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
  // nlohmann prints doubles with up to 17 digits; reformat every non-integer
  // literal outside strings to 6 significant digits.
  const std::string raw = j.dump(indent);
  std::string out;
  out.reserve(raw.size());
  bool in_string = false;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const char c = raw[i];
    if (in_string) {
      out += c;
      if (c == '\\' && i + 1 < raw.size()) {
        out += raw[++i];
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
      out += c;
      continue;
    }
    if (c == '-' || (c >= '0' && c <= '9')) {
      std::size_t end = i;
      while (end < raw.size() && std::string_view("+-.eE0123456789").find(raw[end]) != std::string_view::npos) ++end;
      const std::string token = raw.substr(i, end - i);
      if (token.find_first_of(".eE") == std::string::npos) {
        out += token;
      } else {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6g", std::strtod(token.c_str(), nullptr));
        std::string formatted = buf;
        if (formatted.find_first_of(".e") == std::string::npos) formatted += ".0";
        out += formatted;
      }
      i = end - 1;
      continue;
    }
    out += c;
  }
  return out;
}

double round_sig(double x, int digits) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return std::strtod(buf, nullptr);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path.string());
  return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) throw IoError("error writing " + path.string());
}

// ---------------------------------------------------------------------------

Json to_json(const ErrorModel& model) {
  Json j;
  j["pump"] = {{"target", model.pump().target.to_string()},
               {"error_rate", model.pump().error_rate},
               {"duration", model.pump().duration}};
  Json pulses = Json::array();
  for (const auto& [key, p] : model.pulses()) {
    pulses.push_back({{"from", p.from.to_string()},
                      {"to", p.to.to_string()},
                      {"error_rate", p.error_rate},
                      {"t_pi", p.t_pi},
                      {"order", p.order == PulseOrder::Single ? "single" : "double"}});
  }
  j["pulses"] = pulses;
  const double tau = model.decay().lifetime;
  j["lifetime"] = std::isinf(tau) ? Json(nullptr) : Json(tau);
  const auto& d = model.detection();
  j["detection"] = {{"mean_bright", d.mean_bright}, {"mean_dark", d.mean_dark},   {"read_noise", d.read_noise},
                    {"offset", d.offset},           {"exposure", d.exposure},     {"total_duration", d.total_duration},
                    {"threshold", d.threshold}};
  j["durations"] = {{"cooling", model.durations().cooling}, {"deshelve", model.durations().deshelve}};
  j["loss_probability_per_shot"] = model.loss_probability_per_shot();
  return j;
}

ErrorModel error_model_from_json(const Json& j, const ErrorModel& base) {
  const std::string where = "model";
  check_keys(j, {"pump", "pulses", "lifetime", "detection", "durations", "loss_probability_per_shot"}, where);
  try {
    PumpChannel pump = base.pump();
    if (j.contains("pump")) {
      const Json& p = j.at("pump");
      check_keys(p, {"target", "error_rate", "duration"}, "model.pump");
      if (p.contains("target")) pump.target = state_from_json(p.at("target"), "model.pump.target");
      pump.error_rate = number_or(p, "error_rate", pump.error_rate, "model.pump");
      pump.duration = number_or(p, "duration", pump.duration, "model.pump");
    }

    std::vector<TransferPulse> pulses;
    if (j.contains("pulses")) {
      if (!j.at("pulses").is_array()) throw ConfigError("model.pulses: expected an array");
      std::size_t i = 0;
      for (const Json& p : j.at("pulses")) {
        const std::string w = "model.pulses[" + std::to_string(i++) + "]";
        check_keys(p, {"from", "to", "error_rate", "t_pi", "order"}, w);
        if (!p.contains("from") || !p.contains("to")) throw ConfigError(w + ": 'from' and 'to' are required");
        TransferPulse pulse{state_from_json(p.at("from"), w + ".from"), state_from_json(p.at("to"), w + ".to")};
        pulse.error_rate = number_or(p, "error_rate", 0.0, w);
        pulse.t_pi = number_or(p, "t_pi", pulse.t_pi, w);
        const std::string order = get_or<std::string>(p, "order", "single", w);
        if (order != "single" && order != "double") throw ConfigError(w + ".order: expected single or double");
        pulse.order = order == "single" ? PulseOrder::Single : PulseOrder::Double;
        pulses.push_back(pulse);
      }
    } else {
      for (const auto& [key, p] : base.pulses()) pulses.push_back(p);
    }

    DecayChannel decay = base.decay();
    if (j.contains("lifetime")) {
      const Json& t = j.at("lifetime");
      if (t.is_null()) {
        decay.lifetime = std::numeric_limits<double>::infinity();
      } else if (t.is_number()) {
        decay.lifetime = t.get<double>();
      } else {
        throw ConfigError("model.lifetime: expected a number or null");
      }
    }

    DetectionModel det = base.detection();
    if (j.contains("detection")) {
      const Json& d = j.at("detection");
      const std::string w = "model.detection";
      check_keys(d, {"mean_bright", "mean_dark", "read_noise", "offset", "exposure", "total_duration", "threshold"}, w);
      det.mean_bright = number_or(d, "mean_bright", det.mean_bright, w);
      det.mean_dark = number_or(d, "mean_dark", det.mean_dark, w);
      det.read_noise = number_or(d, "read_noise", det.read_noise, w);
      det.offset = number_or(d, "offset", det.offset, w);
      det.exposure = number_or(d, "exposure", det.exposure, w);
      det.total_duration = number_or(d, "total_duration", det.total_duration, w);
      if (d.contains("threshold")) {
        if (!d.at("threshold").is_number_integer()) throw ConfigError(w + ".threshold: expected an integer");
        det.threshold = d.at("threshold").get<std::int64_t>();
      }
    }

    StepDurations durations = base.durations();
    if (j.contains("durations")) {
      const Json& d = j.at("durations");
      check_keys(d, {"cooling", "deshelve"}, "model.durations");
      durations.cooling = number_or(d, "cooling", durations.cooling, "model.durations");
      durations.deshelve = number_or(d, "deshelve", durations.deshelve, "model.durations");
    }
    const double loss = number_or(j, "loss_probability_per_shot", base.loss_probability_per_shot(), where);
    return ErrorModel(pump, std::move(pulses), decay, det, durations, loss);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

Json to_json(const ExperimentConfig& c) {
  Json states = Json::array();
  for (QubitValue v : c.states) states.push_back(std::string(to_string(v)));
  return {{"encoding", std::string(to_string(c.encoding))},
          {"shots", c.shots},
          {"mode", std::string(to_string(c.mode))},
          {"max_attempts", c.max_attempts},
          {"seed", c.seed},
          {"interleave", c.interleave},
          {"states", states},
          {"strict_flags", c.strict_flags},
          {"wilson_z", c.wilson_z},
          {"histogram_bin_width", c.histogram_bin_width}};
}

ExperimentConfig experiment_config_from_json(const Json& j, ExperimentConfig c) {
  const std::string w = "experiment";
  check_keys(j,
             {"encoding", "shots", "mode", "max_attempts", "seed", "interleave", "states", "strict_flags", "wilson_z",
              "histogram_bin_width", "threads", "keep_records"},
             w);
  try {
    if (j.contains("encoding")) c.encoding = parse_encoding(get_or<std::string>(j, "encoding", "", w));
    if (j.contains("shots")) {
      if (!j.at("shots").is_number_unsigned()) throw ConfigError(w + ".shots: expected a positive integer");
      c.shots = j.at("shots").get<std::uint64_t>();
    }
    if (j.contains("mode")) c.mode = parse_run_mode(get_or<std::string>(j, "mode", "", w));
    c.max_attempts = get_or<int>(j, "max_attempts", c.max_attempts, w);
    if (j.contains("seed")) {
      if (!j.at("seed").is_number_unsigned()) throw ConfigError(w + ".seed: expected a non-negative integer");
      c.seed = j.at("seed").get<std::uint64_t>();
    }
    c.interleave = get_or<bool>(j, "interleave", c.interleave, w);
    if (j.contains("states")) {
      if (!j.at("states").is_array()) throw ConfigError(w + ".states: expected an array");
      c.states.clear();
      for (const Json& s : j.at("states")) {
        if (!s.is_string()) throw ConfigError(w + ".states: expected strings");
        c.states.push_back(parse_qubit_value(s.get<std::string>()));
      }
    }
    c.strict_flags = get_or<bool>(j, "strict_flags", c.strict_flags, w);
    c.wilson_z = number_or(j, "wilson_z", c.wilson_z, w);
    c.histogram_bin_width = get_or<std::int64_t>(j, "histogram_bin_width", c.histogram_bin_width, w);
    c.threads = get_or<unsigned>(j, "threads", c.threads, w);
    c.keep_records = get_or<bool>(j, "keep_records", c.keep_records, w);
    c.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(w + ": " + e.what());
  }
  return c;
}

RunConfig parse_run_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, {"experiment", "model"}, "config");
  RunConfig rc;
  if (j.contains("model")) rc.model = error_model_from_json(j.at("model"));
  if (j.contains("experiment")) rc.experiment = experiment_config_from_json(j.at("experiment"));
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) { return parse_run_config(read_text_file(path)); }

Json to_json(const RunConfig& config) {
  return {{"experiment", to_json(config.experiment)}, {"model", to_json(config.model)}};
}

// ---------------------------------------------------------------------------

Json summary_to_json(const ExperimentSummary& summary, const ExperimentConfig& config) {
  Json j;
  j["encoding"] = std::string(to_string(config.encoding));
  j["mode"] = std::string(to_string(config.mode));
  j["max_attempts"] = config.mode == RunMode::RepeatUntilSuccess ? config.max_attempts : 1;
  j["seed"] = config.seed;
  j["shots_per_state"] = config.shots;
  j["strict_flags"] = config.strict_flags;
  j["wilson_z"] = summary.wilson_z;
  Json states = Json::array();
  for (const auto& s : summary.states) {
    Json sj;
    sj["prepared"] = std::string(to_string(s.prepared));
    sj["shots"] = s.shots;
    sj["rejected_fraction"] = prob(s.rejected_fraction);
    Json stages = Json::array();
    for (const auto& st : s.stages) stages.push_back(stage_to_json(st));
    sj["stages"] = stages;
    Json reasons = Json::object();
    for (std::size_t r = 0; r < kFlagReasonCount; ++r) {
      reasons[std::string(to_string(static_cast<FlagReason>(r)))] = s.reasons[r];
    }
    sj["flag_reasons"] = reasons;
    Json attempts = Json::object();
    for (const auto& [a, n] : s.attempts) attempts[std::to_string(a)] = n;
    sj["attempts"] = attempts;
    states.push_back(sj);
  }
  j["states"] = states;
  Json overall;
  Json stages = Json::array();
  for (std::size_t i = 0; i < summary.overall.size(); ++i) {
    Json st = stage_to_json(summary.overall[i]);
    st["average_error"] = summary.average_error[i] ? prob(*summary.average_error[i]) : Json(nullptr);
    stages.push_back(st);
  }
  overall["stages"] = stages;
  j["overall"] = overall;
  return j;
}

Json calibration_to_json(const ThresholdCalibration& c, FitMethod method) {
  return {{"method", method == FitMethod::Moments ? "moments" : "least-squares"},
          {"threshold", c.threshold},
          {"crossing", round_sig(c.crossing)},
          {"bright", {{"mean", round_sig(c.bright.mean)}, {"sigma", round_sig(c.bright.sigma)}}},
          {"dark", {{"mean", round_sig(c.dark.mean)}, {"sigma", round_sig(c.dark.sigma)}}}};
}

std::string records_to_csv(const std::vector<ShotRecord>& records) {
  std::ostringstream out;
  out << "index,prepared,R0,R1,R2,R3,R4,R5,flagged,reason,inferred,attempts\n";
  for (const auto& r : records) {
    out << r.index << ',' << to_string(r.prepared);
    for (Outcome o : r.outcomes) out << ',' << (o == Outcome::Bright ? 'b' : 'd');
    out << ',' << (r.flagged ? 1 : 0) << ',' << to_string(r.reason) << ','
        << (r.inferred ? to_string(*r.inferred) : std::string_view()) << ',' << r.attempts << '\n';
  }
  return out.str();
}

std::string histogram_to_csv(const std::map<std::int64_t, std::uint64_t>& bins) {
  std::ostringstream out;
  out << "bin_low,frequency\n";
  for (const auto& [low, n] : bins) out << low << ',' << n << '\n';
  return out.str();
}

std::string histogram_to_csv(const CountHistogram& h) {
  std::ostringstream out;
  out << "bin_low,frequency\n";
  for (std::size_t i = 0; i < h.bin_low.size(); ++i) out << h.bin_low[i] << ',' << h.frequency[i] << '\n';
  return out.str();
}

CountHistogram histogram_from_csv(const std::string& text, HistogramLabel label) {
  CountHistogram h;
  h.label = label;
  for (const auto& row : csv_rows(text, 2, 2)) {
    std::int64_t low = 0;
    std::uint64_t freq = 0;
    if (!parse_number(row[0], low) || !parse_number(row[1], freq)) {
      throw ConfigError("histogram CSV: expected integer bin_low,frequency rows");
    }
    h.bin_low.push_back(low);
    h.frequency.push_back(freq);
  }
  try {
    h.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("histogram CSV: ") + e.what());
  }
  return h;
}

std::string bias_to_csv(BiasCurve curve, const std::vector<BiasPoint>& points) {
  std::ostringstream out;
  out << "curve,t_over_tpi,measured_bias,closed_form_bias,stderr,accepted,shots\n";
  for (const auto& p : points) {
    out << to_string(curve) << ',' << format_g(round_sig(p.t_over_tpi)) << ',' << format_g(round_sig(p.measured_bias))
        << ',' << format_g(round_sig(p.closed_form_bias)) << ',' << format_g(round_sig(p.standard_error)) << ','
        << p.accepted << ',' << p.shots << '\n';
  }
  return out.str();
}

std::string lifetime_samples_to_csv(const std::vector<std::pair<double, bool>>& samples) {
  std::ostringstream out;
  out << "delay,decayed\n";
  for (const auto& [delay, decayed] : samples) out << format_g(delay) << ',' << (decayed ? 1 : 0) << '\n';
  return out.str();
}

std::vector<LifetimeObservation> lifetime_observations_from_csv(const std::string& text) {
  std::vector<LifetimeObservation> raw;
  std::vector<std::pair<double, bool>> samples;
  for (const auto& row : csv_rows(text, 2, 3)) {
    double delay = 0.0;
    double decayed = 0.0;
    if (!parse_number(row[0], delay) || !parse_number(row[1], decayed)) {
      throw ConfigError("lifetime CSV: non-numeric field");
    }
    if (row.size() == 3) {
      double trials = 0.0;
      if (!parse_number(row[2], trials)) throw ConfigError("lifetime CSV: non-numeric trials");
      raw.push_back({delay, decayed, trials});
    } else {
      if (decayed != 0.0 && decayed != 1.0) throw ConfigError("lifetime CSV: decayed must be 0 or 1");
      samples.emplace_back(delay, decayed == 1.0);
    }
  }
  auto binned = bin_lifetime_samples(samples);
  raw.insert(raw.end(), binned.begin(), binned.end());
  if (raw.empty()) throw ConfigError("lifetime CSV: no data rows");
  return raw;
}

}  // namespace spamsim
