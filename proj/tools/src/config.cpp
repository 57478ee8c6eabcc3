#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace rep::cli {

namespace {

void require_keys(const json& obj, const char* where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& item : obj.items()) {
    const std::string& key = item.key();
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&key](const char* a) { return key == a; }) == allowed.end())
      throw ConfigError("unknown key \"" + key + "\" in " + where);
  }
}

double get_number(const json& obj, const char* where, const char* key, bool required,
                  double fallback = 0.0) {
  if (!obj.contains(key)) {
    if (required) throw ConfigError(std::string(where) + " is missing \"" + key + "\"");
    return fallback;
  }
  const auto& v = obj.at(key);
  if (!v.is_number())
    throw ConfigError(std::string(where) + "." + key + " must be a number");
  return v.get<double>();
}

int get_int(const json& obj, const char* where, const char* key, bool required,
            int fallback = 0) {
  if (!obj.contains(key)) {
    if (required) throw ConfigError(std::string(where) + " is missing \"" + key + "\"");
    return fallback;
  }
  const auto& v = obj.at(key);
  if (!v.is_number_integer())
    throw ConfigError(std::string(where) + "." + key + " must be an integer");
  return v.get<int>();
}

}  // namespace

const char* mode_name(Mode m) noexcept {
  switch (m) {
    case Mode::Simulate: return "simulate";
    case Mode::Blowup: return "blowup";
    case Mode::Classify: return "classify";
    case Mode::Sweep: return "sweep";
    case Mode::VerifyExample: return "verify-example";
    case Mode::Rates: return "rates";
  }
  return "unknown";
}

Mode mode_from_string(const std::string& s) {
  if (s == "simulate") return Mode::Simulate;
  if (s == "blowup") return Mode::Blowup;
  if (s == "classify") return Mode::Classify;
  if (s == "sweep") return Mode::Sweep;
  if (s == "verify-example") return Mode::VerifyExample;
  if (s == "rates") return Mode::Rates;
  throw ConfigError("unknown mode \"" + s + "\"");
}

RunConfig parse_config(const json& doc, std::optional<Mode> mode_override) {
  require_keys(doc, "config",
               {"mode", "params", "init", "family", "control", "outputs", "sweep",
                "coordinate"});
  RunConfig cfg;

  if (doc.contains("mode")) {
    if (!doc.at("mode").is_string()) throw ConfigError("mode must be a string");
    cfg.mode = mode_from_string(doc.at("mode").get<std::string>());
    if (mode_override && *mode_override != cfg.mode)
      throw ConfigError(std::string("config mode \"") + mode_name(cfg.mode) +
                        "\" does not match the requested subcommand \"" +
                        mode_name(*mode_override) + "\"");
  } else if (mode_override) {
    cfg.mode = *mode_override;
  } else {
    throw ConfigError("config is missing \"mode\"");
  }

  const bool needs_family = cfg.mode == Mode::VerifyExample;
  const bool needs_data = !needs_family;

  if (needs_family) {
    if (!doc.contains("family"))
      throw ConfigError("verify-example requires a \"family\" section");
    if (doc.contains("params") || doc.contains("init"))
      throw ConfigError("verify-example derives params/init from \"family\"");
    const auto& fam = doc.at("family");
    require_keys(fam, "family", {"k", "c_b", "lambda10", "lambda40"});
    FamilyConfig f;
    f.k = get_number(fam, "family", "k", true);
    f.c_b = get_number(fam, "family", "c_b", true);
    f.lambda10 = get_number(fam, "family", "lambda10", true);
    f.lambda40 = get_number(fam, "family", "lambda40", true);
    cfg.family = f;
  } else if (doc.contains("family")) {
    throw ConfigError("\"family\" is only valid in verify-example mode");
  }

  if (needs_data) {
    if (!doc.contains("params") || !doc.contains("init"))
      throw ConfigError("config requires \"params\" and \"init\" sections");
    const auto& par = doc.at("params");
    require_keys(par, "params", {"n", "k", "c_b"});
    cfg.n = get_int(par, "params", "n", true);
    cfg.k = get_number(par, "params", "k", true);
    cfg.c_b = get_number(par, "params", "c_b", true);
    const auto& init = doc.at("init");
    require_keys(init, "init", {"rho0", "lambda0"});
    cfg.rho0 = get_number(init, "init", "rho0", true);
    if (!init.contains("lambda0") || !init.at("lambda0").is_array())
      throw ConfigError("init.lambda0 must be an array of numbers");
    for (const auto& v : init.at("lambda0")) {
      if (!v.is_number()) throw ConfigError("init.lambda0 must be an array of numbers");
      cfg.lambda0.push_back(v.get<double>());
    }
  }

  if (doc.contains("control")) {
    const auto& ctl = doc.at("control");
    require_keys(ctl, "control",
                 {"rtol", "atol", "h_init", "h_min", "h_max", "lambda_escape", "u_zero_eps",
                  "t_max"});
    cfg.control.rtol = get_number(ctl, "control", "rtol", false, cfg.control.rtol);
    cfg.control.atol = get_number(ctl, "control", "atol", false, cfg.control.atol);
    cfg.control.h_init = get_number(ctl, "control", "h_init", false, cfg.control.h_init);
    cfg.control.h_min = get_number(ctl, "control", "h_min", false, cfg.control.h_min);
    cfg.control.h_max = get_number(ctl, "control", "h_max", false, cfg.control.h_max);
    cfg.control.lambda_escape =
        get_number(ctl, "control", "lambda_escape", false, cfg.control.lambda_escape);
    cfg.control.u_zero_eps =
        get_number(ctl, "control", "u_zero_eps", false, cfg.control.u_zero_eps);
    cfg.t_max = get_number(ctl, "control", "t_max", false, 0.0);
    if (!(cfg.control.rtol > 0.0) || !(cfg.control.atol > 0.0))
      throw ConfigError("control.rtol and control.atol must be > 0");
    if (cfg.control.h_min > cfg.control.h_max)
      throw ConfigError("control.h_min must be <= control.h_max");
    if (!(cfg.control.lambda_escape > 0.0))
      throw ConfigError("control.lambda_escape must be > 0");
  }

  if (doc.contains("coordinate")) {
    if (!doc.at("coordinate").is_string())
      throw ConfigError("coordinate must be \"u\" or \"lambda\"");
    cfg.coordinate = doc.at("coordinate").get<std::string>();
    if (cfg.coordinate != "u" && cfg.coordinate != "lambda")
      throw ConfigError("coordinate must be \"u\" or \"lambda\"");
  }

  if (doc.contains("outputs")) {
    const auto& out = doc.at("outputs");
    require_keys(out, "outputs", {"dir", "csv", "json", "stride", "svg"});
    if (out.contains("dir")) {
      if (!out.at("dir").is_string()) throw ConfigError("outputs.dir must be a string");
      cfg.outputs.dir = out.at("dir").get<std::string>();
    }
    if (out.contains("csv")) {
      if (!out.at("csv").is_string()) throw ConfigError("outputs.csv must be a string");
      cfg.outputs.csv = out.at("csv").get<std::string>();
    }
    if (out.contains("json")) {
      if (!out.at("json").is_string()) throw ConfigError("outputs.json must be a string");
      cfg.outputs.json_file = out.at("json").get<std::string>();
    }
    cfg.outputs.stride = get_int(out, "outputs", "stride", false, 1);
    if (cfg.outputs.stride < 1) throw ConfigError("outputs.stride must be >= 1");
    if (out.contains("svg")) {
      if (!out.at("svg").is_boolean()) throw ConfigError("outputs.svg must be a boolean");
      cfg.outputs.svg = out.at("svg").get<bool>();
    }
  }

  if (cfg.mode == Mode::Sweep) {
    if (!doc.contains("sweep")) throw ConfigError("sweep mode requires a \"sweep\" section");
    const auto& sw = doc.at("sweep");
    require_keys(sw, "sweep", {"axes", "workers"});
    SweepConfig sc;
    sc.workers = get_int(sw, "sweep", "workers", false, 0);
    if (!sw.contains("axes") || !sw.at("axes").is_array() || sw.at("axes").empty())
      throw ConfigError("sweep.axes must be a non-empty array");
    for (const auto& ax : sw.at("axes")) {
      require_keys(ax, "sweep.axes[]", {"param", "params", "values", "linspace"});
      SweepAxis axis;
      if (ax.contains("param") == ax.contains("params"))
        throw ConfigError("each sweep axis needs exactly one of \"param\" or \"params\"");
      if (ax.contains("param")) {
        if (!ax.at("param").is_string()) throw ConfigError("sweep axis param must be a string");
        axis.params.push_back(ax.at("param").get<std::string>());
      } else {
        for (const auto& p : ax.at("params")) {
          if (!p.is_string()) throw ConfigError("sweep axis params must be strings");
          axis.params.push_back(p.get<std::string>());
        }
        if (axis.params.empty()) throw ConfigError("sweep axis params must be non-empty");
      }
      if (ax.contains("values") == ax.contains("linspace"))
        throw ConfigError("each sweep axis needs exactly one of \"values\" or \"linspace\"");
      if (ax.contains("linspace")) {
        if (axis.params.size() != 1)
          throw ConfigError("linspace axes take a single param");
        const auto& ls = ax.at("linspace");
        if (!ls.is_array() || ls.size() != 3 || !ls[0].is_number() || !ls[1].is_number() ||
            !ls[2].is_number_integer())
          throw ConfigError("linspace must be [lo, hi, count]");
        const double lo = ls[0].get<double>(), hi = ls[1].get<double>();
        const int count = ls[2].get<int>();
        if (count < 1) throw ConfigError("linspace count must be >= 1");
        for (int i = 0; i < count; ++i) {
          const double v = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
          axis.values.push_back({v});
        }
      } else {
        for (const auto& v : ax.at("values")) {
          std::vector<double> tuple;
          if (v.is_number()) {
            tuple.push_back(v.get<double>());
          } else if (v.is_array()) {
            for (const auto& w : v) {
              if (!w.is_number()) throw ConfigError("sweep values must be numbers");
              tuple.push_back(w.get<double>());
            }
          } else {
            throw ConfigError("sweep values must be numbers or tuples");
          }
          if (tuple.size() != axis.params.size())
            throw ConfigError("sweep value tuple size must match the axis params");
          axis.values.push_back(std::move(tuple));
        }
        if (axis.values.empty()) throw ConfigError("sweep axis values must be non-empty");
      }
      sc.axes.push_back(std::move(axis));
    }
    cfg.sweep = std::move(sc);
  } else if (doc.contains("sweep")) {
    throw ConfigError("\"sweep\" is only valid in sweep mode");
  }

  return cfg;
}

RunConfig load_config(const std::string& path, std::optional<Mode> mode_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc, mode_override);
}

analysis::AnalysisOptions analysis_options(const RunConfig& cfg) {
  analysis::AnalysisOptions opts;
  opts.control = cfg.control;
  opts.t_max = cfg.t_max;
  opts.lambda_control = cfg.control;
  opts.lambda_control.rtol = std::clamp(cfg.control.rtol * 1e-3, 1e-14, 1e-2);
  opts.lambda_control.atol = std::clamp(cfg.control.atol * 1e-2, 1e-16, 1e-2);
  return opts;
}

std::pair<REPParams, SpectralInitialData> config_data(const RunConfig& cfg) {
  return validate(cfg.n, cfg.k, cfg.c_b, cfg.rho0, cfg.lambda0);
}

}  // namespace rep::cli
