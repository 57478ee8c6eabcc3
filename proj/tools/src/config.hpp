#ifndef REP_CLI_CONFIG_HPP
#define REP_CLI_CONFIG_HPP

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "rep/analysis.hpp"
#include "rep/core.hpp"
#include "rep/integrate.hpp"

namespace rep::cli {

using json = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class Mode { Simulate, Blowup, Classify, Sweep, VerifyExample, Rates };

const char* mode_name(Mode m) noexcept;
Mode mode_from_string(const std::string& s);

struct OutputConfig {
  std::string dir = ".";
  std::string csv;   // default depends on the mode
  std::string json_file;
  int stride = 1;
  bool svg = false;
};

struct FamilyConfig {
  double k = 4.0;
  double c_b = 1.0;
  double lambda10 = -1.0;
  double lambda40 = 1.0;
};

// One sweep axis: either a single parameter with explicit values or a
// linspace triple, or a zipped tuple of parameters sharing a value list.
struct SweepAxis {
  std::vector<std::string> params;            // parameter paths
  std::vector<std::vector<double>> values;    // values[i] has one entry per param
};

struct SweepConfig {
  std::vector<SweepAxis> axes;
  int workers = 0;  // 0: hardware concurrency
};

struct RunConfig {
  Mode mode = Mode::Simulate;
  int n = 0;
  double k = 0.0, c_b = 0.0;
  double rho0 = 0.0;
  std::vector<double> lambda0;
  ode::StepControl control;
  double t_max = 0.0;  // 0: 100/omega
  std::string coordinate = "u";
  OutputConfig outputs;
  std::optional<FamilyConfig> family;
  std::optional<SweepConfig> sweep;
};

// Strict schema validation: unknown keys and wrong types are rejected.
RunConfig parse_config(const json& doc, std::optional<Mode> mode_override = std::nullopt);
RunConfig load_config(const std::string& path, std::optional<Mode> mode_override = std::nullopt);

// Analysis options derived from the user control: the lambda pass runs a
// fixed factor tighter than the u pass, so loosened user tolerances degrade
// the whole pipeline (a documented failure mode of verify-example).
analysis::AnalysisOptions analysis_options(const RunConfig& cfg);

std::pair<REPParams, SpectralInitialData> config_data(const RunConfig& cfg);

}  // namespace rep::cli

#endif
