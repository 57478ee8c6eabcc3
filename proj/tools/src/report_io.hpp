#ifndef REP_CLI_REPORT_IO_HPP
#define REP_CLI_REPORT_IO_HPP

#include <string>
#include <vector>

#include "config.hpp"
#include "rep/analysis.hpp"
#include "rep/integrate.hpp"

namespace rep::cli {

// 17 significant digits: round-trip exact for golden-file comparisons.
std::string format_double(double v);

json params_json(const REPParams& p);
json init_json(const SpectralInitialData& d);
json control_json(const ode::StepControl& c, double t_max);
json classification_json(const Classification& c);
json rate_fit_json(const analysis::RateFit& f, bool with_C);
json blowup_report_json(const analysis::BlowupReport& r);
json terminal_json(const ode::Terminal& t);

// Standard report envelope: {params, init, control, result}.
json report_envelope(const REPParams& p, const SpectralInitialData& d,
                     const ode::StepControl& c, double t_max, json result);

void write_text_file(const std::string& path, const std::string& content);
void write_json_file(const std::string& path, const json& doc);

// CSV writer with LF line endings and 17-digit floats.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(const std::vector<std::string>& cells);
  const std::string& str() const { return buf_; }

 private:
  std::string buf_;
  std::size_t columns_;
};

}  // namespace rep::cli

#endif
