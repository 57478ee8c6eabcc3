#include "report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace rep::cli {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json params_json(const REPParams& p) {
  return json{{"n", p.n}, {"k", p.k}, {"c_b", p.c_b}, {"omega", p.omega}};
}

json init_json(const SpectralInitialData& d) {
  return json{{"rho0", d.rho0}, {"lambda0", d.lambda0}, {"J", d.J}};
}

json control_json(const ode::StepControl& c, double t_max) {
  return json{{"rtol", c.rtol},
              {"atol", c.atol},
              {"h_init", c.h_init},
              {"h_min", c.h_min},
              {"h_max", c.h_max},
              {"lambda_escape", c.lambda_escape},
              {"u_zero_eps", c.u_zero_eps},
              {"t_max", t_max}};
}

json classification_json(const Classification& c) {
  json out{{"verdict", verdict_name(c.verdict)}, {"reason", rule_tag_name(c.reason)}};
  out["caseLabel"] = c.caseLabel ? json(case_label_name(*c.caseLabel)) : json(nullptr);
  out["A0"] = c.A0 ? json(*c.A0) : json(nullptr);
  return out;
}

json rate_fit_json(const analysis::RateFit& f, bool with_C) {
  json out{{"exponent", f.exponent},
           {"coefficient", f.coefficient},
           {"windowDecades", f.windowDecades},
           {"residual", f.residual},
           {"log_growth", f.log_growth},
           {"ambiguous", f.ambiguous}};
  if (with_C) out["C"] = f.C();
  return out;
}

json blowup_report_json(const analysis::BlowupReport& r) {
  const bool second_order = r.caseObserved == CaseLabel::IIc;
  const bool with_C = second_order || r.caseObserved == CaseLabel::III;
  json out;
  out["tB"] = r.tB;
  out["tB_bracket_width"] = r.tB_bracket_width;
  out["J"] = r.J;
  out["p"] = r.p;
  out["q"] = r.q;
  out["p_raw"] = r.p_raw;
  out["q_raw"] = r.q_raw;
  out["u1_slope"] = r.u1_slope;
  out["gamma"] = r.gamma;
  out["R0"] = r.R0 ? json(*r.R0) : json(nullptr);
  out["xi1"] = rate_fit_json(r.xi1, with_C);
  out["xin"] = rate_fit_json(r.xin, with_C);
  out["rho_rate"] = rate_fit_json(r.rho_rate, false);
  out["caseObserved"] = case_label_name(r.caseObserved);
  out["tangential"] = r.tangential;
  json res = json::object();
  for (const auto& [k, v] : r.residuals) res[k] = v;
  out["residuals"] = res;
  return out;
}

json terminal_json(const ode::Terminal& t) {
  const char* kind = "unknown";
  switch (t.kind) {
    case ode::TerminalKind::ReachedTmax: kind = "ReachedTmax"; break;
    case ode::TerminalKind::BlowupEvent: kind = "BlowupEvent"; break;
    case ode::TerminalKind::StepSizeUnderflow: kind = "StepSizeUnderflow"; break;
    case ode::TerminalKind::DensityOverflow: kind = "DensityOverflow"; break;
    case ode::TerminalKind::NonFiniteState: kind = "NonFiniteState"; break;
  }
  json out{{"kind", kind}, {"t", t.t}};
  if (t.kind == ode::TerminalKind::BlowupEvent || t.kind == ode::TerminalKind::DensityOverflow) {
    out["event"] = t.event;
    out["bracket"] = json::array({t.bracket_lo, t.bracket_hi});
    out["tangential"] = t.tangential;
  }
  return out;
}

json report_envelope(const REPParams& p, const SpectralInitialData& d,
                     const ode::StepControl& c, double t_max, json result) {
  json out;
  out["params"] = params_json(p);
  out["init"] = init_json(d);
  out["control"] = control_json(c, t_max);
  out["result"] = std::move(result);
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::NonFiniteInput, "cannot write file: " + path);
  out << content;
}

void write_json_file(const std::string& path, const json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) buf_ += ',';
    buf_ += header[i];
  }
  buf_ += '\n';
}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) buf_ += ',';
    buf_ += cells[i];
  }
  buf_ += '\n';
}

}  // namespace rep::cli
