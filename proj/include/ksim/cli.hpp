// Command implementations behind the ksim tool: a small state mini-language,
// named scenarios with literature anchors, and text / JSON / CSV emission.
// Every run is reproducible from its flags and seed; with --deterministic
// the emission carries no timestamp and is byte-stable.

#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ksim/verify.hpp"

namespace ksim::cli {

using json = nlohmann::ordered_json;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Format { Text, Json, Csv };

inline Format parse_format(const std::string& s) {
  if (s == "text") return Format::Text;
  if (s == "json") return Format::Json;
  if (s == "csv") return Format::Csv;
  throw std::invalid_argument("unknown format: " + s);
}

struct Options {
  Format format = Format::Text;
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;  // 0 = analytic only
  bool deterministic = false;
};

// ---- State mini-language -------------------------------------------------
//
// Four-mode presets: u+ u- d+ d- phi+ singlet x+u.
// Two-mode presets (timeline initial states): z+ z- x+ x-.
// Explicit amplitudes: "re,im; re,im; re,im; re,im" in basis order
// (u,+),(u,-),(d,+),(d,-); a two-component list is read in the (+,-) spin
// basis. Input deviating from unit norm by more than 1e-9 is normalized
// with a warning; smaller deviations are normalized silently.

struct ParsedState {
  StateVector state;
  std::string warning;  // empty when none
};

namespace detail {

inline double parse_real(const std::string& tok) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw ParseError("state spec: bad number '" + tok + "'");
  }
  for (std::size_t i = used; i < tok.size(); ++i)
    if (!std::isspace(static_cast<unsigned char>(tok[i])))
      throw ParseError("state spec: bad number '" + tok + "'");
  return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string::npos ? pos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

inline ParsedState parse_state_spec(const std::string& text) {
  if (text == "u+") return {mode_u_plus(), ""};
  if (text == "u-") return {mode_u_minus(), ""};
  if (text == "d+") return {mode_d_plus(), ""};
  if (text == "d-") return {mode_d_minus(), ""};
  if (text == "phi+") return {phi_plus(), ""};
  if (text == "singlet") return {singlet_state(), ""};
  if (text == "x+u") return {x_plus_u(), ""};
  if (text == "z+") return {spin_z_plus(), ""};
  if (text == "z-") return {spin_z_minus(), ""};
  if (text == "x+") return {spin_x_plus(), ""};
  if (text == "x-") return {spin_x_minus(), ""};

  const std::vector<std::string> comps = detail::split(text, ';');
  if (comps.size() != 2 && comps.size() != 4)
    throw ParseError("state spec: expected a preset name or 2/4 're,im' components");
  std::vector<cplx> amps;
  for (const std::string& comp : comps) {
    const std::vector<std::string> parts = detail::split(comp, ',');
    if (parts.size() != 2) throw ParseError("state spec: component '" + comp + "' is not 're,im'");
    amps.emplace_back(detail::parse_real(parts[0]), detail::parse_real(parts[1]));
  }
  const double n = norm2(amps);
  if (n <= kTol) throw ParseError("state spec: zero norm");
  std::string warning;
  if (std::abs(n - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "input amplitudes normalized (norm was " << n << ")";
    warning = os.str();
  }
  for (cplx& a : amps) a /= n;
  return {StateVector(comps.size() == 4 ? path_spin_labels() : spin_labels(), std::move(amps)),
          warning};
}

// ---- Uniform result document ---------------------------------------------

struct CsvRow {
  std::string label;
  std::optional<double> probability;
  std::optional<std::uint64_t> count;
  std::optional<double> frequency;
};

struct CommandResult {
  std::string scenario;
  std::string paper_anchor;
  json parameters = json::object();
  json analytic = json::object();
  std::optional<json> sampled;
  std::vector<CsvRow> rows;
  std::vector<std::string> text_lines;
  std::string warning;  // forwarded parse warnings
  int exit_hint = 0;
};

inline std::string anchor_for(const std::string& scenario) {
  if (scenario == "commutators")
    return "commuting spin product observables of two two-valued degrees of freedom "
           "(Cabello and Garcia-Alcaine, Phys. Rev. Lett. 80, 1797 (1998))";
  if (scenario == "ks-predict")
    return "quantum vs noncontextual joint values of (Z1X2, X1Z2) on the (+1,+1) product "
           "eigenstate (Cabello and Garcia-Alcaine, Phys. Rev. Lett. 80, 1797 (1998))";
  if (scenario == "apparatus")
    return "beam-combiner measurement of Z1Z2 without measuring Z1 or Z2 "
           "(Simon, Zukowski, Weinfurter and Zeilinger, Phys. Rev. Lett. 85, 1783 (2000))";
  if (scenario == "counterfactual")
    return "retrodiction from measurement records: classification of unperformed "
           "intermediate measurements";
  if (scenario == "verify")
    return "internal invariant suite across all modules";
  throw std::invalid_argument("unknown scenario: " + scenario);
}

namespace detail {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string iso8601_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

// ---- Commands --------------------------------------------------------------

inline CommandResult run_commutators(const Options& opts) {
  (void)opts;
  CommandResult r;
  r.scenario = "commutators";
  r.paper_anchor = anchor_for(r.scenario);

  struct Row {
    std::string a, b;
    Observable oa, ob;
  };
  const std::vector<Row> table{{"Z1", "X1", z1(), x1()},       {"Z2", "X2", z2(), x2()},
                               {"Z1", "X2", z1(), x2()},       {"X1", "Z2", x1(), z2()},
                               {"Z1Z2", "X1X2", z1z2(), x1x2()},
                               {"Z1X2", "X1Z2", z1x2(), x1z2()}};

  json pairs = json::array();
  for (const Row& row : table) {
    const double norm = commutator(row.oa, row.ob).frobenius_norm();
    const bool commute = norm <= kTol;
    pairs.push_back({{"a", row.a}, {"b", row.b}, {"frobenius_norm", norm}, {"commute", commute}});
    const std::string label = "[" + row.a + "," + row.b + "]";
    r.rows.push_back({label, norm, std::nullopt, std::nullopt});
    std::ostringstream line;
    line << label << "  frobenius_norm=" << detail::fmt(norm) << "  "
         << (commute ? "commute" : "do not commute");
    r.text_lines.push_back(line.str());
  }
  r.analytic["pairs"] = std::move(pairs);
  return r;
}

namespace detail {

template <typename O>
json problist_json(const ProbList<O>& probs) {
  json arr = json::array();
  for (const auto& [o, p] : probs) arr.push_back({{"outcome", o.str()}, {"probability", p}});
  return arr;
}

// Seeded frequency table for a joint distribution, one substream per trial.
inline std::map<std::string, std::uint64_t> sample_counts(const JointDistribution& dist,
                                                          std::uint64_t trials,
                                                          const RngStream& rng) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& e : dist.entries()) counts[e.outcome.str()] = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    RngStream trial = rng.substream(t);
    ++counts[sample(dist, trial).first.str()];
  }
  return counts;
}

}  // namespace detail

inline CommandResult run_ks_predict(const std::string& model, const Options& opts) {
  if (model != "qm" && model != "nchv" && model != "both")
    throw std::invalid_argument("ks-predict: model must be qm, nchv or both");
  CommandResult r;
  r.scenario = "ks-predict";
  r.paper_anchor = anchor_for(r.scenario);
  r.parameters = {{"model", model}, {"seed", opts.seed}, {"trials", opts.trials}};

  const QmNchvContrast c = qm_nchv_contrast();

  if (model == "qm" || model == "both") {
    json qm = json::object();
    qm["preparation"] = "phi+";
    qm["pair"] = "(Z1X2, X1Z2)";
    qm["outcomes"] = detail::problist_json(c.qm);
    r.analytic["qm"] = qm;
    for (const auto& [o, p] : c.qm) r.rows.push_back({"qm:" + o.str(), p, std::nullopt, std::nullopt});
    r.text_lines.push_back("qm joint (Z1X2, X1Z2) on phi+:");
    for (const auto& [o, p] : c.qm)
      r.text_lines.push_back("  " + o.str() + "  probability " + detail::fmt(p));
    if (opts.trials > 0) {
      const JointDistribution dist = joint_measure(phi_plus(), z1x2(), x1z2());
      const auto counts = detail::sample_counts(dist, opts.trials, RngStream(opts.seed));
      json sampled = json::object();
      json arr = json::array();
      r.text_lines.push_back("qm sampled (" + std::to_string(opts.trials) + " trials):");
      for (auto& row : r.rows) {
        const std::string key = row.label.substr(3);
        const auto it = counts.find(key);
        if (it != counts.end()) {
          row.count = it->second;
          row.frequency = static_cast<double>(it->second) / static_cast<double>(opts.trials);
          arr.push_back({{"outcome", key},
                         {"count", it->second},
                         {"frequency", *row.frequency}});
          r.text_lines.push_back("  " + key + "  count " + std::to_string(it->second) +
                                 "  frequency " + detail::fmt(*row.frequency));
        }
      }
      sampled["trials"] = opts.trials;
      sampled["seed"] = opts.seed;
      sampled["qm_counts"] = std::move(arr);
      r.sampled = std::move(sampled);
    }
  }

  if (model == "nchv" || model == "both") {
    json nchv = json::object();
    nchv["preparation"] = "val(Z1Z2)=+1, val(X1X2)=+1";
    json arr = json::array();
    for (const JointOutcome& o : c.nchv.outcomes) arr.push_back(o.str());
    nchv["outcomes"] = std::move(arr);
    nchv["weights"] = "not fixed by the model (outcome set only)";
    r.analytic["nchv"] = nchv;
    r.text_lines.push_back("nchv value pairs (Z1X2, X1Z2) under val(Z1Z2)=val(X1X2)=+1:");
    for (const JointOutcome& o : c.nchv.outcomes) {
      r.rows.push_back({"nchv:" + o.str(), std::nullopt, std::nullopt, std::nullopt});
      r.text_lines.push_back("  " + o.str());
    }
  }

  if (model == "both") {
    r.analytic["disjoint"] = c.disjoint;
    r.text_lines.push_back(std::string("outcome sets disjoint: ") + (c.disjoint ? "true" : "false"));
  }
  return r;
}

namespace detail {

inline json region_analytic_json(const std::vector<RegionProbability>& dist) {
  json arr = json::array();
  for (const RegionProbability& rp : dist)
    arr.push_back({{"region", rp.region},
                   {"product_value", rp.product_value.str()},
                   {"probability", rp.probability}});
  return arr;
}

}  // namespace detail

inline CommandResult run_apparatus(int stage, const std::string& input_spec,
                                   const std::optional<std::string>& follow_up_name,
                                   const Options& opts) {
  if (stage != 1 && stage != 2) throw std::invalid_argument("apparatus: stage must be 1 or 2");
  const ParsedState parsed = parse_state_spec(input_spec);
  if (parsed.state.dim() != 4)
    throw std::invalid_argument("apparatus: input must be a four-mode (path, spin) state");
  std::optional<Observable> follow;
  if (follow_up_name) follow = observable_by_name(*follow_up_name);

  CommandResult r;
  r.scenario = "apparatus";
  r.paper_anchor = anchor_for(r.scenario);
  r.warning = parsed.warning;
  r.parameters = {{"stage", stage},
                  {"input", input_spec},
                  {"seed", opts.seed},
                  {"trials", opts.trials}};
  if (follow_up_name) r.parameters["follow_up"] = *follow_up_name;

  const std::vector<RegionProbability> dist =
      stage == 1 ? stage1_distribution(parsed.state) : stage2_distribution(parsed.state);
  r.analytic["regions"] = detail::region_analytic_json(dist);

  r.text_lines.push_back("analytic region probabilities:");
  for (const RegionProbability& rp : dist) {
    r.text_lines.push_back("  " + rp.region + "  probability " + detail::fmt(rp.probability) +
                           "  product_value " + rp.product_value.str());
    r.rows.push_back({rp.region, rp.probability, std::nullopt, std::nullopt});
  }

  // Analytic follow-up cross table: joint probability of (region, value).
  if (follow) {
    json arr = json::array();
    r.text_lines.push_back("analytic follow-up " + *follow_up_name + " by region:");
    for (const RegionProbability& rp : dist) {
      if (!rp.post_state || rp.probability < kTol) continue;
      const OutcomeDistribution fd = measure(*rp.post_state, *follow);
      for (const Outcome& v : outcome_domain()) {
        const double joint = rp.probability * fd.probability_of(v);
        if (joint < kTol) continue;
        arr.push_back(
            {{"region", rp.region}, {"value", v.str()}, {"joint_probability", joint}});
        r.text_lines.push_back("  " + rp.region + " & " + v.str() + "  probability " +
                               detail::fmt(joint));
        r.rows.push_back({rp.region + "/" + v.str(), joint, std::nullopt, std::nullopt});
      }
    }
    r.analytic["follow_up"] = {{"observable", *follow_up_name}, {"joint", std::move(arr)}};
  }

  if (opts.trials > 0) {
    const RunStatistics stats =
        stage == 1 ? run_stage1(parsed.state, opts.trials, RngStream(opts.seed), follow)
                   : run_stage2(parsed.state, opts.trials, RngStream(opts.seed), follow);
    json sampled = json::object();
    sampled["trials"] = stats.trials;
    sampled["seed"] = opts.seed;
    json arr = json::array();
    r.text_lines.push_back("sampled counts (" + std::to_string(stats.trials) + " trials):");
    for (const auto& [region, count] : stats.counts) {
      const double freq = static_cast<double>(count) / static_cast<double>(stats.trials);
      arr.push_back({{"region", region}, {"count", count}, {"frequency", freq}});
      r.text_lines.push_back("  " + region + "  count " + std::to_string(count) + "  frequency " +
                             detail::fmt(freq));
      for (CsvRow& row : r.rows)
        if (row.label == region) {
          row.count = count;
          row.frequency = freq;
        }
    }
    sampled["regions"] = std::move(arr);
    if (stats.follow_up) {
      json farr = json::array();
      r.text_lines.push_back("sampled follow-up counts:");
      for (const auto& [key, count] : *stats.follow_up) {
        const double freq = static_cast<double>(count) / static_cast<double>(stats.trials);
        const std::string value = key.second > 0 ? "+1" : "-1";
        farr.push_back(
            {{"region", key.first}, {"value", value}, {"count", count}, {"frequency", freq}});
        r.text_lines.push_back("  " + key.first + " & " + value + "  count " +
                               std::to_string(count) + "  frequency " + detail::fmt(freq));
        for (CsvRow& row : r.rows)
          if (row.label == key.first + "/" + value) {
            row.count = count;
            row.frequency = freq;
          }
      }
      sampled["follow_up"] = std::move(farr);
    }
    r.sampled = std::move(sampled);
  }
  return r;
}

namespace detail {

inline json classification_json(const Classification& c) {
  return {{"status", to_string(c.status)}, {"probability", c.probability}};
}

inline json report_json(const CounterfactualReport& report) {
  json doc = json::object();
  doc["modified_events"] = report.modified_event_tags;
  json held = json::object();
  for (const auto& [tag, outcome] : report.held) held[tag] = ksim::to_string(outcome);
  doc["held"] = std::move(held);
  json events = json::array();
  for (const EventReport& er : report.events) {
    json ev = json::object();
    ev["tag"] = er.tag;
    ev["observable"] = er.observable_name;
    ev["held"] = er.held;
    if (er.recorded) ev["recorded"] = ksim::to_string(*er.recorded);
    json outs = json::array();
    for (const OutcomeClassification& oc : er.outcomes) {
      json o = classification_json(oc.classification);
      o["outcome"] = ksim::to_string(oc.outcome);
      outs.push_back(std::move(o));
    }
    ev["outcomes"] = std::move(outs);
    events.push_back(std::move(ev));
  }
  doc["events"] = std::move(events);
  json conds = json::array();
  for (const PrefixConditional& pc : report.conditionals) {
    json c = json::object();
    json given = json::object();
    for (const auto& [tag, outcome] : pc.given) given[tag] = ksim::to_string(outcome);
    c["given"] = std::move(given);
    c["event"] = pc.tag;
    json outs = json::array();
    for (const OutcomeClassification& oc : pc.outcomes) {
      json o = classification_json(oc.classification);
      o["outcome"] = ksim::to_string(oc.outcome);
      outs.push_back(std::move(o));
    }
    c["outcomes"] = std::move(outs);
    conds.push_back(std::move(c));
  }
  doc["conditionals"] = std::move(conds);
  doc["forced_recorded"] = report.forced_recorded;
  doc["possible_recorded"] = report.possible_recorded;
  doc["impossible_recorded"] = report.impossible_recorded;
  doc["note"] = report.note;
  return doc;
}

inline void report_text(const CounterfactualReport& report, const std::string& title,
                        std::vector<std::string>& lines, std::vector<CsvRow>& rows) {
  lines.push_back(title + ":");
  std::string held_line = "  held:";
  if (report.held.empty()) held_line += " (none)";
  for (const auto& [tag, outcome] : report.held)
    held_line += " " + tag + "=" + ksim::to_string(outcome);
  lines.push_back(held_line);
  for (const EventReport& er : report.events) {
    std::string line = "  " + er.observable_name + "@" + er.tag + ":";
    for (const OutcomeClassification& oc : er.outcomes) {
      if (oc.classification.status == CfStatus::Impossible) continue;
      line += " " + ksim::to_string(oc.outcome) + " " + to_string(oc.classification.status);
      if (oc.classification.status == CfStatus::Possible)
        line += "(p=" + fmt(oc.classification.probability) + ")";
      rows.push_back({title + ":" + er.tag + "=" + ksim::to_string(oc.outcome),
                      oc.classification.probability, std::nullopt, std::nullopt});
    }
    if (er.recorded) line += "  [recorded " + ksim::to_string(*er.recorded) + "]";
    lines.push_back(line);
  }
  for (const PrefixConditional& pc : report.conditionals) {
    std::string line = "  given";
    for (const auto& [tag, outcome] : pc.given) line += " " + tag + "=" + ksim::to_string(outcome);
    line += ": " + pc.tag + " ->";
    for (const OutcomeClassification& oc : pc.outcomes) {
      if (oc.classification.status == CfStatus::Impossible) continue;
      line += " " + ksim::to_string(oc.outcome) + " " + to_string(oc.classification.status);
      if (oc.classification.status == CfStatus::Possible)
        line += "(p=" + fmt(oc.classification.probability) + ")";
    }
    lines.push_back(line);
  }
  auto list_line = [&lines](const std::string& label, const std::vector<std::string>& tags) {
    std::string line = "  recorded outcomes " + label + ":";
    if (tags.empty()) line += " (none)";
    for (const std::string& t : tags) line += " " + t;
    lines.push_back(line);
  };
  list_line("forced", report.forced_recorded);
  list_line("merely possible", report.possible_recorded);
}

}  // namespace detail

inline CommandResult run_counterfactual(const std::string& scenario_name,
                                        const std::optional<std::string>& input_spec,
                                        const std::optional<std::string>& initial_spec,
                                        const Options& opts) {
  (void)opts;
  CommandResult r;
  r.scenario = "counterfactual";
  r.paper_anchor = anchor_for(r.scenario);
  r.parameters = {{"scenario", scenario_name}};
  if (input_spec) r.parameters["input"] = *input_spec;
  if (initial_spec) r.parameters["initial"] = *initial_spec;

  if (scenario_name == "fig3") {
    std::optional<std::vector<WeightedState>> initial;
    if (initial_spec) {
      const ParsedState parsed = parse_state_spec(*initial_spec);
      if (parsed.state.dim() != 2)
        throw std::invalid_argument("counterfactual: initial must be a two-mode spin state");
      r.warning = parsed.warning;
      initial = std::vector<WeightedState>{{parsed.state, 1.0}};
    }
    const auto [base, record] = preset_fig3(initial);
    json rec = json::object();
    for (const auto& [tag, outcome] : record) rec[tag] = to_string(outcome);
    r.analytic["record"] = std::move(rec);
    r.text_lines.push_back("record: X@t1=+1, Z@t2=+1");

    const CounterfactualReport insert_report =
        counterfactual_report(base, record, fig3_insert_modification());
    r.analytic["insert"] = detail::report_json(insert_report);
    detail::report_text(insert_report, "insert X@t before t2", r.text_lines, r.rows);

    const CounterfactualReport replace_report =
        counterfactual_report(base, record, fig3_replace_modification());
    r.analytic["replace"] = detail::report_json(replace_report);
    detail::report_text(replace_report, "replace X@t1 with Z@t1", r.text_lines, r.rows);
    return r;
  }

  if (scenario_name == "apparatus-retrodiction") {
    RetrodictionReport report;
    if (input_spec) {
      const ParsedState parsed = parse_state_spec(*input_spec);
      if (parsed.state.dim() != 4)
        throw std::invalid_argument("counterfactual: input must be a four-mode state");
      r.warning = parsed.warning;
      report.cases.push_back(apparatus_retrodiction(parsed.state, *input_spec));
      report.note = apparatus_retrodiction_demo().note;
    } else {
      report = apparatus_retrodiction_demo();
    }
    json arr = json::array();
    for (const RetrodictionCase& c : report.cases) {
      json entry = {{"input", c.input_name},
                    {"bc1_probability", c.bc1_probability},
                    {"bc1_after_insertion", detail::classification_json(c.bc1_after_insertion)},
                    {"forced_after_insertion", c.forced_after_insertion}};
      arr.push_back(std::move(entry));
      std::ostringstream line;
      line << c.input_name << "  P(BC1)=" << detail::fmt(c.bc1_probability)
           << "  after insertion: BC1 " << to_string(c.bc1_after_insertion.status);
      if (c.bc1_after_insertion.status == CfStatus::Possible)
        line << "(p=" << detail::fmt(c.bc1_after_insertion.probability) << ")";
      r.text_lines.push_back(line.str());
      r.rows.push_back(
          {c.input_name + ":BC1", c.bc1_after_insertion.probability, std::nullopt, std::nullopt});
    }
    r.analytic["cases"] = std::move(arr);
    r.analytic["note"] = report.note;
    r.text_lines.push_back("note: " + report.note);
    return r;
  }

  throw std::invalid_argument("counterfactual: unknown scenario " + scenario_name +
                              " (expected fig3 or apparatus-retrodiction)");
}

inline CommandResult run_verify(bool corrupt_combiner, const Options& opts) {
  (void)opts;
  CommandResult r;
  r.scenario = "verify";
  r.paper_anchor = anchor_for(r.scenario);
  r.parameters = {{"corrupt_combiner", corrupt_combiner}};

  const std::vector<VerifyCheck> checks = run_verification({corrupt_combiner});
  const int failures = verification_failure_count(checks);
  json arr = json::array();
  for (const VerifyCheck& c : checks) {
    arr.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    r.text_lines.push_back(std::string(c.passed ? "[PASS] " : "[FAIL] ") + c.name + " (" +
                           c.detail + ")");
    r.rows.push_back({c.name, c.passed ? 1.0 : 0.0, std::nullopt, std::nullopt});
  }
  r.analytic["checks"] = std::move(arr);
  r.analytic["failures"] = failures;
  r.text_lines.push_back(std::to_string(checks.size() - static_cast<std::size_t>(failures)) + "/" +
                         std::to_string(checks.size()) + " checks passed");
  r.exit_hint = failures > 0 ? 2 : 0;
  return r;
}

// ---- Rendering -------------------------------------------------------------

inline std::string render(const CommandResult& r, const Options& opts) {
  std::ostringstream out;
  switch (opts.format) {
    case Format::Json: {
      json doc = json::object();
      doc["scenario"] = r.scenario;
      doc["paper_anchor"] = r.paper_anchor;
      doc["parameters"] = r.parameters;
      json results = json::object();
      results["analytic"] = r.analytic;
      if (r.sampled) results["sampled"] = *r.sampled;
      doc["results"] = std::move(results);
      if (!r.warning.empty()) doc["warning"] = r.warning;
      if (!opts.deterministic) doc["generated_at"] = detail::iso8601_now();
      out << doc.dump(2) << "\n";
      break;
    }
    case Format::Csv: {
      out << "label,probability,count,frequency\n";
      for (const CsvRow& row : r.rows) {
        out << detail::csv_escape(row.label) << ",";
        if (row.probability) out << detail::fmt(*row.probability);
        out << ",";
        if (row.count) out << *row.count;
        out << ",";
        if (row.frequency) out << detail::fmt(*row.frequency);
        out << "\n";
      }
      break;
    }
    case Format::Text: {
      out << "scenario: " << r.scenario << "\n";
      out << "anchor: " << r.paper_anchor << "\n";
      if (!r.parameters.empty()) {
        out << "parameters:";
        for (const auto& [key, value] : r.parameters.items())
          out << " " << key << "=" << (value.is_string() ? value.get<std::string>() : value.dump());
        out << "\n";
      }
      if (!r.warning.empty()) out << "warning: " << r.warning << "\n";
      for (const std::string& line : r.text_lines) out << line << "\n";
      if (!opts.deterministic) out << "generated_at: " << detail::iso8601_now() << "\n";
      break;
    }
  }
  return out.str();
}

// ---- Scenario files ---------------------------------------------------------
//
// A scenario file is a JSON object {"name": <scenario>, "parameters": {...}}
// whose parameters mirror the command-line flags of the named scenario.

struct ScenarioRun {
  CommandResult result;
  Options options;
};

inline ScenarioRun run_scenario_file_content(const json& doc, Options base_opts) {
  if (!doc.is_object()) throw ParseError("scenario file: top level must be an object");
  if (!doc.contains("name") || !doc["name"].is_string())
    throw ParseError("scenario file: missing string field 'name'");
  const std::string name = doc["name"].get<std::string>();
  json params = doc.value("parameters", json::object());
  if (!params.is_object()) throw ParseError("scenario file: 'parameters' must be an object");

  Options opts = base_opts;
  auto take_u64 = [&params](const char* key, std::uint64_t& into) {
    if (params.contains(key)) {
      if (!params[key].is_number_unsigned() && !params[key].is_number_integer())
        throw ParseError(std::string("scenario file: '") + key + "' must be an integer");
      into = params[key].get<std::uint64_t>();
      params.erase(key);
    }
  };
  take_u64("seed", opts.seed);
  take_u64("trials", opts.trials);
  if (params.contains("format")) {
    opts.format = parse_format(params["format"].get<std::string>());
    params.erase("format");
  }
  if (params.contains("deterministic")) {
    opts.deterministic = params["deterministic"].get<bool>();
    params.erase("deterministic");
  }

  auto take_string = [&params](const char* key) -> std::optional<std::string> {
    if (!params.contains(key)) return std::nullopt;
    if (!params[key].is_string())
      throw ParseError(std::string("scenario file: '") + key + "' must be a string");
    std::string v = params[key].get<std::string>();
    params.erase(key);
    return v;
  };

  CommandResult result;
  if (name == "commutators") {
    result = run_commutators(opts);
  } else if (name == "ks-predict") {
    const std::string model = take_string("model").value_or("both");
    result = run_ks_predict(model, opts);
  } else if (name == "apparatus") {
    int stage = 2;
    if (params.contains("stage")) {
      if (!params["stage"].is_number_integer() && !params["stage"].is_number_unsigned())
        throw ParseError("scenario file: 'stage' must be an integer");
      stage = params["stage"].get<int>();
      params.erase("stage");
    }
    const std::string input = take_string("input").value_or("phi+");
    result = run_apparatus(stage, input, take_string("follow_up"), opts);
  } else if (name == "counterfactual") {
    const std::string scen = take_string("scenario").value_or("fig3");
    result = run_counterfactual(scen, take_string("input"), take_string("initial"), opts);
  } else if (name == "verify") {
    bool corrupt = false;
    if (params.contains("corrupt_combiner")) {
      corrupt = params["corrupt_combiner"].get<bool>();
      params.erase("corrupt_combiner");
    }
    result = run_verify(corrupt, opts);
  } else {
    throw std::invalid_argument("scenario file: unknown scenario name " + name);
  }
  if (!params.empty())
    throw std::invalid_argument("scenario file: unknown parameter '" + params.begin().key() +
                                "' for scenario " + name);
  return {std::move(result), opts};
}

}  // namespace ksim::cli
