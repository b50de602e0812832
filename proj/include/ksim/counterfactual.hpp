// Branch enumeration over measurement timelines, and classification of
// counterfactual outcomes. A timeline is a weighted pure-state ensemble
// followed by an ordered list of measurement events; every branch is one
// (ensemble member, outcome sequence) with its probability under Lueders
// collapse. A queried outcome, conditioned on part of the record, is
// Forced (conditional probability 1), Impossible (0), or Possible (the
// open interval), under an explicit outcome-matching policy that holds
// fixed only what happened strictly before the modified point.

#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ksim/apparatus.hpp"
#include "ksim/measurement.hpp"

namespace ksim {

struct TimelineEvent {
  std::string tag;              // time label; order is the sequence order
  std::string observable_name;  // display name, e.g. "X" or "(Z1,Z2)"
  MeasureStep step;
};

struct WeightedState {
  StateVector state;
  double weight;
};

using OutcomeRecord = std::map<std::string, EventOutcome>;

class Timeline {
 public:
  Timeline(std::vector<WeightedState> initial, std::vector<TimelineEvent> events)
      : initial_(std::move(initial)), events_(std::move(events)) {
    if (initial_.empty()) throw std::invalid_argument("Timeline: empty initial ensemble");
    double total = 0.0;
    for (const WeightedState& w : initial_) {
      if (w.weight < 0.0) throw std::invalid_argument("Timeline: negative ensemble weight");
      if (w.state.basis_labels() != initial_.front().state.basis_labels())
        throw std::invalid_argument("Timeline: ensemble states must share one basis");
      total += w.weight;
    }
    if (std::abs(total - 1.0) > kTol)
      throw std::invalid_argument("Timeline: ensemble weights must sum to 1");
    std::set<std::string> tags;
    for (const TimelineEvent& e : events_) {
      if (!tags.insert(e.tag).second)
        throw std::invalid_argument("Timeline: duplicate event tag " + e.tag);
      const int d = std::holds_alternative<Observable>(e.step)
                        ? std::get<Observable>(e.step).dim()
                        : std::get<std::pair<Observable, Observable>>(e.step).first.dim();
      if (d != initial_.front().state.dim())
        throw std::invalid_argument("Timeline: event dimension mismatch at " + e.tag);
    }
  }

  const std::vector<WeightedState>& initial() const { return initial_; }
  const std::vector<TimelineEvent>& events() const { return events_; }

  bool has_tag(const std::string& tag) const {
    return std::any_of(events_.begin(), events_.end(),
                       [&](const TimelineEvent& e) { return e.tag == tag; });
  }

  int index_of(const std::string& tag) const {
    for (std::size_t i = 0; i < events_.size(); ++i)
      if (events_[i].tag == tag) return static_cast<int>(i);
    throw std::invalid_argument("Timeline: unknown event tag " + tag);
  }

 private:
  std::vector<WeightedState> initial_;
  std::vector<TimelineEvent> events_;
};

struct Branch {
  std::size_t ensemble_member;
  std::vector<EventOutcome> outcomes;  // aligned with the timeline's events
  double probability;
};

namespace detail {

inline void expand_branches(const Timeline& tl, std::size_t member, std::size_t next_event,
                            const StateVector& state, double prob,
                            std::vector<EventOutcome>& outcomes, std::vector<Branch>& out) {
  if (next_event == tl.events().size()) {
    if (prob >= kTol) out.push_back({member, outcomes, prob});
    return;
  }
  const MeasureStep& step = tl.events()[next_event].step;
  if (std::holds_alternative<Observable>(step)) {
    const OutcomeDistribution dist = measure(state, std::get<Observable>(step));
    for (const auto& e : dist.entries()) {
      outcomes.emplace_back(e.outcome);
      expand_branches(tl, member, next_event + 1, e.post_state, prob * e.probability, outcomes, out);
      outcomes.pop_back();
    }
  } else {
    const auto& [a, b] = std::get<std::pair<Observable, Observable>>(step);
    const JointDistribution dist = joint_measure(state, a, b);
    for (const auto& e : dist.entries()) {
      outcomes.emplace_back(e.outcome);
      expand_branches(tl, member, next_event + 1, e.post_state, prob * e.probability, outcomes, out);
      outcomes.pop_back();
    }
  }
}

}  // namespace detail

// One branch per (ensemble member, positive-probability outcome sequence),
// with probability = weight x product of step probabilities.
inline std::vector<Branch> enumerate_branches(const Timeline& tl) {
  std::vector<Branch> out;
  std::vector<EventOutcome> outcomes;
  for (std::size_t m = 0; m < tl.initial().size(); ++m) {
    const WeightedState& w = tl.initial()[m];
    if (w.weight < kTol) continue;
    detail::expand_branches(tl, m, 0, w.state, w.weight, outcomes, out);
  }
  return out;
}

// Total probability per distinct outcome sequence, aggregated over ensemble
// members, in first-appearance order.
inline std::vector<std::pair<std::vector<EventOutcome>, double>> aggregate_by_outcomes(
    const std::vector<Branch>& branches) {
  std::vector<std::pair<std::vector<EventOutcome>, double>> classes;
  for (const Branch& b : branches) {
    bool found = false;
    for (auto& [outcomes, p] : classes) {
      if (outcomes.size() != b.outcomes.size()) continue;
      bool same = true;
      for (std::size_t i = 0; i < outcomes.size(); ++i)
        if (!outcomes_equal(outcomes[i], b.outcomes[i])) {
          same = false;
          break;
        }
      if (same) {
        p += b.probability;
        found = true;
        break;
      }
    }
    if (!found) classes.emplace_back(b.outcomes, b.probability);
  }
  return classes;
}

// Branches consistent with the partial record, renormalized.
inline std::vector<Branch> condition(const Timeline& tl, const std::vector<Branch>& branches,
                                     const OutcomeRecord& record) {
  std::vector<std::pair<std::size_t, EventOutcome>> keys;
  for (const auto& [tag, outcome] : record)
    keys.emplace_back(static_cast<std::size_t>(tl.index_of(tag)), outcome);

  std::vector<Branch> kept;
  double total = 0.0;
  for (const Branch& b : branches) {
    bool ok = true;
    for (const auto& [idx, outcome] : keys)
      if (!outcomes_equal(b.outcomes[idx], outcome)) {
        ok = false;
        break;
      }
    if (ok) {
      kept.push_back(b);
      total += b.probability;
    }
  }
  if (total < kTol) throw std::domain_error("condition: record impossible under this timeline");
  for (Branch& b : kept) b.probability /= total;
  return kept;
}

enum class CfStatus { Forced, Possible, Impossible };

inline std::string to_string(CfStatus s) {
  switch (s) {
    case CfStatus::Forced: return "forced";
    case CfStatus::Possible: return "possible";
    case CfStatus::Impossible: return "impossible";
  }
  return "?";
}

struct Classification {
  CfStatus status;
  double probability;  // 1 for Forced, 0 for Impossible, the open interval otherwise
};

namespace detail {

inline Classification classify_normalized(const std::vector<Branch>& conditioned, std::size_t idx,
                                          const EventOutcome& value) {
  double q = 0.0;
  for (const Branch& b : conditioned)
    if (outcomes_equal(b.outcomes[idx], value)) q += b.probability;
  if (q >= 1.0 - kTol) return {CfStatus::Forced, 1.0};
  if (q < kTol) return {CfStatus::Impossible, 0.0};
  return {CfStatus::Possible, q};
}

inline std::vector<EventOutcome> event_outcome_domain(const TimelineEvent& e) {
  std::vector<EventOutcome> d;
  if (std::holds_alternative<Observable>(e.step))
    for (const Outcome& v : outcome_domain()) d.emplace_back(v);
  else
    for (const JointOutcome& v : joint_outcome_domain()) d.emplace_back(v);
  return d;
}

inline int encode(const EventOutcome& o) {
  if (std::holds_alternative<Outcome>(o)) return std::get<Outcome>(o).value() > 0 ? 0 : 1;
  const JointOutcome& j = std::get<JointOutcome>(o);
  return 2 + (j.first.value() > 0 ? 0 : 2) + (j.second.value() > 0 ? 0 : 1);
}

}  // namespace detail

// Conditional status of one outcome of one event, given a partial record.
inline Classification classify(const Timeline& tl, const OutcomeRecord& record,
                               const std::string& query_tag, const EventOutcome& query_value) {
  const std::size_t idx = static_cast<std::size_t>(tl.index_of(query_tag));
  const std::vector<Branch> conditioned = condition(tl, enumerate_branches(tl), record);
  return detail::classify_normalized(conditioned, idx, query_value);
}

// A counterfactual edit of a timeline. Insert places the new event
// immediately before the existing `position` tag; replace swaps the event
// at `position` keeping its tag; remove deletes it.
struct Modification {
  enum class Kind { Insert, Remove, Replace };

  Kind kind;
  std::string position;
  std::optional<TimelineEvent> new_event;
};

inline Timeline apply_modification(const Timeline& tl, const Modification& mod) {
  const std::size_t pos = static_cast<std::size_t>(tl.index_of(mod.position));
  std::vector<TimelineEvent> events = tl.events();
  switch (mod.kind) {
    case Modification::Kind::Insert:
      if (!mod.new_event) throw std::invalid_argument("modification: insert requires an event");
      if (tl.has_tag(mod.new_event->tag))
        throw std::invalid_argument("modification: insert requires a fresh tag");
      events.insert(events.begin() + static_cast<std::ptrdiff_t>(pos), *mod.new_event);
      break;
    case Modification::Kind::Replace:
      if (!mod.new_event) throw std::invalid_argument("modification: replace requires an event");
      if (mod.new_event->tag != mod.position)
        throw std::invalid_argument("modification: replace must keep the existing tag");
      events[pos] = *mod.new_event;
      break;
    case Modification::Kind::Remove:
      events.erase(events.begin() + static_cast<std::ptrdiff_t>(pos));
      break;
  }
  return Timeline(tl.initial(), std::move(events));
}

// The single built-in policy: recorded outcomes of events strictly before
// the modification point (and untouched by it) are held fixed; everything
// at or after the point is re-derived from the modified timeline.
struct MatchingPolicy {
  enum class Mode { HoldPriorOutcomes };
  Mode mode = Mode::HoldPriorOutcomes;
};

struct OutcomeClassification {
  EventOutcome outcome;
  Classification classification;
};

struct EventReport {
  std::string tag;
  std::string observable_name;
  bool held = false;                     // recorded outcome conditioned upon
  std::optional<EventOutcome> recorded;  // base-record outcome, when applicable
  std::vector<OutcomeClassification> outcomes;
};

// Classification of an event's outcomes given one positive-probability
// assignment of outcomes to all earlier events.
struct PrefixConditional {
  std::vector<std::pair<std::string, EventOutcome>> given;
  std::string tag;
  std::vector<OutcomeClassification> outcomes;
};

struct CounterfactualReport {
  std::vector<std::string> modified_event_tags;
  OutcomeRecord held;
  std::vector<EventReport> events;
  std::vector<PrefixConditional> conditionals;
  std::vector<std::string> forced_recorded;      // recorded outcomes that stay forced
  std::vector<std::string> possible_recorded;    // recorded outcomes that are merely possible
  std::vector<std::string> impossible_recorded;  // recorded outcomes excluded outright
  std::string note;
};

// Builds the modified timeline, holds the pre-modification record per the
// policy, and classifies every outcome of every event. A recorded later
// outcome that comes out merely Possible is the machine-checkable sense in
// which "it would have happened anyway" fails.
inline CounterfactualReport counterfactual_report(const Timeline& base,
                                                  const OutcomeRecord& record,
                                                  const std::optional<Modification>& mod,
                                                  const MatchingPolicy& policy = {}) {
  (void)policy;  // one built-in mode
  const Timeline modified = mod ? apply_modification(base, *mod) : base;
  const std::size_t mod_point =
      mod ? static_cast<std::size_t>(base.index_of(mod->position)) : base.events().size();

  // Tags whose base event survives unchanged in the modified timeline.
  std::set<std::string> unchanged;
  for (const TimelineEvent& e : base.events()) unchanged.insert(e.tag);
  if (mod && mod->kind != Modification::Kind::Insert) unchanged.erase(mod->position);

  CounterfactualReport report;
  for (const TimelineEvent& e : modified.events()) report.modified_event_tags.push_back(e.tag);

  for (const auto& [tag, outcome] : record) {
    const std::size_t base_idx = static_cast<std::size_t>(base.index_of(tag));
    if (base_idx < mod_point && unchanged.count(tag)) report.held.emplace(tag, outcome);
  }

  const std::vector<Branch> conditioned =
      condition(modified, enumerate_branches(modified), report.held);

  for (std::size_t k = 0; k < modified.events().size(); ++k) {
    const TimelineEvent& e = modified.events()[k];
    EventReport er;
    er.tag = e.tag;
    er.observable_name = e.observable_name;
    er.held = report.held.count(e.tag) > 0;
    if (unchanged.count(e.tag) && record.count(e.tag)) er.recorded = record.at(e.tag);
    for (const EventOutcome& v : detail::event_outcome_domain(e))
      er.outcomes.push_back({v, detail::classify_normalized(conditioned, k, v)});
    report.events.push_back(std::move(er));
  }

  // Per-branch conditionals: for every later event, its classification given
  // each positive-probability outcome prefix of the earlier events.
  for (std::size_t k = 1; k < modified.events().size(); ++k) {
    std::map<std::vector<int>, std::vector<const Branch*>> by_prefix;
    for (const Branch& b : conditioned) {
      std::vector<int> key;
      for (std::size_t j = 0; j < k; ++j) key.push_back(detail::encode(b.outcomes[j]));
      by_prefix[key].push_back(&b);
    }
    for (const auto& [key, members] : by_prefix) {
      double mass = 0.0;
      for (const Branch* b : members) mass += b->probability;
      if (mass < kTol) continue;
      std::vector<Branch> sub;
      for (const Branch* b : members) {
        Branch c = *b;
        c.probability /= mass;
        sub.push_back(std::move(c));
      }
      PrefixConditional pc;
      for (std::size_t j = 0; j < k; ++j)
        pc.given.emplace_back(modified.events()[j].tag, sub.front().outcomes[j]);
      pc.tag = modified.events()[k].tag;
      for (const EventOutcome& v : detail::event_outcome_domain(modified.events()[k]))
        pc.outcomes.push_back({v, detail::classify_normalized(sub, k, v)});
      report.conditionals.push_back(std::move(pc));
    }
  }

  for (const EventReport& er : report.events) {
    if (!er.recorded) continue;
    Classification c{CfStatus::Possible, 0.0};
    for (const OutcomeClassification& oc : er.outcomes)
      if (outcomes_equal(oc.outcome, *er.recorded)) c = oc.classification;
    switch (c.status) {
      case CfStatus::Forced: report.forced_recorded.push_back(er.tag); break;
      case CfStatus::Possible: report.possible_recorded.push_back(er.tag); break;
      case CfStatus::Impossible: report.impossible_recorded.push_back(er.tag); break;
    }
  }

  report.note =
      "classifications are conditional probabilities under the stated policy; "
      "forced means probability 1, not a value possessed before measurement";
  return report;
}

// The x-then-z preset: x-spin measured at t1 (recorded +1), z-spin at t2
// (recorded +1). No preparation is assumed, so the initial ensemble defaults
// to the maximally mixed {|z+>: 1/2, |z->: 1/2}.
inline std::pair<Timeline, OutcomeRecord> preset_fig3(
    const std::optional<std::vector<WeightedState>>& initial_override = std::nullopt) {
  std::vector<WeightedState> initial =
      initial_override.value_or(std::vector<WeightedState>{{spin_z_plus(), 0.5}, {spin_z_minus(), 0.5}});
  std::vector<TimelineEvent> events{{"t1", "X", MeasureStep(pauli(Axis::X))},
                                    {"t2", "Z", MeasureStep(pauli(Axis::Z))}};
  OutcomeRecord record{{"t1", EventOutcome(Outcome::plus())},
                       {"t2", EventOutcome(Outcome::plus())}};
  return {Timeline(std::move(initial), std::move(events)), std::move(record)};
}

// The two counterfactual edits discussed for the x-then-z record.
inline Modification fig3_insert_modification() {
  return {Modification::Kind::Insert, "t2",
          TimelineEvent{"t", "X", MeasureStep(pauli(Axis::X))}};
}

inline Modification fig3_replace_modification() {
  return {Modification::Kind::Replace, "t1",
          TimelineEvent{"t1", "Z", MeasureStep(pauli(Axis::Z))}};
}

// ---- The stage-2 retrodiction analysed with the same engine -------------
//
// Base timeline: a stage-2 run with a recorded BC1 detection, expressed in
// the (path, spin) basis (the region detection's effects are the Z1Z2
// spectral projectors, so the region event is the observable Z1Z2 with
// +1 <-> BC1). The counterfactual edit inserts pre-combiner path detectors:
// the fine-grained joint (Z1, Z2) measurement.

struct RetrodictionCase {
  std::string input_name;
  double bc1_probability;          // <(I + Z1Z2)/2> on the input
  Classification bc1_after_insertion;
  bool forced_after_insertion;
};

inline Timeline retrodiction_base_timeline(const StateVector& input) {
  return Timeline({{input, 1.0}},
                  {{"outlets", "Z1Z2(+1=BC1,-1=BC2)", MeasureStep(z1z2())}});
}

inline Modification retrodiction_insertion() {
  return {Modification::Kind::Insert, "outlets",
          TimelineEvent{"paths", "(Z1,Z2)", MeasureStep(std::make_pair(z1(), z2()))}};
}

inline RetrodictionCase apparatus_retrodiction(const StateVector& input,
                                               const std::string& name = "") {
  const Timeline modified =
      apply_modification(retrodiction_base_timeline(input), retrodiction_insertion());
  RetrodictionCase c;
  c.input_name = name;
  c.bc1_probability = (1.0 + expectation(input, z1z2())) / 2.0;
  c.bc1_after_insertion = classify(modified, {}, "outlets", EventOutcome(Outcome::plus()));
  c.forced_after_insertion = c.bc1_after_insertion.status == CfStatus::Forced;
  return c;
}

struct RetrodictionReport {
  std::vector<RetrodictionCase> cases;
  std::string note;
};

// The boundary of the retrodiction argument: a BC1 record stays forced
// under inserted path detectors exactly when the input lies entirely within
// one product-value subspace.
inline RetrodictionReport apparatus_retrodiction_demo() {
  RetrodictionReport r;
  const double s = 1.0 / std::sqrt(2.0);
  r.cases.push_back(apparatus_retrodiction(phi_plus(), "phi+"));
  r.cases.push_back(apparatus_retrodiction(
      StateVector(path_spin_labels(), {s, s, 0.0, 0.0}), "(|u,+>+|u,->)/sqrt(2)"));
  r.cases.push_back(apparatus_retrodiction(mode_u_plus(), "u+"));
  r.note =
      "BC1 stays forced under inserted path detectors iff the input has "
      "support in only one Z1Z2 eigenspace; otherwise the insertion can "
      "reroute the particle to BC2";
  return r;
}

}  // namespace ksim
