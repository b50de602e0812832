// Projective measurement semantics: analytic outcome distributions with
// Lueders collapse, joint measurement of commuting pairs, seeded sampling,
// and sequential pipelines.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ksim/hilbert.hpp"
#include "ksim/rng.hpp"

namespace ksim {

// A definite +/-1 measurement value.
class Outcome {
 public:
  explicit Outcome(int v) : v_(v) {
    if (v != 1 && v != -1) throw std::invalid_argument("Outcome: value must be +1 or -1");
  }

  static Outcome plus() { return Outcome(1); }
  static Outcome minus() { return Outcome(-1); }

  int value() const { return v_; }
  Outcome operator*(Outcome o) const { return Outcome(v_ * o.v_); }
  bool operator==(const Outcome& o) const { return v_ == o.v_; }
  bool operator!=(const Outcome& o) const { return v_ != o.v_; }
  bool operator<(const Outcome& o) const { return v_ < o.v_; }

  std::string str() const { return v_ > 0 ? "+1" : "-1"; }

 private:
  int v_;
};

struct JointOutcome {
  Outcome first;
  Outcome second;

  bool operator==(const JointOutcome& o) const { return first == o.first && second == o.second; }
  bool operator!=(const JointOutcome& o) const { return !(*this == o); }
  bool operator<(const JointOutcome& o) const {
    return first < o.first || (first == o.first && second < o.second);
  }

  Outcome product() const { return first * second; }
  std::string str() const { return "(" + first.str() + "," + second.str() + ")"; }
};

// Outcome of a single timeline/pipeline step: one value, or a commuting pair's.
using EventOutcome = std::variant<Outcome, JointOutcome>;

inline std::string to_string(const EventOutcome& o) {
  return std::holds_alternative<Outcome>(o) ? std::get<Outcome>(o).str()
                                            : std::get<JointOutcome>(o).str();
}

inline bool outcomes_equal(const EventOutcome& a, const EventOutcome& b) {
  if (a.index() != b.index()) return false;
  if (std::holds_alternative<Outcome>(a)) return std::get<Outcome>(a) == std::get<Outcome>(b);
  return std::get<JointOutcome>(a) == std::get<JointOutcome>(b);
}

// The four +/-1 values in canonical display order.
inline const std::vector<Outcome>& outcome_domain() {
  static const std::vector<Outcome> d{Outcome::plus(), Outcome::minus()};
  return d;
}

inline const std::vector<JointOutcome>& joint_outcome_domain() {
  static const std::vector<JointOutcome> d{
      {Outcome::plus(), Outcome::plus()},
      {Outcome::plus(), Outcome::minus()},
      {Outcome::minus(), Outcome::plus()},
      {Outcome::minus(), Outcome::minus()}};
  return d;
}

template <typename O>
struct DistEntry {
  O outcome;
  double probability;
  StateVector post_state;
};

// Normalized outcome distribution with Lueders post-states. Entries below
// probability 1e-12 are pruned; the remaining probabilities sum to 1.
template <typename O>
class Distribution {
 public:
  explicit Distribution(std::vector<DistEntry<O>> entries) : entries_(std::move(entries)) {
    double sum = 0.0;
    for (const auto& e : entries_) {
      if (e.probability < kTol)
        throw std::logic_error("Distribution: sub-tolerance entry should have been pruned");
      sum += e.probability;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::logic_error("Distribution: probabilities do not sum to 1");
  }

  const std::vector<DistEntry<O>>& entries() const { return entries_; }

  double probability_of(const O& o) const {
    for (const auto& e : entries_)
      if (e.outcome == o) return e.probability;
    return 0.0;
  }

  const StateVector* post_state_of(const O& o) const {
    for (const auto& e : entries_)
      if (e.outcome == o) return &e.post_state;
    return nullptr;
  }

 private:
  std::vector<DistEntry<O>> entries_;
};

using OutcomeDistribution = Distribution<Outcome>;
using JointDistribution = Distribution<JointOutcome>;

// Probability list without post-states (marginals, derived distributions).
template <typename O>
using ProbList = std::vector<std::pair<O, double>>;

namespace detail {

inline std::optional<std::pair<double, StateVector>> project(const StateVector& s,
                                                             const Matrix& projector) {
  std::vector<cplx> v = projector.apply(s.amplitudes());
  const double n = norm2(v);
  const double p = n * n;
  if (p < kTol) return std::nullopt;
  for (cplx& a : v) a /= n;
  return std::make_pair(p, StateVector(s.basis_labels(), std::move(v)));
}

}  // namespace detail

// Projective measurement of a +/-1-valued observable (Lueders rule).
inline OutcomeDistribution measure(const StateVector& s, const Observable& o) {
  if (s.dim() != o.dim()) throw std::invalid_argument("measure: dimension mismatch");
  if (!o.is_involution())
    throw std::invalid_argument("measure: observable does not square to the identity");
  const ProjectorPair pp = spectral_projectors(o);
  std::vector<DistEntry<Outcome>> entries;
  if (auto r = detail::project(s, pp.plus))
    entries.push_back({Outcome::plus(), r->first, std::move(r->second)});
  if (auto r = detail::project(s, pp.minus))
    entries.push_back({Outcome::minus(), r->first, std::move(r->second)});
  return OutcomeDistribution(std::move(entries));
}

// Joint measurement of a commuting pair via products of their spectral
// projectors. Distinct from measuring the two observables one after the
// other: this is one act with four outcomes.
inline JointDistribution joint_measure(const StateVector& s, const Observable& a,
                                       const Observable& b) {
  if (s.dim() != a.dim() || a.dim() != b.dim())
    throw std::invalid_argument("joint_measure: dimension mismatch");
  if (commutator(a, b).frobenius_norm() > kTol)
    throw std::invalid_argument("joint_measure: observables do not commute");
  if (!a.is_involution() || !b.is_involution())
    throw std::invalid_argument("joint_measure: observable does not square to the identity");
  const ProjectorPair pa = spectral_projectors(a);
  const ProjectorPair pb = spectral_projectors(b);
  std::vector<DistEntry<JointOutcome>> entries;
  for (const JointOutcome& jo : joint_outcome_domain()) {
    const Matrix& first = jo.first == Outcome::plus() ? pa.plus : pa.minus;
    const Matrix& second = jo.second == Outcome::plus() ? pb.plus : pb.minus;
    if (auto r = detail::project(s, first * second))
      entries.push_back({jo, r->first, std::move(r->second)});
  }
  return JointDistribution(std::move(entries));
}

// Inverse-CDF draw on the distribution's canonical entry order; consumes
// exactly one stream value.
template <typename O>
std::pair<O, StateVector> sample(const Distribution<O>& dist, RngStream& rng) {
  const double u = rng.next_double();
  double cum = 0.0;
  for (const auto& e : dist.entries()) {
    cum += e.probability;
    if (u < cum) return {e.outcome, e.post_state};
  }
  const auto& last = dist.entries().back();
  return {last.outcome, last.post_state};
}

// One pipeline step: a single observable or a commuting pair.
using MeasureStep = std::variant<Observable, std::pair<Observable, Observable>>;

struct SequentialRecord {
  std::vector<EventOutcome> outcomes;
  StateVector final_state;
};

// Measures the steps in order, collapsing between them.
inline SequentialRecord sequential_measure(const StateVector& s,
                                           const std::vector<MeasureStep>& steps, RngStream& rng) {
  StateVector current = s;
  std::vector<EventOutcome> outcomes;
  outcomes.reserve(steps.size());
  for (const MeasureStep& step : steps) {
    if (std::holds_alternative<Observable>(step)) {
      auto [o, post] = sample(measure(current, std::get<Observable>(step)), rng);
      outcomes.emplace_back(o);
      current = std::move(post);
    } else {
      const auto& [a, b] = std::get<std::pair<Observable, Observable>>(step);
      auto [o, post] = sample(joint_measure(current, a, b), rng);
      outcomes.emplace_back(o);
      current = std::move(post);
    }
  }
  return {std::move(outcomes), std::move(current)};
}

// Distribution-level functional consistency for a commuting pair: the value
// of the product observable equals the product of the jointly measured
// values, outcome by outcome.
struct ConsistencyReport {
  ProbList<Outcome> product_of_joint_values;
  ProbList<Outcome> product_observable_direct;
  double max_abs_diff = 0.0;
  bool consistent = false;
};

inline ConsistencyReport functional_consistency_check(const StateVector& s, const Observable& a,
                                                      const Observable& b) {
  const JointDistribution joint = joint_measure(s, a, b);
  const OutcomeDistribution direct = measure(s, product(a, b));

  ConsistencyReport report;
  for (const Outcome& v : outcome_domain()) {
    double p = 0.0;
    for (const auto& e : joint.entries())
      if (e.outcome.product() == v) p += e.probability;
    report.product_of_joint_values.emplace_back(v, p);
    report.product_observable_direct.emplace_back(v, direct.probability_of(v));
    report.max_abs_diff = std::max(report.max_abs_diff, std::abs(p - direct.probability_of(v)));
  }
  report.consistent = report.max_abs_diff <= kTol;
  return report;
}

}  // namespace ksim
