// Noncontextual hidden-variable model for the four observables Z1, Z2, X1,
// X2: every ontic state assigns each a definite +/-1 value, products of
// commuting observables take the product of the assigned values, and values
// are unchanged by measurement (repeatability). Constraint-filtered
// exhaustive enumeration over the 16 assignments yields the model's
// predictions.

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ksim/measurement.hpp"

namespace ksim {

enum class HvSymbol { Z1, Z2, X1, X2 };

inline int slot_of(HvSymbol s) {
  return (s == HvSymbol::Z1 || s == HvSymbol::X1) ? 1 : 2;
}

inline std::string name_of(HvSymbol s) {
  switch (s) {
    case HvSymbol::Z1: return "Z1";
    case HvSymbol::Z2: return "Z2";
    case HvSymbol::X1: return "X1";
    case HvSymbol::X2: return "X2";
  }
  return "?";
}

// A monomial in the four symbols: a single symbol, or a cross-slot pair.
// Same-slot pairs (e.g. Z1*X1) are rejected: the value rule only covers
// commuting observables.
class ProductSpec {
 public:
  explicit ProductSpec(std::vector<HvSymbol> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw std::invalid_argument("ProductSpec: empty factor list");
    if (factors_.size() > 2) throw std::invalid_argument("ProductSpec: at most two factors");
    if (factors_.size() == 2 && slot_of(factors_[0]) == slot_of(factors_[1]))
      throw std::invalid_argument("ProductSpec: same-slot factors do not commute");
  }

  static ProductSpec single(HvSymbol s) { return ProductSpec(std::vector<HvSymbol>{s}); }
  static ProductSpec pair(HvSymbol a, HvSymbol b) { return ProductSpec(std::vector<HvSymbol>{a, b}); }

  const std::vector<HvSymbol>& factors() const { return factors_; }

  std::string name() const {
    std::string n = name_of(factors_[0]);
    for (std::size_t i = 1; i < factors_.size(); ++i) n += "*" + name_of(factors_[i]);
    return n;
  }

 private:
  std::vector<HvSymbol> factors_;
};

// The ontic state: one definite value per observable.
struct ValueAssignment {
  Outcome z1;
  Outcome z2;
  Outcome x1;
  Outcome x2;

  Outcome value_of(HvSymbol s) const {
    switch (s) {
      case HvSymbol::Z1: return z1;
      case HvSymbol::Z2: return z2;
      case HvSymbol::X1: return x1;
      case HvSymbol::X2: return x2;
    }
    throw std::invalid_argument("ValueAssignment: unknown symbol");
  }

  // Canonical index: bits (z1 z2 x1 x2), z1 most significant; a set bit
  // means -1. Index 0 is the all-plus assignment.
  static ValueAssignment from_index(int i) {
    if (i < 0 || i > 15) throw std::invalid_argument("ValueAssignment: index out of range");
    auto bit = [i](int b) { return Outcome((i >> b) & 1 ? -1 : 1); };
    return {bit(3), bit(2), bit(1), bit(0)};
  }

  int index() const {
    auto bit = [](Outcome o) { return o.value() < 0 ? 1 : 0; };
    return (bit(z1) << 3) | (bit(z2) << 2) | (bit(x1) << 1) | bit(x2);
  }

  bool operator==(const ValueAssignment& o) const { return index() == o.index(); }

  std::string str() const {
    return "(" + z1.str() + "," + z2.str() + "," + x1.str() + "," + x2.str() + ")";
  }
};

struct HvConstraint {
  ProductSpec spec;
  Outcome required;
};

// The functional rule restricted to products: the value of a monomial is
// the product of its factors' assigned values.
inline Outcome val(const ValueAssignment& a, const ProductSpec& spec) {
  Outcome v = a.value_of(spec.factors()[0]);
  for (std::size_t i = 1; i < spec.factors().size(); ++i) v = v * a.value_of(spec.factors()[i]);
  return v;
}

// All assignments satisfying every constraint, in canonical index order.
inline std::vector<ValueAssignment> enumerate_assignments(
    const std::vector<HvConstraint>& constraints) {
  std::vector<ValueAssignment> out;
  for (int i = 0; i < 16; ++i) {
    const ValueAssignment a = ValueAssignment::from_index(i);
    bool ok = true;
    for (const HvConstraint& c : constraints)
      if (val(a, c.spec) != c.required) {
        ok = false;
        break;
      }
    if (ok) out.push_back(a);
  }
  return out;
}

// Constraints fixing the two product values, e.g. val(Z1Z2)=zz, val(X1X2)=xx.
inline std::vector<HvConstraint> product_value_constraints(Outcome zz, Outcome xx) {
  return {{ProductSpec::pair(HvSymbol::Z1, HvSymbol::Z2), zz},
          {ProductSpec::pair(HvSymbol::X1, HvSymbol::X2), xx}};
}

// The model's prediction for a pair of monomials under a preparation: the
// set of value pairs over satisfying assignments. The model fixes only the
// set; uniform weights over satisfying assignments are offered as an
// explicit extra modeling choice.
struct PairPrediction {
  std::vector<JointOutcome> outcomes;   // canonical order, no duplicates
  std::vector<double> weights;          // parallel to outcomes when weighted
  bool weighted = false;
  std::size_t assignment_count = 0;

  bool contains(const JointOutcome& o) const {
    for (const JointOutcome& x : outcomes)
      if (x == o) return true;
    return false;
  }
};

inline PairPrediction predict_pair(const std::vector<HvConstraint>& constraints,
                                   const ProductSpec& first, const ProductSpec& second,
                                   bool uniform_weights = false) {
  const std::vector<ValueAssignment> sats = enumerate_assignments(constraints);
  if (sats.empty()) throw std::invalid_argument("predict_pair: unsatisfiable preparation");

  PairPrediction pred;
  pred.assignment_count = sats.size();
  pred.weighted = uniform_weights;
  for (const JointOutcome& jo : joint_outcome_domain()) {
    std::size_t hits = 0;
    for (const ValueAssignment& a : sats)
      if (val(a, first) == jo.first && val(a, second) == jo.second) ++hits;
    if (hits > 0) {
      pred.outcomes.push_back(jo);
      if (uniform_weights)
        pred.weights.push_back(static_cast<double>(hits) / static_cast<double>(sats.size()));
    }
  }
  return pred;
}

// Noncontextual sequential measurement: the assignment never changes, so
// every measurement of a monomial returns its assigned value.
inline std::vector<Outcome> hv_sequential(const ValueAssignment& a,
                                          const std::vector<ProductSpec>& specs) {
  std::vector<Outcome> out;
  out.reserve(specs.size());
  for (const ProductSpec& s : specs) out.push_back(val(a, s));
  return out;
}

// Side-by-side outcome sets for a joint (Z1X2, X1Z2) measurement on the
// (+1,+1) product-value preparation: quantum mechanics vs the hidden-variable
// model. The two sets are disjoint; that is the observable contrast.
struct QmNchvContrast {
  ProbList<JointOutcome> qm;                 // probabilities from joint_measure on phi_plus
  std::vector<JointOutcome> qm_outcomes;     // support
  PairPrediction nchv;                       // from predict_pair
  bool disjoint = false;
  std::vector<JointOutcome> union_outcomes;  // canonical order
};

inline QmNchvContrast qm_nchv_contrast() {
  QmNchvContrast c;
  const JointDistribution qm = joint_measure(phi_plus(), z1x2(), x1z2());
  for (const auto& e : qm.entries()) {
    c.qm.emplace_back(e.outcome, e.probability);
    c.qm_outcomes.push_back(e.outcome);
  }
  c.nchv = predict_pair(product_value_constraints(Outcome::plus(), Outcome::plus()),
                        ProductSpec::pair(HvSymbol::Z1, HvSymbol::X2),
                        ProductSpec::pair(HvSymbol::X1, HvSymbol::Z2));
  c.disjoint = true;
  for (const JointOutcome& o : c.qm_outcomes)
    if (c.nchv.contains(o)) c.disjoint = false;
  for (const JointOutcome& jo : joint_outcome_domain()) {
    bool in_qm = false;
    for (const JointOutcome& o : c.qm_outcomes)
      if (o == jo) in_qm = true;
    if (in_qm || c.nchv.contains(jo)) c.union_outcomes.push_back(jo);
  }
  return c;
}

}  // namespace ksim
