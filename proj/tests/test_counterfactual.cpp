#include <catch2/catch.hpp>

#include <random>

#include "ksim/counterfactual.hpp"
#include "oracles.hpp"

using namespace ksim;

namespace {

double total_probability(const std::vector<Branch>& branches) {
  double t = 0.0;
  for (const Branch& b : branches) t += b.probability;
  return t;
}

Timeline xz_timeline() {
  return Timeline({{spin_z_plus(), 0.5}, {spin_z_minus(), 0.5}},
                  {{"t1", "X", MeasureStep(pauli(Axis::X))},
                   {"t2", "Z", MeasureStep(pauli(Axis::Z))}});
}

EventOutcome plus() { return EventOutcome(Outcome::plus()); }
EventOutcome minus() { return EventOutcome(Outcome::minus()); }

}  // namespace

TEST_CASE("branch enumeration on pure and mixed initial states") {
  const Timeline certain({{spin_x_plus(), 1.0}}, {{"t1", "X", MeasureStep(pauli(Axis::X))}});
  const auto branches = enumerate_branches(certain);
  REQUIRE(branches.size() == 1);
  CHECK(branches[0].probability == Approx(1.0).margin(kTol));
  CHECK(outcomes_equal(branches[0].outcomes[0], plus()));

  // Maximally mixed then x and z: four outcome classes of 1/4 each
  // (1/2 * 1/2 * 1/2 summed over the two ensemble members per class).
  const auto mixed = enumerate_branches(xz_timeline());
  CHECK(total_probability(mixed) == Approx(1.0).margin(kTol));
  const auto classes = aggregate_by_outcomes(mixed);
  REQUIRE(classes.size() == 4);
  for (const auto& [outcomes, p] : classes) CHECK(p == Approx(0.25).margin(kTol));

  // Repeated x measurement: only matching middle outcomes survive.
  const Timeline repeat({{spin_x_plus(), 1.0}},
                        {{"t1", "X", MeasureStep(pauli(Axis::X))},
                         {"t", "X", MeasureStep(pauli(Axis::X))},
                         {"t2", "Z", MeasureStep(pauli(Axis::Z))}});
  for (const Branch& b : enumerate_branches(repeat))
    CHECK(outcomes_equal(b.outcomes[0], b.outcomes[1]));
}

TEST_CASE("conditioning filters and renormalizes") {
  const Timeline tl = xz_timeline();
  const auto branches = enumerate_branches(tl);

  const auto given_x = condition(tl, branches, {{"t1", plus()}});
  CHECK(total_probability(given_x) == Approx(1.0).margin(kTol));
  double p_z_plus = 0.0;
  for (const Branch& b : given_x)
    if (outcomes_equal(b.outcomes[1], plus())) p_z_plus += b.probability;
  CHECK(p_z_plus == Approx(0.5).margin(kTol));

  // Conditioning on a certainty changes nothing.
  const Timeline certain({{spin_x_plus(), 1.0}}, {{"t1", "X", MeasureStep(pauli(Axis::X))}});
  const auto unchanged = condition(certain, enumerate_branches(certain), {{"t1", plus()}});
  REQUIRE(unchanged.size() == 1);
  CHECK(unchanged[0].probability == Approx(1.0).margin(kTol));

  CHECK_THROWS_AS(condition(certain, enumerate_branches(certain), {{"t1", minus()}}),
                  std::domain_error);
  CHECK_THROWS_AS(condition(certain, enumerate_branches(certain), {{"nope", plus()}}),
                  std::invalid_argument);
}

TEST_CASE("classification statuses and probabilities") {
  const auto [base, record] = preset_fig3();

  const Timeline inserted = apply_modification(base, fig3_insert_modification());
  const OutcomeRecord held{{"t1", plus()}};
  const Classification forced = classify(inserted, held, "t", plus());
  CHECK(forced.status == CfStatus::Forced);
  CHECK(forced.probability == 1.0);

  const Classification possible = classify(inserted, held, "t2", plus());
  CHECK(possible.status == CfStatus::Possible);
  CHECK(possible.probability == Approx(0.5).margin(kTol));

  const Classification impossible = classify(inserted, held, "t", minus());
  CHECK(impossible.status == CfStatus::Impossible);
  CHECK(impossible.probability == 0.0);

  // Replacement: either z value at t1 is possible with probability 1/2.
  const Timeline replaced = apply_modification(base, fig3_replace_modification());
  const Classification z_minus = classify(replaced, {}, "t1", minus());
  CHECK(z_minus.status == CfStatus::Possible);
  CHECK(z_minus.probability == Approx(0.5).margin(kTol));
  (void)record;
}

TEST_CASE("repeating the preceding measurement is forced at the history level") {
  std::mt19937_64 gen(61);
  const std::vector<Observable> obs{z1(), x1(), z1z2(), x1x2(), z1x2(), x1z2()};
  for (int i = 0; i < 10; ++i) {
    const StateVector s = oracle::random_state(path_spin_labels(), gen);
    for (const Observable& o : obs) {
      const Timeline tl({{s, 1.0}},
                        {{"a", "O", MeasureStep(o)}, {"b", "O", MeasureStep(o)}});
      for (const Outcome& v : outcome_domain()) {
        const double p = measure(s, o).probability_of(v);
        if (p < kTol) continue;
        const Classification c = classify(tl, {{"a", EventOutcome(v)}}, "b", EventOutcome(v));
        CHECK(c.status == CfStatus::Forced);
      }
    }
  }
}

TEST_CASE("modification validation") {
  const auto [base, record] = preset_fig3();
  (void)record;

  CHECK_THROWS_AS(apply_modification(base, {Modification::Kind::Insert, "t1",
                                            TimelineEvent{"t1", "X", MeasureStep(pauli(Axis::X))}}),
                  std::invalid_argument);  // stale tag
  CHECK_THROWS_AS(apply_modification(base, {Modification::Kind::Insert, "t1", std::nullopt}),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_modification(base, {Modification::Kind::Replace, "t1",
                                            TimelineEvent{"tX", "Z", MeasureStep(pauli(Axis::Z))}}),
                  std::invalid_argument);  // must keep the tag
  CHECK_THROWS_AS(apply_modification(base, {Modification::Kind::Remove, "zz", std::nullopt}),
                  std::invalid_argument);  // unknown position

  const Timeline removed = apply_modification(base, {Modification::Kind::Remove, "t1", std::nullopt});
  CHECK(removed.events().size() == 1);
  CHECK(removed.events()[0].tag == "t2");

  const Timeline inserted = apply_modification(base, fig3_insert_modification());
  REQUIRE(inserted.events().size() == 3);
  CHECK(inserted.events()[1].tag == "t");  // before t2
}

TEST_CASE("counterfactual report for the insert edit") {
  const auto [base, record] = preset_fig3();
  const CounterfactualReport report =
      counterfactual_report(base, record, fig3_insert_modification());

  REQUIRE(report.held.size() == 1);
  CHECK(outcomes_equal(report.held.at("t1"), plus()));

  REQUIRE(report.events.size() == 3);
  CHECK(report.events[0].held);
  CHECK(report.events[1].tag == "t");
  CHECK_FALSE(report.events[1].recorded.has_value());
  for (const auto& oc : report.events[1].outcomes)
    if (outcomes_equal(oc.outcome, plus())) CHECK(oc.classification.status == CfStatus::Forced);
  REQUIRE(report.events[2].recorded.has_value());
  for (const auto& oc : report.events[2].outcomes)
    CHECK(oc.classification.status == CfStatus::Possible);

  CHECK(report.forced_recorded == std::vector<std::string>{"t1"});
  CHECK(report.possible_recorded == std::vector<std::string>{"t2"});
  CHECK(report.impossible_recorded.empty());
}

TEST_CASE("counterfactual report for the replace edit") {
  const auto [base, record] = preset_fig3();
  const CounterfactualReport report =
      counterfactual_report(base, record, fig3_replace_modification());

  CHECK(report.held.empty());
  // t2 is forced equal to t1's counterfactual value within each branch.
  int matched = 0;
  for (const PrefixConditional& pc : report.conditionals) {
    if (pc.tag != "t2" || pc.given.size() != 1) continue;
    for (const auto& oc : pc.outcomes)
      if (outcomes_equal(oc.outcome, pc.given[0].second)) {
        CHECK(oc.classification.status == CfStatus::Forced);
        ++matched;
      }
  }
  CHECK(matched == 2);
  CHECK(report.possible_recorded == std::vector<std::string>{"t2"});
  CHECK(report.forced_recorded.empty());
}

TEST_CASE("empty modification conditions every record on itself") {
  const auto [base, record] = preset_fig3();
  const CounterfactualReport report = counterfactual_report(base, record, std::nullopt);
  CHECK(report.held.size() == 2);
  CHECK(report.forced_recorded.size() == 2);
  CHECK(report.possible_recorded.empty());
}

TEST_CASE("the xz preset enumerates four classes and conditions to one") {
  const auto [base, record] = preset_fig3();
  const auto branches = enumerate_branches(base);
  CHECK(aggregate_by_outcomes(branches).size() == 4);

  const auto conditioned = condition(base, branches, record);
  const auto classes = aggregate_by_outcomes(conditioned);
  REQUIRE(classes.size() == 1);
  CHECK(classes[0].second == Approx(1.0).margin(kTol));

  const Classification c = classify(base, {{"t1", plus()}}, "t2", plus());
  CHECK(c.status == CfStatus::Possible);
  CHECK(c.probability == Approx(0.5).margin(kTol));
}

TEST_CASE("retrodiction boundary matches the eigenspace weight") {
  const RetrodictionCase phi = apparatus_retrodiction(phi_plus(), "phi+");
  CHECK(phi.forced_after_insertion);
  CHECK(phi.bc1_probability == Approx(1.0).margin(kTol));

  const double r = 1.0 / std::sqrt(2.0);
  const RetrodictionCase split =
      apparatus_retrodiction(StateVector(path_spin_labels(), {r, r, 0.0, 0.0}), "u+/u-");
  CHECK_FALSE(split.forced_after_insertion);
  CHECK(split.bc1_after_insertion.status == CfStatus::Possible);
  CHECK(split.bc1_after_insertion.probability == Approx(0.5).margin(kTol));

  const RetrodictionCase basis = apparatus_retrodiction(mode_u_plus(), "u+");
  CHECK(basis.forced_after_insertion);

  // An input with no BC1 weight: the record never occurs; not Possible.
  const RetrodictionCase never = apparatus_retrodiction(singlet_state(), "singlet");
  CHECK(never.bc1_after_insertion.status == CfStatus::Impossible);

  std::mt19937_64 gen(67);
  for (int i = 0; i < 50; ++i) {
    const StateVector s = oracle::random_state(path_spin_labels(), gen);
    const RetrodictionCase c = apparatus_retrodiction(s);
    const double p = oracle::prob_of(
        oracle::to_eigen(s), oracle::eig_projectors(oracle::to_eigen(z1z2().matrix())).plus);
    CHECK(c.bc1_probability == Approx(p).margin(kTol));
    const bool deterministic_weight = p <= kTol || p >= 1.0 - kTol;
    CHECK(c.forced_after_insertion == (p >= 1.0 - kTol));
    CHECK((c.bc1_after_insertion.status == CfStatus::Possible) == !deterministic_weight);
  }
}

TEST_CASE("retrodiction demo covers the three named inputs") {
  const RetrodictionReport report = apparatus_retrodiction_demo();
  REQUIRE(report.cases.size() == 3);
  CHECK(report.cases[0].forced_after_insertion);
  CHECK_FALSE(report.cases[1].forced_after_insertion);
  CHECK(report.cases[1].bc1_after_insertion.probability == Approx(0.5).margin(kTol));
  CHECK(report.cases[2].forced_after_insertion);
  CHECK_FALSE(report.note.empty());
}

TEST_CASE("timeline validation") {
  CHECK_THROWS_AS(Timeline({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(Timeline({{spin_z_plus(), 0.7}}, {}), std::invalid_argument);
  CHECK_THROWS_AS(Timeline({{spin_z_plus(), 0.5}, {phi_plus(), 0.5}}, {}), std::invalid_argument);
  CHECK_THROWS_AS(Timeline({{spin_z_plus(), 1.0}},
                           {{"a", "X", MeasureStep(pauli(Axis::X))},
                            {"a", "Z", MeasureStep(pauli(Axis::Z))}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Timeline({{spin_z_plus(), 1.0}}, {{"a", "Z1", MeasureStep(z1())}}),
                  std::invalid_argument);
}
