#include <catch2/catch.hpp>

#include <array>
#include <set>

#include "ksim/nchv.hpp"

using namespace ksim;

namespace {

// Independent enumeration oracle over plain integers: every (z1,z2,x1,x2)
// in {+1,-1}^4 passing the given predicate.
template <typename Pred>
std::vector<std::array<int, 4>> brute_force(Pred pred) {
  std::vector<std::array<int, 4>> out;
  for (int z1v : {1, -1})
    for (int z2v : {1, -1})
      for (int x1v : {1, -1})
        for (int x2v : {1, -1})
          if (pred(z1v, z2v, x1v, x2v)) out.push_back({z1v, z2v, x1v, x2v});
  return out;
}

ProductSpec zz() { return ProductSpec::pair(HvSymbol::Z1, HvSymbol::Z2); }
ProductSpec xx() { return ProductSpec::pair(HvSymbol::X1, HvSymbol::X2); }
ProductSpec zx() { return ProductSpec::pair(HvSymbol::Z1, HvSymbol::X2); }
ProductSpec xz() { return ProductSpec::pair(HvSymbol::X1, HvSymbol::Z2); }

}  // namespace

TEST_CASE("val multiplies the assigned component values") {
  const ValueAssignment a{Outcome::plus(), Outcome::plus(), Outcome::minus(), Outcome::minus()};
  CHECK(val(a, zx()) == Outcome::minus());  // z1 * x2 = (+1)(-1)

  for (int i = 0; i < 16; ++i) {
    const ValueAssignment v = ValueAssignment::from_index(i);
    if (v.z1 == v.z2) CHECK(val(v, zz()) == Outcome::plus());
  }

  const ValueAssignment all_plus = ValueAssignment::from_index(0);
  CHECK(val(all_plus, xz()) == Outcome::plus());
}

TEST_CASE("product specs reject same-slot factors") {
  CHECK_THROWS_AS(ProductSpec::pair(HvSymbol::Z1, HvSymbol::X1), std::invalid_argument);
  CHECK_THROWS_AS(ProductSpec::pair(HvSymbol::Z2, HvSymbol::X2), std::invalid_argument);
  CHECK_THROWS_AS(ProductSpec::pair(HvSymbol::Z1, HvSymbol::Z1), std::invalid_argument);
  CHECK_THROWS_AS(ProductSpec(std::vector<HvSymbol>{}), std::invalid_argument);
  CHECK(ProductSpec::pair(HvSymbol::Z1, HvSymbol::X2).name() == "Z1*X2");
}

TEST_CASE("enumeration matches the brute-force oracle") {
  // Oracle: both products equal +1.
  const auto expected = brute_force(
      [](int z1v, int z2v, int x1v, int x2v) { return z1v * z2v == 1 && x1v * x2v == 1; });
  REQUIRE(expected.size() == 4);

  const auto sats = enumerate_assignments(product_value_constraints(Outcome::plus(), Outcome::plus()));
  REQUIRE(sats.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(sats[i].z1.value() == expected[i][0]);
    CHECK(sats[i].z2.value() == expected[i][1]);
    CHECK(sats[i].x1.value() == expected[i][2]);
    CHECK(sats[i].x2.value() == expected[i][3]);
  }

  // Canonical order is ascending index, and a rerun is identical.
  const auto again = enumerate_assignments(product_value_constraints(Outcome::plus(), Outcome::plus()));
  for (std::size_t i = 1; i < sats.size(); ++i) CHECK(sats[i - 1].index() < sats[i].index());
  for (std::size_t i = 0; i < sats.size(); ++i) CHECK(sats[i] == again[i]);

  CHECK(enumerate_assignments({}).size() == 16);

  const std::vector<HvConstraint> contradiction{
      {ProductSpec::single(HvSymbol::Z1), Outcome::plus()},
      {ProductSpec::single(HvSymbol::Z1), Outcome::minus()}};
  CHECK(enumerate_assignments(contradiction).empty());
}

TEST_CASE("predict_pair reproduces the constrained value sets") {
  // (+1,+1) preparation: the pair (Z1X2, X1Z2) can only be equal-signed.
  const PairPrediction same = predict_pair(
      product_value_constraints(Outcome::plus(), Outcome::plus()), zx(), xz());
  REQUIRE(same.outcomes.size() == 2);
  CHECK(same.contains({Outcome::plus(), Outcome::plus()}));
  CHECK(same.contains({Outcome::minus(), Outcome::minus()}));

  // Oracle for the (-1,-1) preparation: collect the distinct value pairs.
  const auto sats = brute_force(
      [](int z1v, int z2v, int x1v, int x2v) { return z1v * z2v == -1 && x1v * x2v == -1; });
  std::set<std::pair<int, int>> oracle_pairs;
  for (const auto& a : sats) oracle_pairs.insert({a[0] * a[3], a[2] * a[1]});
  REQUIRE(oracle_pairs.size() == 2);
  CHECK(oracle_pairs.count({1, 1}) == 1);
  CHECK(oracle_pairs.count({-1, -1}) == 1);

  const PairPrediction opposite = predict_pair(
      product_value_constraints(Outcome::minus(), Outcome::minus()), zx(), xz());
  REQUIRE(opposite.outcomes.size() == oracle_pairs.size());
  for (const JointOutcome& o : opposite.outcomes)
    CHECK(oracle_pairs.count({o.first.value(), o.second.value()}) == 1);

  // A value agrees with itself.
  const PairPrediction self = predict_pair({}, ProductSpec::single(HvSymbol::Z1),
                                           ProductSpec::single(HvSymbol::Z1));
  REQUIRE(self.outcomes.size() == 2);
  CHECK(self.contains({Outcome::plus(), Outcome::plus()}));
  CHECK(self.contains({Outcome::minus(), Outcome::minus()}));

  const std::vector<HvConstraint> contradiction{
      {ProductSpec::single(HvSymbol::Z1), Outcome::plus()},
      {ProductSpec::single(HvSymbol::Z1), Outcome::minus()}};
  CHECK_THROWS_WITH(predict_pair(contradiction, zx(), xz()),
                    Catch::Contains("unsatisfiable preparation"));
}

TEST_CASE("predict_pair uniform weights are an explicit model choice") {
  const PairPrediction unweighted = predict_pair(
      product_value_constraints(Outcome::plus(), Outcome::plus()), zx(), xz());
  CHECK_FALSE(unweighted.weighted);
  CHECK(unweighted.weights.empty());

  const PairPrediction weighted = predict_pair(
      product_value_constraints(Outcome::plus(), Outcome::plus()), zx(), xz(), true);
  REQUIRE(weighted.weighted);
  REQUIRE(weighted.weights.size() == 2);
  double sum = 0.0;
  for (double w : weighted.weights) {
    CHECK(w == Approx(0.5).margin(kTol));
    sum += w;
  }
  CHECK(sum == Approx(1.0).margin(kTol));
}

TEST_CASE("hv_sequential never changes the assignment") {
  for (int i = 0; i < 16; ++i) {
    const ValueAssignment a = ValueAssignment::from_index(i);
    const auto twice = hv_sequential(a, {zz(), zz()});
    CHECK(twice[0] == twice[1]);
  }

  for (const ValueAssignment& a :
       enumerate_assignments(product_value_constraints(Outcome::plus(), Outcome::plus()))) {
    const auto rec = hv_sequential(a, {zx(), xz()});
    CHECK(rec[0] == rec[1]);  // equal-signed under the (+1,+1) preparation
  }

  const auto rec = hv_sequential(ValueAssignment::from_index(0), {zz(), xx(), zx(), xz()});
  for (const Outcome& o : rec) CHECK(o == Outcome::plus());

  // Determinism: repeated runs give identical records.
  const ValueAssignment a = ValueAssignment::from_index(6);
  CHECK(hv_sequential(a, {zx(), xz()}) == hv_sequential(a, {zx(), xz()}));
}

TEST_CASE("multiplicativity holds exhaustively") {
  const HvSymbol slot1[] = {HvSymbol::Z1, HvSymbol::X1};
  const HvSymbol slot2[] = {HvSymbol::Z2, HvSymbol::X2};
  for (int i = 0; i < 16; ++i) {
    const ValueAssignment a = ValueAssignment::from_index(i);
    for (HvSymbol s : slot1)
      for (HvSymbol t : slot2) {
        CHECK(val(a, ProductSpec::pair(s, t)) ==
              val(a, ProductSpec::single(s)) * val(a, ProductSpec::single(t)));
        CHECK(val(a, ProductSpec::pair(t, s)) ==
              val(a, ProductSpec::single(t)) * val(a, ProductSpec::single(s)));
      }
  }
}

TEST_CASE("parity identity forces equal-signed pairs") {
  for (int i = 0; i < 16; ++i) {
    const ValueAssignment a = ValueAssignment::from_index(i);
    CHECK(val(a, zx()) * val(a, xz()) == val(a, zz()) * val(a, xx()));
  }
}

TEST_CASE("quantum and hidden-variable outcome sets are disjoint") {
  const QmNchvContrast c = qm_nchv_contrast();
  CHECK(c.disjoint);
  CHECK(c.qm_outcomes.size() == 2);
  CHECK(c.nchv.outcomes.size() == 2);
  CHECK(c.union_outcomes.size() == 4);
  for (const auto& [o, p] : c.qm) CHECK(p == Approx(0.5).margin(kTol));
  CHECK(c.nchv.contains({Outcome::plus(), Outcome::plus()}));
  CHECK(c.nchv.contains({Outcome::minus(), Outcome::minus()}));
}
