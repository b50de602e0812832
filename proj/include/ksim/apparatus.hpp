// Mode-level model of the two measurement stages on the (path, spin) space.
//
// Stage 1: a Stern-Gerlach analyser per path with a detector in each outlet;
// detection reveals path and spin together (the fine-grained four-mode
// measurement).
//
// Stage 2: the (u,+) and (d,-) outlets feed one beam combiner and the (u,-)
// and (d,+) outlets the other, erasing which-mode information within each
// pair; detectors sit after the combiner outlets. A BC1 detection reports
// product value +1, a BC2 detection -1. The stage's effect operators are
// exactly the spectral projectors of Z1Z2, which is the formal sense in
// which the stage measures the product without measuring the factors.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ksim/measurement.hpp"

namespace ksim {

inline const std::vector<std::string>& stage1_regions() {
  static const std::vector<std::string> r{"D_u+", "D_u-", "D_d+", "D_d-"};
  return r;
}

inline const std::vector<std::string>& stage2_regions() {
  static const std::vector<std::string> r{"BC1", "BC2"};
  return r;
}

// A named detector covering a set of modes. Stage-1 detectors sit one per
// (path, spin) outlet; each stage-2 detector covers both outlet ports of
// one beam combiner. Within a stage the regions partition the mode set.
struct DetectorRegion {
  std::string name;
  std::vector<std::string> modes;
};

inline const std::vector<DetectorRegion>& stage1_detector_regions() {
  static const std::vector<DetectorRegion> r{{"D_u+", {"u,+"}},
                                             {"D_u-", {"u,-"}},
                                             {"D_d+", {"d,+"}},
                                             {"D_d-", {"d,-"}}};
  return r;
}

inline const std::vector<DetectorRegion>& stage2_detector_regions() {
  static const std::vector<DetectorRegion> r{{"BC1", {"BC1a", "BC1b"}},
                                             {"BC2", {"BC2a", "BC2b"}}};
  return r;
}

// The combiner evolution fixes two rows:
//   (|u,+> + |d,->)/sqrt(2) -> |BC1a>,   (|u,-> + |d,+>)/sqrt(2) -> |BC2a>.
// Each combiner couples only its own two input modes, so a unitary
// completion is forced up to one phase per remaining row; the default
// completion is the all-real one:
//   (|u,+> - |d,->)/sqrt(2) -> |BC1b>,   (|u,-> - |d,+>)/sqrt(2) -> |BC2b>.
inline UnitaryMap combiner_unitary_with_phases(double bc1a, double bc1b, double bc2a,
                                               double bc2b) {
  const double r = 1.0 / std::sqrt(2.0);
  const cplx p1a = std::polar(r, bc1a);
  const cplx p1b = std::polar(r, bc1b);
  const cplx p2a = std::polar(r, bc2a);
  const cplx p2b = std::polar(r, bc2b);
  Matrix m = Matrix::from_rows({{p1a, 0.0, 0.0, p1a},
                                {p1b, 0.0, 0.0, -p1b},
                                {0.0, p2a, p2a, 0.0},
                                {0.0, p2b, -p2b, 0.0}});
  return UnitaryMap(std::move(m), path_spin_labels(), outlet_labels());
}

inline UnitaryMap combiner_unitary() { return combiner_unitary_with_phases(0.0, 0.0, 0.0, 0.0); }

// A random completion of the two fixed rows (random phases on the free
// rows and on the fixed rows' overall phase is not allowed here: the fixed
// rows are kept bit-exact, which is the strictest reading of "preserving
// the two specified rows").
inline UnitaryMap random_combiner_completion(RngStream& rng) {
  const double two_pi = 8.0 * std::atan(1.0);
  const double b1 = two_pi * rng.next_double();
  const double b2 = two_pi * rng.next_double();
  return combiner_unitary_with_phases(0.0, b1, 0.0, b2);
}

// Effect operators of the stage-2 region detection, pulled back to the
// (path, spin) basis: E_region = U^dagger P_region U.
inline std::pair<Matrix, Matrix> stage2_povm_of(const UnitaryMap& combiner) {
  Matrix p_bc1 = Matrix::zero(4);
  Matrix p_bc2 = Matrix::zero(4);
  p_bc1.at(0, 0) = 1.0;
  p_bc1.at(1, 1) = 1.0;
  p_bc2.at(2, 2) = 1.0;
  p_bc2.at(3, 3) = 1.0;
  const Matrix& u = combiner.matrix();
  return {u.adjoint() * p_bc1 * u, u.adjoint() * p_bc2 * u};
}

inline std::pair<Matrix, Matrix> stage2_povm() { return stage2_povm_of(combiner_unitary()); }

// One region of a stage's analytic outcome table. The post-state is kept in
// the (path, spin) basis (stage 2 maps the collapsed outlet state back
// through the inverse combiner); absent when the region has zero weight.
struct RegionProbability {
  std::string region;
  Outcome product_value;
  double probability;
  std::optional<StateVector> post_state;
};

inline Outcome mode_product_value(int mode_index) {
  // Modes 0..3 = u+, u-, d+, d-; the product of path and spin signs.
  return Outcome(mode_index == 0 || mode_index == 3 ? 1 : -1);
}

inline std::vector<RegionProbability> stage1_distribution(const StateVector& s) {
  if (s.basis_labels() != path_spin_labels())
    throw std::invalid_argument("stage1_distribution: state must be in the (path, spin) basis");
  std::vector<RegionProbability> out;
  for (int i = 0; i < 4; ++i) {
    const double p = std::norm(s.amp(i));
    std::optional<StateVector> post;
    if (p >= kTol) post = StateVector::basis(path_spin_labels(), i);
    out.push_back({stage1_regions()[static_cast<std::size_t>(i)], mode_product_value(i), p,
                   std::move(post)});
  }
  return out;
}

inline std::vector<RegionProbability> stage2_distribution_with(const StateVector& s,
                                                               const UnitaryMap& combiner) {
  if (s.basis_labels() != path_spin_labels())
    throw std::invalid_argument("stage2_distribution: state must be in the (path, spin) basis");
  const StateVector outlet = apply(combiner, s);
  const UnitaryMap back = combiner.inverted();
  std::vector<RegionProbability> out;
  for (int region = 0; region < 2; ++region) {
    const int lo = region * 2;
    const double p = std::norm(outlet.amp(lo)) + std::norm(outlet.amp(lo + 1));
    std::optional<StateVector> post;
    if (p >= kTol) {
      // Coarse-grained Lueders rule: project onto the region's two-mode
      // span, renormalize, then express in the (path, spin) basis.
      std::vector<cplx> amps(4, 0.0);
      amps[static_cast<std::size_t>(lo)] = outlet.amp(lo);
      amps[static_cast<std::size_t>(lo + 1)] = outlet.amp(lo + 1);
      const double n = std::sqrt(p);
      for (cplx& a : amps) a /= n;
      post = apply(back, StateVector(outlet_labels(), std::move(amps)));
    }
    out.push_back({stage2_regions()[static_cast<std::size_t>(region)],
                   Outcome(region == 0 ? 1 : -1), p, std::move(post)});
  }
  return out;
}

inline std::vector<RegionProbability> stage2_distribution(const StateVector& s) {
  return stage2_distribution_with(s, combiner_unitary());
}

// Aggregated detector hits of a seeded run.
struct RunStatistics {
  std::vector<std::pair<std::string, std::uint64_t>> counts;  // fixed region order
  std::uint64_t trials = 0;
  // (region, follow-up value) -> count; present when a follow-up was run.
  std::optional<std::map<std::pair<std::string, int>, std::uint64_t>> follow_up;

  std::uint64_t count_of(const std::string& region) const {
    for (const auto& [name, c] : counts)
      if (name == region) return c;
    return 0;
  }
};

namespace detail {

inline RunStatistics run_regions(const std::vector<RegionProbability>& dist, std::uint64_t trials,
                                 const RngStream& rng, const std::optional<Observable>& follow_up) {
  // Per-region follow-up distributions are state-independent across trials,
  // so they are computed once and sampled per trial.
  std::vector<std::optional<OutcomeDistribution>> follow_dists;
  if (follow_up) {
    for (const RegionProbability& r : dist)
      follow_dists.push_back(r.post_state ? std::optional<OutcomeDistribution>(
                                                measure(*r.post_state, *follow_up))
                                          : std::nullopt);
  }

  RunStatistics stats;
  stats.trials = trials;
  std::vector<std::uint64_t> counts(dist.size(), 0);
  std::map<std::pair<std::string, int>, std::uint64_t> follow_counts;

  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < dist.size(); ++i)
    if (dist[i].probability >= kTol) last_positive = i;

  for (std::uint64_t t = 0; t < trials; ++t) {
    RngStream trial_rng = rng.substream(t);
    const double u = trial_rng.next_double();
    double cum = 0.0;
    std::size_t hit = last_positive;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      cum += dist[i].probability;
      if (u < cum) {
        hit = i;
        break;
      }
    }
    ++counts[hit];
    if (follow_up && follow_dists[hit]) {
      const auto drawn = sample(*follow_dists[hit], trial_rng);
      ++follow_counts[{dist[hit].region, drawn.first.value()}];
    }
  }

  for (std::size_t i = 0; i < dist.size(); ++i) stats.counts.emplace_back(dist[i].region, counts[i]);
  if (follow_up) stats.follow_up = std::move(follow_counts);
  return stats;
}

}  // namespace detail

// Fine-grained run: every trial collapses to one (path, spin) mode and its
// detector fires. The optional follow-up is measured on the collapsed mode,
// treating detection as nondestructive (an idealization; see stage_contrast).
inline RunStatistics run_stage1(const StateVector& s, std::uint64_t trials, const RngStream& rng,
                                const std::optional<Observable>& follow_up = std::nullopt) {
  if (follow_up && !follow_up->is_involution())
    throw std::invalid_argument("run_stage1: follow-up must square to the identity");
  return detail::run_regions(stage1_distribution(s), trials, rng, follow_up);
}

// Coarse-grained run: every trial routes through the combiner and one of
// the two region detectors fires; the post-state is the coarse Lueders
// projection mapped back to the (path, spin) basis before any follow-up.
inline RunStatistics run_stage2(const StateVector& s, std::uint64_t trials, const RngStream& rng,
                                const std::optional<Observable>& follow_up = std::nullopt) {
  if (follow_up && !follow_up->is_involution())
    throw std::invalid_argument("run_stage2: follow-up must square to the identity");
  return detail::run_regions(stage2_distribution(s), trials, rng, follow_up);
}

// The two stages agree on the product value but not, in general, on what a
// follow-up measurement sees: stage 1 destroys coherence within a product
// eigenspace, stage 2 retains it.
struct StageContrast {
  ProbList<Outcome> stage1_product;
  ProbList<Outcome> stage2_product;
  double product_max_diff = 0.0;
  bool product_values_agree = false;

  ProbList<Outcome> stage1_follow_up;
  ProbList<Outcome> stage2_follow_up;
  double follow_up_max_diff = 0.0;
  bool follow_up_differs = false;

  std::optional<RunStatistics> stage1_run;
  std::optional<RunStatistics> stage2_run;
};

inline StageContrast stage_contrast(const StateVector& s, const Observable& follow_up,
                                    std::uint64_t trials, const RngStream& rng) {
  if (!follow_up.is_involution())
    throw std::invalid_argument("stage_contrast: follow-up must square to the identity");
  const auto d1 = stage1_distribution(s);
  const auto d2 = stage2_distribution(s);

  StageContrast c;
  for (const Outcome& v : outcome_domain()) {
    double p1 = 0.0;
    double p2 = 0.0;
    for (const auto& r : d1)
      if (r.product_value == v) p1 += r.probability;
    for (const auto& r : d2)
      if (r.product_value == v) p2 += r.probability;
    c.stage1_product.emplace_back(v, p1);
    c.stage2_product.emplace_back(v, p2);
    c.product_max_diff = std::max(c.product_max_diff, std::abs(p1 - p2));
  }
  c.product_values_agree = c.product_max_diff <= kTol;

  auto follow_mix = [&follow_up](const std::vector<RegionProbability>& dist, Outcome v) {
    double p = 0.0;
    for (const auto& r : dist)
      if (r.post_state && r.probability >= kTol)
        p += r.probability * measure(*r.post_state, follow_up).probability_of(v);
    return p;
  };
  for (const Outcome& v : outcome_domain()) {
    const double p1 = follow_mix(d1, v);
    const double p2 = follow_mix(d2, v);
    c.stage1_follow_up.emplace_back(v, p1);
    c.stage2_follow_up.emplace_back(v, p2);
    c.follow_up_max_diff = std::max(c.follow_up_max_diff, std::abs(p1 - p2));
  }
  c.follow_up_differs = c.follow_up_max_diff > kTol;

  if (trials > 0) {
    c.stage1_run = run_stage1(s, trials, rng.substream(1), follow_up);
    c.stage2_run = run_stage2(s, trials, rng.substream(2), follow_up);
  }
  return c;
}

}  // namespace ksim
