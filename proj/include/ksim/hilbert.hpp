// States, observables and unitary maps on the labeled two- and four-mode
// Hilbert spaces: spin-1/2 alone, and the (path, spin) product space with
// basis |u,+>, |u,->, |d,+>, |d,->. All observables of interest square to
// the identity, so their spectrum is {+1, -1} and the spectral projectors
// are (I +/- O)/2.

#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ksim/matrix.hpp"

namespace ksim {

inline const std::vector<std::string>& spin_labels() {
  static const std::vector<std::string> l{"+", "-"};
  return l;
}

inline const std::vector<std::string>& path_spin_labels() {
  static const std::vector<std::string> l{"u,+", "u,-", "d,+", "d,-"};
  return l;
}

inline const std::vector<std::string>& outlet_labels() {
  static const std::vector<std::string> l{"BC1a", "BC1b", "BC2a", "BC2b"};
  return l;
}

// Normalized amplitude vector over a labeled mode basis.
class StateVector {
 public:
  StateVector(std::vector<std::string> labels, std::vector<cplx> amplitudes)
      : labels_(std::move(labels)), amps_(std::move(amplitudes)) {
    validate();
  }

  // Rescales to unit norm; rejects the zero vector.
  static StateVector normalized(std::vector<std::string> labels, std::vector<cplx> amplitudes) {
    const double n = norm2(amplitudes);
    if (!(n > kTol)) throw std::invalid_argument("StateVector: cannot normalize a zero vector");
    for (cplx& a : amplitudes) a /= n;
    return StateVector(std::move(labels), std::move(amplitudes));
  }

  static StateVector basis(const std::vector<std::string>& labels, int index) {
    std::vector<cplx> a(labels.size());
    a.at(static_cast<std::size_t>(index)) = 1.0;
    return StateVector(labels, std::move(a));
  }

  int dim() const { return static_cast<int>(amps_.size()); }
  const std::vector<cplx>& amplitudes() const { return amps_; }
  const std::vector<std::string>& basis_labels() const { return labels_; }
  const cplx& amp(int i) const { return amps_[static_cast<std::size_t>(i)]; }

  cplx inner_with(const StateVector& o) const {
    require_same_basis(o);
    return inner(amps_, o.amps_);
  }

  double fidelity(const StateVector& o) const { return std::norm(inner_with(o)); }

  bool approx_equal(const StateVector& o, double tol = kTol) const {
    if (labels_ != o.labels_) return false;
    double s = 0.0;
    for (std::size_t i = 0; i < amps_.size(); ++i) s += std::norm(amps_[i] - o.amps_[i]);
    return std::sqrt(s) <= tol;
  }

 private:
  void validate() const {
    if (amps_.empty()) throw std::invalid_argument("StateVector: empty amplitude vector");
    if (labels_.size() != amps_.size())
      throw std::invalid_argument("StateVector: label count must equal dimension");
    std::set<std::string> distinct(labels_.begin(), labels_.end());
    if (distinct.size() != labels_.size())
      throw std::invalid_argument("StateVector: basis labels must be distinct");
    for (const cplx& a : amps_)
      if (!is_finite(a)) throw std::invalid_argument("StateVector: non-finite amplitude");
    if (std::abs(norm2(amps_) - 1.0) > kTol)
      throw std::invalid_argument("StateVector: amplitudes are not normalized");
  }

  void require_same_basis(const StateVector& o) const {
    if (labels_ != o.labels_) throw std::invalid_argument("StateVector: basis label mismatch");
  }

  std::vector<std::string> labels_;
  std::vector<cplx> amps_;
};

// Hermitian operator.
class Observable {
 public:
  explicit Observable(Matrix m) : m_(std::move(m)) {
    if (!m_.finite()) throw std::invalid_argument("Observable: non-finite entry");
    if (!m_.is_hermitian()) throw std::invalid_argument("Observable: matrix is not Hermitian");
  }

  int dim() const { return m_.dim(); }
  const Matrix& matrix() const { return m_; }

  bool is_involution(double tol = kTol) const {
    return (m_ * m_ - Matrix::identity(m_.dim())).frobenius_norm() <= tol;
  }

  bool same_matrix(const Observable& o) const { return m_.approx_equal(o.m_, 0.0); }

 private:
  Matrix m_;
};

// Unitary map between two labeled mode bases.
class UnitaryMap {
 public:
  UnitaryMap(Matrix m, std::vector<std::string> input_labels, std::vector<std::string> output_labels)
      : m_(std::move(m)), in_(std::move(input_labels)), out_(std::move(output_labels)) {
    if (static_cast<int>(in_.size()) != m_.dim() || static_cast<int>(out_.size()) != m_.dim())
      throw std::invalid_argument("UnitaryMap: label count must equal dimension");
    if (!m_.finite()) throw std::invalid_argument("UnitaryMap: non-finite entry");
    if (!m_.is_unitary()) throw std::invalid_argument("UnitaryMap: matrix is not unitary");
  }

  int dim() const { return m_.dim(); }
  const Matrix& matrix() const { return m_; }
  const std::vector<std::string>& input_labels() const { return in_; }
  const std::vector<std::string>& output_labels() const { return out_; }

  UnitaryMap inverted() const { return UnitaryMap(m_.adjoint(), out_, in_); }

 private:
  Matrix m_;
  std::vector<std::string> in_;
  std::vector<std::string> out_;
};

// Complementary spectral projectors of a +/-1-valued observable.
struct ProjectorPair {
  ProjectorPair(Matrix plus_in, Matrix minus_in) : plus(std::move(plus_in)), minus(std::move(minus_in)) {
    const Matrix eye = Matrix::identity(plus.dim());
    if (!(plus + minus).approx_equal(eye) || !(plus * plus).approx_equal(plus) ||
        !(minus * minus).approx_equal(minus) || (plus * minus).frobenius_norm() > kTol)
      throw std::invalid_argument("ProjectorPair: not a complementary projector pair");
  }

  Matrix plus;
  Matrix minus;
};

enum class Axis { X, Y, Z };

inline Observable pauli(Axis axis) {
  switch (axis) {
    case Axis::X:
      return Observable(Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}}));
    case Axis::Y:
      return Observable(Matrix::from_rows({{0.0, cplx(0.0, -1.0)}, {cplx(0.0, 1.0), 0.0}}));
    case Axis::Z:
      return Observable(Matrix::from_rows({{1.0, 0.0}, {0.0, -1.0}}));
  }
  throw std::invalid_argument("pauli: unknown axis");
}

// Tensors a one-factor observable with the identity in the unoccupied slot.
// Slot 1 is the first tensor factor (path, or particle 1); slot 2 the second.
inline Observable embed(const Observable& op, int slot) {
  if (op.dim() != 2) throw std::invalid_argument("embed: operand must have dimension 2");
  if (slot != 1 && slot != 2) throw std::invalid_argument("embed: slot must be 1 or 2");
  const Matrix eye = Matrix::identity(2);
  return Observable(slot == 1 ? kron(op.matrix(), eye) : kron(eye, op.matrix()));
}

// Operator product of two commuting observables. A non-Hermitian result
// signals a non-commuting pair and is rejected.
inline Observable product(const Observable& a, const Observable& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("product: dimension mismatch");
  Matrix m = a.matrix() * b.matrix();
  if (!m.is_hermitian())
    throw std::invalid_argument("product: result is not Hermitian (factors do not commute)");
  return Observable(std::move(m));
}

inline Matrix commutator(const Observable& a, const Observable& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("commutator: dimension mismatch");
  return a.matrix() * b.matrix() - b.matrix() * a.matrix();
}

inline ProjectorPair spectral_projectors(const Observable& o) {
  if (!o.is_involution())
    throw std::invalid_argument("spectral_projectors: observable does not square to the identity");
  const Matrix eye = Matrix::identity(o.dim());
  return ProjectorPair((eye + o.matrix()) * 0.5, (eye - o.matrix()) * 0.5);
}

inline double expectation(const StateVector& s, const Observable& o) {
  if (s.dim() != o.dim()) throw std::invalid_argument("expectation: dimension mismatch");
  const cplx v = inner(s.amplitudes(), o.matrix().apply(s.amplitudes()));
  if (std::abs(v.imag()) > kTol)
    throw std::logic_error("expectation: imaginary residue exceeds tolerance");
  return v.real();
}

inline StateVector apply(const UnitaryMap& u, const StateVector& s) {
  if (s.dim() != u.dim()) throw std::invalid_argument("apply: dimension mismatch");
  if (s.basis_labels() != u.input_labels())
    throw std::invalid_argument("apply: state is not expressed in the map's input basis");
  return StateVector(u.output_labels(), u.matrix().apply(s.amplitudes()));
}

// ---- Named observables on the (path, spin) space ----------------------

inline Observable z1() { return embed(pauli(Axis::Z), 1); }
inline Observable x1() { return embed(pauli(Axis::X), 1); }
inline Observable z2() { return embed(pauli(Axis::Z), 2); }
inline Observable x2() { return embed(pauli(Axis::X), 2); }
inline Observable z1z2() { return product(z1(), z2()); }
inline Observable x1x2() { return product(x1(), x2()); }
inline Observable z1x2() { return product(z1(), x2()); }
inline Observable x1z2() { return product(x1(), z2()); }

inline Observable observable_by_name(const std::string& name) {
  if (name == "Z1") return z1();
  if (name == "X1") return x1();
  if (name == "Z2") return z2();
  if (name == "X2") return x2();
  if (name == "Z1Z2") return z1z2();
  if (name == "X1X2") return x1x2();
  if (name == "Z1X2") return z1x2();
  if (name == "X1Z2") return x1z2();
  throw std::invalid_argument("unknown observable name: " + name);
}

// ---- State presets -----------------------------------------------------

inline StateVector spin_z_plus() { return StateVector::basis(spin_labels(), 0); }
inline StateVector spin_z_minus() { return StateVector::basis(spin_labels(), 1); }
inline StateVector spin_x_plus() {
  const double r = 1.0 / std::sqrt(2.0);
  return StateVector(spin_labels(), {r, r});
}
inline StateVector spin_x_minus() {
  const double r = 1.0 / std::sqrt(2.0);
  return StateVector(spin_labels(), {r, -r});
}

inline StateVector mode_u_plus() { return StateVector::basis(path_spin_labels(), 0); }
inline StateVector mode_u_minus() { return StateVector::basis(path_spin_labels(), 1); }
inline StateVector mode_d_plus() { return StateVector::basis(path_spin_labels(), 2); }
inline StateVector mode_d_minus() { return StateVector::basis(path_spin_labels(), 3); }

// (|u,+> + |d,->)/sqrt(2): the simultaneous (+1,+1) eigenstate of (Z1Z2, X1X2).
inline StateVector phi_plus() {
  const double r = 1.0 / std::sqrt(2.0);
  return StateVector(path_spin_labels(), {r, 0.0, 0.0, r});
}

// (|u,-> - |d,+>)/sqrt(2): Z1Z2 = X1X2 = -1.
inline StateVector singlet_state() {
  const double r = 1.0 / std::sqrt(2.0);
  return StateVector(path_spin_labels(), {0.0, r, -r, 0.0});
}

// (|u> + |d>)|+>/sqrt(2).
inline StateVector x_plus_u() {
  const double r = 1.0 / std::sqrt(2.0);
  return StateVector(path_spin_labels(), {r, 0.0, r, 0.0});
}

}  // namespace ksim
