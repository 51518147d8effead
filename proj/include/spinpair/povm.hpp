#pragma once

// POVM containers with the explicit two-qubit measurement families for three
// orthogonal spin observables.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "spinpair/matcore.hpp"
#include "spinpair/qubit.hpp"

namespace spinpair {

/// Outcome string [a_1, ..., a_N], each a_i ∈ {±1}.
using OutcomeLabel = std::vector<int>;

/// All 2^width labels, lexicographic with −1 before +1.
inline std::vector<OutcomeLabel> outcome_labels(int width) {
  if (width < 1 || width > 3) throw std::invalid_argument("outcome_labels: width must be 1..3");
  std::vector<OutcomeLabel> out;
  for (int code = 0; code < (1 << width); ++code) {
    OutcomeLabel l(static_cast<std::size_t>(width));
    for (int b = 0; b < width; ++b) l[static_cast<std::size_t>(b)] = (code >> (width - 1 - b)) & 1 ? 1 : -1;
    out.push_back(std::move(l));
  }
  return out;
}

struct PovmOutcome {
  OutcomeLabel label;
  Operator effect;
};

class Povm {
 public:
  Povm() = default;
  Povm(int arity, std::vector<PovmOutcome> outcomes, bool gpt_mode = false)
      : arity_(arity), outcomes_(std::move(outcomes)), gpt_mode_(gpt_mode) {
    if (arity_ != 1 && arity_ != 2) throw std::invalid_argument("Povm: arity must be 1 or 2");
    if (outcomes_.empty()) throw std::invalid_argument("Povm: needs at least one outcome");
    const int dim = arity_ == 1 ? 2 : 4;
    const std::size_t width = outcomes_.front().label.size();
    for (const auto& o : outcomes_) {
      if (o.effect.dim() != dim) throw std::invalid_argument("Povm: effect dimension does not match arity");
      if (o.label.size() != width) throw std::invalid_argument("Povm: labels must share one width");
      for (int a : o.label)
        if (a != 1 && a != -1) throw std::invalid_argument("Povm: label entries must be ±1");
    }
  }

  int arity() const { return arity_; }
  int dim() const { return arity_ == 1 ? 2 : 4; }
  bool gpt_mode() const { return gpt_mode_; }
  std::size_t size() const { return outcomes_.size(); }
  std::size_t label_width() const { return outcomes_.empty() ? 0 : outcomes_.front().label.size(); }
  const std::vector<PovmOutcome>& outcomes() const& { return outcomes_; }
  std::vector<PovmOutcome> outcomes() && { return std::move(outcomes_); }
  const PovmOutcome& operator[](std::size_t i) const { return outcomes_.at(i); }

  const Operator& effect(const OutcomeLabel& label) const {
    for (const auto& o : outcomes_)
      if (o.label == label) return o.effect;
    throw std::out_of_range("Povm::effect: no such label");
  }

  Operator total() const {
    Operator sum = Operator::zero(dim());
    for (const auto& o : outcomes_) sum += o.effect;
    return sum;
  }

 private:
  int arity_ = 1;
  std::vector<PovmOutcome> outcomes_;
  bool gpt_mode_ = false;
};

struct ValidationReport {
  std::vector<double> min_eigenvalues;
  double completeness_residual = 0.0;
  double tolerance = 0.0;
  bool complete = false;
  bool positive = false;  // every effect PSD within −tol
  bool passed = false;    // verdict under the POVM's own gpt_mode
};

inline ValidationReport validate_povm(const Povm& p, double tol = 1e-10) {
  ValidationReport r;
  r.tolerance = tol;
  for (const auto& o : p.outcomes()) r.min_eigenvalues.push_back(min_eigenvalue(o.effect));
  r.completeness_residual = p.total().max_abs_diff(Operator::identity(p.dim()));
  r.complete = r.completeness_residual <= tol;
  r.positive = std::all_of(r.min_eigenvalues.begin(), r.min_eigenvalues.end(),
                           [&](double v) { return v >= -tol; });
  // Separable positivity of GPT effects is certified in gptcheck, not here.
  r.passed = r.complete && (p.gpt_mode() || r.positive);
  return r;
}

// ---------------------------------------------------------------------------
// Explicit families

namespace detail {

using Builder = Operator (*)(int, int, int);

inline Povm build_family(Builder effect, bool gpt_mode) {
  std::vector<PovmOutcome> outcomes;
  for (const auto& l : outcome_labels(3)) outcomes.push_back({l, effect(l[0], l[1], l[2])});
  return Povm(2, std::move(outcomes), gpt_mode);
}

inline const Operator& id2() {
  static const Operator id = Operator::identity(2);
  return id;
}

}  // namespace detail

/// Parallel-pair effect, sharpness √3/2 on ρ⊗ρ.
inline Operator parallel_effect(int i, int j, int k) {
  const auto& X = pauli_x();
  const auto& Y = pauli_y();
  const auto& Z = pauli_z();
  const auto& I = detail::id2();
  const double r3 = std::sqrt(3.0);
  Operator sum = 4.0 * Operator::identity(4);
  sum += r3 * (double(i) * anticommutator_kron(X, I) + double(j) * anticommutator_kron(Y, I) +
               double(k) * anticommutator_kron(Z, I));
  sum += double(i * j) * anticommutator_kron(X, Y) + double(j * k) * anticommutator_kron(Y, Z) +
         double(k * i) * anticommutator_kron(Z, X);
  return (1.0 / 32.0) * sum;
}

/// Antiparallel-pair effect; sharp X, Y, Z on ρ_m⊗ρ_{−m}.
inline Operator antiparallel_effect(int i, int j, int k) {
  const auto& X = pauli_x();
  const auto& Y = pauli_y();
  const auto& Z = pauli_z();
  const auto& I = detail::id2();
  Operator sum = 2.0 * Operator::identity(4);
  sum += double(i) * commutator_kron(X, I) + double(j) * commutator_kron(Y, I) +
         double(k) * commutator_kron(Z, I);
  sum -= double(i * j) * anticommutator_kron(X, Y) + double(j * k) * anticommutator_kron(Y, Z) +
         double(k * i) * anticommutator_kron(Z, X);
  return (1.0 / 16.0) * sum;
}

/// Minimal-tensor-product effect: not PSD, but non-negative on product states.
inline Operator gpt_effect(int i, int j, int k) {
  const auto& X = pauli_x();
  const auto& Y = pauli_y();
  const auto& Z = pauli_z();
  const auto& I = detail::id2();
  Operator sum = 2.0 * Operator::identity(4);
  sum += double(i) * anticommutator_kron(X, I) + double(j) * anticommutator_kron(Y, I) +
         double(k) * anticommutator_kron(Z, I);
  sum += double(i * j) * anticommutator_kron(X, Y) + double(j * k) * anticommutator_kron(Y, Z) +
         double(k * i) * anticommutator_kron(Z, X);
  return (1.0 / 16.0) * sum;
}

/// Coefficients of the tetrahedral-ensemble measurement, five decimals.
struct TetCoefficients {
  double d = 0.11582;
  double a_plus = 0.84746, a_minus = 0.15265;
  double b_plus = 0.38850, b_minus = -0.01350;
  double c_plus = 0.22430, c_minus = 0.00779;
};

/// Tetrahedral-ensemble effect. The third linear term uses {Z,1}; the sign
/// product s = ijk selects the coefficient row and multiplies d.
inline Operator tet_effect(int i, int j, int k, const TetCoefficients& tc = {}) {
  const auto& X = pauli_x();
  const auto& Y = pauli_y();
  const auto& Z = pauli_z();
  const auto& I = detail::id2();
  const int s = i * j * k;
  const double a = s > 0 ? tc.a_plus : tc.a_minus;
  const double b = s > 0 ? tc.b_plus : tc.b_minus;
  const double c = s > 0 ? tc.c_plus : tc.c_minus;
  Operator sum = a * Operator::identity(4);
  sum += (tc.d * s) * (kron(X, X) + kron(Y, Y) + kron(Z, Z));
  sum += b * (double(i) * anticommutator_kron(X, I) + double(j) * anticommutator_kron(Y, I) +
              double(k) * anticommutator_kron(Z, I));
  sum += c * (double(i * j) * anticommutator_kron(X, Y) + double(j * k) * anticommutator_kron(Y, Z) +
              double(k * i) * anticommutator_kron(Z, X));
  return 0.25 * sum;
}

inline Povm build_parallel_povm() { return detail::build_family(&parallel_effect, false); }
inline Povm build_antiparallel_povm() { return detail::build_family(&antiparallel_effect, false); }
inline Povm build_gpt_povm() { return detail::build_family(&gpt_effect, true); }
inline Povm build_tet_povm(const TetCoefficients& tc = {}) {
  std::vector<PovmOutcome> outcomes;
  for (const auto& l : outcome_labels(3)) outcomes.push_back({l, tet_effect(l[0], l[1], l[2], tc)});
  return Povm(2, std::move(outcomes), false);
}

// ---------------------------------------------------------------------------
// Marginals

struct Marginal {
  double minus = 0.0;
  double plus = 0.0;
  double of(int outcome) const { return outcome == 1 ? plus : minus; }
  double total() const { return minus + plus; }
};

/// p(a_j) = Σ_{a∖a_j} Tr[state · π_a].
inline Marginal marginal_distribution(const Povm& p, const Operator& state, std::size_t axis_index) {
  if (axis_index >= p.label_width()) {
    throw std::out_of_range("marginal_distribution: axis index " + std::to_string(axis_index) +
                            " outside label width " + std::to_string(p.label_width()));
  }
  if (state.dim() != p.dim()) throw std::invalid_argument("marginal_distribution: state dimension mismatch");
  Marginal m;
  for (const auto& o : p.outcomes()) {
    const double prob = trace_inner(state, o.effect).real();
    (o.label[axis_index] == 1 ? m.plus : m.minus) += prob;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Rank-one structure of the antiparallel measurement

/// Normalized Bell states in the computational basis |00>,|01>,|10>,|11>.
struct BellBasis {
  static Eigen::Vector4cd phi_plus() { return Eigen::Vector4cd(1, 0, 0, 1) / std::sqrt(2.0); }
  static Eigen::Vector4cd phi_minus() { return Eigen::Vector4cd(1, 0, 0, -1) / std::sqrt(2.0); }
  static Eigen::Vector4cd psi_plus() { return Eigen::Vector4cd(0, 1, 1, 0) / std::sqrt(2.0); }
  static Eigen::Vector4cd psi_minus() { return Eigen::Vector4cd(0, 1, -1, 0) / std::sqrt(2.0); }
};

struct XiVector {
  std::array<int, 3> label{};
  Eigen::Vector4cd bell_amplitudes;  // over (ψ⁻, φ⁻, φ⁺, ψ⁺)

  Eigen::Vector4cd computational() const {
    return bell_amplitudes(0) * BellBasis::psi_minus() + bell_amplitudes(1) * BellBasis::phi_minus() +
           bell_amplitudes(2) * BellBasis::phi_plus() + bell_amplitudes(3) * BellBasis::psi_plus();
  }
};

namespace detail {
inline void require_signs(int i, int j, int k, const char* what) {
  for (int v : {i, j, k})
    if (v != 1 && v != -1) throw std::invalid_argument(std::string(what) + ": signs must be ±1");
}
}  // namespace detail

inline XiVector xi_vector(int i, int j, int k) {
  detail::require_signs(i, j, k, "xi_vector");
  const complex im(0.0, 1.0);
  return XiVector{{i, j, k}, Eigen::Vector4cd(1.0, -double(i), im * double(j), double(k)) / 2.0};
}

/// l = 2(i+1) + (j+1) + (k+1)/2
inline int xi_index(int i, int j, int k) {
  detail::require_signs(i, j, k, "xi_index");
  return 2 * (i + 1) + (j + 1) + (k + 1) / 2;
}

/// Adjacency over {0..7}: edge iff |⟨ξ_l|ξ_l'⟩| ≤ tol.
inline std::array<std::array<bool, 8>, 8> orthogonality_graph(double tol = 1e-12) {
  std::array<Eigen::Vector4cd, 8> vs;
  for (const auto& l : outcome_labels(3)) {
    vs[static_cast<std::size_t>(xi_index(l[0], l[1], l[2]))] = xi_vector(l[0], l[1], l[2]).computational();
  }
  std::array<std::array<bool, 8>, 8> adj{};
  for (std::size_t a = 0; a < 8; ++a)
    for (std::size_t b = 0; b < 8; ++b) adj[a][b] = a != b && std::abs(vs[a].dot(vs[b])) <= tol;
  return adj;
}

/// Applies id₂⊗F to every effect.
inline Povm flip_second_factor(const Povm& p) {
  if (p.arity() != 2) throw std::invalid_argument("flip_second_factor: POVM must act on two qubits");
  const QubitMap flip = map_spin_flip();
  std::vector<PovmOutcome> out;
  bool all_psd = true;
  for (const auto& o : p.outcomes()) {
    out.push_back({o.label, map_apply_on_second(flip, o.effect)});
    all_psd = all_psd && min_eigenvalue(out.back().effect) >= -kHermitianTol;
  }
  return Povm(2, std::move(out), !all_psd);
}

// ---------------------------------------------------------------------------
// JSON: {arity, gpt_mode, outcomes: [{label, effect}]}

inline void to_json(nlohmann::json& j, const Povm& p) {
  nlohmann::json outs = nlohmann::json::array();
  for (const auto& o : p.outcomes()) outs.push_back({{"label", o.label}, {"effect", o.effect}});
  j = nlohmann::json{{"arity", p.arity()}, {"gpt_mode", p.gpt_mode()}, {"outcomes", outs}};
}

inline void from_json(const nlohmann::json& j, Povm& p) {
  std::vector<PovmOutcome> outs;
  for (const auto& o : j.at("outcomes")) {
    outs.push_back({o.at("label").get<OutcomeLabel>(), o.at("effect").get<Operator>()});
  }
  p = Povm(j.at("arity").get<int>(), std::move(outs), j.value("gpt_mode", false));
}

inline void to_json(nlohmann::json& j, const ValidationReport& r) {
  j = nlohmann::json{{"min_eigenvalues", r.min_eigenvalues},
                     {"completeness_residual", r.completeness_residual},
                     {"tolerance", r.tolerance},
                     {"complete", r.complete},
                     {"positive", r.positive},
                     {"passed", r.passed}};
}

}  // namespace spinpair
