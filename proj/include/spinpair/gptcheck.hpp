#pragma once

// Validity of two-qubit effects in the minimal tensor product: an operator is
// an effect iff 0 <= Tr[Π Ω] <= 1 on every separable Ω. By convexity it is
// enough to look at pure product states ρ_r ⊗ ρ_s.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "spinpair/matcore.hpp"
#include "spinpair/povm.hpp"
#include "spinpair/qubit.hpp"
#include "spinpair/sampling.hpp"

namespace spinpair {

inline constexpr double kGptTol = 1e-9;

/// Tr_1[(ρ_r ⊗ 1) Π]
inline Operator contract_first(const Operator& effect, const Vec3& r) {
  const Operator rho = 0.5 * (Operator::identity(2) + bloch_operator(r));
  ComplexMatrix out = ComplexMatrix::Zero(2, 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) out += rho(b, a) * effect.matrix().block(2 * a, 2 * b, 2, 2);
  return Operator(out);
}

/// Tr_2[(1 ⊗ ρ_s) Π]
inline Operator contract_second(const Operator& effect, const Vec3& s) {
  const Operator rho = 0.5 * (Operator::identity(2) + bloch_operator(s));
  ComplexMatrix out = ComplexMatrix::Zero(2, 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      complex acc = 0.0;
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) acc += effect(2 * a + x, 2 * b + y) * rho(y, x);
      out(a, b) = acc;
    }
  return Operator(out);
}

inline double product_value(const Operator& effect, const Vec3& r, const Vec3& s) {
  const Operator state = kron(0.5 * (Operator::identity(2) + bloch_operator(r)),
                              0.5 * (Operator::identity(2) + bloch_operator(s)));
  return trace_inner(effect, state).real();
}

struct ProductExtremum {
  double value = 0.0;
  Vec3 r = Vec3::UnitZ();
  Vec3 s = Vec3::UnitZ();
  int restarts = 0;
  bool monotone = true;  // every half-step moved the objective the right way
  double second_best = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

/// Bloch vector of the eigenvector for the smallest (or largest) eigenvalue.
inline std::pair<double, Vec3> extremal_pure_state(const Operator& h, bool maximize) {
  const HermitianEig eig = hermitian_eig(h, 1e-8);
  const int idx = maximize ? 1 : 0;
  const Eigen::Vector2cd v = eig.vectors.col(idx);
  return {eig.values(idx), bloch_of(outer(v))};
}

}  // namespace detail

/// See-saw over pure product states: fix r, solve exactly for s by an
/// eigenvector, then swap roles; restarts from the six octahedral axes and
/// `random_starts` seeded points.
inline ProductExtremum extremize_over_product_states(const Operator& effect, bool maximize,
                                                     int random_starts = 20,
                                                     std::uint64_t seed = 7) {
  if (effect.dim() != 4) throw std::invalid_argument("extremize_over_product_states: effect must be 4x4");
  if (!effect.is_hermitian()) throw std::invalid_argument("extremize_over_product_states: effect must be Hermitian");

  std::vector<Vec3> starts = {Vec3::UnitX(), -Vec3::UnitX(), Vec3::UnitY(),
                              -Vec3::UnitY(), Vec3::UnitZ(), -Vec3::UnitZ()};
  BlochSampler sampler(seed);
  for (int i = 0; i < random_starts; ++i) starts.push_back(sampler.unit());

  const double sign = maximize ? -1.0 : 1.0;  // minimize sign * value
  ProductExtremum best;
  best.value = maximize ? -std::numeric_limits<double>::infinity()
                        : std::numeric_limits<double>::infinity();
  std::vector<double> locals;
  for (const Vec3& start : starts) {
    Vec3 r = start;
    Vec3 s;
    double value = std::numeric_limits<double>::infinity();
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 500; ++it) {
      auto [vs, new_s] = detail::extremal_pure_state(contract_first(effect, r), maximize);
      if (sign * vs > prev + 1e-13) best.monotone = false;
      s = new_s;
      auto [vr, new_r] = detail::extremal_pure_state(contract_second(effect, s), maximize);
      if (sign * vr > sign * vs + 1e-13) best.monotone = false;
      r = new_r;
      value = sign * vr;
      if (std::abs(prev - value) < 1e-12) break;
      prev = value;
    }
    const double actual = product_value(effect, r, s);
    locals.push_back(actual);
    if (sign * actual < sign * best.value) {
      best.value = actual;
      best.r = r;
      best.s = s;
    }
  }
  best.restarts = static_cast<int>(starts.size());
  std::sort(locals.begin(), locals.end(), [&](double a, double b) { return sign * a < sign * b; });
  for (double v : locals) {
    if (std::abs(v - locals.front()) > 1e-8) {
      best.second_best = v;
      break;
    }
  }
  return best;
}

inline ProductExtremum min_over_product_states(const Operator& effect, bool maximize = false) {
  return extremize_over_product_states(effect, maximize);
}

/// Map Λ_Π with Π = (id₂ ⊗ Λ_Π)(|ψ⁻⟩⟨ψ⁻|), |ψ⁻⟩⟨ψ⁻| = ¼(11 − XX − YY − ZZ).
/// Writing Π = Σ C_pq σ_p⊗σ_q gives T(q, p) = 4 s_p C_pq with s = (1,−1,−1,−1).
inline QubitMap choi_map_of_effect(const Operator& effect, std::string label = "Lambda_Pi") {
  if (effect.dim() != 4) throw std::invalid_argument("choi_map_of_effect: effect must be 4x4");
  static constexpr std::array<double, 4> kSinglet = {1.0, -1.0, -1.0, -1.0};
  const PauliCoefficients pc = pauli_expand(effect);
  Mat4 T;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q) T(q, p) = 4.0 * kSinglet[static_cast<std::size_t>(p)] * pc.at(p, q).real();
  return QubitMap::from_transfer(T, std::move(label));
}

/// Tr[Π ρ_r⊗ρ_s] = 2 Tr[ρ_{−r} Λ*(ρ_s)] up to the anchor's normalization, so
/// non-negativity on products is positivity of Λ_Π.
inline bool effect_choi_positive(const Operator& effect, double tol = kGptTol) {
  return map_is_positive(choi_map_of_effect(effect), tol).positive;
}

struct GptCertificate {
  std::string operator_id;
  double min_product_value = 0.0;
  double max_product_value = 0.0;
  Vec3 worst_r = Vec3::UnitZ();
  Vec3 worst_s = Vec3::UnitZ();
  bool choi_map_positive = false;
  std::string method = "see-saw(6 axis + 20 seeded starts) + choi-map positivity";

  bool valid() const {
    return min_product_value >= -kGptTol && max_product_value <= 1.0 + kGptTol;
  }
};

inline GptCertificate certify_effect(const Operator& effect, std::string id) {
  GptCertificate c;
  c.operator_id = std::move(id);
  const ProductExtremum lo = extremize_over_product_states(effect, false);
  const ProductExtremum hi = extremize_over_product_states(effect, true);
  c.min_product_value = lo.value;
  c.max_product_value = hi.value;
  // Report whichever bound is closer to being violated.
  if (lo.value <= 1.0 - hi.value) {
    c.worst_r = lo.r;
    c.worst_s = lo.s;
  } else {
    c.worst_r = hi.r;
    c.worst_s = hi.s;
  }
  c.choi_map_positive = effect_choi_positive(effect) &&
                        effect_choi_positive(Operator::identity(4) - effect);
  return c;
}

struct GptReport {
  std::vector<GptCertificate> certificates;
  double completeness_residual = 0.0;
  bool passed = false;
};

inline std::string label_string(const OutcomeLabel& l) {
  std::string s = "[";
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (i) s += ",";
    s += l[i] > 0 ? "+" : "-";
  }
  return s + "]";
}

inline GptReport certify_gpt_povm(const Povm& p) {
  if (p.arity() != 2) throw std::invalid_argument("certify_gpt_povm: POVM must act on two qubits");
  GptReport rep;
  for (const auto& o : p.outcomes()) rep.certificates.push_back(certify_effect(o.effect, label_string(o.label)));
  rep.completeness_residual = p.total().max_abs_diff(Operator::identity(4));
  rep.passed = rep.completeness_residual <= kHermitianTol &&
               std::all_of(rep.certificates.begin(), rep.certificates.end(),
                           [](const GptCertificate& c) { return c.valid(); });
  return rep;
}

inline void to_json(nlohmann::json& j, const GptCertificate& c) {
  j = nlohmann::json{{"operator_id", c.operator_id},
                     {"min_product_value", c.min_product_value},
                     {"max_product_value", c.max_product_value},
                     {"worst_product_state",
                      {{"r", {c.worst_r.x(), c.worst_r.y(), c.worst_r.z()}},
                       {"s", {c.worst_s.x(), c.worst_s.y(), c.worst_s.z()}}}},
                     {"choi_map_positive", c.choi_map_positive},
                     {"method", c.method},
                     {"valid", c.valid()},
                     {"tolerance", kGptTol}};
}

inline void to_json(nlohmann::json& j, const GptReport& r) {
  j = nlohmann::json{{"certificates", r.certificates},
                     {"completeness_residual", r.completeness_residual},
                     {"passed", r.passed}};
}

}  // namespace spinpair
