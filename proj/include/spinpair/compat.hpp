#pragma once

// Configurations ρ_m ⊗ Λ(ρ_m), state ensembles, joint-measurability checks for
// fixed POVMs, and the affine constraint systems consumed by sdpsolve.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "spinpair/matcore.hpp"
#include "spinpair/povm.hpp"
#include "spinpair/qubit.hpp"
#include "spinpair/sampling.hpp"

namespace spinpair {

// ---------------------------------------------------------------------------
// Configuration

class Configuration {
 public:
  static Configuration single() { return Configuration(1, map_identity(), "single"); }
  static Configuration parallel() { return Configuration(2, map_identity(), "parallel"); }
  static Configuration antiparallel() { return Configuration(2, map_spin_flip(), "antiparallel"); }
  static Configuration with_map(QubitMap map) {
    std::string name = "map:" + map.label();
    return Configuration(2, std::move(map), std::move(name));
  }

  int copies() const { return copies_; }
  int dim() const { return copies_ == 1 ? 2 : 4; }
  const QubitMap& map() const { return map_; }
  const std::string& name() const { return name_; }

  /// ρ_m for one copy, ρ_m ⊗ Λ(ρ_m) for two.
  Operator state_of(const BlochVector& m) const {
    const Operator rho = density_from_bloch(m);
    if (copies_ == 1) return rho;
    return kron(rho, map_.apply(rho));
  }

 private:
  Configuration(int copies, QubitMap map, std::string name)
      : copies_(copies), map_(std::move(map)), name_(std::move(name)) {
    if (!map_.is_trace_preserving()) {
      throw std::invalid_argument("Configuration: map must be trace preserving");
    }
  }

  int copies_;
  QubitMap map_;
  std::string name_;
};

// ---------------------------------------------------------------------------
// Ensembles

/// A finite list of Bloch vectors, or every state (`all`).
struct Ensemble {
  std::string label;
  std::vector<BlochVector> states;
  bool all = false;

  static Ensemble every_state() { return Ensemble{"all", {}, true}; }
};

enum class Plane { XY, YZ, XZ };

inline Plane parse_plane(const std::string& s) {
  if (s == "xy" || s == "yx") return Plane::XY;
  if (s == "yz" || s == "zy") return Plane::YZ;
  if (s == "xz" || s == "zx") return Plane::XZ;
  throw std::invalid_argument("unknown plane '" + s + "' (expected xy, yz or xz)");
}

inline std::string plane_name(Plane p) {
  switch (p) {
    case Plane::XY: return "xy";
    case Plane::YZ: return "yz";
    case Plane::XZ: return "xz";
  }
  return "?";
}

/// n equally spaced pure states on a great circle, starting on the plane's
/// first axis.
inline Ensemble ensemble_great_circle(int n, Plane plane) {
  if (n < 3) throw std::invalid_argument("ensemble_great_circle: need at least 3 states");
  Vec3 u, v;
  switch (plane) {
    case Plane::XY: u = Vec3::UnitX(); v = Vec3::UnitY(); break;
    case Plane::YZ: u = Vec3::UnitY(); v = Vec3::UnitZ(); break;
    case Plane::XZ: u = Vec3::UnitX(); v = Vec3::UnitZ(); break;
  }
  Ensemble e{"gc:" + std::to_string(n) + "," + plane_name(plane), {}, false};
  for (int q = 0; q < n; ++q) {
    const double a = 2.0 * std::numbers::pi * q / n;
    Vec3 m = std::cos(a) * u + std::sin(a) * v;
    // Snap exact zeros so that (±x, ±z) come out exactly for n = 4.
    for (int c = 0; c < 3; ++c)
      if (std::abs(m(c)) < 1e-15) m(c) = 0.0;
    e.states.emplace_back(m.normalized());
  }
  return e;
}

/// (±1, ±1, ±1)/√3 with m_x m_y m_z > 0.
inline Ensemble ensemble_tetrahedral() {
  const double s = 1.0 / std::sqrt(3.0);
  return Ensemble{"tet",
                  {BlochVector(s, s, s), BlochVector(s, -s, -s), BlochVector(-s, s, -s),
                   BlochVector(-s, -s, s)},
                  false};
}

/// Eigenstates of X, Y, Z.
inline Ensemble ensemble_octahedral() {
  return Ensemble{"oct",
                  {BlochVector(1, 0, 0), BlochVector(-1, 0, 0), BlochVector(0, 1, 0),
                   BlochVector(0, -1, 0), BlochVector(0, 0, 1), BlochVector(0, 0, -1)},
                  false};
}

inline std::vector<Vec3> axes_xyz() { return {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()}; }

// ---------------------------------------------------------------------------
// Reproduction checks

/// max |p(a_j) − ½(1 + λ a_j m·n̂_j)| over ensemble states (or `random_states`
/// seeded samples for `all`), axes and outcomes.
inline double check_reproduction(const Povm& p, const Configuration& config,
                                 const std::vector<Vec3>& axes, double sharpness,
                                 const Ensemble& ensemble, std::size_t random_states = 1000,
                                 std::uint64_t seed = kDefaultSeed) {
  if (p.label_width() != axes.size()) {
    throw std::invalid_argument("check_reproduction: POVM label width " +
                                std::to_string(p.label_width()) + " does not match " +
                                std::to_string(axes.size()) + " axes");
  }
  if (p.arity() != config.copies()) {
    throw std::invalid_argument("check_reproduction: POVM arity does not match configuration");
  }
  std::vector<BlochVector> states = ensemble.states;
  if (ensemble.all) states = BlochSampler(seed).ball(random_states);

  double worst = 0.0;
  for (const auto& m : states) {
    const Operator state = config.state_of(m);
    for (std::size_t j = 0; j < axes.size(); ++j) {
      const Marginal marg = marginal_distribution(p, state, j);
      for (int a : {1, -1}) {
        const double target = 0.5 * (1.0 + sharpness * a * m.vec().dot(axes[j]));
        worst = std::max(worst, std::abs(marg.of(a) - target));
      }
    }
  }
  return worst;
}

/// Effects mapped by id₂ ⊗ Λ*, so that
/// Tr[(ρ ⊗ Λ(ρ)) π] = Tr[(ρ ⊗ ρ) (id₂ ⊗ Λ*)(π)].
inline Povm dual_transfer(const Povm& p, const QubitMap& map) {
  if (p.arity() != 2) throw std::invalid_argument("dual_transfer: POVM must act on two qubits");
  const QubitMap dual = map_dual(map);
  std::vector<PovmOutcome> out;
  out.reserve(p.size());
  for (const auto& o : p.outcomes()) out.push_back({o.label, map_apply_on_second(dual, o.effect)});
  return Povm(2, std::move(out), p.gpt_mode() || !map_is_cp(map));
}

/// Sharpness per axis seen by the antiparallel measurement on ρ_m ⊗ F_μ(ρ_m),
/// from an exact least-squares fit of p(+1) − ½ against ½ m·n̂ over `samples`
/// seeded states.
inline Vec3 fmu_marginal_sharpness(double mu, std::size_t samples = 20,
                                   std::uint64_t seed = kDefaultSeed) {
  const Configuration config = Configuration::with_map(map_f_mu(mu));
  const Povm povm = build_antiparallel_povm();
  const auto axes = axes_xyz();
  BlochSampler sampler(seed);
  const auto states = sampler.ball(samples);
  Vec3 out;
  for (std::size_t j = 0; j < 3; ++j) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(samples)), y(static_cast<Eigen::Index>(samples));
    for (std::size_t s = 0; s < samples; ++s) {
      const Operator state = config.state_of(states[s]);
      y(static_cast<Eigen::Index>(s)) = marginal_distribution(povm, state, j).plus - 0.5;
      x(static_cast<Eigen::Index>(s)) = 0.5 * states[s].vec().dot(axes[j]);
    }
    out(static_cast<Eigen::Index>(j)) = x.colPivHouseholderQr().solve(y)(0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Real parametrization of Hermitian matrices: diagonal entries, then
// (√2 Re, √2 Im) of each upper off-diagonal entry. It is an isometry from the
// Frobenius inner product, so Tr[S π] = ⟨vec(S), vec(π)⟩ for Hermitian S, π.

inline int hermitian_param_size(int dim) { return dim * dim; }

inline Eigen::VectorXd hermitian_to_real(const ComplexMatrix& h) {
  const int d = static_cast<int>(h.rows());
  Eigen::VectorXd v(d * d);
  int k = 0;
  for (int r = 0; r < d; ++r) v(k++) = h(r, r).real();
  for (int r = 0; r < d; ++r)
    for (int c = r + 1; c < d; ++c) {
      v(k++) = std::numbers::sqrt2 * h(r, c).real();
      v(k++) = std::numbers::sqrt2 * h(r, c).imag();
    }
  return v;
}

inline ComplexMatrix real_to_hermitian(const Eigen::Ref<const Eigen::VectorXd>& v, int d) {
  ComplexMatrix h(d, d);
  int k = 0;
  for (int r = 0; r < d; ++r) h(r, r) = v(k++);
  for (int r = 0; r < d; ++r)
    for (int c = r + 1; c < d; ++c) {
      const complex z(v(k) / std::numbers::sqrt2, v(k + 1) / std::numbers::sqrt2);
      k += 2;
      h(r, c) = z;
      h(c, r) = std::conj(z);
    }
  return h;
}

// ---------------------------------------------------------------------------
// Constraint systems

/// coeffs · x = target + lambda_coeff · λ, with x the stacked real
/// parametrizations of all effects (effect-major).
struct LinearConstraint {
  std::vector<double> coeffs;
  double lambda_coeff = 0.0;
  double target = 0.0;
  std::string tag;
};

struct ConstraintSystem {
  int num_effects = 0;
  int effect_dim = 2;
  std::vector<OutcomeLabel> labels;
  std::vector<LinearConstraint> constraints;
  // Metadata for reports and downstream validation.
  std::vector<Vec3> axes;
  int copies = 1;
  QubitMap map;
  std::string configuration;
  Ensemble ensemble;

  int num_variables() const { return num_effects * hermitian_param_size(effect_dim); }
};

namespace detail {

inline void add_marginal_constraint(ConstraintSystem& cs, const ComplexMatrix& s, std::size_t axis,
                                    int outcome, double target, double lambda_coeff,
                                    std::string tag) {
  const int n = hermitian_param_size(cs.effect_dim);
  const Eigen::VectorXd sv = hermitian_to_real(s);
  LinearConstraint c{std::vector<double>(static_cast<std::size_t>(cs.num_variables()), 0.0),
                     lambda_coeff, target, std::move(tag)};
  for (std::size_t e = 0; e < cs.labels.size(); ++e) {
    if (cs.labels[e][axis] != outcome) continue;
    for (int q = 0; q < n; ++q) c.coeffs[e * static_cast<std::size_t>(n) + static_cast<std::size_t>(q)] = sv(q);
  }
  cs.constraints.push_back(std::move(c));
}

/// Operator-valued coefficients of Tr[(ρ_m ⊗ Λ(ρ_m)) π] as a polynomial in m:
/// index 0 constant, 1..3 linear in m_p, then quadratics (p ≤ p') in order
/// xx, xy, xz, yy, yz, zz.
struct PolyTerm {
  ComplexMatrix op;
  int linear = -1;  // axis index for linear monomials
  std::string name;
};

inline std::vector<PolyTerm> state_polynomial(int copies, const QubitMap& map) {
  static const char* kAxis = "xyz";
  std::vector<PolyTerm> terms;
  const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  if (copies == 1) {
    terms.push_back({0.5 * id, -1, "1"});
    for (int p = 0; p < 3; ++p) terms.push_back({0.5 * pauli(p + 1).matrix(), p, std::string("m") + kAxis[p]});
    return terms;
  }
  const Mat3 M = map.bloch_matrix();
  const Vec3 t = map.shift();
  // ρ_m ⊗ Λ(ρ_m) = ¼ (1 + m·σ) ⊗ (1 + (t + M m)·σ)
  auto sigma_of = [](const Vec3& v) { return bloch_operator(v).matrix(); };
  auto kr = [](const ComplexMatrix& a, const ComplexMatrix& b) { return kron(Operator(a), Operator(b)).matrix(); };
  const ComplexMatrix second0 = id + sigma_of(t);
  terms.push_back({0.25 * kr(id, second0), -1, "1"});
  for (int p = 0; p < 3; ++p) {
    const ComplexMatrix col = sigma_of(M.col(p));
    terms.push_back({0.25 * (kr(pauli(p + 1).matrix(), second0) + kr(id, col)), p,
                     std::string("m") + kAxis[p]});
  }
  for (int p = 0; p < 3; ++p)
    for (int q = p; q < 3; ++q) {
      ComplexMatrix op = 0.25 * kr(pauli(p + 1).matrix(), sigma_of(M.col(q)));
      if (q != p) op += 0.25 * kr(pauli(q + 1).matrix(), sigma_of(M.col(p)));
      terms.push_back({op, -1, std::string("m") + kAxis[p] + "m" + kAxis[q]});
    }
  return terms;
}

}  // namespace detail

/// One equality per (state, axis, outcome) for finite ensembles; for `all`,
/// coefficient matching of the degree-2 polynomial in m (two such polynomials
/// agree on the ball iff their coefficients agree). Completeness Σπ = 1 is
/// always appended. Redundant rows are kept.
inline ConstraintSystem build_constraints(const std::vector<Vec3>& axes, const Configuration& config,
                                          const Ensemble& ensemble) {
  if (axes.empty() || axes.size() > 3) throw std::invalid_argument("build_constraints: need 1..3 axes");
  for (const auto& a : axes)
    if (std::abs(a.norm() - 1.0) > 1e-12) throw std::invalid_argument("build_constraints: axes must be unit vectors");

  ConstraintSystem cs;
  cs.labels = outcome_labels(static_cast<int>(axes.size()));
  cs.num_effects = static_cast<int>(cs.labels.size());
  cs.effect_dim = config.dim();
  cs.axes = axes;
  cs.copies = config.copies();
  cs.map = config.map();
  cs.configuration = config.name();
  cs.ensemble = ensemble;

  if (ensemble.all) {
    const auto terms = detail::state_polynomial(config.copies(), config.map());
    for (std::size_t j = 0; j < axes.size(); ++j)
      for (int a : {1, -1})
        for (const auto& term : terms) {
          const double target = term.name == "1" ? 0.5 : 0.0;
          const double lam = term.linear >= 0 ? 0.5 * a * axes[j](term.linear) : 0.0;
          detail::add_marginal_constraint(cs, term.op, j, a, target, lam,
                                          "axis" + std::to_string(j) + (a > 0 ? "+" : "-") + ":" + term.name);
        }
  } else {
    for (std::size_t s = 0; s < ensemble.states.size(); ++s) {
      const auto& m = ensemble.states[s];
      const ComplexMatrix state = config.state_of(m).matrix();
      for (std::size_t j = 0; j < axes.size(); ++j)
        for (int a : {1, -1})
          detail::add_marginal_constraint(cs, state, j, a, 0.5, 0.5 * a * m.vec().dot(axes[j]),
                                          "state" + std::to_string(s) + ":axis" + std::to_string(j) +
                                              (a > 0 ? "+" : "-"));
    }
  }

  const int n = hermitian_param_size(cs.effect_dim);
  const Eigen::VectorXd id = hermitian_to_real(ComplexMatrix::Identity(cs.effect_dim, cs.effect_dim));
  for (int q = 0; q < n; ++q) {
    LinearConstraint c{std::vector<double>(static_cast<std::size_t>(cs.num_variables()), 0.0), 0.0, id(q),
                       "completeness" + std::to_string(q)};
    for (int e = 0; e < cs.num_effects; ++e) c.coeffs[static_cast<std::size_t>(e * n + q)] = 1.0;
    cs.constraints.push_back(std::move(c));
  }
  return cs;
}

/// Evaluates coeffs·x − target − λ·lambda_coeff for each constraint.
inline Eigen::VectorXd constraint_residuals(const ConstraintSystem& cs, const std::vector<Operator>& effects,
                                            double lambda) {
  if (static_cast<int>(effects.size()) != cs.num_effects) {
    throw std::invalid_argument("constraint_residuals: wrong number of effects");
  }
  const int n = hermitian_param_size(cs.effect_dim);
  Eigen::VectorXd x(cs.num_variables());
  for (int e = 0; e < cs.num_effects; ++e) x.segment(e * n, n) = hermitian_to_real(effects[static_cast<std::size_t>(e)].matrix());
  Eigen::VectorXd r(static_cast<Eigen::Index>(cs.constraints.size()));
  for (std::size_t i = 0; i < cs.constraints.size(); ++i) {
    const auto& c = cs.constraints[i];
    const Eigen::Map<const Eigen::VectorXd> row(c.coeffs.data(), static_cast<Eigen::Index>(c.coeffs.size()));
    r(static_cast<Eigen::Index>(i)) = row.dot(x) - c.target - lambda * c.lambda_coeff;
  }
  return r;
}

inline Povm povm_from_effects(const ConstraintSystem& cs, std::vector<Operator> effects, bool gpt_mode = false) {
  std::vector<PovmOutcome> out;
  for (std::size_t e = 0; e < effects.size(); ++e) out.push_back({cs.labels.at(e), std::move(effects[e])});
  return Povm(cs.copies, std::move(out), gpt_mode);
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json vec3_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

inline Vec3 vec3_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw std::invalid_argument("expected a 3-vector");
  return Vec3(v[0], v[1], v[2]);
}

inline void to_json(nlohmann::json& j, const Ensemble& e) {
  nlohmann::json states = nlohmann::json::array();
  for (const auto& s : e.states) states.push_back(vec3_json(s.vec()));
  j = nlohmann::json{{"label", e.label}, {"all", e.all}, {"states", states}};
}

inline void from_json(const nlohmann::json& j, Ensemble& e) {
  e.states.clear();
  e.label = j.is_object() ? j.value("label", std::string("file")) : std::string("file");
  e.all = j.is_object() ? j.value("all", false) : false;
  const auto& states = j.is_array() ? j : j.at("states");
  for (const auto& s : states) e.states.emplace_back(vec3_from_json(s));
}

inline void to_json(nlohmann::json& j, const ConstraintSystem& cs) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& c : cs.constraints) {
    rows.push_back({{"coeffs", c.coeffs}, {"lambda_coeff", c.lambda_coeff}, {"target", c.target}, {"tag", c.tag}});
  }
  nlohmann::json axes = nlohmann::json::array();
  for (const auto& a : cs.axes) axes.push_back(vec3_json(a));
  j = nlohmann::json{{"num_effects", cs.num_effects},
                     {"effect_dim", cs.effect_dim},
                     {"parametrization", "hermitian-real: diag, then sqrt2*(re, im) of upper off-diagonals"},
                     {"labels", cs.labels},
                     {"constraints", rows},
                     {"objective", "maximize lambda"},
                     {"metadata",
                      {{"axes", axes},
                       {"copies", cs.copies},
                       {"configuration", cs.configuration},
                       {"map", cs.map},
                       {"ensemble", cs.ensemble}}}};
}

inline void from_json(const nlohmann::json& j, ConstraintSystem& cs) {
  cs.num_effects = j.at("num_effects").get<int>();
  cs.effect_dim = j.at("effect_dim").get<int>();
  cs.labels = j.at("labels").get<std::vector<OutcomeLabel>>();
  cs.constraints.clear();
  for (const auto& r : j.at("constraints")) {
    cs.constraints.push_back({r.at("coeffs").get<std::vector<double>>(), r.at("lambda_coeff").get<double>(),
                              r.at("target").get<double>(), r.value("tag", std::string())});
    if (static_cast<int>(cs.constraints.back().coeffs.size()) != cs.num_variables()) {
      throw std::invalid_argument("ConstraintSystem JSON: constraint width mismatch");
    }
  }
  const auto& meta = j.at("metadata");
  cs.axes.clear();
  for (const auto& a : meta.at("axes")) cs.axes.push_back(vec3_from_json(a));
  cs.copies = meta.at("copies").get<int>();
  cs.configuration = meta.value("configuration", std::string());
  cs.map = meta.at("map").get<QubitMap>();
  cs.ensemble = meta.at("ensemble").get<Ensemble>();
}

}  // namespace spinpair
