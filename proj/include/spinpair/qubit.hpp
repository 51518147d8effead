#pragma once

// Qubit states, unsharp spin observables and qubit maps.

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "spinpair/matcore.hpp"

namespace spinpair {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Point in the closed unit ball; parametrizes ρ_m = ½(1 + m·σ).
class BlochVector {
 public:
  BlochVector() : m_(Vec3::Zero()) {}
  explicit BlochVector(const Vec3& m) : m_(m) {
    if (!(m_.norm() <= 1.0 + 1e-12)) {
      throw std::invalid_argument("BlochVector: norm " + std::to_string(m_.norm()) +
                                  " exceeds 1");
    }
  }
  BlochVector(double x, double y, double z) : BlochVector(Vec3(x, y, z)) {}

  const Vec3& vec() const { return m_; }
  double x() const { return m_.x(); }
  double y() const { return m_.y(); }
  double z() const { return m_.z(); }
  double norm() const { return m_.norm(); }
  BlochVector flipped() const { return BlochVector(-m_); }

  friend bool operator==(const BlochVector& a, const BlochVector& b) { return a.m_ == b.m_; }

 private:
  Vec3 m_;
};

inline Operator bloch_operator(const Vec3& v) {
  return v.x() * pauli_x() + v.y() * pauli_y() + v.z() * pauli_z();
}

inline Operator density_from_bloch(const BlochVector& m) {
  return 0.5 * (Operator::identity(2) + bloch_operator(m.vec()));
}

/// Expectation values (⟨X⟩, ⟨Y⟩, ⟨Z⟩) of a 2x2 operator.
inline Vec3 bloch_of(const Operator& rho) {
  if (rho.dim() != 2) throw std::invalid_argument("bloch_of: operator must be 2x2");
  return Vec3(trace_inner(rho, pauli_x()).real(), trace_inner(rho, pauli_y()).real(),
              trace_inner(rho, pauli_z()).real());
}

/// ½(1 + λ a m·n̂).
inline double born_probability(const BlochVector& m, const Vec3& axis, int outcome,
                               double sharpness) {
  if (outcome != 1 && outcome != -1) {
    throw std::invalid_argument("born_probability: outcome must be +1 or -1");
  }
  if (sharpness < 0.0 || sharpness > 1.0) {
    throw std::invalid_argument("born_probability: sharpness must lie in [0, 1]");
  }
  return 0.5 * (1.0 + sharpness * outcome * m.vec().dot(axis));
}

/// Two-outcome spin observable along a unit axis with sharpness λ.
class UnsharpObservable {
 public:
  UnsharpObservable(const Vec3& axis, double sharpness) : axis_(axis), sharpness_(sharpness) {
    if (std::abs(axis_.norm() - 1.0) > 1e-12) {
      throw std::invalid_argument("UnsharpObservable: axis must be a unit vector");
    }
    if (sharpness_ < 0.0 || sharpness_ > 1.0) {
      throw std::invalid_argument("UnsharpObservable: sharpness must lie in [0, 1]");
    }
  }

  const Vec3& axis() const { return axis_; }
  double sharpness() const { return sharpness_; }

  /// P^{+} is built directly and P^{-} = 1 − P^{+}, so completeness is exact.
  Operator effect(int outcome) const {
    Operator plus = 0.5 * (Operator::identity(2) + sharpness_ * bloch_operator(axis_));
    if (outcome == 1) return plus;
    if (outcome == -1) return Operator::identity(2) - plus;
    throw std::invalid_argument("UnsharpObservable::effect: outcome must be +1 or -1");
  }

 private:
  Vec3 axis_;
  double sharpness_;
};

// ---------------------------------------------------------------------------
// Qubit maps

/// Hermiticity-preserving linear map on 2x2 operators, stored as its real Pauli
/// transfer matrix T: Λ(σ_q) = Σ_p T(p, q) σ_p with index order (1, X, Y, Z).
/// Trace-preserving maps have first row (1, 0, 0, 0) and are the affine Bloch
/// maps m ↦ t + M m with M = T[1:3, 1:3], t = T[1:3, 0].
class QubitMap {
 public:
  QubitMap() : transfer_(Mat4::Identity()), label_("id") {}

  QubitMap(const Mat3& bloch_matrix, const Vec3& shift, std::string label)
      : transfer_(Mat4::Identity()), label_(std::move(label)) {
    transfer_.block<3, 3>(1, 1) = bloch_matrix;
    transfer_.block<3, 1>(1, 0) = shift;
  }

  static QubitMap from_transfer(const Mat4& transfer, std::string label) {
    QubitMap out;
    out.transfer_ = transfer;
    out.label_ = std::move(label);
    return out;
  }

  const Mat4& transfer() const { return transfer_; }
  Mat3 bloch_matrix() const { return transfer_.block<3, 3>(1, 1); }
  Vec3 shift() const { return transfer_.block<3, 1>(1, 0); }
  Eigen::Vector4d trace_row() const { return transfer_.row(0).transpose(); }
  const std::string& label() const { return label_; }

  bool is_trace_preserving(double tol = 1e-12) const {
    return (trace_row() - Eigen::Vector4d(1, 0, 0, 0)).cwiseAbs().maxCoeff() <= tol;
  }

  bool is_unital(double tol = 1e-12) const {
    return transfer_.block<3, 1>(1, 0).cwiseAbs().maxCoeff() <= tol &&
           std::abs(transfer_(0, 0) - 1.0) <= tol;
  }

  /// Pauli-coefficient action: c_out = T c_in, with X = Σ c_p σ_p.
  Eigen::Vector4cd act_on_coefficients(const Eigen::Vector4cd& c) const {
    return transfer_.cast<complex>() * c;
  }

  Operator apply(const Operator& x) const {
    if (x.dim() != 2) throw std::invalid_argument("QubitMap::apply: operator must be 2x2");
    const PauliCoefficients pc = pauli_expand(x);
    Eigen::Vector4cd c(pc.coeffs[0], pc.coeffs[1], pc.coeffs[2], pc.coeffs[3]);
    Eigen::Vector4cd out = act_on_coefficients(c);
    return pauli_reconstruct(PauliCoefficients{1, {out(0), out(1), out(2), out(3)}});
  }

  /// Bloch vector image for trace-preserving maps: t + M m.
  Vec3 apply_bloch(const Vec3& m) const { return shift() + bloch_matrix() * m; }

 private:
  Mat4 transfer_;
  std::string label_;
};

inline QubitMap map_identity() { return QubitMap(Mat3::Identity(), Vec3::Zero(), "id"); }

inline QubitMap map_spin_flip() { return QubitMap(-Mat3::Identity(), Vec3::Zero(), "F"); }

/// F_μ(ρ_m) = ½(1 − μ m·σ).
inline QubitMap map_f_mu(double mu) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("map_f_mu: μ must lie in [0, 1]");
  return QubitMap(-mu * Mat3::Identity(), Vec3::Zero(), "F_mu:" + std::to_string(mu));
}

/// ρ ↦ p ρ + (1 − p) 1/2, i.e. Bloch contraction by p.
inline QubitMap map_depolarizing(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("map_depolarizing: parameter must lie in [0, 1]");
  }
  return QubitMap(p * Mat3::Identity(), Vec3::Zero(), "depolarizing:" + std::to_string(p));
}

/// (a ∘ b)(x) = a(b(x))
inline QubitMap map_compose(const QubitMap& a, const QubitMap& b) {
  return QubitMap::from_transfer(a.transfer() * b.transfer(), a.label() + "∘" + b.label());
}

/// Tr[A Λ(B)] = Tr[Λ*(A) B]. With Tr[σ_p σ_q] = 2δ_pq the dual transfer matrix
/// is the transpose, so a trace-preserving map has a unital dual.
inline QubitMap map_dual(const QubitMap& map) {
  return QubitMap::from_transfer(map.transfer().transpose(), map.label() + "*");
}

/// (id₂ ⊗ Λ)(Π) for a 4x4 operator, by linearity over the second factor.
inline Operator map_apply_on_second(const QubitMap& map, const Operator& op) {
  if (op.dim() != 4) throw std::invalid_argument("map_apply_on_second: operator must be 4x4");
  const PauliCoefficients pc = pauli_expand(op);
  Eigen::Matrix4cd c;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q) c(p, q) = pc.at(p, q);
  // Π = Σ C_pq σ_p⊗σ_q  ↦  Σ C_pq σ_p⊗Λ(σ_q) = Σ (C Tᵀ)_pr σ_p⊗σ_r
  const Eigen::Matrix4cd out = c * map.transfer().transpose().cast<complex>();
  PauliCoefficients res{2, std::vector<complex>(16)};
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q) res.coeffs[static_cast<std::size_t>(4 * p + q)] = out(p, q);
  return pauli_reconstruct(res);
}

// ---------------------------------------------------------------------------
// Positivity

/// Result of the positivity test. `margin` is min over pure inputs ρ_s of
/// (c0(s) − |c(s)|) where Λ(ρ_s) = c0 1 + c·σ; PSD outputs ⇔ margin ≥ 0.
/// For trace-preserving maps `max_bloch_norm` = max |t + M s| and the verdict
/// uses it directly.
struct PositivityCertificate {
  bool positive = false;
  Vec3 witness = Vec3::UnitZ();
  double margin = 0.0;
  double max_bloch_norm = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

/// Vertices of a subdivided icosahedron projected to the unit sphere.
inline std::vector<Vec3> icosphere(int subdivisions) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
                             {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
                             {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    std::vector<std::pair<std::pair<int, int>, int>> cache;
    auto midpoint = [&](int a, int b) {
      const std::pair<int, int> key = std::minmax(a, b);
      for (const auto& [k, idx] : cache)
        if (k == key) return idx;
      verts.push_back((verts[static_cast<std::size_t>(a)] + verts[static_cast<std::size_t>(b)]).normalized());
      const int idx = static_cast<int>(verts.size()) - 1;
      cache.push_back({key, idx});
      return idx;
    };
    for (const auto& f : faces) {
      const int a = midpoint(f[0], f[1]);
      const int b = midpoint(f[1], f[2]);
      const int c = midpoint(f[2], f[0]);
      next.push_back({f[0], a, c});
      next.push_back({f[1], b, a});
      next.push_back({f[2], c, b});
      next.push_back({a, b, c});
    }
    faces = std::move(next);
  }
  return verts;
}

inline const std::vector<Vec3>& sphere_grid() {
  static const std::vector<Vec3> grid = icosphere(4);  // 2562 points
  return grid;
}

}  // namespace detail

/// Positivity margin c0(s) − |c(s)| of Λ(ρ_s).
inline double positivity_margin(const QubitMap& map, const Vec3& s) {
  const Eigen::Vector4d out = 0.5 * map.transfer() * Eigen::Vector4d(1.0, s.x(), s.y(), s.z());
  return out(0) - out.tail<3>().norm();
}

inline PositivityCertificate map_is_positive(const QubitMap& map, double tol = 1e-10) {
  PositivityCertificate cert;
  const Mat3 M = map.bloch_matrix();
  const Vec3 t = map.shift();

  if (map.is_trace_preserving() && t.norm() == 0.0) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(M.transpose() * M);
    const double top = std::max(es.eigenvalues()(2), 0.0);
    cert.max_bloch_norm = std::sqrt(top);
    cert.witness = es.eigenvectors().col(2).normalized();
    cert.margin = 0.5 * (1.0 - cert.max_bloch_norm);
    cert.positive = cert.max_bloch_norm <= 1.0 + tol;
    return cert;
  }

  // Grid search, then projected gradient descent on the margin from the best
  // three grid points.
  const auto& grid = detail::sphere_grid();
  std::vector<std::pair<double, Vec3>> scored;
  scored.reserve(grid.size());
  for (const auto& s : grid) scored.push_back({positivity_margin(map, s), s});
  std::partial_sort(scored.begin(), scored.begin() + 3, scored.end(),
                    [](const auto& a, const auto& b) { return a.first < b.first; });

  const Eigen::Vector3d grad_c0 = 0.5 * map.transfer().block<1, 3>(0, 1).transpose();
  const Mat3 C = 0.5 * map.transfer().block<3, 3>(1, 1);
  const Vec3 c_shift = 0.5 * map.transfer().block<3, 1>(1, 0);
  const double lip = std::max(1e-12, grad_c0.norm() + C.norm());

  cert.margin = std::numeric_limits<double>::infinity();
  for (int start = 0; start < 3; ++start) {
    Vec3 s = scored[static_cast<std::size_t>(start)].second;
    double value = scored[static_cast<std::size_t>(start)].first;
    double step = 0.5 / lip;
    for (int it = 0; it < 2000 && step > 1e-16; ++it) {
      const Vec3 c = c_shift + C * s;
      const double cn = c.norm();
      Vec3 grad = grad_c0;
      if (cn > 0.0) grad -= C.transpose() * (c / cn);
      const Vec3 tangent = grad - grad.dot(s) * s;
      if (tangent.norm() < 1e-15) break;
      const Vec3 trial = (s - step * tangent).normalized();
      const double tv = positivity_margin(map, trial);
      if (tv < value) {
        s = trial;
        value = tv;
        step *= 1.5;
      } else {
        step *= 0.5;
      }
    }
    if (value < cert.margin) {
      cert.margin = value;
      cert.witness = s;
    }
  }

  if (map.is_trace_preserving()) {
    cert.max_bloch_norm = (t + M * cert.witness).norm();
    cert.positive = cert.max_bloch_norm <= 1.0 + tol;
  } else {
    cert.positive = cert.margin >= -tol;
  }
  return cert;
}

// ---------------------------------------------------------------------------
// Choi operator

/// (id₂ ⊗ Λ)(|φ⁺⟩⟨φ⁺|) with |φ⁺⟩⟨φ⁺| = ¼(11 + XX − YY + ZZ); unit trace for
/// trace-preserving Λ.
inline Operator map_choi(const QubitMap& map) {
  static constexpr std::array<double, 4> kSigns = {1.0, 1.0, -1.0, 1.0};
  Operator out = Operator::zero(4);
  for (int p = 0; p < 4; ++p) {
    Operator image = Operator::zero(2);
    for (int r = 0; r < 4; ++r) image += map.transfer()(r, p) * pauli(r);
    out += (0.25 * kSigns[static_cast<std::size_t>(p)]) * kron(pauli(p), image);
  }
  return out;
}

inline bool map_is_cp(const QubitMap& map, double tol = 1e-10) {
  return min_eigenvalue(map_choi(map)) >= -tol;
}

// ---------------------------------------------------------------------------
// JSON: {label, M: 9 reals row-major, t: 3 reals}; non-trace-preserving maps
// additionally carry "trace_row" (4 reals).

inline void to_json(nlohmann::json& j, const QubitMap& map) {
  const Mat3 M = map.bloch_matrix();
  std::vector<double> m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m.push_back(M(r, c));
  const Vec3 t = map.shift();
  j = nlohmann::json{{"label", map.label()}, {"M", m}, {"t", {t.x(), t.y(), t.z()}}};
  if (!map.is_trace_preserving(0.0)) {
    const auto row = map.trace_row();
    j["trace_row"] = {row(0), row(1), row(2), row(3)};
  }
}

inline void from_json(const nlohmann::json& j, QubitMap& map) {
  const auto m = j.at("M").get<std::vector<double>>();
  const auto t = j.at("t").get<std::vector<double>>();
  if (m.size() != 9 || t.size() != 3) {
    throw std::invalid_argument("QubitMap JSON: M needs 9 entries and t needs 3");
  }
  Mat4 T = Mat4::Identity();
  for (int r = 0; r < 3; ++r) {
    T(r + 1, 0) = t[static_cast<std::size_t>(r)];
    for (int c = 0; c < 3; ++c) T(r + 1, c + 1) = m[static_cast<std::size_t>(3 * r + c)];
  }
  if (j.contains("trace_row")) {
    const auto row = j.at("trace_row").get<std::vector<double>>();
    if (row.size() != 4) throw std::invalid_argument("QubitMap JSON: trace_row needs 4 entries");
    for (int c = 0; c < 4; ++c) T(0, c) = row[static_cast<std::size_t>(c)];
  }
  map = QubitMap::from_transfer(T, j.value("label", std::string("map")));
}

}  // namespace spinpair
