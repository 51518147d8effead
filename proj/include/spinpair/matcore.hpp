#pragma once

// Dense complex linear algebra on one- and two-qubit operators.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace spinpair {

using complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

inline constexpr double kHermitianTol = 1e-10;

/// A 2x2 or 4x4 complex matrix. States, effects and witnesses all live here.
class Operator {
 public:
  Operator() : m_(ComplexMatrix::Zero(2, 2)) {}

  explicit Operator(ComplexMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || (m_.rows() != 2 && m_.rows() != 4)) {
      throw std::invalid_argument("Operator: dimension must be 2x2 or 4x4, got " +
                                  std::to_string(m_.rows()) + "x" +
                                  std::to_string(m_.cols()));
    }
  }

  static Operator zero(int dim) { return Operator(ComplexMatrix::Zero(dim, dim)); }
  static Operator identity(int dim) {
    return Operator(ComplexMatrix::Identity(dim, dim));
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }
  complex operator()(int r, int c) const { return m_(r, c); }

  Operator adjoint() const { return Operator(m_.adjoint()); }
  complex trace() const { return m_.trace(); }

  bool is_hermitian(double tol = kHermitianTol) const {
    return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol;
  }

  /// Max-entry distance; the norm used by every operator tolerance here.
  double max_abs_diff(const Operator& other) const {
    require_same_dim(other, "max_abs_diff");
    return (m_ - other.m_).cwiseAbs().maxCoeff();
  }

  Operator& operator+=(const Operator& o) {
    require_same_dim(o, "operator+=");
    m_ += o.m_;
    return *this;
  }
  Operator& operator-=(const Operator& o) {
    require_same_dim(o, "operator-=");
    m_ -= o.m_;
    return *this;
  }
  Operator& operator*=(complex s) {
    m_ *= s;
    return *this;
  }

  friend Operator operator+(Operator a, const Operator& b) { return a += b; }
  friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
  friend Operator operator*(complex s, Operator a) { return a *= s; }
  friend Operator operator*(Operator a, complex s) { return a *= s; }
  friend Operator operator*(const Operator& a, const Operator& b) {
    a.require_same_dim(b, "operator*");
    return Operator(a.m_ * b.m_);
  }

  friend bool operator==(const Operator& a, const Operator& b) {
    return a.m_.rows() == b.m_.rows() && a.m_ == b.m_;
  }

 private:
  void require_same_dim(const Operator& o, const char* what) const {
    if (o.dim() != dim()) {
      throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                  std::to_string(dim()) + " vs " +
                                  std::to_string(o.dim()) + ")");
    }
  }

  ComplexMatrix m_;
};

/// Pauli matrices indexed 0..3 as (1, X, Y, Z).
inline const Operator& pauli(int index) {
  static const std::array<Operator, 4> kPaulis = [] {
    ComplexMatrix id = ComplexMatrix::Identity(2, 2);
    ComplexMatrix x(2, 2), y(2, 2), z(2, 2);
    x << 0, 1, 1, 0;
    y << 0, complex(0, -1), complex(0, 1), 0;
    z << 1, 0, 0, -1;
    return std::array<Operator, 4>{Operator(id), Operator(x), Operator(y),
                                   Operator(z)};
  }();
  if (index < 0 || index > 3) throw std::out_of_range("pauli: index must be 0..3");
  return kPaulis[static_cast<std::size_t>(index)];
}

inline const Operator& pauli_x() { return pauli(1); }
inline const Operator& pauli_y() { return pauli(2); }
inline const Operator& pauli_z() { return pauli(3); }

inline Operator kron(const Operator& a, const Operator& b) {
  if (a.dim() != 2 || b.dim() != 2) {
    throw std::invalid_argument("kron: both factors must be 2x2");
  }
  ComplexMatrix out(4, 4);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) out.block(2 * r, 2 * c, 2, 2) = a(r, c) * b.matrix();
  return Operator(std::move(out));
}

/// {U,V} := U⊗V + V⊗U
inline Operator anticommutator_kron(const Operator& u, const Operator& v) {
  return kron(u, v) + kron(v, u);
}

/// [U,V] := U⊗V − V⊗U
inline Operator commutator_kron(const Operator& u, const Operator& v) {
  return kron(u, v) - kron(v, u);
}

inline complex trace_inner(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("trace_inner: dimension mismatch");
  // Tr[AB] = sum_rc A_rc B_cr
  return (a.matrix().cwiseProduct(b.matrix().transpose())).sum();
}

inline Operator outer(const Eigen::VectorXcd& v) { return Operator(v * v.adjoint()); }

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition (cyclic Jacobi)

struct HermitianEig {
  Eigen::VectorXd values;  // ascending
  ComplexMatrix vectors;   // columns, orthonormal
};

namespace detail {

// Applies the unitary J = D·R to a in place (a <- J† a J) and accumulates v <- v J,
// where D puts phase e^{-iφ} on index q and R is a real plane rotation in (p, q).
inline void jacobi_rotate(ComplexMatrix& a, ComplexMatrix& v, int p, int q) {
  const complex apq = a(p, q);
  const double g = std::abs(apq);
  if (g == 0.0) return;
  const complex phase = apq / g;  // e^{iφ}
  const complex phase_conj = std::conj(phase);
  const double app = a(p, p).real();
  const double aqq = a(q, q).real();
  const double theta = (aqq - app) / (2.0 * g);
  const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const int n = static_cast<int>(a.rows());

  for (int i = 0; i < n; ++i) {
    const complex x = a(i, p);
    const complex y = a(i, q) * phase_conj;
    a(i, p) = c * x - s * y;
    a(i, q) = s * x + c * y;
  }
  for (int i = 0; i < n; ++i) {
    const complex x = a(p, i);
    const complex y = a(q, i) * phase;
    a(p, i) = c * x - s * y;
    a(q, i) = s * x + c * y;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  a(p, p) = a(p, p).real();
  a(q, q) = a(q, q).real();

  for (int i = 0; i < n; ++i) {
    const complex x = v(i, p);
    const complex y = v(i, q) * phase_conj;
    v(i, p) = c * x - s * y;
    v(i, q) = s * x + c * y;
  }
}

}  // namespace detail

/// Eigen-decomposes a Hermitian matrix. Throws on non-Hermitian input.
inline HermitianEig hermitian_eig(const ComplexMatrix& h, double herm_tol = kHermitianTol) {
  const int n = static_cast<int>(h.rows());
  if (h.cols() != n) throw std::invalid_argument("hermitian_eig: matrix must be square");
  if (n > 0 && (h - h.adjoint()).cwiseAbs().maxCoeff() > herm_tol) {
    throw std::invalid_argument("hermitian_eig: input is not Hermitian");
  }
  ComplexMatrix a = 0.5 * (h + h.adjoint());
  ComplexMatrix v = ComplexMatrix::Identity(n, n);

  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
    if (off <= 1e-17 * scale) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) detail::jacobi_rotate(a, v, p, q);
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int l, int r) { return a(l, l).real() < a(r, r).real(); });
  HermitianEig out{Eigen::VectorXd(n), ComplexMatrix(n, n)};
  for (int k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]).real();
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

inline HermitianEig hermitian_eig(const Operator& h, double herm_tol = kHermitianTol) {
  return hermitian_eig(h.matrix(), herm_tol);
}

inline double min_eigenvalue(const Operator& h) { return hermitian_eig(h).values(0); }

// ---------------------------------------------------------------------------
// Pauli-basis expansion

/// Coefficients over Pauli words, word index = sum_f p_f * 4^(order-1-f) with
/// per-factor order (1, X, Y, Z).
struct PauliCoefficients {
  int order = 1;
  std::vector<complex> coeffs;

  complex operator[](std::size_t word) const { return coeffs.at(word); }
  complex at(int first, int second) const {
    if (order != 2) throw std::logic_error("PauliCoefficients::at(p, q) needs order 2");
    return coeffs.at(static_cast<std::size_t>(4 * first + second));
  }
  std::vector<double> real() const {
    std::vector<double> out(coeffs.size());
    std::transform(coeffs.begin(), coeffs.end(), out.begin(),
                   [](complex c) { return c.real(); });
    return out;
  }
  double max_imag() const {
    double m = 0.0;
    for (auto c : coeffs) m = std::max(m, std::abs(c.imag()));
    return m;
  }
};

inline Operator pauli_word(std::size_t word, int order) {
  if (order == 1) return pauli(static_cast<int>(word));
  if (order == 2) return kron(pauli(static_cast<int>(word / 4)), pauli(static_cast<int>(word % 4)));
  throw std::invalid_argument("pauli_word: order must be 1 or 2");
}

inline PauliCoefficients pauli_expand(const Operator& h) {
  const int order = h.dim() == 2 ? 1 : 2;
  const std::size_t words = order == 1 ? 4 : 16;
  PauliCoefficients out{order, std::vector<complex>(words)};
  for (std::size_t w = 0; w < words; ++w) {
    out.coeffs[w] = trace_inner(h, pauli_word(w, order)) / static_cast<double>(h.dim());
  }
  return out;
}

inline Operator pauli_reconstruct(const PauliCoefficients& pc) {
  const int dim = pc.order == 1 ? 2 : 4;
  Operator out = Operator::zero(dim);
  for (std::size_t w = 0; w < pc.coeffs.size(); ++w) {
    if (pc.coeffs[w] != 0.0) out += pc.coeffs[w] * pauli_word(w, pc.order);
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON: {dim, re: row-major, im: row-major}

inline void to_json(nlohmann::json& j, const Operator& op) {
  std::vector<double> re, im;
  re.reserve(static_cast<std::size_t>(op.dim() * op.dim()));
  im.reserve(re.capacity());
  for (int r = 0; r < op.dim(); ++r)
    for (int c = 0; c < op.dim(); ++c) {
      re.push_back(op(r, c).real());
      im.push_back(op(r, c).imag());
    }
  j = nlohmann::json{{"dim", op.dim()}, {"re", re}, {"im", im}};
}

inline void from_json(const nlohmann::json& j, Operator& op) {
  const int dim = j.at("dim").get<int>();
  const auto re = j.at("re").get<std::vector<double>>();
  const auto im = j.at("im").get<std::vector<double>>();
  const auto n = static_cast<std::size_t>(dim * dim);
  if (re.size() != n || im.size() != n) {
    throw std::invalid_argument("Operator JSON: expected " + std::to_string(n) + " entries");
  }
  ComplexMatrix m(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) {
      const auto k = static_cast<std::size_t>(r * dim + c);
      m(r, c) = complex(re[k], im[k]);
    }
  op = Operator(std::move(m));
}

}  // namespace spinpair
