#pragma once

// Named verification experiments. Each command returns a RunReport whose
// checks serialize as JSON lines; everything except runtime_ms is a pure
// function of the inputs and the seed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinpair/compat.hpp"
#include "spinpair/gptcheck.hpp"
#include "spinpair/povm.hpp"
#include "spinpair/qubit.hpp"
#include "spinpair/sampling.hpp"
#include "spinpair/sdpsolve.hpp"

namespace spinpair {

struct CheckResult {
  std::string name;
  bool passed = false;
  nlohmann::json value;
  std::optional<double> tolerance;
  nlohmann::json detail = nlohmann::json::object();
};

struct RunReport {
  std::string command;
  nlohmann::json inputs = nlohmann::json::object();
  std::vector<CheckResult> checks;
  long runtime_ms = 0;
  std::uint64_t seed = kDefaultSeed;

  bool passed() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
  }

  /// One line per check, then a summary line.
  std::string to_jsonl(bool with_runtime = true) const {
    std::ostringstream out;
    for (const auto& c : checks) {
      nlohmann::json j{{"command", command}, {"check", c.name}, {"passed", c.passed}, {"value", c.value},
                       {"tolerance", c.tolerance ? nlohmann::json(*c.tolerance) : nlohmann::json(nullptr)},
                       {"seed", seed}};
      if (!c.detail.empty()) j["detail"] = c.detail;
      out << j.dump() << "\n";
    }
    nlohmann::json summary{{"command", command}, {"summary", true}, {"passed", passed()},
                           {"checks", checks.size()},      {"inputs", inputs}, {"seed", seed}};
    if (with_runtime) summary["runtime_ms"] = runtime_ms;
    out << summary.dump() << "\n";
    return out.str();
  }

  std::string to_csv() const {
    std::ostringstream out;
    out << "command,check,passed,value,tolerance\n";
    out << std::setprecision(17);
    for (const auto& c : checks) {
      out << command << "," << c.name << "," << (c.passed ? "true" : "false") << ",";
      if (c.value.is_number()) out << c.value.get<double>();
      else if (c.value.is_boolean()) out << (c.value.get<bool>() ? "true" : "false");
      out << ",";
      if (c.tolerance) out << *c.tolerance;
      out << "\n";
    }
    return out.str();
  }
};

/// Numeric check: passes when the comparison holds.
inline CheckResult check_le(std::string name, double value, double tol, nlohmann::json detail = nlohmann::json::object()) {
  return {std::move(name), value <= tol, value, tol, std::move(detail)};
}

inline CheckResult check_ge(std::string name, double value, double tol, nlohmann::json detail = nlohmann::json::object()) {
  return {std::move(name), value >= tol, value, tol, std::move(detail)};
}

inline CheckResult check_near(std::string name, double value, double expected, double tol,
                              nlohmann::json detail = nlohmann::json::object()) {
  detail["expected"] = expected;
  return {std::move(name), std::abs(value - expected) <= tol, value, tol, std::move(detail)};
}

inline CheckResult check_true(std::string name, bool ok, nlohmann::json detail = nlohmann::json::object()) {
  return {std::move(name), ok, ok, std::nullopt, std::move(detail)};
}

/// Residual tolerance for the SDP, overridable through SPINPAIR_TOL.
inline double residual_tolerance(double fallback = SolverOptions{}.feasibility_tol) {
  const char* env = std::getenv("SPINPAIR_TOL");
  if (!env || !*env) return fallback;
  char* end = nullptr;
  const double v = std::strtod(env, &end);
  if (end == env || *end != '\0' || !(v > 0.0)) throw std::invalid_argument(std::string("SPINPAIR_TOL: bad value '") + env + "'");
  return v;
}

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  long ms() const {
    return static_cast<long>(
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start_).count());
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline double round4(double v) { return std::round(v * 1e4) / 1e4; }

inline double min_of(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Spec parsing

inline std::vector<Vec3> parse_axes(const std::string& spec) {
  std::string upper;
  for (char c : spec) upper += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (!upper.empty() && upper.find_first_not_of("XYZ") == std::string::npos) {
    for (std::size_t i = 0; i < upper.size(); ++i)
      if (upper.find(upper[i], i + 1) != std::string::npos) throw std::invalid_argument("axes: repeated axis in '" + spec + "'");
    std::vector<Vec3> out;
    for (char c : upper) out.push_back(c == 'X' ? Vec3::UnitX() : c == 'Y' ? Vec3::UnitY() : Vec3::UnitZ());
    return out;
  }
  // Explicit vectors: "x,y,z;x,y,z".
  std::vector<Vec3> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ';')) {
    std::stringstream vs(item);
    std::string num;
    std::vector<double> v;
    while (std::getline(vs, num, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(num, &used));
        if (used != num.size()) throw std::invalid_argument(num);
      } catch (const std::exception&) {
        throw std::invalid_argument("axes: cannot parse '" + num + "'");
      }
    }
    if (v.size() != 3) throw std::invalid_argument("axes: each vector needs 3 components, got '" + item + "'");
    const Vec3 a(v[0], v[1], v[2]);
    if (std::abs(a.norm() - 1.0) > 1e-6) throw std::invalid_argument("axes: '" + item + "' is not a unit vector");
    out.push_back(a.normalized());
  }
  if (out.empty() || out.size() > 3) throw std::invalid_argument("axes: need 1 to 3 axes");
  return out;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("'" + path + "': " + e.what());
  }
}

inline Configuration parse_configuration(const std::string& spec) {
  if (spec == "single") return Configuration::single();
  if (spec == "parallel") return Configuration::parallel();
  if (spec == "antiparallel") return Configuration::antiparallel();
  if (spec.rfind("fmu:", 0) == 0) {
    const std::string arg = spec.substr(4);
    std::size_t used = 0;
    double mu = 0.0;
    try {
      mu = std::stod(arg, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != arg.size()) throw std::invalid_argument("config: bad μ in '" + spec + "'");
    return Configuration::with_map(map_f_mu(mu));
  }
  if (spec.rfind("map:", 0) == 0) return Configuration::with_map(read_json_file(spec.substr(4)).get<QubitMap>());
  throw std::invalid_argument("config: expected single|parallel|antiparallel|fmu:<mu>|map:<file>, got '" + spec + "'");
}

inline Ensemble parse_ensemble(const std::string& spec) {
  if (spec == "all") return Ensemble::every_state();
  if (spec == "tet") return ensemble_tetrahedral();
  if (spec == "oct") return ensemble_octahedral();
  if (spec.rfind("gc:", 0) == 0) {
    const std::string arg = spec.substr(3);
    const auto comma = arg.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("ensemble: expected gc:<n>,<plane>");
    int n = 0;
    try {
      std::size_t used = 0;
      n = std::stoi(arg.substr(0, comma), &used);
      if (used != comma) throw std::invalid_argument(arg);
    } catch (const std::exception&) {
      throw std::invalid_argument("ensemble: bad count in '" + spec + "'");
    }
    return ensemble_great_circle(n, parse_plane(arg.substr(comma + 1)));
  }
  if (spec.rfind("file:", 0) == 0) {
    Ensemble e = read_json_file(spec.substr(5)).get<Ensemble>();
    if (e.states.empty() && !e.all) throw std::invalid_argument("ensemble: file has no states");
    return e;
  }
  throw std::invalid_argument("ensemble: expected all|gc:<n>,<plane>|tet|oct|file:<path>, got '" + spec + "'");
}

// ---------------------------------------------------------------------------
// verify

inline const std::vector<std::string>& verify_selectors() {
  static const std::vector<std::string> s = {"t1", "t2", "t3", "prop1", "app1", "app2", "app3", "app4"};
  return s;
}

namespace verify {

inline constexpr std::size_t kRandomStates = 1000;

inline std::vector<CheckResult> t1(std::uint64_t seed) {
  const Povm g = build_antiparallel_povm();
  const auto rep = validate_povm(g, 1e-12);
  return {check_ge("t1.min_eigenvalue", detail::min_of(rep.min_eigenvalues), -1e-12),
          check_le("t1.completeness", rep.completeness_residual, 1e-12),
          check_le("t1.antiparallel_reproduction",
                   check_reproduction(g, Configuration::antiparallel(), axes_xyz(), 1.0, Ensemble::every_state(),
                                      kRandomStates, seed),
                   1e-12, {{"states", kRandomStates}, {"lambda", 1.0}})};
}

inline std::vector<CheckResult> t2(std::uint64_t seed) {
  std::vector<CheckResult> out;
  const Povm g = build_gpt_povm();
  const GptReport rep = certify_gpt_povm(g);
  const Povm anti = build_antiparallel_povm();
  for (std::size_t e = 0; e < g.size(); ++e) {
    const std::string id = label_string(g[e].label);
    const auto& cert = rep.certificates[e];
    out.push_back(check_le("t2.negative_eigenvalue" + id, min_eigenvalue(g[e].effect), -1e-3));
    out.push_back(check_ge("t2.product_min" + id, cert.min_product_value, -kGptTol,
                           {{"worst_r", vec3_json(cert.worst_r)}, {"worst_s", vec3_json(cert.worst_s)}}));
    out.push_back(check_le("t2.product_max" + id, cert.max_product_value, 1.0 + kGptTol));
    out.push_back(check_true("t2.choi_map_positive" + id, cert.choi_map_positive));
  }
  out.push_back(check_le("t2.completeness", rep.completeness_residual, 1e-12));
  out.push_back(check_le("t2.parallel_reproduction",
                         check_reproduction(g, Configuration::parallel(), axes_xyz(), 1.0, Ensemble::every_state(),
                                            kRandomStates, seed),
                         1e-12, {{"states", kRandomStates}, {"lambda", 1.0}}));
  const Povm flipped = flip_second_factor(g);
  double dev = 0.0;
  for (std::size_t e = 0; e < g.size(); ++e) dev = std::max(dev, flipped[e].effect.max_abs_diff(anti[e].effect));
  out.push_back(check_le("t2.flip_identity", dev, 1e-12));
  return out;
}

inline std::vector<QubitMap> cp_family() {
  return {map_f_mu(0.0), map_f_mu(0.2), map_f_mu(1.0 / 3.0), map_depolarizing(0.5)};
}

inline std::vector<CheckResult> t3(std::uint64_t seed, const SolverOptions& opts) {
  std::vector<CheckResult> out;
  const SdpSolution par = solve_max_sharpness(
      build_constraints(axes_xyz(), Configuration::parallel(), Ensemble::every_state()), opts);
  for (const QubitMap& lam : cp_family()) {
    const std::string tag = "[" + lam.label() + "]";
    out.push_back(check_true("t3.cp" + tag, map_is_cp(lam)));
    const auto cs = build_constraints(axes_xyz(), Configuration::with_map(lam), Ensemble::every_state());
    const SdpSolution s = solve_max_sharpness(cs, opts);
    out.push_back(check_le("t3.lambda_gap" + tag, s.lambda_opt - par.lambda_opt, 2e-3,
                           {{"lambda_map", s.lambda_opt}, {"lambda_parallel", par.lambda_opt},
                            {"status", to_string(s.status)}}));
    const Povm moved = dual_transfer(povm_from_effects(cs, s.effects), lam);
    const auto rep = validate_povm(moved, 1e-8);
    out.push_back(check_ge("t3.transfer_min_eigenvalue" + tag, detail::min_of(rep.min_eigenvalues), -1e-8));
    out.push_back(check_le("t3.transfer_completeness" + tag, rep.completeness_residual, 1e-8));
    out.push_back(check_le("t3.transfer_reproduction" + tag,
                           check_reproduction(moved, Configuration::parallel(), axes_xyz(), s.lambda_opt,
                                              Ensemble::every_state(), kRandomStates, seed),
                           1e-6, {{"lambda", s.lambda_opt}}));
  }
  return out;
}

inline std::vector<double> mu_grid(int grid) {
  std::vector<double> mus;
  for (int k = 0; k < grid; ++k) mus.push_back(grid == 1 ? 0.0 : double(k) / (grid - 1));
  return mus;
}

inline std::vector<CheckResult> prop1(std::uint64_t seed) {
  std::vector<CheckResult> out;
  const Povm g = build_antiparallel_povm();
  double worst = 0.0;
  for (double mu : mu_grid(21)) {
    const double err = check_reproduction(g, Configuration::with_map(map_f_mu(mu)), axes_xyz(), 0.5 * (1.0 + mu),
                                          Ensemble::every_state(), kRandomStates, seed);
    worst = std::max(worst, err);
  }
  out.push_back(check_le("prop1.fmu_reproduction", worst, 1e-10, {{"grid", 21}, {"states", kRandomStates}}));
  out.push_back(check_true("prop1.antiparallel_povm_valid", validate_povm(g, 1e-12).passed));
  return out;
}

inline std::vector<CheckResult> app1() {
  std::vector<CheckResult> out;
  double second = 0.0, xi_dev = 0.0, norm_dev = 0.0;
  for (const auto& l : outcome_labels(3)) {
    const Operator e = antiparallel_effect(l[0], l[1], l[2]);
    second = std::max(second, std::abs(hermitian_eig(e).values(2)));
    const Eigen::Vector4cd v = xi_vector(l[0], l[1], l[2]).computational();
    norm_dev = std::max(norm_dev, std::abs(v.norm() - 1.0));
    xi_dev = std::max(xi_dev, e.max_abs_diff(0.5 * outer(v)));
  }
  out.push_back(check_le("app1.second_eigenvalue", second, 1e-12));
  out.push_back(check_le("app1.xi_norm", norm_dev, 1e-12));
  out.push_back(check_le("app1.half_projector", xi_dev, 1e-12));
  const auto adj = orthogonality_graph();
  int edges = 0;
  bool cube = true;
  for (std::size_t a = 0; a < 8; ++a)
    for (std::size_t b = 0; b < 8; ++b) {
      const int hamming = int((a ^ b) & 1) + int(((a ^ b) >> 1) & 1) + int(((a ^ b) >> 2) & 1);
      cube = cube && (adj[a][b] == (hamming == 2));
      if (b > a && adj[a][b]) ++edges;
    }
  out.push_back({"app1.edges", edges == 12, edges, std::nullopt, {{"expected", 12}}});
  out.push_back(check_true("app1.face_diagonal_cube", cube));
  out.push_back(check_true("app1.xi1_neighbours", adj[1][2] && adj[1][4] && adj[1][7]));
  out.push_back(check_true("app1.xi6_neighbours", adj[6][0] && adj[6][3] && adj[6][5]));
  return out;
}

inline std::vector<CheckResult> app2() {
  std::vector<CheckResult> out;
  double identity_dev = 0.0;
  bool all_positive = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& l : outcome_labels(3)) {
    const QubitMap lam = choi_map_of_effect(gpt_effect(l[0], l[1], l[2]));
    const auto pc = pauli_expand(lam.apply(Operator::identity(2)));
    const double scale = pc.coeffs[0].real() / 2.0;
    for (int p = 1; p < 4; ++p)
      identity_dev = std::max(identity_dev, std::abs(pc.coeffs[static_cast<std::size_t>(p)] - scale * double(l[static_cast<std::size_t>(p - 1)])));
    const auto cert = map_is_positive(lam, kGptTol);
    all_positive = all_positive && cert.positive;
    worst_margin = std::min(worst_margin, cert.margin);
  }
  out.push_back(check_le("app2.identity_image", identity_dev, 1e-12));
  out.push_back(check_ge("app2.positivity_margin", worst_margin, -kGptTol));
  out.push_back(check_true("app2.all_maps_positive", all_positive));
  // The identity effect gives a positive map; a witness does not.
  out.push_back(check_true("app2.identity_effect_positive", effect_choi_positive(Operator::identity(4))));
  Eigen::Vector4cd phi(1.0, 0.0, 0.0, 1.0);
  const Operator witness = 0.5 * Operator::identity(4) - outer(phi / std::sqrt(2.0)) - 1e-3 * Operator::identity(4);
  out.push_back(check_true("app2.witness_rejected", !effect_choi_positive(witness)));
  return out;
}

inline std::vector<CheckResult> app3(std::uint64_t seed) {
  std::vector<CheckResult> out;
  double worst = 0.0;
  for (double mu : mu_grid(21)) {
    const Vec3 s = fmu_marginal_sharpness(mu, 20, seed);
    for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(s(c) - 0.5 * (1.0 + mu)));
  }
  out.push_back(check_le("app3.extracted_sharpness", worst, 1e-10, {{"grid", 21}}));
  const Vec3 at = fmu_marginal_sharpness(std::sqrt(3.0) - 1.0, 20, seed);
  out.push_back(check_near("app3.crossover_value", at(0), std::sqrt(3.0) / 2.0, 1e-10));
  return out;
}

inline std::vector<CheckResult> app4(const SolverOptions& opts) {
  std::vector<CheckResult> out;
  const Povm tet = build_tet_povm();
  const auto rep = validate_povm(tet, 5e-4);
  out.push_back(check_ge("app4.min_eigenvalue", detail::min_of(rep.min_eigenvalues), -5e-4));
  out.push_back(check_le("app4.completeness", rep.completeness_residual, 5e-4));
  out.push_back(check_le("app4.tet_reproduction",
                         check_reproduction(tet, Configuration::parallel(), axes_xyz(), 1.0, ensemble_tetrahedral()),
                         5e-4));
  const auto cs = build_constraints(axes_xyz(), Configuration::parallel(), ensemble_tetrahedral());
  const SdpSolution s = solve_max_sharpness(cs, opts);
  out.push_back(check_ge("app4.sdp_lambda", s.lambda_opt, 0.999, {{"status", to_string(s.status)}}));
  out.push_back(check_le("app4.sdp_reproduction",
                         check_reproduction(povm_from_effects(cs, s.effects), Configuration::parallel(), axes_xyz(),
                                            s.lambda_opt, ensemble_tetrahedral()),
                         1e-6));
  return out;
}

}  // namespace verify

inline std::vector<CheckResult> run_verify_selector(const std::string& sel, std::uint64_t seed, const SolverOptions& opts) {
  if (sel == "t1") return verify::t1(seed);
  if (sel == "t2") return verify::t2(seed);
  if (sel == "t3") return verify::t3(seed, opts);
  if (sel == "prop1") return verify::prop1(seed);
  if (sel == "app1") return verify::app1();
  if (sel == "app2") return verify::app2();
  if (sel == "app3") return verify::app3(seed);
  if (sel == "app4") return verify::app4(opts);
  throw std::invalid_argument("verify: unknown selector '" + sel + "'");
}

/// `selector` is "all" or a comma-separated list of verify_selectors(); `jobs` > 1 runs
/// selectors concurrently, results keep selector order.
inline RunReport cmd_verify(const std::string& selector, std::uint64_t seed = kDefaultSeed, int jobs = 1) {
  const detail::Stopwatch clock;
  std::vector<std::string> selected;
  if (selector == "all") {
    selected = verify_selectors();
  } else {
    std::stringstream ss(selector);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (std::find(verify_selectors().begin(), verify_selectors().end(), item) == verify_selectors().end())
        throw std::invalid_argument("verify: unknown selector '" + item + "'");
      selected.push_back(item);
    }
    if (selected.empty()) throw std::invalid_argument("verify: empty selector");
  }

  SolverOptions opts;
  opts.feasibility_tol = residual_tolerance();
  RunReport rep;
  rep.command = "verify";
  rep.seed = seed;
  rep.inputs = {{"selector", selector}, {"feasibility_tol", opts.feasibility_tol}};

  std::vector<std::vector<CheckResult>> parts(selected.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < selected.size(); ++i) parts[i] = run_verify_selector(selected[i], seed, opts);
  } else {
    // At most `jobs` selectors in flight.
    for (std::size_t start = 0; start < selected.size(); start += static_cast<std::size_t>(jobs)) {
      std::vector<std::future<std::vector<CheckResult>>> futures;
      const std::size_t stop = std::min(selected.size(), start + static_cast<std::size_t>(jobs));
      for (std::size_t i = start; i < stop; ++i)
        futures.push_back(std::async(std::launch::async, run_verify_selector, selected[i], seed, opts));
      for (std::size_t i = start; i < stop; ++i) parts[i] = futures[i - start].get();
    }
  }
  for (auto& p : parts)
    for (auto& c : p) rep.checks.push_back(std::move(c));
  rep.runtime_ms = clock.ms();
  return rep;
}

// ---------------------------------------------------------------------------
// sdp

struct SdpRun {
  RunReport report;
  SdpSolution solution;
  Povm povm;
};

inline SdpRun run_sdp(const std::string& axes_spec, const std::string& config_spec, const std::string& ensemble_spec,
                      std::uint64_t seed = kDefaultSeed) {
  const detail::Stopwatch clock;
  const auto axes = parse_axes(axes_spec);
  const Configuration config = parse_configuration(config_spec);
  const Ensemble ensemble = parse_ensemble(ensemble_spec);
  SolverOptions opts;
  opts.feasibility_tol = residual_tolerance();

  const ConstraintSystem cs = build_constraints(axes, config, ensemble);
  SdpSolution sol = solve_max_sharpness(cs, opts);
  Povm povm = povm_from_effects(cs, sol.effects);

  RunReport rep;
  rep.command = "sdp";
  rep.seed = seed;
  nlohmann::json axes_json = nlohmann::json::array();
  for (const auto& a : axes) axes_json.push_back(vec3_json(a));
  rep.inputs = {{"axes", axes_spec},
                {"axes_vectors", axes_json},
                {"config", config_spec},
                {"ensemble", ensemble_spec},
                {"ensemble_label", ensemble.label},
                {"map", config.map()},
                {"feasibility_tol", opts.feasibility_tol},
                {"bisection_width", opts.bisection_width},
                {"polish_tol", opts.polish_tol},
                {"max_iterations", opts.max_iterations}};

  const auto val = validate_povm(povm, 1e-8);
  const bool optimal = sol.status == SdpStatus::Optimal;
  rep.checks.push_back({"sdp.lambda_opt", optimal, detail::round4(sol.lambda_opt), opts.bisection_width,
                        {{"lambda_exact", sol.lambda_opt},
                         {"bracket", {sol.lambda_opt, sol.lambda_upper}},
                         {"status", to_string(sol.status)},
                         {"iterations", sol.iterations},
                         {"bisection_steps", sol.trace.size()},
                         {"infeasibility",
                          "declared by dual certificate when found, else by residual stagnation"}}});
  rep.checks.push_back(check_le("sdp.primal_residual", sol.primal_residual, 1e-8));
  rep.checks.push_back(check_ge("sdp.psd_violation", sol.psd_violation, -1e-9));
  rep.checks.push_back(check_le("sdp.completeness", val.completeness_residual, 1e-8));
  rep.checks.push_back(check_le("sdp.reproduction",
                                check_reproduction(povm, config, axes, sol.lambda_opt, ensemble, verify::kRandomStates, seed),
                                1e-6, {{"lambda", sol.lambda_opt}}));
  rep.checks.push_back(check_true("sdp.trace_monotone", trace_is_monotone(sol.trace)));
  rep.runtime_ms = clock.ms();
  return {std::move(rep), std::move(sol), std::move(povm)};
}

inline RunReport cmd_sdp(const std::string& axes_spec, const std::string& config_spec, const std::string& ensemble_spec,
                         const std::string& povm_out = "", std::uint64_t seed = kDefaultSeed) {
  SdpRun run = run_sdp(axes_spec, config_spec, ensemble_spec, seed);
  if (!povm_out.empty()) {
    std::ofstream out(povm_out);
    if (!out) throw std::runtime_error("cannot write '" + povm_out + "'");
    out << nlohmann::json(run.povm).dump(2) << "\n";
    run.report.inputs["povm_out"] = povm_out;
  }
  return std::move(run.report);
}

// ---------------------------------------------------------------------------
// scan-mu

inline RunReport cmd_scan_mu(int grid, std::uint64_t seed = kDefaultSeed) {
  if (grid < 2) throw std::invalid_argument("scan-mu: grid must be at least 2");
  const detail::Stopwatch clock;
  RunReport rep;
  rep.command = "scan-mu";
  rep.seed = seed;
  rep.inputs = {{"grid", grid}, {"samples_per_mu", 20}};
  const double parallel = std::sqrt(3.0) / 2.0;
  const double boundary = 1.0 / 3.0;

  std::vector<double> mus = verify::mu_grid(grid);
  if (std::none_of(mus.begin(), mus.end(), [&](double m) { return std::abs(m - boundary) < 1e-12; })) {
    mus.push_back(boundary);
    std::sort(mus.begin(), mus.end());
  }
  double below = -1.0, above = 2.0;
  for (double mu : mus) {
    const Vec3 s = fmu_marginal_sharpness(mu, 20, seed);
    const double lambda = s.mean();
    const double expected = 0.5 * (1.0 + mu);
    const bool cp = map_is_cp(map_f_mu(mu));
    const bool advantage = lambda > parallel;
    if (advantage) above = std::min(above, mu);
    else if (mu < above) below = std::max(below, mu);
    std::ostringstream name;
    name << "scan.mu=" << std::setprecision(6) << mu;
    rep.checks.push_back(check_near(name.str(), lambda, expected, 1e-10,
                                    {{"mu", mu},
                                     {"lambda", lambda},
                                     {"cp", cp},
                                     {"cp_boundary", std::abs(mu - boundary) < 1e-12},
                                     {"beats_parallel", advantage}}));
  }
  const double crossover = std::sqrt(3.0) - 1.0;
  rep.checks.push_back({"scan.crossover_bracket", below < crossover && crossover <= above,
                        nlohmann::json::array({below, above}), std::nullopt,
                        {{"expected", crossover}, {"parallel_lambda", parallel}}});
  rep.runtime_ms = clock.ms();
  return rep;
}

// ---------------------------------------------------------------------------
// gpt-certify

inline RunReport cmd_gpt_certify(const Povm& p, const std::string& source = "", std::uint64_t seed = kDefaultSeed) {
  const detail::Stopwatch clock;
  RunReport rep;
  rep.command = "gpt-certify";
  rep.seed = seed;
  rep.inputs = {{"povm", source}, {"outcomes", p.size()}, {"tolerance", kGptTol}};
  const GptReport g = certify_gpt_povm(p);
  for (const auto& c : g.certificates) {
    rep.checks.push_back(check_ge("gpt.product_min" + c.operator_id, c.min_product_value, -kGptTol,
                                  {{"worst_r", vec3_json(c.worst_r)}, {"worst_s", vec3_json(c.worst_s)},
                                   {"method", c.method}}));
    rep.checks.push_back(check_le("gpt.product_max" + c.operator_id, c.max_product_value, 1.0 + kGptTol));
    rep.checks.push_back(check_true("gpt.choi_map_positive" + c.operator_id, c.choi_map_positive));
  }
  rep.checks.push_back(check_le("gpt.completeness", g.completeness_residual, kHermitianTol));
  rep.runtime_ms = clock.ms();
  return rep;
}

inline RunReport cmd_gpt_certify(const std::string& path, std::uint64_t seed = kDefaultSeed) {
  return cmd_gpt_certify(read_json_file(path).get<Povm>(), path, seed);
}

}  // namespace spinpair
