#pragma once

/// \file study.hpp
/// \brief Study configuration, named presets and the experiment drivers behind the CLI.
///
/// Config grammar (line oriented, `#` starts a comment):
///
///     [problem]
///     name = paper4                 # paper4 | zero
///     [solver]
///     method = schwarz              # schwarz | gmres
///     alpha = mean                  # min | mean | max | opt | <number> | <factor>*<rule>
///     tol = 1e-8
///     max_iter = 2000
///     refinements = 4
///     alphas = 0.1*mean mean 10*mean
///     quadrature = 4
///     [subdomain]                   # one section per subdomain, in index order
///     rect = 0 0 0.5 1
///     cells = 8 8
///     diagonal = same               # same | alternate
///     [interface]                   # optional; derived from the rects when absent
///     id = 0
///     subdomains = 0 1

#include "nmschwarz/fem_p1.hpp"
#include "nmschwarz/fields.hpp"
#include "nmschwarz/legendre.hpp"
#include "nmschwarz/mesh2d.hpp"
#include "nmschwarz/schwarz.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nmschwarz {

inline constexpr const char* kVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Robin parameter rules

enum class AlphaKind { Constant, Min, Mean, Max, Opt };

struct AlphaRule {
  AlphaKind kind = AlphaKind::Mean;
  double value = 0.0;   ///< Constant only
  double factor = 1.0;  ///< multiplies the formula value (ignored for Constant)
  friend bool operator==(const AlphaRule&, const AlphaRule&) = default;
};

namespace detail {

// Shortest of %.15g / %.17g that reads back exactly.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  if (std::strtod(buf, nullptr) != v) std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  if (pos != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

inline int parse_int(const std::string& s) {
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("not an integer: '" + s + "'");
  }
  if (pos != s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
  return v;
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

}  // namespace detail

inline AlphaRule parse_alpha_rule(const std::string& text) {
  const std::string t = detail::trim(text);
  static const std::map<std::string, AlphaKind> names{
      {"min", AlphaKind::Min}, {"mean", AlphaKind::Mean}, {"max", AlphaKind::Max}, {"opt", AlphaKind::Opt}};
  AlphaRule r;
  std::string name = t;
  if (const auto star = t.find('*'); star != std::string::npos) {
    r.factor = detail::parse_double(detail::trim(t.substr(0, star)));
    name = detail::trim(t.substr(star + 1));
  }
  if (auto it = names.find(name); it != names.end()) {
    r.kind = it->second;
  } else {
    if (t.find('*') != std::string::npos) throw std::invalid_argument("bad alpha rule '" + text + "'");
    r.kind = AlphaKind::Constant;
    r.value = detail::parse_double(t);
    r.factor = 1.0;
  }
  if (r.kind == AlphaKind::Constant ? !(r.value > 0.0) : !(r.factor > 0.0))
    throw std::invalid_argument("alpha must be positive: '" + text + "'");
  return r;
}

inline std::string to_string(const AlphaRule& r) {
  if (r.kind == AlphaKind::Constant) return detail::format_double(r.value);
  static const std::map<AlphaKind, std::string> names{
      {AlphaKind::Min, "min"}, {AlphaKind::Mean, "mean"}, {AlphaKind::Max, "max"}, {AlphaKind::Opt, "opt"}};
  const std::string n = names.at(r.kind);
  return r.factor == 1.0 ? n : detail::format_double(r.factor) + "*" + n;
}

/// Interface step-size statistics over every segment of every interface grid.
struct AlphaFormulas {
  double h_min = 0.0;
  double h_mean = 0.0;
  double h_max = 0.0;

  /// [(pi^2 + 1)((pi / h)^2 + 1)]^(1/4)
  static double formula(double h) {
    constexpr double pi = std::numbers::pi;
    return std::pow((pi * pi + 1.0) * ((pi / h) * (pi / h) + 1.0), 0.25);
  }
};

inline AlphaFormulas alpha_formulas(const std::vector<InterfaceGrid>& grids) {
  if (grids.empty()) throw std::invalid_argument("alpha_formulas: no interface grids");
  AlphaFormulas f;
  f.h_min = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  int count = 0;
  for (const auto& g : grids) {
    for (int i = 0; i < g.segments(); ++i) {
      const double h = g.segment_length(i);
      f.h_min = std::min(f.h_min, h);
      f.h_max = std::max(f.h_max, h);
      sum += h;
      ++count;
    }
  }
  f.h_mean = sum / count;
  return f;
}

/// Robin parameter for a rule. "opt" evaluates the formula at h_mean, which is
/// the uniform step on conforming grids.
inline double alpha_from_rule(const AlphaRule& rule, const std::vector<InterfaceGrid>& grids) {
  if (rule.kind == AlphaKind::Constant) return rule.value;
  const AlphaFormulas f = alpha_formulas(grids);
  double h = f.h_mean;
  if (rule.kind == AlphaKind::Min) h = f.h_min;
  if (rule.kind == AlphaKind::Max) h = f.h_max;
  return rule.factor * AlphaFormulas::formula(h);
}

// ---------------------------------------------------------------------------
// Configuration

enum class SolverKind { Schwarz, Gmres };

inline std::string to_string(SolverKind s) { return s == SolverKind::Schwarz ? "schwarz" : "gmres"; }

inline SolverKind solver_kind_from_string(const std::string& s) {
  if (s == "schwarz") return SolverKind::Schwarz;
  if (s == "gmres") return SolverKind::Gmres;
  throw std::invalid_argument("unknown solver '" + s + "'");
}

struct SubdomainSpec {
  Rect rect;
  int nx = 1;
  int ny = 1;
  DiagonalRule diagonal = DiagonalRule::Same;
  friend bool operator==(const SubdomainSpec&, const SubdomainSpec&) = default;
};

struct StudyConfig {
  std::string problem = "paper4";
  std::vector<SubdomainSpec> subdomains;
  std::vector<InterfaceDecl> interfaces;
  AlphaRule alpha;
  SolverKind solver = SolverKind::Schwarz;
  double tol = 1e-8;
  int max_iter = 5000;
  int refinements = 4;
  std::vector<AlphaRule> alphas{{AlphaKind::Mean, 0.0, 0.1}, {AlphaKind::Mean, 0.0, 1.0}, {AlphaKind::Mean, 0.0, 10.0}};
  int quadrature_order = 4;
  friend bool operator==(const StudyConfig&, const StudyConfig&) = default;
};

namespace detail {

inline bool near(double a, double b) { return std::abs(a - b) <= kGeomTol; }

// Shared full side of two rects, if any.
inline std::optional<std::pair<Point2, Point2>> shared_side(const Rect& a, const Rect& b) {
  if (near(a.x1, b.x0) && near(a.y0, b.y0) && near(a.y1, b.y1)) return std::pair{Point2{a.x1, a.y0}, Point2{a.x1, a.y1}};
  if (near(b.x1, a.x0) && near(a.y0, b.y0) && near(a.y1, b.y1)) return std::pair{Point2{a.x0, a.y0}, Point2{a.x0, a.y1}};
  if (near(a.y1, b.y0) && near(a.x0, b.x0) && near(a.x1, b.x1)) return std::pair{Point2{a.x0, a.y1}, Point2{a.x1, a.y1}};
  if (near(b.y1, a.y0) && near(a.x0, b.x0) && near(a.x1, b.x1)) return std::pair{Point2{a.x0, a.y0}, Point2{a.x1, a.y0}};
  return std::nullopt;
}

inline double overlap_area(const Rect& a, const Rect& b) {
  const double w = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double h = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

}  // namespace detail

/// Derives missing interface geometry, then checks that the rects tile the unit
/// square edge-to-edge and that every internal side is exactly one interface.
inline void finalize_config(StudyConfig& cfg) {
  if (cfg.subdomains.empty()) throw std::invalid_argument("config: no subdomains");
  const int n = static_cast<int>(cfg.subdomains.size());
  double area = 0.0;
  for (int i = 0; i < n; ++i) {
    const Rect& r = cfg.subdomains[i].rect;
    r.validate();
    if (r.x0 < -kGeomTol || r.y0 < -kGeomTol || r.x1 > 1.0 + kGeomTol || r.y1 > 1.0 + kGeomTol)
      throw std::invalid_argument("config: subdomain outside the unit square");
    if (cfg.subdomains[i].nx < 1 || cfg.subdomains[i].ny < 1) throw std::invalid_argument("config: zero cell count");
    area += r.area();
    for (int j = i + 1; j < n; ++j)
      if (detail::overlap_area(r, cfg.subdomains[j].rect) > kGeomTol)
        throw std::invalid_argument("config: subdomains overlap");
  }
  if (std::abs(area - 1.0) > 1e-12) throw std::invalid_argument("config: subdomains do not tile the unit square");

  if (cfg.interfaces.empty()) {
    int id = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (auto side = detail::shared_side(cfg.subdomains[i].rect, cfg.subdomains[j].rect))
          cfg.interfaces.push_back({id++, side->first, side->second, i, j});
  } else {
    for (auto& d : cfg.interfaces) {
      if (d.left_subdomain > d.right_subdomain) std::swap(d.left_subdomain, d.right_subdomain);
      if (d.left_subdomain < 0 || d.right_subdomain >= n || d.left_subdomain == d.right_subdomain)
        throw std::invalid_argument("config: interface references unknown subdomains");
      auto side = detail::shared_side(cfg.subdomains[d.left_subdomain].rect, cfg.subdomains[d.right_subdomain].rect);
      if (!side) throw std::invalid_argument("config: interface subdomains do not share a full side");
      d.a = side->first;
      d.b = side->second;
    }
  }
  // Every side not on the outer boundary must be covered by a declared interface.
  for (int i = 0; i < n; ++i) {
    const Rect& r = cfg.subdomains[i].rect;
    const std::array<std::pair<Point2, Point2>, 4> sides{
        std::pair{Point2{r.x0, r.y0}, Point2{r.x1, r.y0}}, std::pair{Point2{r.x1, r.y0}, Point2{r.x1, r.y1}},
        std::pair{Point2{r.x0, r.y1}, Point2{r.x1, r.y1}}, std::pair{Point2{r.x0, r.y0}, Point2{r.x0, r.y1}}};
    for (const auto& [p, q] : sides) {
      const bool exterior = (detail::near(p.x, q.x) && (detail::near(p.x, 0.0) || detail::near(p.x, 1.0))) ||
                            (detail::near(p.y, q.y) && (detail::near(p.y, 0.0) || detail::near(p.y, 1.0)));
      if (exterior) continue;
      const bool covered = std::any_of(cfg.interfaces.begin(), cfg.interfaces.end(), [&](const InterfaceDecl& d) {
        return (d.left_subdomain == i || d.right_subdomain == i) && d.contains(p) && d.contains(q);
      });
      if (!covered)
        throw std::invalid_argument("config: subdomain " + std::to_string(i) +
                                    " has an internal side that is not a full interface");
    }
  }
  std::map<int, int> ids;
  for (const auto& d : cfg.interfaces)
    if (++ids[d.id] > 1) throw std::invalid_argument("config: duplicate interface id");
}

inline StudyConfig parse_config(std::istream& is) {
  StudyConfig cfg;
  cfg.interfaces.clear();
  std::string section;
  std::string line;
  int lineno = 0;
  const auto fail = [&](const std::string& msg) {
    throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = line.substr(1, line.size() - 2);
      if (section == "subdomain") cfg.subdomains.emplace_back();
      else if (section == "interface") cfg.interfaces.push_back({static_cast<int>(cfg.interfaces.size()), {}, {}, 0, 1});
      else if (section != "problem" && section != "solver") fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    const auto words = detail::split_ws(val);
    try {
      if (section == "problem" && key == "name") {
        cfg.problem = val;
      } else if (section == "solver") {
        if (key == "method") cfg.solver = solver_kind_from_string(val);
        else if (key == "alpha") cfg.alpha = parse_alpha_rule(val);
        else if (key == "tol") cfg.tol = detail::parse_double(val);
        else if (key == "max_iter") cfg.max_iter = detail::parse_int(val);
        else if (key == "refinements") cfg.refinements = detail::parse_int(val);
        else if (key == "quadrature") cfg.quadrature_order = detail::parse_int(val);
        else if (key == "alphas") {
          cfg.alphas.clear();
          for (const auto& w : words) cfg.alphas.push_back(parse_alpha_rule(w));
        } else fail("unknown key '" + key + "'");
      } else if (section == "subdomain") {
        auto& sd = cfg.subdomains.back();
        if (key == "rect") {
          if (words.size() != 4) fail("rect needs 4 numbers");
          sd.rect = {detail::parse_double(words[0]), detail::parse_double(words[1]), detail::parse_double(words[2]),
                     detail::parse_double(words[3])};
        } else if (key == "cells") {
          if (words.size() != 2) fail("cells needs 2 integers");
          sd.nx = detail::parse_int(words[0]);
          sd.ny = detail::parse_int(words[1]);
        } else if (key == "diagonal") {
          sd.diagonal = diagonal_rule_from_string(val);
        } else fail("unknown key '" + key + "'");
      } else if (section == "interface") {
        auto& d = cfg.interfaces.back();
        if (key == "id") d.id = detail::parse_int(val);
        else if (key == "subdomains") {
          if (words.size() != 2) fail("subdomains needs 2 indices");
          d.left_subdomain = detail::parse_int(words[0]);
          d.right_subdomain = detail::parse_int(words[1]);
        } else fail("unknown key '" + key + "'");
      } else {
        fail("key '" + key + "' outside a known section");
      }
    } catch (const std::invalid_argument& e) {
      if (std::string(e.what()).rfind("config line", 0) == 0) throw;
      fail(e.what());
    }
  }
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("config: tol must be positive");
  if (cfg.max_iter < 1) throw std::invalid_argument("config: max_iter must be >= 1");
  if (cfg.refinements < 0) throw std::invalid_argument("config: refinements must be >= 0");
  finalize_config(cfg);
  return cfg;
}

inline StudyConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  return parse_config(in);
}

inline std::string serialize_config(const StudyConfig& cfg) {
  std::ostringstream os;
  os << "[problem]\nname = " << cfg.problem << "\n\n[solver]\n";
  os << "method = " << to_string(cfg.solver) << '\n';
  os << "alpha = " << to_string(cfg.alpha) << '\n';
  os << "tol = " << detail::format_double(cfg.tol) << '\n';
  os << "max_iter = " << cfg.max_iter << '\n';
  os << "refinements = " << cfg.refinements << '\n';
  os << "quadrature = " << cfg.quadrature_order << '\n';
  os << "alphas =";
  for (const auto& a : cfg.alphas) os << ' ' << to_string(a);
  os << '\n';
  for (const auto& sd : cfg.subdomains) {
    os << "\n[subdomain]\nrect = " << detail::format_double(sd.rect.x0) << ' ' << detail::format_double(sd.rect.y0)
       << ' ' << detail::format_double(sd.rect.x1) << ' ' << detail::format_double(sd.rect.y1) << '\n';
    os << "cells = " << sd.nx << ' ' << sd.ny << '\n';
    os << "diagonal = " << to_string(sd.diagonal) << '\n';
  }
  for (const auto& d : cfg.interfaces)
    os << "\n[interface]\nid = " << d.id << "\nsubdomains = " << d.left_subdomain << ' ' << d.right_subdomain << '\n';
  return os.str();
}

/// Named decompositions of the unit square. Resolutions are this project's
/// own choices; the "two" preset reproduces 81 / 153 node subdomains.
inline StudyConfig preset(const std::string& name) {
  StudyConfig cfg;
  const auto quad = [](int n1, int n2, int n3, int n4) {
    // 0 bottom-left, 1 bottom-right, 2 top-left, 3 top-right
    return std::vector<SubdomainSpec>{{{0.0, 0.0, 0.5, 0.5}, n1, n1},
                                      {{0.5, 0.0, 1.0, 0.5}, n2, n2},
                                      {{0.0, 0.5, 0.5, 1.0}, n3, n3},
                                      {{0.5, 0.5, 1.0, 1.0}, n4, n4}};
  };
  if (name == "single") {
    cfg.subdomains = {{{0.0, 0.0, 1.0, 1.0}, 8, 8}};
  } else if (name == "two") {
    cfg.subdomains = {{{0.0, 0.0, 0.5, 1.0}, 8, 8}, {{0.5, 0.0, 1.0, 1.0}, 8, 16}};
  } else if (name == "two-small") {
    cfg.subdomains = {{{0.0, 0.0, 0.5, 1.0}, 4, 8}, {{0.5, 0.0, 1.0, 1.0}, 6, 12}};
  } else if (name == "four") {
    cfg.subdomains = quad(8, 6, 6, 10);
  } else if (name == "four-coarse") {
    cfg.subdomains = quad(10, 8, 8, 4);
  } else if (name == "four-conforming") {
    cfg.subdomains = quad(8, 8, 8, 8);
  } else if (name == "demo") {
    cfg.subdomains = quad(8, 6, 6, 10);
    cfg.alpha = {AlphaKind::Constant, 10.0, 1.0};
    cfg.refinements = 0;
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  finalize_config(cfg);
  return cfg;
}

inline std::vector<std::string> preset_names() {
  return {"single", "two", "two-small", "four", "four-coarse", "four-conforming", "demo"};
}

// ---------------------------------------------------------------------------
// Problem construction

inline std::vector<Mesh2D> build_meshes(const StudyConfig& cfg, int level) {
  std::vector<Mesh2D> meshes;
  for (int k = 0; k < static_cast<int>(cfg.subdomains.size()); ++k) {
    const auto& sd = cfg.subdomains[k];
    std::vector<InterfaceDecl> mine;
    for (const auto& d : cfg.interfaces)
      if (d.left_subdomain == k || d.right_subdomain == k) mine.push_back(d);
    Mesh2D m = generate_structured(sd.rect, sd.nx, sd.ny, sd.diagonal, mine);
    for (int r = 0; r < level; ++r) m = refine_uniform(m);
    meshes.push_back(std::move(m));
  }
  return meshes;
}

inline std::vector<InterfaceGrid> interface_grids(const StudyConfig& cfg, const std::vector<Mesh2D>& meshes) {
  std::vector<InterfaceGrid> grids;
  for (const auto& d : cfg.interfaces)
    for (int k : {d.left_subdomain, d.right_subdomain})
      grids.emplace_back(interface_trace_nodes(meshes[k], d.id), k, d.id);
  return grids;
}

/// Alpha for a rule at a refinement level; 1 when there is no interface.
inline double resolve_alpha(const StudyConfig& cfg, const AlphaRule& rule, const std::vector<Mesh2D>& meshes) {
  if (rule.kind == AlphaKind::Constant) return rule.value;
  if (cfg.interfaces.empty()) return 1.0;
  return alpha_from_rule(rule, interface_grids(cfg, meshes));
}

inline DecompositionProblem build_problem(const StudyConfig& cfg, int level, const AlphaRule& rule) {
  std::vector<Mesh2D> meshes = build_meshes(cfg, level);
  const double alpha = resolve_alpha(cfg, rule, meshes);
  return build_problem(std::move(meshes), cfg.interfaces, alpha, problem_by_name(cfg.problem), cfg.quadrature_order);
}

inline std::pair<SchwarzState, SolverReport> run_solver(const DecompositionProblem& pb, SolverKind kind,
                                                        const SolveOptions& opt) {
  return kind == SolverKind::Schwarz ? solve_schwarz(pb, opt) : solve_gmres(pb, opt);
}

inline std::pair<SchwarzState, SolverReport> run_solver(const StudyConfig& cfg, const DecompositionProblem& pb,
                                                        SolverKind kind, const SolveOptions& opt) {
  auto result = run_solver(pb, kind, opt);
  result.second.config = serialize_config(cfg);
  return result;
}

// ---------------------------------------------------------------------------
// Convergence under refinement

struct ConvergenceRow {
  int refinement = 0;
  double h = 0.0;
  double alpha = 0.0;
  std::vector<double> subdomain_errors;  ///< absolute H1 error per subdomain
  double exact_norm = 0.0;               ///< ||u||_* over all subdomains
  double error = 0.0;                    ///< (sum E_i^2)^(1/2)
  double relative_error = 0.0;
  std::optional<double> rate;
  int iterations = 0;
  bool converged = false;
  double final_residual = 0.0;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
};

inline ConvergenceStudy run_convergence_study(const StudyConfig& cfg) {
  if (cfg.refinements < 1) throw std::invalid_argument("convergence study needs refinements >= 1");
  const ModelProblem model = problem_by_name(cfg.problem);
  if (!model.has_exact()) throw std::invalid_argument("convergence study needs a problem with a known solution");
  ConvergenceStudy study;
  for (int level = 0; level <= cfg.refinements; ++level) {
    const DecompositionProblem pb = build_problem(cfg, level, cfg.alpha);
    SolveOptions opt;
    opt.tol = cfg.tol;
    opt.max_iter = cfg.max_iter;
    opt.track_iterates = false;
    const auto [state, rep] = run_solver(cfg, pb, cfg.solver, opt);
    ConvergenceRow row;
    row.refinement = level;
    row.h = pb.h_max();
    row.alpha = pb.alpha;
    row.iterations = rep.iterations_used;
    row.converged = rep.converged;
    row.final_residual = rep.final_residual;
    double err2 = 0.0, ex2 = 0.0;
    for (int k = 0; k < pb.num_subdomains(); ++k) {
      const ErrorNorms e = error_norms(pb.subdomains[k].space, state.u[k], model.exact);
      row.subdomain_errors.push_back(e.h1_error);
      err2 += e.h1_error * e.h1_error;
      ex2 += e.h1_exact * e.h1_exact;
    }
    row.error = std::sqrt(err2);
    row.exact_norm = std::sqrt(ex2);
    row.relative_error = row.error / row.exact_norm;
    if (!study.rows.empty()) row.rate = std::log2(study.rows.back().relative_error / row.relative_error);
    study.rows.push_back(std::move(row));
  }
  return study;
}

inline std::string convergence_csv(const ConvergenceStudy& s) {
  std::ostringstream os;
  os << "refinement,h,E_rel,rate\n";
  for (const auto& r : s.rows)
    os << r.refinement << ',' << detail::csv_double(r.h) << ',' << detail::csv_double(r.relative_error) << ','
       << (r.rate ? detail::csv_double(*r.rate) : std::string()) << '\n';
  return os.str();
}

/// Per-subdomain relative errors E_i / E_ex.
inline std::string convergence_subdomain_csv(const ConvergenceStudy& s) {
  std::ostringstream os;
  os << "refinement,subdomain,E_i,E_i_rel\n";
  for (const auto& r : s.rows)
    for (std::size_t k = 0; k < r.subdomain_errors.size(); ++k)
      os << r.refinement << ',' << k << ',' << detail::csv_double(r.subdomain_errors[k]) << ','
         << detail::csv_double(r.subdomain_errors[k] / r.exact_norm) << '\n';
  return os.str();
}

inline std::string convergence_solver_csv(const ConvergenceStudy& s) {
  std::ostringstream os;
  os << "refinement,alpha,iterations,converged,final_residual\n";
  for (const auto& r : s.rows)
    os << r.refinement << ',' << detail::csv_double(r.alpha) << ',' << r.iterations << ',' << (r.converged ? 1 : 0)
       << ',' << detail::csv_double(r.final_residual) << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Robin parameter sensitivity

struct AlphaRun {
  AlphaRule rule;
  double alpha = 0.0;
  int iterations = 0;
  bool converged = false;
  double final_residual = 0.0;
  SolverReport report;
};

struct AlphaStudy {
  std::vector<AlphaRun> runs;
};

/// For every alpha: the converged discrete solution for that alpha is computed
/// first (GMRES to 1e-13), then the configured solver is run and every iterate
/// is compared with it.
inline AlphaStudy run_alpha_study(const StudyConfig& cfg, const std::vector<AlphaRule>& alphas) {
  if (alphas.size() < 2) throw std::invalid_argument("alpha study needs at least two alphas");
  if (cfg.interfaces.empty()) throw std::invalid_argument("alpha study needs at least one interface");
  AlphaStudy study;
  for (const auto& rule : alphas) {
    const DecompositionProblem pb = build_problem(cfg, 0, rule);
    SolveOptions ref_opt;
    ref_opt.tol = 1e-13;
    ref_opt.max_iter = static_cast<int>(interface_fixed_point_map(pb).size()) + 1;
    ref_opt.track_iterates = false;
    const auto reference = solve_gmres(pb, ref_opt).first;
    SolveOptions opt;
    opt.tol = cfg.tol;
    opt.max_iter = cfg.max_iter;
    opt.reference = reference;
    auto [state, rep] = run_solver(cfg, pb, cfg.solver, opt);
    AlphaRun run;
    run.rule = rule;
    run.alpha = pb.alpha;
    run.iterations = rep.iterations_used;
    run.converged = rep.converged;
    run.final_residual = rep.final_residual;
    run.report = std::move(rep);
    study.runs.push_back(std::move(run));
  }
  return study;
}

inline std::string alpha_csv(const AlphaStudy& s) {
  std::ostringstream os;
  os << "alpha,iters,final_residual\n";
  for (const auto& r : s.runs)
    os << detail::csv_double(r.alpha) << ',' << r.iterations << ',' << detail::csv_double(r.final_residual) << '\n';
  return os.str();
}

inline std::string history_csv(const SolverReport& rep) {
  std::ostringstream os;
  os << "iter,jump_residual,E,B,errH1,errLinf\n";
  for (const auto& r : rep.records)
    os << r.n << ',' << detail::csv_double(r.jump_residual) << ',' << detail::csv_double(r.energy) << ','
       << detail::csv_double(r.interface_energy) << ',' << (r.h1_error ? detail::csv_double(*r.h1_error) : "") << ','
       << (r.linf_error ? detail::csv_double(*r.linf_error) : "") << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Demo

struct DemoResult {
  DecompositionProblem problem;
  SchwarzState state;
  SolverReport report;
  double relative_h1 = 0.0;
};

/// Solves at the base resolution; iterate errors are measured against the
/// nodal interpolant of the exact solution.
inline DemoResult run_demo(const StudyConfig& cfg) {
  DemoResult out;
  out.problem = build_problem(cfg, 0, cfg.alpha);
  const ModelProblem& model = out.problem.model;
  SolveOptions opt;
  opt.tol = cfg.tol;
  opt.max_iter = cfg.max_iter;
  if (model.has_exact()) {
    SchwarzState interp = zero_state(out.problem);
    for (int k = 0; k < out.problem.num_subdomains(); ++k)
      interp.u[k] = interpolate(out.problem.subdomains[k].space, model.exact);
    opt.reference = interp;
  }
  auto [state, rep] = run_solver(cfg, out.problem, cfg.solver, opt);
  out.state = std::move(state);
  out.report = std::move(rep);
  if (model.has_exact()) {
    double err2 = 0.0, ex2 = 0.0;
    for (int k = 0; k < out.problem.num_subdomains(); ++k) {
      const ErrorNorms e = error_norms(out.problem.subdomains[k].space, out.state.u[k], model.exact);
      err2 += e.h1_error * e.h1_error;
      ex2 += e.h1_exact * e.h1_exact;
    }
    out.relative_h1 = std::sqrt(err2 / ex2);
  }
  return out;
}

inline std::string solution_text(const DecompositionProblem& pb, const SchwarzState& st, int k) {
  std::ostringstream os;
  const auto& sd = pb.subdomains[k];
  const bool exact = pb.model.has_exact();
  os << "# x y u_h" << (exact ? " u_exact" : "") << '\n';
  for (int v = 0; v < sd.space.dof_count(); ++v) {
    const Point2& p = sd.mesh->vertices[v];
    os << detail::csv_double(p.x) << ' ' << detail::csv_double(p.y) << ' ' << detail::csv_double(st.u[k][v]);
    if (exact) os << ' ' << detail::csv_double(pb.model.exact(p.x, p.y));
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Polynomial lemma scan

struct DiscriminantRow {
  int p = 0;
  double largest_eigenvalue = 0.0;
  double min_J_ratio = 0.0;
  double stability_C = 0.0;
  legendre::EtaPoly witness;
};

inline std::vector<DiscriminantRow> run_discriminant_scan(int p_min = 2, int p_max = 20) {
  std::vector<DiscriminantRow> rows;
  for (int p = p_min; p <= p_max; ++p) {
    const auto ext = legendre::extremal_scan(p);
    rows.push_back({p, ext.largest_eigenvalue, legendre::min_J_ratio(p), legendre::stability_constant(p),
                    ext.eigenvector});
  }
  return rows;
}

inline std::string discriminant_csv(const std::vector<DiscriminantRow>& rows) {
  std::ostringstream os;
  os << "p,largest_eigenvalue,min_J_ratio,stability_C\n";
  for (const auto& r : rows)
    os << r.p << ',' << detail::csv_double(r.largest_eigenvalue) << ',' << detail::csv_double(r.min_J_ratio) << ','
       << detail::csv_double(r.stability_C) << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Output helpers

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

inline std::string manifest_text(const std::string& command, const StudyConfig* cfg,
                                 const std::vector<std::string>& extra = {}) {
  std::ostringstream os;
  os << "nmschwarz " << kVersion << '\n';
  os << "command = " << command << '\n';
  os << "eigen = " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << '\n';
#if defined(__clang__)
  os << "compiler = clang " << __clang_major__ << '.' << __clang_minor__ << '\n';
#elif defined(__GNUC__)
  os << "compiler = gcc " << __GNUC__ << '.' << __GNUC_MINOR__ << '\n';
#endif
  for (const auto& line : extra) os << line << '\n';
  if (cfg) os << "\n# configuration\n" << serialize_config(*cfg);
  return os.str();
}

}  // namespace nmschwarz
