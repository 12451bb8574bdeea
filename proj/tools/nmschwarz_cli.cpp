// Command-line front end for the decomposition studies.

#include "nmschwarz/nmschwarz.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace nmschwarz;

namespace {

struct CommonOptions {
  std::string config;
  std::string preset;
  std::string out = "out";
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<std::string> solver;
  std::optional<std::string> alpha;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--preset", o.preset, "named decomposition preset");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--tol", o.tol, "jump residual tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", o.max_iter, "iteration cap")->check(CLI::PositiveNumber);
  cmd->add_option("--solver", o.solver, "schwarz | gmres")->check(CLI::IsMember({"schwarz", "gmres"}));
  cmd->add_option("--alpha", o.alpha, "min | mean | max | opt | <value> | <factor>*<rule>");
}

StudyConfig load(const CommonOptions& o, const std::string& default_preset) {
  if (!o.config.empty() && !o.preset.empty()) throw std::invalid_argument("use either --config or --preset");
  StudyConfig cfg = !o.config.empty() ? parse_config_file(o.config) : preset(o.preset.empty() ? default_preset : o.preset);
  if (o.tol) cfg.tol = *o.tol;
  if (o.max_iter) cfg.max_iter = *o.max_iter;
  if (o.solver) cfg.solver = solver_kind_from_string(*o.solver);
  if (o.alpha) cfg.alpha = parse_alpha_rule(*o.alpha);
  return cfg;
}

fs::path prepare(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

std::string status(bool converged) { return converged ? "converged" : "NOT converged"; }

int run_demo_cmd(const CommonOptions& o) {
  const StudyConfig cfg = load(o, "demo");
  const fs::path dir = prepare(o.out);
  const DemoResult res = run_demo(cfg);
  const auto& pb = res.problem;
  for (int k = 0; k < pb.num_subdomains(); ++k) {
    std::ostringstream mesh;
    write_mesh(mesh, *pb.subdomains[k].mesh);
    write_text(dir / ("mesh_" + std::to_string(k) + ".txt"), mesh.str());
    write_text(dir / ("solution_" + std::to_string(k) + ".txt"), solution_text(pb, res.state, k));
  }
  write_text(dir / "history.csv", history_csv(res.report));
  std::ostringstream summary;
  summary << "alpha = " << detail::csv_double(pb.alpha) << '\n'
          << "iterations = " << res.report.iterations_used << '\n'
          << "final_residual = " << detail::csv_double(res.report.final_residual) << '\n'
          << "relative_h1 = " << detail::csv_double(res.relative_h1) << '\n';
  write_text(dir / "manifest.txt", manifest_text("demo", &cfg, {summary.str()}));
  std::cout << res.report.method << ' ' << status(res.report.converged) << " after " << res.report.iterations_used
            << " iterations, jump residual " << res.report.final_residual << '\n'
            << "relative H1 error " << res.relative_h1 << '\n';
  return res.report.converged ? 0 : 2;
}

int run_convergence_cmd(const CommonOptions& o, std::optional<int> refinements) {
  StudyConfig cfg = load(o, "four");
  if (refinements) cfg.refinements = *refinements;
  const fs::path dir = prepare(o.out);
  const ConvergenceStudy s = run_convergence_study(cfg);
  write_text(dir / "convergence.csv", convergence_csv(s));
  write_text(dir / "convergence_subdomains.csv", convergence_subdomain_csv(s));
  write_text(dir / "convergence_solver.csv", convergence_solver_csv(s));
  write_text(dir / "manifest.txt", manifest_text("convergence", &cfg));
  bool all = true;
  for (const auto& r : s.rows) {
    std::cout << "level " << r.refinement << "  h " << r.h << "  E_rel " << r.relative_error;
    if (r.rate) std::cout << "  rate " << *r.rate;
    std::cout << "  (" << r.iterations << " it, " << status(r.converged) << ")\n";
    all = all && r.converged;
  }
  return all ? 0 : 2;
}

int run_alpha_cmd(const CommonOptions& o, const std::vector<std::string>& alphas) {
  StudyConfig cfg = load(o, "two");
  if (!alphas.empty()) {
    cfg.alphas.clear();
    for (const auto& a : alphas) cfg.alphas.push_back(parse_alpha_rule(a));
  }
  const fs::path dir = prepare(o.out);
  const AlphaStudy s = run_alpha_study(cfg, cfg.alphas);
  write_text(dir / "alpha_study.csv", alpha_csv(s));
  for (std::size_t i = 0; i < s.runs.size(); ++i)
    write_text(dir / ("history_alpha_" + std::to_string(i) + ".csv"), history_csv(s.runs[i].report));
  write_text(dir / "manifest.txt", manifest_text("alpha-study", &cfg));
  bool all = true;
  for (const auto& r : s.runs) {
    std::cout << to_string(r.rule) << "  alpha " << r.alpha << "  " << r.iterations << " it, " << status(r.converged)
              << '\n';
    all = all && r.converged;
  }
  return all ? 0 : 2;
}

int run_appendix_cmd(const std::string& out, int p_max) {
  const fs::path dir = prepare(out);
  const auto rows = run_discriminant_scan(2, p_max);
  write_text(dir / "appendix.csv", discriminant_csv(rows));
  std::ostringstream witness;
  witness << "# p, eta_1..eta_p for the first degree whose largest eigenvalue is not negative\n";
  for (const auto& r : rows) {
    if (r.largest_eigenvalue < 0.0) continue;
    witness << r.p;
    for (int m = 1; m <= r.p; ++m) witness << ',' << detail::csv_double(r.witness.eta(m));
    witness << '\n';
    break;
  }
  write_text(dir / "appendix_witness.csv", witness.str());
  write_text(dir / "manifest.txt", manifest_text("verify-appendix", nullptr, {"p_max = " + std::to_string(p_max)}));
  for (const auto& r : rows)
    std::cout << "p " << r.p << "  largest eigenvalue " << r.largest_eigenvalue << "  min J ratio " << r.min_J_ratio
              << "  C " << r.stability_C << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robin-Schwarz decomposition on non-matching grids"};
  app.set_version_flag("--version", std::string("nmschwarz ") + kVersion);
  app.require_subcommand(1);

  CommonOptions demo_o, conv_o, alpha_o;
  auto* demo = app.add_subcommand("demo", "solve once and export meshes and nodal solutions");
  add_common(demo, demo_o);

  auto* conv = app.add_subcommand("convergence", "H1 error under uniform refinement");
  add_common(conv, conv_o);
  std::optional<int> refinements;
  conv->add_option("--refinements", refinements, "number of refinements")->check(CLI::NonNegativeNumber);

  auto* alpha = app.add_subcommand("alpha-study", "iteration histories for several Robin parameters");
  add_common(alpha, alpha_o);
  std::vector<std::string> alphas;
  alpha->add_option("--alphas", alphas, "alpha rules to compare");

  auto* appendix = app.add_subcommand("verify-appendix", "scan the polynomial discriminant lemma");
  std::string appendix_out = "out";
  int p_max = 20;
  appendix->add_option("--out", appendix_out, "output directory");
  appendix->add_option("--p-max", p_max, "largest degree")->check(CLI::Range(2, 20));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*demo) return run_demo_cmd(demo_o);
    if (*conv) return run_convergence_cmd(conv_o, refinements);
    if (*alpha) return run_alpha_cmd(alpha_o, alphas);
    if (*appendix) return run_appendix_cmd(appendix_out, p_max);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
