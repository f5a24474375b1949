// Command-line surface: build towers and energy reports, design level sets,
// synthesize critical sequences, recover blow-up structure from iterate
// dumps, and evaluate Orlicz norms.
//
// Exit codes: 0 success, 2 invalid spec/input, 3 numerical failure,
// 4 no stabilizing scale found.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tmlab/tmlab.hpp"

namespace {

using namespace tmlab;

struct GlobalOpts {
  bool json = false;
  bool quiet = false;
  std::string nonlinearity = "model";
  double grid_tmax = 0.0;  // 0 = default rule
  std::size_t grid_n = (1u << 18) + 1;
};

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string fmt6(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

LogGrid tower_grid(const TowerProfile& tower, const GlobalOpts& g) {
  const double t_max =
      g.grid_tmax > 0.0 ? g.grid_tmax : 2.0 * tower.deepest_t() + 10.0;
  return grid_with_nodes(t_max, g.grid_n, tower.set().junctions());
}

void write_tower_csv(const TowerProfile& tower, const SampledRadialFunction& u,
                     const std::string& path) {
  std::ostringstream os;
  os << "t,r,value,piece_kind\n";
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double t = u.grid()[i];
    const double r = t > 700.0 ? 0.0 : std::exp(-t);
    const char* kind = "linear";
    if (t > 0.0 && tower.piece_at(t).kind == TowerPiece::kSqrt) kind = "sqrt";
    os << fmt(t) << ',' << fmt(r) << ',' << fmt(u.value(i)) << ',' << kind
       << '\n';
  }
  write_text_atomic(path, os.str());
}

int cmd_tower(const GlobalOpts& g, const std::string& set_path,
              const std::string& out_csv, const std::string& report_path) {
  const auto set = set_from_json(load_json_file(set_path));
  const auto tower = build_tower(set);
  const auto grid = tower_grid(tower, g);
  const auto u = sample(tower, grid);
  const double quad = dirichlet_energy(u);
  if (!out_csv.empty()) write_tower_csv(tower, u, out_csv);
  const auto report = energy_report_json(tower, quad);
  if (!report_path.empty()) write_text_atomic(report_path, report.dump(2));
  if (g.json)
    std::cout << report.dump(2) << "\n";
  else if (!g.quiet)
    std::cout << "tower energy: closed form "
              << fmt6(report["total"].get<double>()) << ", quadrature "
              << fmt6(quad) << ", rel err "
              << fmt6(report["rel_err"].get<double>()) << "\n";
  return 0;
}

int cmd_design(const GlobalOpts& g, std::size_t n, double level,
               const std::string& out_path) {
  const auto set = design_level(n, level);
  const auto round_trip = energy_closed_form(build_tower(set)).total;
  const auto j = set_to_json(set);
  if (!out_path.empty()) write_text_atomic(out_path, j.dump(2));
  if (g.json)
    std::cout << j.dump(2) << "\n";
  else if (!g.quiet) {
    std::cout << "designed " << n << " points at level " << fmt6(level)
              << "; round-trip energy " << fmt(round_trip) << " (error "
              << fmt6(std::abs(round_trip - level)) << ")\n";
    for (const auto& iv : set.intervals())
      std::cout << "  t = " << fmt(iv.t_lo) << "\n";
  }
  return 0;
}

int cmd_critseq(const GlobalOpts& g, const std::string& spec_path,
                const std::string& out_path, const std::string& profiles_dir) {
  const auto run = run_spec_from_json(load_json_file(spec_path));
  SequenceSpecification spec(run.set);
  spec.nl = nonlinearity_by_name(run.nonlinearity.empty() ? g.nonlinearity
                                                          : run.nonlinearity);
  spec.scales = run.scales;
  if (!run.rho_probes.empty()) spec.rho_probes = run.rho_probes;
  spec.epsilon_schedule = run.epsilon_schedule;
  spec.assembly.base_grid_n = g.grid_n;

  const auto diag = generate_sequence(spec);
  const auto j = diagnostics_json(diag);
  if (!out_path.empty()) write_text_atomic(out_path, j.dump(2));

  if (!profiles_dir.empty()) {
    std::filesystem::create_directories(profiles_dir);
    // the generator already validated sign-definiteness; mirror negative
    // sets the same way it does internally
    const bool negated = spec.set.intervals().front().sign < 0;
    const auto pos =
        negated ? tmlab::detail::positive_mirror(spec.set) : spec.set;
    const bool direct = pos.is_point_set() || pos.size() == 1;
    for (const auto& st : diag.stages) {
      // re-assemble the reported stage; diagonal stages go through their
      // finite approximant at the stage epsilon
      const auto tower =
          direct ? build_tower(pos)
                 : build_tower(finite_approximant(pos, st.epsilon));
      const auto it = assemble_iterate(tower, spec.nl, st.s, spec.assembly);
      std::ostringstream name;
      name << profiles_dir << "/profile_s" << fmt6(st.s) << ".csv";
      std::ostringstream body;
      if (negated) {
        std::vector<double> vals(it.w.values());
        for (double& x : vals) x = -x;
        write_csv(SampledRadialFunction(it.w.grid(), std::move(vals)), body);
      } else {
        write_csv(it.w, body);
      }
      write_text_atomic(name.str(), body.str());
    }
  }

  if (g.json)
    std::cout << j.dump(2) << "\n";
  else if (!g.quiet) {
    const auto& last = diag.stages.back();
    std::cout << "target " << fmt6(diag.target_level) << ", achieved J "
              << fmt6(last.J) << " at s " << fmt6(last.s) << " (gap "
              << fmt6(std::abs(last.J - diag.target_level)) << ")\n";
    for (const auto& st : diag.stages)
      std::cout << "  s " << fmt6(st.s) << ": J " << fmt6(st.J) << ", ap "
                << fmt6(st.ap_residual) << ", nl mass "
                << fmt6(st.nonlinear_mass) << ", |grad v|^2 "
                << fmt6(st.grad_v_sq) << "\n";
  }
  return 0;
}

int cmd_deflate(const GlobalOpts& g, const std::string& dir, double window_lo,
                double window_hi, const std::string& out_path,
                const std::string& profile_out, double anchor) {
  std::vector<std::string> files;
  if (!std::filesystem::is_directory(dir))
    throw SpecError("deflate: not a directory: " + dir);
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().extension() == ".csv") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  if (files.size() < 3)
    throw SpecError("deflate: need at least 3 iterate CSVs in " + dir);
  std::vector<SampledRadialFunction> iterates;
  for (const auto& f : files) iterates.push_back(read_csv_file(f));

  const auto rec =
      recover_blowup(iterates, Window{window_lo, window_hi}, anchor);
  std::string profile_path = profile_out;
  if (profile_path.empty() && !out_path.empty())
    profile_path = out_path + ".profile.csv";
  if (!profile_path.empty()) {
    std::ostringstream body;
    write_csv(rec.profile, body);
    write_text_atomic(profile_path, body.str());
  }
  const auto j = recovery_json(rec, profile_path);
  if (!out_path.empty()) write_text_atomic(out_path, j.dump(2));
  if (g.json)
    std::cout << j.dump(2) << "\n";
  else if (!g.quiet) {
    std::cout << "recovered scales:";
    for (double s : rec.s_hat) std::cout << " " << fmt6(s);
    std::cout << "\nrecovered set:";
    for (const auto& iv : rec.set.intervals())
      std::cout << " [" << fmt6(iv.t_lo) << ", " << fmt6(iv.t_hi) << "]x"
                << (iv.sign > 0 ? "+" : "-");
    std::cout << "\nscore " << fmt6(rec.residual) << ", fit "
              << fmt6(rec.fit_residual) << "\n";
  }
  return 0;
}

int cmd_orlicz(const GlobalOpts& g, const std::string& profile_path) {
  const auto u = read_csv_file(profile_path);
  const double norm = orlicz_exp_l2_norm(u);
  if (g.json)
    std::cout << "{\"orlicz_norm\": " << fmt(norm) << "}\n";
  else
    std::cout << (g.quiet ? fmt(norm) : "orlicz norm: " + fmt(norm)) << "\n";
  return 0;
}

int cmd_energy(const GlobalOpts& g, const std::string& set_path,
               const std::string& out_path) {
  const auto set = set_from_json(load_json_file(set_path));
  const auto tower = build_tower(set);
  const auto u = sample(tower, tower_grid(tower, g));
  const auto report = energy_report_json(tower, dirichlet_energy(u));
  if (!out_path.empty()) write_text_atomic(out_path, report.dump(2));
  std::cout << report.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for concentration profiles of the "
               "planar critical-growth functional"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_flag("--json", g.json, "machine-readable output");
  app.add_flag("--quiet", g.quiet, "suppress human summaries");
  app.add_option("--nonlinearity", g.nonlinearity, "model|cubic")
      ->check(CLI::IsMember({"model", "cubic"}));
  app.add_option("--grid-tmax", g.grid_tmax, "override grid extent");
  app.add_option("--grid-n", g.grid_n, "override grid node count");
  app.fallthrough();

  std::string set_path, out_csv, report_path, out_path, spec_path;
  std::string profiles_dir, dir, profile_out, profile_path;
  std::size_t design_n = 0;
  double design_lvl = 0.0;
  double window_lo = 0.02, window_hi = 40.0, anchor = 1.0;

  auto* tower = app.add_subcommand("tower", "build a tower profile");
  tower->add_option("--set", set_path, "set spec JSON")->required();
  tower->add_option("--out", out_csv, "profile CSV path");
  tower->add_option("--report", report_path, "energy report JSON path");

  auto* design = app.add_subcommand("design", "design a level set");
  design->add_option("--n", design_n, "number of points")->required();
  design->add_option("--level", design_lvl, "target energy in (1, n)")
      ->required();
  design->add_option("--out", out_path, "set spec JSON path");

  auto* critseq =
      app.add_subcommand("critseq", "synthesize a critical sequence");
  critseq->add_option("--spec", spec_path, "run spec JSON")->required();
  critseq->add_option("--out", out_path, "diagnostics JSON path");
  critseq->add_option("--profiles-dir", profiles_dir,
                      "per-scale profile CSV directory");

  auto* deflate = app.add_subcommand("deflate", "recover blow-up structure");
  deflate->add_option("--dir", dir, "directory of iterate CSVs")->required();
  deflate->add_option("--window-lo", window_lo, "scan window lower t");
  deflate->add_option("--window-hi", window_hi, "scan window upper t");
  deflate->add_option("--out", out_path, "recovery JSON path");
  deflate->add_option("--profile-out", profile_out, "recovered profile CSV");
  deflate->add_option("--anchor", anchor,
                      "gauge anchor for the shallowest set point");

  auto* orlicz = app.add_subcommand("orlicz", "Orlicz norm of a profile CSV");
  orlicz->add_option("--profile", profile_path, "profile CSV")->required();

  auto* energy = app.add_subcommand("energy", "energy report for a set");
  energy->add_option("--set", set_path, "set spec JSON")->required();
  energy->add_option("--out", out_path, "report JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (tower->parsed()) return cmd_tower(g, set_path, out_csv, report_path);
    if (design->parsed()) return cmd_design(g, design_n, design_lvl, out_path);
    if (critseq->parsed())
      return cmd_critseq(g, spec_path, out_path, profiles_dir);
    if (deflate->parsed())
      return cmd_deflate(g, dir, window_lo, window_hi, out_path, profile_out,
                         anchor);
    if (orlicz->parsed()) return cmd_orlicz(g, profile_path);
    if (energy->parsed()) return cmd_energy(g, set_path, out_path);
  } catch (const NoScaleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
