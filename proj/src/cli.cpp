#include "lvpp/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "lvpp/equality.hpp"
#include "lvpp/io.hpp"
#include "lvpp/problems.hpp"

namespace lvpp {

namespace {

namespace fs = std::filesystem;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Defaults {
  int n;
  int full_n;
  double tol;
};

fs::path output_dir(const RunRequest& req) {
  fs::path dir = req.output;
  if (dir.empty()) {
    const char* env = std::getenv("LVPP_OUTPUT_DIR");
    dir = (env && *env) ? fs::path(env) : fs::path("lvpp-output");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

template <class Fn>
void write_file(const fs::path& path, Fn&& fn) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  fn(out);
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

int resolution(const RunRequest& req, const Defaults& d) {
  const int n = req.n ? *req.n : (req.full_scale ? d.full_n : d.n);
  if (n < 1) throw std::invalid_argument("resolution must be >= 1");
  return n;
}

AlphaSchedule schedule_for(const RunRequest& req, AlphaSchedule preset) {
  if (!req.alpha_rule) {
    if (req.alpha0 || req.growth || req.cap) throw std::invalid_argument("--alpha0/--growth/--cap need --alpha-rule");
    return preset;
  }
  const double a0 = req.alpha0.value_or(1.0);
  switch (parse_alpha_rule(*req.alpha_rule)) {
    case AlphaRule::Constant:
      return AlphaSchedule::constant(a0);
    case AlphaRule::CappedGeometric:
      return AlphaSchedule::capped_geometric(a0, req.growth.value_or(2.0), req.cap.value_or(kInf));
    case AlphaRule::DoubleExponential:
      return AlphaSchedule::double_exponential(1.5, 1.5, req.cap.value_or(100.0), a0);
    case AlphaRule::NewtonAdaptive:
      return AlphaSchedule::newton_adaptive(a0);
  }
  return preset;
}

LatentStart latent_start(const std::string& s, LatentStart preset) {
  if (s.empty()) return preset;
  if (s == "zero") return LatentStart::Zero;
  if (s == "consistent") return LatentStart::Consistent;
  throw std::invalid_argument("unknown latent start '" + s + "'");
}

// Sorts a field onto the problem's discretization by its length.
std::optional<FieldData> classify(const SaddleProblem& p, std::string name, Vector v) {
  FieldData f{std::move(name), FieldLocation::Node, 1, std::move(v)};
  if (p.grid) return f.values.size() == p.grid->size() ? std::optional(f) : std::nullopt;
  if (!p.space) return std::nullopt;
  const std::size_t nn = p.space->num_nodes(), nc = p.space->num_cells();
  if (f.values.size() == p.space->num_free() && f.values.size() != nn) f.values = p.space->extend(f.values);
  if (f.values.size() == nn) return f;
  if (nc > 0 && f.values.size() % nc == 0 && f.values.size() / nc <= 4) {
    f.location = FieldLocation::Cell;
    f.components = static_cast<int>(f.values.size() / nc);
    return f;
  }
  return std::nullopt;
}

void write_fields(const RunRequest& req, const fs::path& dir, const SaddleProblem& p,
                  const std::vector<FieldData>& fields) {
  if (req.quiet) return;
  if (req.format == "vtk") {
    write_file(dir / (req.subcommand + ".vtk"), [&](std::ostream& o) {
      if (p.grid) {
        write_vtk(o, *p.grid, fields, req.subcommand);
      } else {
        write_vtk(o, *p.space, fields, req.subcommand);
      }
    });
    return;
  }
  const std::vector<Point> nodes = p.grid ? grid_nodes(*p.grid) : (p.space ? p.space->nodes : std::vector<Point>{});
  for (const auto& f : fields) {
    write_file(dir / (req.subcommand + "_" + f.name + ".csv"), [&](std::ostream& o) {
      if (f.location == FieldLocation::Node) {
        write_node_csv(o, nodes, f.values);
      } else {
        write_cell_csv(o, f.values, f.components);
      }
    });
  }
}

void print_summary(std::ostream& out, const std::string& name, const LvppTrace& t) {
  const double inc = t.iterations.empty() ? 0.0 : t.iterations.back().increment_norm;
  out << name << ": " << (t.converged ? "converged" : "not converged") << " outer=" << t.outer_iterations()
      << " newton=" << t.total_newton_iterations << " linear_solves=" << t.total_linear_solves
      << " increment=" << format_double(inc) << '\n';
}

int run_saddle(const RunRequest& req, const SaddleProblem& p, AlphaSchedule preset, double tol, std::ostream& out,
               std::ostream& err) {
  LvppConfig cfg;
  cfg.schedule = schedule_for(req, std::move(preset));
  cfg.tolerance = req.tol.value_or(tol);
  cfg.max_iterations = req.max_iterations;
  if (req.newton_tol) cfg.newton.tolerance = *req.newton_tol;
  const fs::path dir = output_dir(req);
  const fs::path trace_path = dir / (req.subcommand + "_trace.csv");

  LvppResult r;
  try {
    r = run_lvpp(p, cfg);
  } catch (const LvppError& e) {
    write_file(trace_path, [&](std::ostream& o) { write_trace_csv(o, e.trace()); });
    err << req.subcommand << ": " << e.what() << '\n';
    print_summary(out, req.subcommand, e.trace());
    return 1;
  }
  write_file(trace_path, [&](std::ostream& o) { write_trace_csv(o, r.trace); });

  std::vector<FieldData> fields;
  auto add = [&](const std::string& name, Vector v) {
    if (v.empty()) return;
    if (auto f = classify(p, name, std::move(v))) fields.push_back(std::move(*f));
  };
  add("u", r.primal);
  add("latent", r.latent);
  for (const auto& [name, fn] : p.extras) add(name, fn(r.state));
  write_fields(req, dir, p, fields);

  print_summary(out, req.subcommand, r.trace);
  return r.trace.converged ? 0 : 1;
}

int run_multiphase_cmd(const RunRequest& req, std::ostream& out) {
  const int n = resolution(req, {32, 64, 1e-5});
  MultiphaseData data = multiphase_preset(n, req.steps.value_or(10));
  data.latent_start = latent_start(req.latent_start, data.latent_start);
  if (req.alpha_rule) throw std::invalid_argument("multiphase keeps alpha = 1; --alpha-rule is not accepted");
  NewtonConfig newton;
  if (req.newton_tol) newton.tolerance = *req.newton_tol;
  const MultiphaseRun run = run_multiphase(data, newton, req.tol.value_or(1e-5), req.max_iterations);
  const fs::path dir = output_dir(req);

  LvppTrace total;
  total.converged = true;
  for (const auto& t : run.steps) {
    total.iterations.insert(total.iterations.end(), t.iterations.begin(), t.iterations.end());
    total.total_newton_iterations += t.total_newton_iterations;
    total.total_linear_solves += t.total_linear_solves;
  }
  write_file(dir / "multiphase_trace.csv", [&](std::ostream& o) { write_trace_csv(o, total); });
  write_file(dir / "multiphase_steps.csv", [&](std::ostream& o) {
    o << "step,outer_iters,newton_iters,linear_solves";
    for (int i = 0; i < data.phases; ++i) o << ",mass_" << i;
    o << '\n';
    for (std::size_t s = 0; s < run.steps.size(); ++s) {
      const auto& t = run.steps[s];
      o << s + 1 << ',' << t.outer_iterations() << ',' << t.total_newton_iterations << ',' << t.total_linear_solves;
      for (double m : run.phase_mass[s + 1]) o << ',' << format_double(m);
      o << '\n';
    }
  });

  SaddleProblem shell;
  shell.space = run.space;
  const std::size_t nn = run.space->num_nodes();
  std::vector<FieldData> fields;
  for (int i = 0; i < data.phases; ++i) {
    const auto off = static_cast<std::ptrdiff_t>(i * nn);
    fields.push_back({"u" + std::to_string(i), FieldLocation::Node, 1,
                      Vector(run.u.begin() + off, run.u.begin() + off + static_cast<std::ptrdiff_t>(nn))});
    fields.push_back({"latent" + std::to_string(i), FieldLocation::Node, 1,
                      Vector(run.latent.begin() + off, run.latent.begin() + off + static_cast<std::ptrdiff_t>(nn))});
  }
  write_fields(req, dir, shell, fields);

  print_summary(out, "multiphase", total);
  out << "multiphase: steps=" << run.steps.size() << " max_sum_defect=" << format_double(run.max_sum_defect)
      << " min_fraction=" << format_double(run.min_fraction) << '\n';
  return 0;
}

std::vector<double> parse_eps(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon != std::string::npos) {
    return decade_sweep(std::stod(spec.substr(0, colon)), std::stod(spec.substr(colon + 1)));
  }
  std::vector<double> out;
  std::stringstream ss(spec);
  for (std::string tok; std::getline(ss, tok, ',');) out.push_back(std::stod(tok));
  if (out.empty()) throw std::invalid_argument("empty --eps-sweep");
  return out;
}

int run_equality_cmd(const RunRequest& req, std::ostream& out) {
  const double alpha1 = req.alpha0.value_or(1.0);
  EqualityProblem p = req.matrix_file.empty() ? equality_example()
                                              : equality_problem_from_matrices(read_dense_matrices_file(req.matrix_file), alpha1);
  p.alpha1 = alpha1;
  const auto eps = parse_eps(req.eps_sweep);
  const auto rows = equality_eps_sweep(p, eps);
  const fs::path dir = output_dir(req);
  write_file(dir / "equality_sweep.csv", [&](std::ostream& o) {
    o << "eps,error,multiplier_error,constraint,bound_lhs,bound_rhs,monotonicity,newton_iters\n";
    for (const auto& r : rows) {
      o << format_double(r.eps) << ',' << format_double(r.error) << ',' << format_double(r.multiplier_error) << ','
        << format_double(r.constraint) << ',' << format_double(r.bound_lhs) << ',' << format_double(r.bound_rhs) << ','
        << format_double(r.monotonicity) << ',' << r.newton_iterations << '\n';
    }
  });
  out << "equality: converged eps_values=" << rows.size()
      << " final_error=" << format_double(rows.empty() ? 0.0 : rows.back().error) << '\n';
  return 0;
}

}  // namespace

int run(const RunRequest& req, std::ostream& out, std::ostream& err) {
  try {
    if (req.format != "csv" && req.format != "vtk") throw std::invalid_argument("unknown format '" + req.format + "'");
    const std::string& cmd = req.subcommand;
    if (cmd == "obstacle-fd") {
      int n = resolution(req, {31, 127, 1e-9});
      if (req.h) n = fd_points_for_mesh_size(*req.h);
      ObstacleData d = obstacle_benchmark(Backend::FiniteDifference, n);
      d.latent_start = latent_start(req.latent_start, d.latent_start);
      return run_saddle(req, build_obstacle(d), AlphaSchedule::double_exponential(), 1e-9, out, err);
    }
    if (cmd == "obstacle-fem") {
      ObstacleData d = obstacle_benchmark(Backend::P1, resolution(req, {32, 128, 1e-9}));
      d.latent_start = latent_start(req.latent_start, d.latent_start);
      return run_saddle(req, build_obstacle(d), AlphaSchedule::double_exponential(), 1e-9, out, err);
    }
    if (cmd == "gradient") {
      const GradientData d = gradient_preset(resolution(req, {64, 200, 1e-8}));
      return run_saddle(req, build_gradient_constraint(d), AlphaSchedule::capped_geometric(1.0, 2.0, kInf), 1e-8, out,
                        err);
    }
    if (cmd == "intersection") {
      IntersectionData d;
      d.n = resolution(req, {200, 200, 1e-8});
      if (req.slope_cap) d.slope_cap = *req.slope_cap;
      return run_saddle(req, build_intersection(d), intersection_schedule(), 1e-8, out, err);
    }
    if (cmd == "eikonal") {
      return run_saddle(req, build_eikonal(resolution(req, {32, 64, 1e-4}), req.interval), eikonal_schedule(), 1e-4,
                        out, err);
    }
    if (cmd == "qvi") {
      const QviData d = qvi_preset(resolution(req, {50, 100, 1e-5}));
      return run_saddle(req, build_qvi_thermoforming(d), qvi_schedule(), 1e-5, out, err);
    }
    if (cmd == "multiphase") return run_multiphase_cmd(req, out);
    if (cmd == "equality") return run_equality_cmd(req, out);
    throw std::invalid_argument("unknown subcommand '" + cmd + "'");
  } catch (const std::exception& e) {
    err << req.subcommand << ": error: " << e.what() << '\n';
    return 2;
  }
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Latent variable proximal point solver for pointwise-constrained variational problems"};
  // -h is taken by the mesh size.
  app.set_help_flag("--help", "Print this help message and exit");
  RunRequest req;
  app.add_option("subcommand", req.subcommand, "Problem to solve")
      ->required()
      ->check(CLI::IsMember({"obstacle-fd", "obstacle-fem", "gradient", "intersection", "eikonal", "multiphase", "qvi",
                             "equality"}));
  app.add_option("--n", req.n, "Resolution (FD interior points or cells per axis)");
  app.add_option("--h", req.h, "FD mesh size on (-1, 1), obstacle-fd only");
  app.add_option("--alpha-rule", req.alpha_rule, "constant | geometric | double-exp | adaptive");
  app.add_option("--alpha0", req.alpha0, "First alpha (equality: alpha_1)");
  app.add_option("--growth", req.growth, "Geometric growth factor");
  app.add_option("--cap", req.cap, "Upper bound on alpha");
  app.add_option("--tol", req.tol, "Outer stopping tolerance on the increment norm");
  app.add_option("--newton-tol", req.newton_tol, "Absolute Newton residual tolerance");
  app.add_option("--max-iters", req.max_iterations, "Outer iteration limit");
  app.add_flag("--paper-scale", req.full_scale, "Use the full-size resolution");
  app.add_flag("--interval", req.interval, "eikonal: solve on the unit interval");
  app.add_option("--slope-cap", req.slope_cap, "intersection: slope bound near the ends");
  app.add_option("--steps", req.steps, "multiphase: number of time steps");
  app.add_option("--latent-start", req.latent_start, "zero | consistent");
  app.add_option("--format", req.format, "Field output format")->check(CLI::IsMember({"csv", "vtk"}));
  app.add_option("--output", req.output, "Output directory (default $LVPP_OUTPUT_DIR or ./lvpp-output)");
  app.add_option("--matrix-file", req.matrix_file, "equality: file holding A, B, F (and psi0)");
  app.add_option("--eps-sweep", req.eps_sweep, "equality: hi:lo by decades, or a comma list");
  app.add_flag("--quiet", req.quiet, "Write the trace only");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  return run(req, std::cout, std::cerr);
}

}  // namespace lvpp
