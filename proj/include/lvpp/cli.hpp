#pragma once

#include <iosfwd>
#include <optional>
#include <string>

namespace lvpp {

/// One CLI invocation. Unset optionals fall back to the subcommand's preset.
struct RunRequest {
  std::string subcommand;
  std::optional<int> n;
  std::optional<double> h;  ///< obstacle-fd mesh size, alternative to n
  std::optional<std::string> alpha_rule;
  std::optional<double> alpha0;
  std::optional<double> growth;
  std::optional<double> cap;
  std::optional<double> tol;
  std::optional<double> newton_tol;
  int max_iterations = 200;
  bool full_scale = false;  ///< set by --paper-scale
  bool interval = false;        ///< eikonal on the unit interval
  std::optional<double> slope_cap;  ///< intersection phi_c
  std::optional<int> steps;     ///< multiphase time steps
  std::string latent_start;     ///< "zero" or "consistent"; empty keeps the preset
  std::string format = "csv";   ///< csv | vtk
  std::string output;           ///< directory; empty uses $LVPP_OUTPUT_DIR or ./lvpp-output
  std::string matrix_file;
  std::string eps_sweep = "1e-1:1e-6";
  bool quiet = false;           ///< skip field files, write the trace only
};

/// Runs one request, writing files under the output directory and a
/// one-line summary to out. Returns 0 on convergence.
int run(const RunRequest& request, std::ostream& out, std::ostream& err);

/// Parses argv and calls run.
int cli_main(int argc, char** argv);

}  // namespace lvpp
