#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lvpp/cli.hpp"
#include "lvpp/io.hpp"
#include "lvpp/problems.hpp"

using namespace lvpp;
namespace fs = std::filesystem;

namespace {

// Fresh directory under the system temp dir, removed on scope exit.
struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("lvpp-test-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<double> column(const std::string& csv, std::size_t col) {
  std::vector<double> out;
  const auto rows = lines(csv);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    std::istringstream in(rows[r]);
    std::string cell;
    for (std::size_t c = 0; c <= col; ++c) std::getline(in, cell, ',');
    out.push_back(std::stod(cell));
  }
  return out;
}

int run_args(std::vector<std::string> args) {
  args.insert(args.begin(), "lvpp");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("node CSV of a zero field") {
    const Grid2D g = build_grid2d(2, Box::unit());
    std::ostringstream out;
    write_node_csv(out, grid_nodes(g), Vector(4, 0.0));
    const auto rows = lines(out.str());
    REQUIRE(rows.size() == 5);
    CHECK(rows[0] == "x,y,value");
    for (double v : column(out.str(), 2)) CHECK(v == 0.0);
    CHECK_THROWS_AS(write_node_csv(out, grid_nodes(g), Vector(3, 0.0)), std::invalid_argument);
  }

  TEST_CASE("cell CSV") {
    std::ostringstream one, two;
    write_cell_csv(one, Vector{1.5, 2.5});
    CHECK(one.str() == "cell,value\n0,1.5\n1,2.5\n");
    write_cell_csv(two, Vector{1.0, 2.0, 3.0, 4.0}, 2);
    CHECK(two.str() == "cell,value_0,value_1\n0,1,2\n1,3,4\n");
  }

  TEST_CASE("full precision output") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(format_double(2.0) == "2");
  }

  TEST_CASE("VTK writers") {
    const Grid2D g = build_grid2d(2, Box::unit());
    std::ostringstream fd;
    write_vtk(fd, g, {{"u", FieldLocation::Node, 1, Vector(4, 1.0)}});
    const auto a = lines(fd.str());
    CHECK(a[0] == "# vtk DataFile Version 3.0");
    CHECK(fd.str().find("DATASET STRUCTURED_POINTS") != std::string::npos);
    CHECK(fd.str().find("DIMENSIONS 2 2 1") != std::string::npos);
    CHECK(fd.str().find("POINT_DATA 4") != std::string::npos);

    const P1Space s = make_p1_space(build_tri_mesh(1, Box::unit()));
    std::ostringstream fem;
    write_vtk(fem, s, {{"u", FieldLocation::Node, 1, Vector(4, 0.0)}, {"g", FieldLocation::Cell, 2, Vector(4, 0.0)}});
    const std::string t = fem.str();
    CHECK(lines(t)[0] == "# vtk DataFile Version 3.0");
    CHECK(t.find("DATASET UNSTRUCTURED_GRID") != std::string::npos);
    CHECK(t.find("CELL_TYPES 2\n5\n5\n") != std::string::npos);
    CHECK(t.find("CELL_DATA 2") != std::string::npos);
    CHECK(t.find("SCALARS g double 2") != std::string::npos);
    std::ostringstream bad;
    CHECK_THROWS_AS(write_vtk(bad, s, {{"u", FieldLocation::Node, 1, Vector(3, 0.0)}}), std::invalid_argument);
  }

  TEST_CASE("trace CSV") {
    LvppTrace t;
    for (int k = 1; k <= 3; ++k) t.iterations.push_back({k, 1.0 * k, 2, 2, 0.5 / k, 1e-3});
    std::ostringstream out;
    write_trace_csv(out, t);
    const auto rows = lines(out.str());
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == "k,alpha,newton_iters,linear_solves,increment_norm,min_margin");
    CHECK(rows[3] == "3,3,2,2,0.16666666666666666,0.001");
  }

  TEST_CASE("runs are deterministic") {
    TempDir a, b;
    RunRequest req;
    req.subcommand = "obstacle-fem";
    req.n = 8;
    std::ostringstream out, err;
    req.output = a.path.string();
    REQUIRE(run(req, out, err) == 0);
    req.output = b.path.string();
    REQUIRE(run(req, out, err) == 0);
    int files = 0;
    for (const auto& e : fs::directory_iterator(a.path)) {
      CHECK(slurp(e.path()) == slurp(b.path / e.path().filename()));
      ++files;
    }
    CHECK(files >= 2);
    CHECK(fs::exists(a.path / "obstacle-fem_trace.csv"));
    CHECK(fs::exists(a.path / "obstacle-fem_u.csv"));
  }

  TEST_CASE("obstacle-fd summary and VTK output") {
    TempDir d;
    RunRequest req;
    req.subcommand = "obstacle-fd";
    req.n = 15;
    req.format = "vtk";
    req.output = d.path.string();
    std::ostringstream out, err;
    CHECK(run(req, out, err) == 0);
    CHECK(out.str().rfind("obstacle-fd: converged outer=", 0) == 0);
    CHECK(out.str().find("linear_solves=") != std::string::npos);
    REQUIRE(fs::exists(d.path / "obstacle-fd.vtk"));
    CHECK(lines(slurp(d.path / "obstacle-fd.vtk"))[0] == "# vtk DataFile Version 3.0");
  }

  TEST_CASE("eikonal against the distance function") {
    TempDir d;
    CHECK(run_args({"eikonal", "--n", "32", "--output", d.path.string()}) == 0);
    const std::string csv = slurp(d.path / "eikonal_u.csv");
    const auto x = column(csv, 0), y = column(csv, 1), u = column(csv, 2);
    REQUIRE(u.size() == 33u * 33u);
    double top_u = 0.0, top_d = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      top_u = std::max(top_u, u[i]);
      top_d = std::max(top_d, distance_to_boundary(Box::unit(), {x[i], y[i]}));
    }
    const double ratio = top_u / top_d;
    CHECK(ratio >= 0.95);
    CHECK(ratio <= 1.0);
  }

  TEST_CASE("equality sweep from a matrix file") {
    TempDir d;
    const fs::path m = d.path / "demo.txt";
    std::ofstream(m) << "2 2\n1 0\n0 1\n1 2\n1 1\n2 1\n1\n0\n";
    CHECK(run_args({"equality", "--matrix-file", m.string(), "--eps-sweep", "1e-1:1e-6", "--output", d.path.string()}) ==
          0);
    const std::string csv = slurp(d.path / "equality_sweep.csv");
    CHECK(lines(csv)[0].rfind("eps,error,", 0) == 0);
    const auto eps = column(csv, 0), err = column(csv, 1);
    REQUIRE(err.size() == 6);
    for (std::size_t i = 1; i < err.size(); ++i) CHECK(err[i] < err[i - 1]);
    CHECK(eps.back() == doctest::Approx(1e-6));
  }

  TEST_CASE("output directory from the environment") {
    TempDir d;
    ::setenv("LVPP_OUTPUT_DIR", d.path.string().c_str(), 1);
    RunRequest req;
    req.subcommand = "eikonal";
    req.n = 8;
    req.interval = true;
    req.quiet = true;
    std::ostringstream out, err;
    CHECK(run(req, out, err) == 0);
    ::unsetenv("LVPP_OUTPUT_DIR");
    CHECK(fs::exists(d.path / "eikonal_trace.csv"));
    CHECK_FALSE(fs::exists(d.path / "eikonal_u.csv"));
  }

  TEST_CASE("bad requests fail with a message") {
    TempDir d;
    std::ostringstream out, err;
    RunRequest req;
    req.output = d.path.string();
    req.subcommand = "nonsense";
    CHECK(run(req, out, err) != 0);
    CHECK_FALSE(err.str().empty());
    req.subcommand = "gradient";
    req.n = 0;
    CHECK(run(req, out, err) != 0);
    req.n = 4;
    req.format = "png";
    CHECK(run(req, out, err) != 0);
    req.format = "csv";
    req.max_iterations = 1;
    CHECK(run(req, out, err) == 1);
    CHECK(out.str().find("not converged") != std::string::npos);
    RunRequest eq;
    eq.subcommand = "equality";
    eq.output = d.path.string();
    eq.matrix_file = (d.path / "missing.txt").string();
    CHECK(run(eq, out, err) != 0);
    CHECK(run_args({"obstacle-fd", "--format", "png"}) != 0);
    CHECK(run_args({"unknown"}) != 0);
  }
}
