#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#ifndef CANSYS_CLI_PATH
#error "CANSYS_CLI_PATH must be defined by the build"
#endif

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  RunResult r;
  const std::string cmd = std::string(CANSYS_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) {
    r.output.append(buf, n);
  }
  const int rc = pclose(pipe);
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return r;
}

std::string write_spec(const std::string& name, const std::string& body) {
  const std::filesystem::path p = std::filesystem::temp_directory_path() /
                                  ("cansys_" + std::to_string(::getpid()) + "_" + name + ".json");
  std::ofstream out(p);
  out << body;
  out.close();
  return p.string();
}

// Extracts the numeric value of a "key=value" line.
double value_of(const std::string& output, const std::string& key) {
  std::istringstream in(output);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + "=", 0) == 0) {
      return std::stod(line.substr(key.size() + 1));
    }
  }
  FAIL("missing key in CLI output: " << key << "\n" << output);
  return 0.0;
}

}  // namespace

TEST_CASE("power-q reports the closed form") {
  const std::string spec =
      write_spec("diag", R"({"kind":"power","rho":[1,3,2],"kappa":[1,1,0]})");
  const RunResult r = run_cli("power-q --spec " + spec + " --z i --z 1+i");
  CHECK(r.exit_code == 0);
  CHECK(value_of(r.output, "alpha") == doctest::Approx(0.5));
  CHECK(value_of(r.output, "omega_re") == doctest::Approx(1.4793375595943194462).epsilon(1e-13));
  CHECK(value_of(r.output, "omega_im") == doctest::Approx(0.0));
  CHECK(r.output.find("formula=gamma-ratio closed form") != std::string::npos);
  // q(i) = i omega for this law: one CSV row per requested z.
  CHECK(r.output.find("# re_z,im_z,re_q,im_q") != std::string::npos);
  CHECK(r.output.find("0,1,") != std::string::npos);
}

TEST_CASE("power-q flags boundary data") {
  const std::string spec =
      write_spec("upper", R"({"kind":"power","rho":[2,1,1],"kappa":[3,0,0]})");
  const RunResult r = run_cli("power-q --spec " + spec);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("verdict=q identically infinite") != std::string::npos);
}

TEST_CASE("numeric-q output is deterministic and matches the closed form") {
  const std::string spec =
      write_spec("mixed", R"({"kind":"power","rho":[1,2,1.5],"kappa":[1,1,0.5]})");
  const std::string args = "numeric-q --spec " + spec + " --z i --disc-tol 1e-8";
  const RunResult a = run_cli(args);
  const RunResult b = run_cli(args);
  CHECK(a.exit_code == 0);
  CHECK(a.output == b.output);
  CHECK(a.output.find("re_z,im_z,re_q,im_q,disc_radius,t_reached,status") != std::string::npos);

  // Pull the data row and compare against power-q at the same point.
  std::istringstream in(a.output);
  std::string line, row;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#' && line.find(",converged") != std::string::npos) {
      row = line;
    }
  }
  REQUIRE(!row.empty());
  std::vector<double> cols;
  std::istringstream rs(row);
  std::string cell;
  for (int i = 0; i < 6 && std::getline(rs, cell, ','); ++i) cols.push_back(std::stod(cell));
  REQUIRE(cols.size() == 6);

  const RunResult pq = run_cli("power-q --spec " + spec + " --z i");
  std::istringstream pin(pq.output);
  double want_re = 0, want_im = 0;
  while (std::getline(pin, line)) {
    if (line.rfind("0,1,", 0) == 0) {
      std::istringstream ls(line);
      std::string c;
      std::getline(ls, c, ',');
      std::getline(ls, c, ',');
      std::getline(ls, c, ',');
      want_re = std::stod(c);
      std::getline(ls, c, ',');
      want_im = std::stod(c);
    }
  }
  const double err = std::hypot(cols[2] - want_re, cols[3] - want_im) / std::hypot(want_re, want_im);
  CHECK(err < 1e-5);
}

TEST_CASE("predict reports the asymptotic law of perturbed power data") {
  const std::string spec = write_spec(
      "pert", R"({"kind":"perturbed_power","rho":[1,2,1.5],"kappa":[1,1,0.3],"amplitude":0.1})");
  const RunResult r = run_cli("predict --spec " + spec);
  CHECK(r.exit_code == 0);
  CHECK(value_of(r.output, "alpha") == doctest::Approx(1.0 / 3.0));
  // delta = (kappa3/rho3) / sqrt(c1 c2) with c1 = 1, c2 = 1/2.
  CHECK(value_of(r.output, "delta") == doctest::Approx(0.2 / std::sqrt(0.5)).epsilon(1e-12));
  CHECK(r.output.find("alpha_formula=index ratio") != std::string::npos);
}

TEST_CASE("verify passes the exact law and rejects a wrong one") {
  const std::string spec =
      write_spec("vdiag", R"({"kind":"power","rho":[1,3,2],"kappa":[1,1,0]})");
  const RunResult good =
      run_cli("verify --spec " + spec + " --r-grid 1,10 --angles 1.5707963267948966");
  CHECK(good.exit_code == 0);
  CHECK(good.output.find("r,phi,rel_error,status") != std::string::npos);
  CHECK(good.output.find("PASS") != std::string::npos);

  const RunResult bad = run_cli("verify --spec " + spec +
                                " --r-grid 1,10 --angles 1.5707963267948966"
                                " --alpha 0.5 --omega-re 2.8 --omega-im 0");
  CHECK(bad.exit_code == 1);
  CHECK(bad.output.find("FAIL") != std::string::npos);
}

TEST_CASE("regvar reports indices of the primitive") {
  const std::string spec = write_spec(
      "steps",
      R"({"kind":"piecewise","segments":[{"len":null,"h":[[1,0],[0,1]]}]})");
  const RunResult r = run_cli("regvar --spec " + spec);
  CHECK(r.exit_code == 0);
  CHECK(value_of(r.output, "m1_index") == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(value_of(r.output, "m2_index") == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(value_of(r.output, "delta") == doctest::Approx(0.0));
  CHECK(r.output.find("shape=regular") != std::string::npos);
}

TEST_CASE("rescale rewrites the spec") {
  const std::string spec =
      write_spec("resc", R"({"kind":"power","rho":[1,2,1.5],"kappa":[1,1,0.5]})");
  const RunResult r = run_cli("rescale --spec " + spec + " --r 2 --b1 1.5 --b2 0.5");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"kind\": \"power\"") != std::string::npos);
  // kappa1 -> b1^2 s^(rho1-1) kappa1 with s = b1 b2 / r = 0.375.
  CHECK(r.output.find("2.25") != std::string::npos);
}

TEST_CASE("exit codes distinguish failure classes") {
  // 2: unreadable spec file.
  CHECK(run_cli("power-q --spec /nonexistent/nope.json").exit_code == 2);
  // 2: malformed JSON.
  const std::string bad_json = write_spec("badjson", "{not json");
  CHECK(run_cli("power-q --spec " + bad_json).exit_code == 2);
  // 2: unknown kind.
  const std::string bad_kind = write_spec("badkind", R"({"kind":"mystery"})");
  CHECK(run_cli("power-q --spec " + bad_kind).exit_code == 2);
  // 2: wrong spec kind for the subcommand.
  const std::string steps = write_spec(
      "steps2", R"({"kind":"piecewise","segments":[{"len":null,"h":[[1,0],[0,1]]}]})");
  CHECK(run_cli("power-q --spec " + steps).exit_code == 2);
  // 2: rescale of a kind it cannot represent.
  const std::string pert = write_spec(
      "pert2", R"({"kind":"perturbed_power","rho":[1,2,1.5],"kappa":[1,1,0.3]})");
  CHECK(run_cli("rescale --spec " + pert + " --r 2 --b1 1 --b2 1").exit_code == 2);
  // 2: missing required option.
  CHECK(run_cli("power-q").exit_code == 2);
  // 4: admissibility violation (kappa3^2 > kappa1 kappa2).
  const std::string inadmissible =
      write_spec("inad", R"({"kind":"power","rho":[1,2,1.5],"kappa":[1,1,5]})");
  CHECK(run_cli("power-q --spec " + inadmissible).exit_code == 4);
  // 4: evaluation point outside the upper half-plane.
  const std::string diag = write_spec("diag2", R"({"kind":"power","rho":[1,3,2],"kappa":[1,1,0]})");
  CHECK(run_cli("numeric-q --spec " + diag + " --z 1-2i").exit_code == 4);
  // 5: not enough usable data for an index estimate (m2 vanishes identically).
  const std::string upper = write_spec(
      "upper2", R"({"kind":"piecewise","segments":[{"len":null,"h":[[1,0],[0,0]]}]})");
  CHECK(run_cli("regvar --spec " + upper).exit_code == 5);
}
