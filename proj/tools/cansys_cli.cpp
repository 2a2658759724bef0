// Command-line front end: closed-form and numerical Weyl coefficients,
// power-law predictions, asymptotic verification, regular-variation reports
// and rescaling of stored Hamiltonian specs.

#include <cctype>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <limits>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cansys/asymptotics.hpp"
#include "cansys/errors.hpp"
#include "cansys/hamiltonian.hpp"
#include "cansys/power_model.hpp"
#include "cansys/weyl.hpp"

namespace {

using cansys::complex;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitVerdictFail = 1;
constexpr int kExitSpec = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitDomain = 4;
constexpr int kExitInsufficient = 5;

// Problems with the spec file itself (unreadable, bad schema, unsupported
// kind). Distinct from domain_error, which flags well-formed but
// inadmissible data.
struct SpecError : std::runtime_error {
  explicit SpecError(const std::string& what) : std::runtime_error(what) {}
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

complex parse_complex(const std::string& raw) {
  std::string s;
  for (char c : raw) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  }
  if (s.empty()) throw cansys::domain_error("empty complex literal");
  const auto to_double = [](const std::string& part) {
    if (part.empty() || part == "+") return 1.0;
    if (part == "-") return -1.0;
    std::size_t used = 0;
    const double v = std::stod(part, &used);
    if (used != part.size()) throw cansys::domain_error("bad numeric literal: " + part);
    return v;
  };
  // Split at the last sign that is neither leading nor part of an exponent.
  std::size_t split = std::string::npos;
  for (std::size_t i = s.size(); i-- > 1;) {
    if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  try {
    if (s.back() == 'i' || s.back() == 'I') {
      const std::string imag_part = s.substr(split == std::string::npos ? 0 : split,
                                             s.size() - (split == std::string::npos ? 0 : split) - 1);
      const std::string real_part = split == std::string::npos ? "" : s.substr(0, split);
      return complex(real_part.empty() ? 0.0 : to_double(real_part), to_double(imag_part));
    }
    if (split != std::string::npos) throw cansys::domain_error("bad complex literal: " + raw);
    return complex(to_double(s), 0.0);
  } catch (const std::invalid_argument&) {
    throw cansys::domain_error("bad complex literal: " + raw);
  } catch (const std::out_of_range&) {
    throw cansys::domain_error("complex literal out of range: " + raw);
  }
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  if (out.empty()) throw cansys::domain_error("empty numeric list: " + csv);
  return out;
}

struct SpecFile {
  std::string kind;
  cansys::PowerData power;      // power and perturbed_power
  double amplitude = 0.1;       // perturbed_power
  cansys::Hamiltonian hamiltonian = cansys::Hamiltonian::power({1, 1, 1, 1, 0, 0});
  json raw;
};

cansys::PowerData power_from_json(const json& j) {
  const auto& rho = j.at("rho");
  const auto& kappa = j.at("kappa");
  if (!rho.is_array() || rho.size() != 3 || !kappa.is_array() || kappa.size() != 3) {
    throw SpecError("spec: rho and kappa must be arrays of three numbers");
  }
  cansys::PowerData d;
  d.rho1 = rho[0].get<double>();
  d.rho2 = rho[1].get<double>();
  d.rho3 = rho[2].get<double>();
  d.kappa1 = kappa[0].get<double>();
  d.kappa2 = kappa[1].get<double>();
  d.kappa3 = kappa[2].get<double>();
  return d;
}

cansys::Hamiltonian perturbed_power_hamiltonian(const cansys::PowerData& d, double amplitude) {
  cansys::validate_power(d);
  const double r3 = cansys::power_rho3_effective(d);
  auto eval = [d, r3, amplitude](double t) {
    const double bump = 1.0 + amplitude / (1.0 + std::abs(std::log(t)));
    Eigen::Matrix2d m;
    const double h1 = d.kappa1 == 0.0 ? 0.0 : d.kappa1 * std::pow(t, d.rho1 - 1.0);
    const double h2 = d.kappa2 == 0.0 ? 0.0 : d.kappa2 * std::pow(t, d.rho2 - 1.0);
    const double h3 = d.kappa3 == 0.0 ? 0.0 : d.kappa3 * std::pow(t, r3 - 1.0);
    m << h1 * bump, h3 * bump, h3 * bump, h2 * bump;
    return m;
  };
  return cansys::Hamiltonian::sampled(eval, std::numeric_limits<double>::infinity(), true);
}

SpecFile load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open spec file: " + path);
  SpecFile spec;
  spec.raw = json::parse(in);
  spec.kind = spec.raw.at("kind").get<std::string>();
  if (spec.kind == "power") {
    spec.power = power_from_json(spec.raw);
    spec.hamiltonian = cansys::Hamiltonian::power(spec.power);
  } else if (spec.kind == "perturbed_power") {
    spec.power = power_from_json(spec.raw);
    spec.amplitude = spec.raw.value("amplitude", 0.1);
    spec.hamiltonian = perturbed_power_hamiltonian(spec.power, spec.amplitude);
  } else if (spec.kind == "piecewise") {
    const auto& segs = spec.raw.at("segments");
    if (!segs.is_array() || segs.empty()) {
      throw SpecError("spec: segments must be a nonempty array");
    }
    std::vector<cansys::Hamiltonian::Segment> out;
    for (const auto& sj : segs) {
      cansys::Hamiltonian::Segment s;
      if (!sj.contains("len") || sj.at("len").is_null()) {
        s.len = std::numeric_limits<double>::infinity();
      } else {
        s.len = sj.at("len").get<double>();
      }
      const auto& h = sj.at("h");
      if (!h.is_array() || h.size() != 2 || h[0].size() != 2 || h[1].size() != 2) {
        throw SpecError("spec: segment h must be a 2x2 array");
      }
      s.h << h[0][0].get<double>(), h[0][1].get<double>(), h[1][0].get<double>(),
          h[1][1].get<double>();
      out.push_back(s);
    }
    spec.hamiltonian = cansys::Hamiltonian::piecewise(std::move(out));
  } else {
    throw SpecError("spec: unknown kind '" + spec.kind + "'");
  }
  return spec;
}

std::ostream& open_output(std::ofstream& file, const std::string& out_path) {
  if (out_path.empty()) return std::cout;
  file.open(out_path);
  if (!file) throw SpecError("cannot open output file: " + out_path);
  return file;
}

const char* status_name(cansys::WeylStatus s) {
  switch (s) {
    case cansys::WeylStatus::converged:
      return "converged";
    case cansys::WeylStatus::at_infinity:
      return "at_infinity";
    case cansys::WeylStatus::indeterminate:
      return "indeterminate";
    case cansys::WeylStatus::nonconverged:
      return "nonconverged";
  }
  return "unknown";
}

int run_power_q(const SpecFile& spec, const std::vector<std::string>& z_list, std::ostream& os) {
  if (spec.kind != "power") {
    std::cerr << "power-q requires a spec of kind 'power'\n";
    return kExitSpec;
  }
  const cansys::PowerData& d = spec.power;
  if (cansys::power_is_boundary(d)) {
    const cansys::BoundaryVerdict v = cansys::boundary_case_q(d);
    if (v.kind == cansys::BoundaryKind::q_infinite) {
      os << "verdict=q identically infinite (upper channel only: kappa2 = kappa3 = 0)\n";
    } else {
      os << "verdict=q identically zero (lower channel only: kappa1 = kappa3 = 0)\n";
    }
    return kExitOk;
  }
  const cansys::PowerLaw law = cansys::closed_form_q(d);
  os << "alpha=" << num(law.alpha) << "\n";
  os << "omega_re=" << num(law.omega.real()) << "\n";
  os << "omega_im=" << num(law.omega.imag()) << "\n";
  os << "arg_omega=" << num(cansys::arg_omega(d)) << "\n";
  const char* formula = "gamma-ratio closed form";
  if (std::abs(d.rho1 - d.rho2) <= 1e-12 * (d.rho1 + d.rho2)) {
    formula = "equal-index algebraic form";
  } else if (cansys::power_kappa_degenerate(d)) {
    formula = "degenerate product form";
  }
  os << "formula=" << formula << "\n";
  if (!z_list.empty()) {
    os << "# re_z,im_z,re_q,im_q\n";
    for (const std::string& zs : z_list) {
      const complex z = parse_complex(zs);
      const complex q = cansys::q_power_eval(law, z);
      os << num(z.real()) << "," << num(z.imag()) << "," << num(q.real()) << ","
         << num(q.imag()) << "\n";
    }
  }
  return kExitOk;
}

int run_numeric_q(const SpecFile& spec, const std::vector<std::string>& z_list, double ode_tol,
                  double disc_tol, double t_max, const std::string& cmdline, std::ostream& os) {
  if (z_list.empty()) {
    std::cerr << "numeric-q requires at least one --z\n";
    return kExitSpec;
  }
  os << "# " << cmdline << "\n";
  os << "# ode_tol=" << num(ode_tol) << " disc_tol=" << num(disc_tol) << " t_max=" << num(t_max)
     << "\n";
  os << "re_z,im_z,re_q,im_q,disc_radius,t_reached,status\n";
  std::size_t failures = 0;
  for (const std::string& zs : z_list) {
    const complex z = parse_complex(zs);
    if (!(z.imag() > 0.0)) {
      throw cansys::domain_error("numeric-q: z must lie in the open upper half-plane");
    }
    std::string status;
    complex q(0.0, 0.0);
    double radius = std::numeric_limits<double>::infinity();
    double t_reached = 0.0;
    try {
      const cansys::WeylResult wr =
          cansys::weyl_coefficient(spec.hamiltonian, z, disc_tol, t_max, ode_tol);
      status = status_name(wr.status);
      q = wr.value;
      radius = wr.radius;
      t_reached = wr.t_reached;
      if (wr.status == cansys::WeylStatus::indeterminate ||
          wr.status == cansys::WeylStatus::nonconverged) {
        ++failures;
      }
    } catch (const cansys::numeric_error&) {
      status = "error";
      ++failures;
    }
    os << num(z.real()) << "," << num(z.imag()) << "," << num(q.real()) << "," << num(q.imag())
       << "," << num(radius) << "," << num(t_reached) << "," << status << "\n";
  }
  return failures == z_list.size() ? kExitNumeric : kExitOk;
}

int run_predict(const SpecFile& spec, std::ostream& os) {
  if (spec.kind != "power" && spec.kind != "perturbed_power") {
    std::cerr << "predict requires a spec of kind 'power' or 'perturbed_power'\n";
    return kExitSpec;
  }
  const cansys::PowerData& d = spec.power;
  cansys::validate_power(d);
  if (!(d.kappa1 > 0.0) || !(d.kappa2 > 0.0)) {
    const cansys::BoundaryVerdict v = cansys::boundary_case_q(d);
    os << "verdict="
       << (v.kind == cansys::BoundaryKind::q_infinite ? "q identically infinite"
                                                      : "q identically zero")
       << "\n";
    return kExitOk;
  }
  const double c1 = d.kappa1 / d.rho1;
  const double c2 = d.kappa2 / d.rho2;
  const double c3 = d.kappa3 == 0.0 ? 0.0 : d.kappa3 / cansys::power_rho3_effective(d);
  const cansys::PowerPrediction p = cansys::predict_power_asymptotics(c1, c2, c3, d.rho1, d.rho2);
  os << "alpha=" << num(p.alpha) << "\n";
  os << "alpha_formula=index ratio (rho2-rho1)/(rho2+rho1)\n";
  os << "delta=" << num(p.delta) << "\n";
  os << "delta_formula=off-diagonal ratio c3/sqrt(c1 c2)\n";
  os << "omega_re=" << num(p.omega.real()) << "\n";
  os << "omega_im=" << num(p.omega.imag()) << "\n";
  os << "omega_formula=normalized limit coefficient omega(alpha, delta)\n";
  os << "omega_prime_re=" << num(p.omega_prime.real()) << "\n";
  os << "omega_prime_im=" << num(p.omega_prime.imag()) << "\n";
  os << "omega_prime_formula=leading-coefficient normalization "
        "c1^((alpha+1)/2) c2^((alpha-1)/2) omega\n";
  return kExitOk;
}

int run_verify(const SpecFile& spec, const std::string& r_grid_csv, const std::string& angles_csv,
               double threshold, std::optional<double> alpha_override,
               std::optional<double> omega_re, std::optional<double> omega_im, double ode_tol,
               double disc_tol, double t_max, std::ostream& os) {
  cansys::PowerLaw law;
  if (alpha_override) {
    law.alpha = *alpha_override;
    law.omega = complex(omega_re.value_or(1.0), omega_im.value_or(0.0));
  } else if (spec.kind == "power" || spec.kind == "perturbed_power") {
    const cansys::PowerData& d = spec.power;
    if (!(d.kappa1 > 0.0) || !(d.kappa2 > 0.0)) {
      std::cerr << "verify: single-channel data has no finite power law\n";
      return kExitSpec;
    }
    const cansys::PowerPrediction p = cansys::predict_power_asymptotics(
        d.kappa1 / d.rho1, d.kappa2 / d.rho2,
        d.kappa3 == 0.0 ? 0.0 : d.kappa3 / cansys::power_rho3_effective(d), d.rho1, d.rho2);
    law.alpha = p.alpha;
    law.omega = p.omega_prime;
  } else {
    const cansys::BoundaryVerdict v = cansys::boundary_case_q(spec.hamiltonian);
    law = v.law;
  }
  const std::vector<double> r_grid = parse_double_list(r_grid_csv);
  const std::vector<double> angles = parse_double_list(angles_csv);
  const cansys::AsymptoticsVerdict verdict = cansys::verify_asymptotics(
      spec.hamiltonian, law, r_grid, angles, threshold, disc_tol, t_max, ode_tol);
  os << "r,phi,rel_error,status\n";
  for (const cansys::VerifyCell& c : verdict.cells) {
    os << num(c.r) << "," << num(c.phi) << "," << num(c.rel_error) << "," << status_name(c.status)
       << "\n";
  }
  os << (verdict.pass ? "PASS" : "FAIL") << "\n";
  return verdict.pass ? kExitOk : kExitVerdictFail;
}

int run_regvar(const SpecFile& spec, std::ostream& os) {
  const cansys::Hamiltonian& h = spec.hamiltonian;
  const double top = std::isfinite(h.length()) ? 0.45 * h.length() : 1.5;
  const double bottom = top * 1e-3;
  std::vector<std::pair<double, double>> s1, s2;
  for (int i = 0; i < 30; ++i) {
    const double t = bottom * std::pow(top / bottom, i / 29.0);
    const cansys::PrimitiveValue m = cansys::primitive(h, t);
    s1.emplace_back(t, m.m1);
    s2.emplace_back(t, m.m2);
  }
  const cansys::RegVarReport r1 = cansys::estimate_regvar_index(s1);
  const cansys::RegVarReport r2 = cansys::estimate_regvar_index(s2);
  os << "m1_index=" << num(r1.index) << "\n";
  os << "m1_rapid=" << (r1.rapid ? 1 : 0) << "\n";
  os << "m1_scale=" << num(r1.scale) << "\n";
  os << "m1_fit_residual=" << num(r1.fit_residual) << "\n";
  os << "m2_index=" << num(r2.index) << "\n";
  os << "m2_rapid=" << (r2.rapid ? 1 : 0) << "\n";
  os << "m2_scale=" << num(r2.scale) << "\n";
  os << "m2_fit_residual=" << num(r2.fit_residual) << "\n";
  const char* shape = "regular";
  if (r2.rapid && !r1.rapid) shape = "rapid_m2";
  if (r1.rapid && !r2.rapid) shape = "rapid_m1";
  if (r1.rapid && r2.rapid) shape = "degenerate";
  os << "shape=" << shape << "\n";
  if (!r1.rapid && !r2.rapid) {
    std::vector<double> dgrid;
    for (int i = 0; i < 8; ++i) dgrid.push_back(0.999e-3 * std::pow(1e-3, 1.0 - i / 7.0));
    os << "delta=" << num(cansys::estimate_delta(h, dgrid)) << "\n";
  }
  return kExitOk;
}

int run_rescale(const SpecFile& spec, double r, double b1, double b2, std::ostream& os) {
  json out;
  if (spec.kind == "power") {
    const cansys::PowerData d = cansys::rescale_power(spec.power, r, b1, b2);
    out["kind"] = "power";
    out["rho"] = {d.rho1, d.rho2, d.rho3};
    out["kappa"] = {d.kappa1, d.kappa2, d.kappa3};
  } else if (spec.kind == "piecewise") {
    const cansys::Hamiltonian scaled = cansys::rescale(spec.hamiltonian, r, b1, b2);
    out["kind"] = "piecewise";
    json segs = json::array();
    for (const cansys::Hamiltonian::Segment& s : scaled.segments()) {
      json sj;
      if (std::isinf(s.len)) {
        sj["len"] = nullptr;
      } else {
        sj["len"] = s.len;
      }
      sj["h"] = {{s.h(0, 0), s.h(0, 1)}, {s.h(1, 0), s.h(1, 1)}};
      segs.push_back(sj);
    }
    out["segments"] = segs;
  } else {
    std::cerr << "rescale supports spec kinds 'power' and 'piecewise' only\n";
    return kExitSpec;
  }
  os << out.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weyl coefficients of two-dimensional canonical systems"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string out_path;
  std::vector<std::string> z_list;
  double ode_tol = 1e-10;
  double disc_tol = 1e-8;
  double t_max = 1e6;
  std::string r_grid_csv = "10,100,1000,10000";
  std::string angles_csv = "1.5707963267948966";
  double threshold = 0.05;
  double rescale_r = 1.0, rescale_b1 = 1.0, rescale_b2 = 1.0;
  std::optional<double> alpha_override;
  std::optional<double> omega_re_override, omega_im_override;
  double alpha_flag = 0.0, omega_re_flag = 0.0, omega_im_flag = 0.0;

  CLI::App* power_q = app.add_subcommand("power-q", "Closed-form Weyl law of power data");
  CLI::App* numeric_q = app.add_subcommand("numeric-q", "Numerical Weyl coefficient (nested discs)");
  CLI::App* predict = app.add_subcommand("predict", "Power-law asymptotics from primitive coefficients");
  CLI::App* verify = app.add_subcommand("verify", "Check numerical q against a power law along rays");
  CLI::App* regvar = app.add_subcommand("regvar", "Regular-variation report of the primitive entries");
  CLI::App* rescale_cmd = app.add_subcommand("rescale", "Rescale a stored spec (time compression + row scalings)");

  for (CLI::App* sub : {power_q, numeric_q, predict, verify, regvar, rescale_cmd}) {
    sub->add_option("--spec", spec_path, "Path to the JSON spec")->required();
  }
  for (CLI::App* sub : {power_q, numeric_q}) {
    sub->add_option("--z", z_list, "Evaluation points, e.g. i, 1+i, 0.5+2i");
  }
  for (CLI::App* sub : {numeric_q, verify}) {
    sub->add_option("--ode-tol", ode_tol, "Integrator tolerance");
    sub->add_option("--disc-tol", disc_tol, "Disc radius convergence tolerance");
    sub->add_option("--t-max", t_max, "Integration horizon");
  }
  for (CLI::App* sub : {numeric_q, verify, rescale_cmd}) {
    sub->add_option("--out", out_path, "Write output to a file instead of stdout");
  }
  verify->add_option("--r-grid", r_grid_csv, "Comma-separated radii");
  verify->add_option("--angles", angles_csv, "Comma-separated angles in (0, pi)");
  verify->add_option("--threshold", threshold, "Relative error threshold at the largest radius");
  auto* af = verify->add_option("--alpha", alpha_flag, "Override law exponent");
  auto* orf = verify->add_option("--omega-re", omega_re_flag, "Override law coefficient (real)");
  auto* oif = verify->add_option("--omega-im", omega_im_flag, "Override law coefficient (imag)");
  rescale_cmd->add_option("--r", rescale_r, "Compression factor")->required();
  rescale_cmd->add_option("--b1", rescale_b1, "First row scaling")->required();
  rescale_cmd->add_option("--b2", rescale_b2, "Second row scaling")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitSpec;
  }

  std::string cmdline;
  for (int i = 0; i < argc; ++i) {
    if (i) cmdline += ' ';
    cmdline += argv[i];
  }

  if (af->count()) alpha_override = alpha_flag;
  if (orf->count()) omega_re_override = omega_re_flag;
  if (oif->count()) omega_im_override = omega_im_flag;

  std::ofstream out_file;
  try {
    const SpecFile spec = load_spec(spec_path);
    std::ostream& os = open_output(out_file, out_path);
    if (power_q->parsed()) return run_power_q(spec, z_list, os);
    if (numeric_q->parsed()) return run_numeric_q(spec, z_list, ode_tol, disc_tol, t_max, cmdline, os);
    if (predict->parsed()) return run_predict(spec, os);
    if (verify->parsed()) {
      return run_verify(spec, r_grid_csv, angles_csv, threshold, alpha_override,
                        omega_re_override, omega_im_override, ode_tol, disc_tol, t_max, os);
    }
    if (regvar->parsed()) return run_regvar(spec, os);
    if (rescale_cmd->parsed()) return run_rescale(spec, rescale_r, rescale_b1, rescale_b2, os);
    std::cerr << "no subcommand\n";
    return kExitSpec;
  } catch (const SpecError& e) {
    std::cerr << "spec error: " << e.what() << "\n";
    return kExitSpec;
  } catch (const cansys::domain_error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const cansys::insufficient_data& e) {
    std::cerr << "insufficient data: " << e.what() << "\n";
    return kExitInsufficient;
  } catch (const cansys::numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const json::exception& e) {
    std::cerr << "spec error: " << e.what() << "\n";
    return kExitSpec;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSpec;
  }
}
