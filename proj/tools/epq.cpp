#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "epq/canonical2d.hpp"
#include "epq/certificates.hpp"
#include "epq/effective.hpp"
#include "epq/errors.hpp"
#include "epq/io.hpp"
#include "epq/simulate.hpp"
#include "epq/system.hpp"
#include "epq/trapping_region.hpp"

namespace {

using epq::Mat;
using epq::Vec;

enum Exit { kOk = 0, kNegative = 1, kInput = 2, kSolver = 3 };

enum class Format { Human, Kv, Csv };

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string vec(const Vec& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + num(v(i));
  return s;
}

// Ordered key/value report; `say` lines only show in human mode.
class Report {
 public:
  explicit Report(const std::string& command) { put("command", command); }
  void put(const std::string& k, const std::string& v) { rows_.emplace_back(k, v); }
  void put(const std::string& k, double v) { put(k, num(v)); }
  void put(const std::string& k, int v) { put(k, std::to_string(v)); }
  void put(const std::string& k, long v) { put(k, std::to_string(v)); }
  void put(const std::string& k, bool v) { put(k, std::string(v ? "true" : "false")); }
  void put(const std::string& k, const Vec& v) { put(k, vec(v)); }
  void put(const std::string& k, const char* v) { put(k, std::string(v)); }
  void say(const std::string& line) { rows_.emplace_back("", line); }

  void write(std::ostream& out, Format f) const {
    if (f == Format::Csv) out << "key,value\n";
    std::size_t w = 0;
    for (const auto& [k, v] : rows_) w = std::max(w, k.size());
    for (const auto& [k, v] : rows_) {
      if (k.empty()) {
        if (f == Format::Human) out << v << '\n';
        continue;
      }
      switch (f) {
        case Format::Human:
          out << "  " << k << std::string(w - k.size(), ' ') << "  " << v << '\n';
          break;
        case Format::Kv: out << k << '=' << v << '\n'; break;
        case Format::Csv: out << k << ',' << (v.find(',') != std::string::npos ? '"' + v + '"' : v) << '\n'; break;
      }
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> rows_;
};

struct Common {
  std::string format = "human";
  std::string out;
  std::uint64_t seed = 1;
  double tol = 1e-8;
  int max_iter = 200;
  int trials = 20;
  double t_final = 50.0;
  std::string method = "both";

  Format fmt() const {
    if (format == "kv") return Format::Kv;
    if (format == "csv") return Format::Csv;
    return Format::Human;
  }
};

class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw epq::Error(epq::ErrorCode::ParseError, path + ": cannot open for writing");
    }
  }
  std::ostream& get() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

int emit(const Common& o, const Report& r, int code) {
  Sink s(o.out);
  r.write(s.get(), o.fmt());
  return code;
}

epq::TrapMethod parse_method(const std::string& m) {
  if (m == "barrier") return epq::TrapMethod::Barrier;
  if (m == "subgradient") return epq::TrapMethod::Subgradient;
  return epq::TrapMethod::Both;
}

epq::SolverOptions solver_opts(const Common& o) {
  epq::SolverOptions s;
  s.tol = o.tol;
  s.max_bisection = o.max_iter;
  s.method = parse_method(o.method);
  s.seed = o.seed;
  return s;
}

void describe_input(Report& r, const std::string& path, const epq::QuadraticSystem& sys) {
  r.put("file", path);
  r.put("n", sys.n());
  r.put("c_norm", sys.c().norm());
  r.put("L_norm", sys.L().norm());
  r.put("Q_norm", sys.q_norm());
  r.put("validation", "ok");
}

// ---------------------------------------------------------------- commands

int cmd_check(const Common& o, const std::string& path) {
  const epq::SystemData d = epq::read_system_data(path);
  Report r("check");
  r.put("file", path);
  r.put("n", d.n);
  r.put("validation", "unchecked");
  double worst_asym = 0.0;
  int asym_at = 0;
  for (int i = 0; i < d.n; ++i) {
    const double a = epq::asymmetry(d.Q[static_cast<std::size_t>(i)]);
    if (a > worst_asym) worst_asym = a, asym_at = i + 1;
  }
  std::vector<Mat> sym = d.Q;
  for (Mat& q : sym) q = 0.5 * (q + q.transpose()).eval();
  const epq::EnergyResidual e = epq::energy_preserving_residual(sym);
  const bool symmetric = worst_asym <= epq::kStructuralTol;
  const bool preserving = e.value <= epq::kStructuralTol;
  r.put("symmetry_residual", worst_asym);
  if (!symmetric) r.put("symmetry_worst_Q", asym_at);
  r.put("energy_residual", e.value);
  std::ostringstream at;
  at << "(" << e.i + 1 << "," << e.j + 1 << "," << e.k + 1 << ")";
  r.put("energy_worst_ijk", at.str());
  const bool ok = symmetric && preserving;
  r.put("result", ok ? "PASS" : "FAIL");
  if (ok) {
    r.say("PASS energy-preserving to " + num(epq::kStructuralTol));
  } else if (!symmetric) {
    r.say("FAIL Q(" + std::to_string(asym_at) + ") asymmetric by " + num(worst_asym));
  } else {
    r.say("FAIL residual " + num(e.value) + " at " + at.str());
  }
  return emit(o, r, ok ? kOk : kNegative);
}

void put_trap(Report& r, const epq::TrapResult& t, double tol) {
  r.put("a_star", t.a_star);
  r.put("m_star", t.m_star);
  r.put("status", epq::to_string(t.status));
  r.put("verdict", epq::to_string(epq::verdict_of(t, tol)));
  r.put("lower_bound", t.info.lower_bound);
  r.put("final_gap", t.info.final_gap);
  r.put("method_used", t.info.method_used);
  r.put("bisection_steps", t.info.bisection_steps);
  r.put("newton_steps", t.info.newton_steps);
  r.put("subgradient_iterations", t.info.subgradient_iterations);
  r.put("shift_at_ball", t.info.shift_at_ball);
  for (std::size_t i = 0; i < t.info.warnings.size(); ++i)
    r.put("warning" + std::to_string(i + 1), t.info.warnings[i]);
}

int cmd_trap(const Common& o, const std::string& path) {
  const auto sys = epq::read_system_file(path);
  const auto opts = solver_opts(o);
  const epq::TrapResult t = epq::solve(sys, opts);
  Report r("trap");
  describe_input(r, path, sys);
  put_trap(r, t, opts.tol);
  const auto v = epq::verdict_of(t, opts.tol);
  if (v == epq::TrapVerdict::BoundedCertified)
    r.say("trapping region exists: A_s(m*) negative definite, a* = " + num(t.a_star));
  else if (v == epq::TrapVerdict::Marginal)
    r.say("marginal: |a*| within tolerance " + num(opts.tol));
  else
    r.say("no shift makes A_s(m) negative definite: a* = " + num(t.a_star));
  return emit(o, r, v == epq::TrapVerdict::BoundedCertified ? kOk : kNegative);
}

int cmd_canon2d(const Common& o, const std::string& path, double eps) {
  const auto sys = epq::read_system_file(path);
  const epq::TwoDVerdict v = epq::classify_2d(sys, eps);
  const epq::Canonical2D& k = v.canon;
  Report r("canon2d");
  describe_input(r, path, sys);
  r.put("q", epq::extract_q(sys));
  r.put("q0", k.q0);
  r.put("R", Vec(Eigen::Map<const Vec>(k.R.data(), 4)));
  r.put("c_hat", Vec(k.c_hat));
  r.put("l11", k.l11);
  r.put("l12", k.l12);
  r.put("l21", k.l21);
  r.put("l22", k.l22);
  r.put("classification", epq::to_string(v.classification));
  if (v.witness_m) r.put("witness_m", Vec(*v.witness_m));
  if (v.escape_x0) {
    r.put("escape_x0", Vec(*v.escape_x0));
    r.put("escape_x0_original", Vec(k.R.transpose() * *v.escape_x0));
  }
  if (v.lmi_feasible)
    r.say("l22 <= 0: shift with A_s(m) = diag(-eps, l22) exists");
  else
    r.say("l22 > 0: x2 decreases without bound from escape_x0");
  return emit(o, r, v.lmi_feasible ? kOk : kNegative);
}

int cmd_effective(const Common& o, const std::string& path) {
  const auto sys = epq::read_system_file(path);
  const epq::EffectivenessVerdict v = epq::check_effective(sys);
  Report r("effective");
  describe_input(r, path, sys);
  r.put("verdict", epq::to_string(v.result));
  r.put("exhaustiveness", v.exhaustiveness.empty() ? "-" : v.exhaustiveness);
  r.put("candidates", static_cast<int>(v.candidates_checked.size()));
  if (v.witness) {
    r.put("witness", v.witness->label());
    r.put("witness_dim", v.witness->k());
    for (int j = 0; j < v.witness->k(); ++j)
      r.put("witness_b" + std::to_string(j + 1), Vec(v.witness->basis().col(j)));
  }
  int idx = 0;
  for (const epq::CandidateCheck& c : v.candidates_checked) {
    const std::string p = "cand" + std::to_string(++idx) + ".";
    r.put(p + "label", c.subspace.label());
    r.put(p + "dim", c.subspace.k());
    r.put(p + "phi_vanishes", c.phi_vanishes);
    r.put(p + "phi_residual", c.phi_residual);
    r.put(p + "invariant", c.invariant);
    r.put(p + "invariance_residual", c.invariance_residual);
    if (!c.escaping_label.empty()) {
      r.put(p + "escapes", c.escaping_label);
      r.put(p + "escaping_image", c.escaping_image);
    }
  }
  return emit(o, r, v.result == epq::Effectiveness::Effective ? kOk : kNegative);
}

Vec parse_state(const std::string& text, int n) {
  std::vector<double> xs;
  std::string tok;
  std::istringstream in(text);
  while (std::getline(in, tok, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || !std::isfinite(v))
      throw epq::Error(epq::ErrorCode::ParseError, "--x0: bad number '" + tok + "'");
    xs.push_back(v);
  }
  if (static_cast<int>(xs.size()) != n)
    throw epq::Error(epq::ErrorCode::DimensionMismatch,
                     "--x0 has " + std::to_string(xs.size()) + " entries, system has n = " +
                         std::to_string(n));
  return Eigen::Map<Vec>(xs.data(), n);
}

struct SimArgs {
  std::string x0;
  double rtol = 1e-8;
  double atol = 1e-10;
  double dt = 0.0;
  bool gnuplot = false;
};

int cmd_simulate(const Common& o, const std::string& path, const SimArgs& a) {
  const auto sys = epq::read_system_file(path);
  const Vec x0 = a.x0.empty() ? Vec::Ones(sys.n()) : parse_state(a.x0, sys.n());
  epq::IntegrateOptions io;
  io.t_final = o.t_final;
  io.rtol = a.rtol;
  io.atol = a.atol;
  if (a.dt > 0.0) {
    io.recording = epq::Recording::Sampled;
    io.output_dt = a.dt;
  }
  const epq::Trajectory tr = epq::integrate(sys, x0, io);
  const int code = tr.status == epq::TrajectoryStatus::Completed ? kOk : kNegative;

  Sink s(o.out);
  std::ostream& out = s.get();
  if (a.gnuplot) {
    out << "# t norm  status=" << epq::to_string(tr.status) << '\n';
    for (std::size_t i = 0; i < tr.times.size(); ++i)
      out << num(tr.times[i]) << ' ' << num(tr.states[i].norm()) << '\n';
    return code;
  }
  if (o.fmt() == Format::Csv) {
    out << 't';
    for (int i = 1; i <= sys.n(); ++i) out << ",x" << i;
    out << ",norm\n";
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      out << num(tr.times[i]);
      for (int j = 0; j < sys.n(); ++j) out << ',' << num(tr.states[i](j));
      out << ',' << num(tr.states[i].norm()) << '\n';
    }
    return code;
  }
  Report r("simulate");
  describe_input(r, path, sys);
  r.put("x0", x0);
  r.put("status", epq::to_string(tr.status));
  r.put("t_end", tr.times.back());
  r.put("x_end", tr.states.back());
  r.put("norm_end", tr.states.back().norm());
  r.put("accepted", tr.accepted);
  r.put("rejected", tr.rejected);
  r.put("samples", static_cast<long>(tr.times.size()));
  if (!std::isnan(tr.diverged_at)) r.put("diverged_at", tr.diverged_at);
  if (!tr.message.empty()) r.put("message", tr.message);
  r.write(out, o.fmt());
  return code;
}

int cmd_probe(const Common& o, const std::string& path, double radius) {
  const auto sys = epq::read_system_file(path);
  epq::ProbeOptions p;
  p.trials = o.trials;
  p.radius = radius;
  p.seed = o.seed;
  p.integrate.t_final = o.t_final;
  p.integrate.recording = epq::Recording::Sampled;
  p.integrate.output_dt = o.t_final / 1000.0;
  const epq::BoundednessProbe b = epq::probe_boundedness(sys, p);
  Report r("probe");
  describe_input(r, path, sys);
  r.put("verdict", epq::to_string(b.verdict));
  r.put("trials", b.trials);
  r.put("beta_est", b.beta_est);
  r.put("T_est", b.T_est);
  if (b.divergent_x0) r.put("divergent_x0", *b.divergent_x0);
  if (!b.note.empty()) r.put("note", b.note);
  r.say("finite-horizon estimate only; not a proof of boundedness");
  return emit(o, r, b.verdict == epq::ProbeVerdict::AllConverged ? kOk : kNegative);
}

void put_cert(Report& r, const epq::CertificateReport& c) {
  r.put("Mv_eigs", c.mv_eigs);
  r.put("N_eigs", c.n_eigs);
  r.put("N_trace", c.n_trace);
  r.put("Mv_positive", c.mv_positive);
  r.put("N_nonpositive", c.n_nonpositive);
  r.put("derivative_residual", c.max_derivative_residual);
  r.put("identity_holds", c.identity_holds);
  r.put("worst_decay_ratio", c.worst_decay_ratio);
  r.put("decay_check", c.decay_check);
  r.put("result", c.passed() ? "PASS" : "FAIL");
}

int cmd_verify_cert(const Common& o, const std::string& sys_path, const std::string& cert_path,
                    int samples) {
  const auto sys = epq::read_system_file(sys_path);
  if (sys.n() != 3)
    throw epq::Error(epq::ErrorCode::NotThreeDimensional,
                     "quartic certificates need n = 3, got " + std::to_string(sys.n()));
  const auto cert = epq::read_certificate_file(cert_path);
  epq::VerifyOptions v;
  v.samples = samples;
  v.seed = o.seed;
  const epq::CertificateReport c = epq::verify_certificate(sys, cert, v);
  Report r("verify-cert");
  describe_input(r, sys_path, sys);
  r.put("certificate", cert_path);
  r.put("alpha", cert.alpha);
  put_cert(r, c);
  return emit(o, r, c.passed() ? kOk : kNegative);
}

std::string line(bool ok, const std::string& what) { return (ok ? "PASS " : "FAIL ") + what; }

int cmd_demo_counterexample(const Common& o) {
  const auto [sys, cert] = epq::builtin_counterexample();
  epq::VerifyOptions v;
  v.seed = o.seed;
  const epq::CertificateReport c = epq::verify_certificate(sys, cert, v);
  const epq::EffectivenessVerdict e = epq::check_effective(sys);
  const auto so = solver_opts(o);
  const epq::TrapResult t = epq::solve(sys, so);

  const bool bounded = c.passed();
  const bool effective = e.result == epq::Effectiveness::Effective;
  const bool positive = t.status == epq::TrapStatus::NoTrappingRegion && t.a_star > so.tol;
  Report r("demo-counterexample");
  put_cert(r, c);
  r.put("effectiveness", epq::to_string(e.result));
  r.put("exhaustiveness", e.exhaustiveness);
  put_trap(r, t, so.tol);
  r.say(line(bounded, "long-term bounded (quartic certificate, alpha = " + num(cert.alpha) + ")"));
  r.say(line(effective, "effective nonlinearity (" + e.exhaustiveness + ")"));
  r.say(line(positive, "A_s(m) has a positive eigenvalue for every shift (a* = " +
                           num(t.a_star) + ")"));
  return emit(o, r, bounded && effective && positive ? kOk : kNegative);
}

int cmd_demo_lorenz(const Common& o) {
  Mat l(3, 3);
  l << -10, 10, 0, 28, -1, 0, 0, 0, -8.0 / 3.0;
  std::vector<Mat> q(3, Mat::Zero(3, 3));
  q[1](0, 2) = q[1](2, 0) = -0.5;
  q[2](0, 1) = q[2](1, 0) = 0.5;
  const auto sys = epq::QuadraticSystem::create(Vec::Zero(3), l, q);
  const auto so = solver_opts(o);
  const epq::TrapResult t = epq::solve(sys, so);
  epq::ProbeOptions p;
  p.trials = o.trials;
  p.seed = o.seed;
  p.integrate.t_final = o.t_final;
  p.integrate.recording = epq::Recording::Sampled;
  p.integrate.output_dt = o.t_final / 1000.0;
  const epq::BoundednessProbe b = epq::probe_boundedness(sys, p);

  const bool trapped = epq::verdict_of(t, so.tol) == epq::TrapVerdict::BoundedCertified;
  const bool converged = b.verdict == epq::ProbeVerdict::AllConverged;
  Report r("demo-lorenz");
  put_trap(r, t, so.tol);
  r.put("probe", epq::to_string(b.verdict));
  r.put("beta_est", b.beta_est);
  r.put("T_est", b.T_est);
  r.say(line(trapped, "trapping region (sigma=10, rho=28, beta=8/3): " +
                          std::string(epq::to_string(epq::verdict_of(t, so.tol)))));
  r.say(line(converged, "all trajectories settle: " + std::string(epq::to_string(b.verdict))));
  return emit(o, r, trapped && converged ? kOk : kNegative);
}

int exit_for(epq::ErrorCode c) {
  return c == epq::ErrorCode::MaxIterations ? kSolver : kInput;
}

std::uint64_t env_seed() {
  if (const char* s = std::getenv("EPQ_SEED")) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      std::cerr << "warning: ignoring EPQ_SEED='" << s << "'\n";
    }
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundedness analysis for energy-preserving quadratic systems"};
  app.require_subcommand(1);
  Common o;
  o.seed = env_seed();

  auto common = [&o](CLI::App* sub, bool solver, bool sim) {
    sub->add_option("--format", o.format, "human, kv or csv")
        ->check(CLI::IsMember({"human", "kv", "csv"}));
    sub->add_option("--out", o.out, "write the report here instead of stdout");
    sub->add_option("--seed", o.seed, "RNG seed (default: $EPQ_SEED or 1)");
    if (solver) {
      sub->add_option("--tol", o.tol, "outer tolerance on a*")->check(CLI::PositiveNumber);
      sub->add_option("--max-iter", o.max_iter, "bisection step cap")->check(CLI::PositiveNumber);
      sub->add_option("--method", o.method, "both, barrier or subgradient")
          ->check(CLI::IsMember({"both", "barrier", "subgradient"}));
    }
    if (sim) {
      sub->add_option("--trials", o.trials, "random initial conditions")
          ->check(CLI::NonNegativeNumber);
      sub->add_option("--t-final", o.t_final, "integration horizon")->check(CLI::PositiveNumber);
    }
  };

  std::string file, cert;
  double eps = 1.0, radius = 10.0;
  int samples = 1000;
  SimArgs sim;

  auto* check = app.add_subcommand("check", "validate symmetry and the energy-preserving identity");
  check->add_option("file", file)->required();
  common(check, false, false);

  auto* trap = app.add_subcommand("trap", "minimize lambda_max(A_s(m)) over shifts m");
  trap->add_option("file", file)->required();
  common(trap, true, false);

  auto* canon = app.add_subcommand("canon2d", "two-state canonical form and classification");
  canon->add_option("file", file)->required();
  canon->add_option("--eps", eps, "margin for the diagonal witness")->check(CLI::PositiveNumber);
  common(canon, false, false);

  auto* eff = app.add_subcommand("effective", "search for an ineffectiveness witness subspace");
  eff->add_option("file", file)->required();
  common(eff, false, false);

  auto* simc = app.add_subcommand("simulate", "integrate one trajectory");
  simc->add_option("file", file)->required();
  simc->add_option("--x0", sim.x0, "comma-separated initial state (default all ones)");
  simc->add_option("--rtol", sim.rtol)->check(CLI::PositiveNumber);
  simc->add_option("--atol", sim.atol)->check(CLI::PositiveNumber);
  simc->add_option("--dt", sim.dt, "sample spacing (default: every accepted step)")
      ->check(CLI::PositiveNumber);
  simc->add_flag("--gnuplot", sim.gnuplot, "two columns: t |x|");
  common(simc, false, true);

  auto* probe = app.add_subcommand("probe", "empirical boundedness from random trajectories");
  probe->add_option("file", file)->required();
  probe->add_option("--radius", radius, "initial-condition ball radius")->check(CLI::PositiveNumber);
  common(probe, false, true);

  auto* ver = app.add_subcommand("verify-cert", "check a quartic Lyapunov certificate");
  ver->add_option("file", file)->required();
  ver->add_option("cert", cert)->required();
  ver->add_option("--samples", samples)->check(CLI::PositiveNumber);
  common(ver, false, false);

  auto* demo_c = app.add_subcommand("demo-counterexample", "bounded system without a trapping region");
  common(demo_c, true, false);
  auto* demo_l = app.add_subcommand("demo-lorenz", "Lorenz system at the classic parameters");
  common(demo_l, true, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInput;
  }
  if (simc->parsed() && simc->count("--format") == 0) o.format = "csv";

  try {
    if (check->parsed()) return cmd_check(o, file);
    if (trap->parsed()) return cmd_trap(o, file);
    if (canon->parsed()) return cmd_canon2d(o, file, eps);
    if (eff->parsed()) return cmd_effective(o, file);
    if (simc->parsed()) return cmd_simulate(o, file, sim);
    if (probe->parsed()) return cmd_probe(o, file, radius);
    if (ver->parsed()) return cmd_verify_cert(o, file, cert, samples);
    if (demo_c->parsed()) return cmd_demo_counterexample(o);
    if (demo_l->parsed()) return cmd_demo_lorenz(o);
  } catch (const epq::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  } catch (const epq::Error& e) {
    std::cerr << "error [" << epq::to_string(e.code()) << "]: " << e.what() << '\n';
    return exit_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolver;
  }
  return kInput;
}
