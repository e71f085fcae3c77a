#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "denest/constructor.hpp"
#include "denest/experiment.hpp"
#include "denest/kv.hpp"
#include "denest/theory.hpp"
#include "denest/verify.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPropertyFailure = 1;
constexpr int kExitInputError = 2;
constexpr int kExitInfeasible = 3;

struct GlobalOpts {
  long long seed = -1;  // -1: keep the spec file / suite default
  int threads = 1;
  std::string out_dir = "out";
  std::string profile = "desk";
};

int cmd_experiment(const GlobalOpts& g, const std::string& spec_path) {
  denest::ExperimentSpec spec = denest::ExperimentSpec::from_file(spec_path, g.profile);
  if (g.seed >= 0) spec.base_seed = static_cast<std::uint64_t>(g.seed);
  const denest::ExperimentOutput out = denest::run_experiment(spec, g.threads);
  denest::write_experiment_outputs(spec, out, g.out_dir);
  std::size_t failed = 0;
  for (const auto& c : out.cells)
    if (!c.ok) {
      ++failed;
      std::cerr << "cell failed: " << c.method << " n=" << c.n << " rep=" << c.repetition
                << ": " << c.error << "\n";
    }
  std::cout << "experiment: " << out.cells.size() - failed << "/" << out.cells.size()
            << " cells ok, outputs in " << g.out_dir << "\n";
  return kExitOk;
}

int cmd_verify(const GlobalOpts& g, const std::string& suite, int cases) {
  std::vector<std::string> names;
  if (suite == "all") {
    names = denest::verify_suite_list();
  } else {
    names.push_back(suite);
  }
  bool all_pass = true;
  for (const auto& name : names) {
    const denest::SuiteReport rep = denest::run_verify_suite(
        name, g.seed >= 0 ? static_cast<std::uint64_t>(g.seed) : 20240817u, cases);
    denest::print_suite_report(rep, std::cout);
    all_pass = all_pass && rep.all_pass();
  }
  return all_pass ? kExitOk : kExitPropertyFailure;
}

int cmd_construct(const GlobalOpts& g, const std::string& measure_path, double sigma,
                  double beta, double tau3, double kappa, double c4, bool direct,
                  const std::string& out_path) {
  const denest::DiscreteMeasure m = denest::DiscreteMeasure::load_file(measure_path);
  denest::PipelineOptions opt;
  opt.beta = beta;
  opt.tau3 = tau3;
  opt.c4 = c4;
  opt.kappa_override = kappa;
  opt.discretize = !direct;
  const denest::PipelineResult res = denest::theorem1_generator(m, sigma, opt);
  res.generator.save_file(out_path);
  fs::create_directories(g.out_dir);
  const std::string diag_path = (fs::path(g.out_dir) / "construct_diagnostics.csv").string();
  denest::write_diagnostics_csv(res.stages, diag_path);
  std::printf("construct: %d hidden units, kappa=%.6g, l2_gap=%.6g, end_to_end_dH=%.6g\n",
              res.generator.hidden, res.kappa, res.l2_gap, res.end_to_end);
  std::printf("construct: generator -> %s, diagnostics -> %s\n", out_path.c_str(),
              diag_path.c_str());
  return kExitOk;
}

int cmd_rates(const GlobalOpts& g, const std::string& params_path) {
  const denest::KeyValueFile kv = denest::KeyValueFile::parse_file(params_path);
  denest::SmoothnessParams p;
  p.beta = kv.get_double("beta", 1.0);
  p.d = static_cast<int>(kv.get_int("d", 2));
  p.tau3 = kv.get_double("tau3", 2.0);
  p.tau1 = kv.get_double("tau1", 1.0);
  p.tau2 = kv.get_double("tau2", 1.0);
  const double C = kv.get_double("C", 1.0);

  bool have_composite = kv.has("composite_q");
  denest::CompositeParams comp;
  if (have_composite) {
    comp.q = static_cast<int>(kv.get_int("composite_q", 0));
    const auto vv = kv.get_doubles("composite_v", {});
    const auto tt = kv.get_doubles("composite_t", {});
    comp.v.assign(vv.begin(), vv.end());
    comp.t.assign(tt.begin(), tt.end());
    comp.betas = kv.get_doubles("composite_betas", {});
    comp.tau6 = kv.get_double("composite_tau6", 1.0);
    comp.validate();
  }

  std::vector<double> ns = kv.get_doubles("n_grid", {1e3, 1e4, 1e5, 1e6, 1e7});
  fs::create_directories(g.out_dir);
  const std::string out_path = (fs::path(g.out_dir) / "rates.csv").string();
  std::ofstream os(out_path);
  os << "n,eps_n_thm1,F,d1,M,sigma_min,eta_n";
  if (have_composite) os << ",eps_n_thm3";
  os << "\n";
  char buf[64];
  auto put = [&os, &buf](double v, bool comma = true) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
    if (comma) os << ',';
  };
  for (double n : ns) {
    const denest::Theorem1Schedule s = denest::schedule_theorem1(n, p, C);
    put(n);
    put(s.eps_n);
    put(s.F);
    os << s.d1 << ',';
    put(s.M);
    put(s.sigma_min);
    put(s.eta_n, have_composite);
    if (have_composite) put(denest::rate_theorem3(n, p.beta, comp, C), false);
    os << '\n';
  }
  std::cout << "rates: table -> " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"density estimation with shallow generative models"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "override the base seed");
  app.add_option("--threads", g.threads, "worker threads for experiment cells")
      ->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "output directory");
  app.add_option("--profile", g.profile, "defaults profile: desk or full")
      ->check(CLI::IsMember({"desk", "full"}));

  auto* exp = app.add_subcommand("experiment", "run the benchmark experiment from a spec file");
  std::string spec_path;
  exp->add_option("--spec", spec_path, "experiment spec file")->required();

  auto* ver = app.add_subcommand("verify", "run a verification suite");
  std::string suite;
  int cases = 0;
  ver->add_option("suite", suite, "suite name or 'all'")->required();
  ver->add_option("--cases", cases, "case count override (0 = suite default)");

  auto* con = app.add_subcommand("construct", "build a ReLU generator from a mixing measure");
  std::string measure_path, gen_out = "generator.txt";
  double sigma = 0.3, beta = 1.0, tau3 = 2.0, kappa = 0.0, c4 = 1.0;
  bool direct = false;
  con->add_option("--measure", measure_path, "measure table file")->required();
  con->add_option("--sigma", sigma, "noise scale");
  con->add_option("--beta", beta, "smoothness parameter");
  con->add_option("--tau3", tau3, "tail exponent");
  con->add_option("--kappa", kappa, "ramp width override (0 = schedule value)");
  con->add_option("--c4", c4, "constant in a_sigma");
  con->add_flag("--direct", direct, "skip discretization stages (step + ReLU only)");
  con->add_option("--out", gen_out, "generator output path");

  auto* rates = app.add_subcommand("rates", "tabulate the rate and schedule calculators");
  std::string params_path;
  rates->add_option("--params", params_path, "parameter file")->required();

  try {
    app.parse(argc, argv);
    if (exp->parsed()) return cmd_experiment(g, spec_path);
    if (ver->parsed()) return cmd_verify(g, suite, cases);
    if (con->parsed())
      return cmd_construct(g, measure_path, sigma, beta, tau3, kappa, c4, direct, gen_out);
    if (rates->parsed()) return cmd_rates(g, params_path);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitInputError;
  } catch (const denest::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPropertyFailure;
  }
  return kExitOk;
}
