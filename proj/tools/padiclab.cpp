// Batch experiment runner. Each subcommand runs one verification suite and
// writes a machine-readable JSON report (optionally a CSV case table).
// Exit codes: 0 all checks passed, 1 a violation was found, 2 bad config.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "padiclab/experiments.hpp"

using namespace padiclab;

int main(int argc, char** argv) {
  CLI::App app{"padiclab: exact p-adic verification suites"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string out_path;
  std::string format = "json";

  if (const char* env = std::getenv("PADICLAB_THREADS"))
    cfg.threads = std::max(1, std::atoi(env));

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--p", cfg.p, "prime (5, 7, 11, or 13)");
    sub->add_option("--depth", cfg.depth, "grid or enumeration depth");
    sub->add_option("--precision", cfg.precision, "working precision (unit digits)");
    sub->add_option("--alpha", cfg.alpha, "exponent alpha in (0,1)");
    sub->add_option("--epsilon", cfg.eps, "exponent loss epsilon");
    sub->add_option("--seed", cfg.seed, "random seed (64-bit)");
    sub->add_option("--threads", cfg.threads, "worker threads");
    sub->add_option("--out", out_path, "report path (default: stdout)");
    sub->add_option("--format", format, "json | csv")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--mode", cfg.mode, "verify | diagnose")
        ->check(CLI::IsMember({"verify", "diagnose"}));
  };

  auto* contraction = app.add_subcommand("contraction",
                                         "norm contraction integrals over a direction grid");
  contraction->add_option("--lambda-exp", cfg.lambda_exp, "n with |lambda| = p^n");
  contraction->add_option("--c2", cfg.c2, "constant to check against (0 = measure)");
  add_common(contraction);

  auto* malpha = app.add_subcommand("m-alpha",
                                    "derive the contraction step size and verify it");
  malpha->add_option("--c2", cfg.c2, "constant in the step-size formula (0 = measure)");
  malpha->add_option("--m-step", cfg.m_step, "override the derived step size");
  add_common(malpha);

  auto* interp = app.add_subcommand("interpolation",
                                    "quadratic sublevel measures against p^2 p^{n/2}");
  interp->add_option("--n", cfg.n_min, "sublevel exponent n <= 0");
  interp->add_option("--n-max", cfg.n_max, "upper end of the n range");
  std::int64_t ca = 0, cb = 0, cc = 0;
  auto* oa = interp->add_option("--a", ca, "coefficient a (single-case mode)");
  auto* ob = interp->add_option("--b", cb, "coefficient b");
  auto* oc = interp->add_option("--c", cc, "coefficient c");
  add_common(interp);

  auto* bch = app.add_subcommand("bch", "displacement norm identity on random pairs");
  bch->add_option("--trials", cfg.trials, "number of random pairs");
  add_common(bch);

  auto* gauss = app.add_subcommand("gauss", "triangular factorization round-trips");
  gauss->add_option("--trials", cfg.trials, "number of random elements");
  add_common(gauss);

  auto* bourgain = app.add_subcommand("bourgain",
                                      "localization and non-concentration pruning");
  bourgain->add_option("--trials", cfg.trials, "number of random sets");
  bourgain->add_option("--min-points", cfg.min_points, "smallest admissible set");
  bourgain->add_option("--max-points", cfg.max_points, "largest admissible set");
  add_common(bourgain);

  auto* projection = app.add_subcommand("projection",
                                        "parameterized projection spread scan");
  projection->add_option("--set", cfg.set_kind, "w12-axis | w21-axis | random");
  add_common(projection);

  auto* shear = app.add_subcommand("shear", "shear selection of norm-carrying subsets");
  shear->add_option("--trials", cfg.trials, "number of random sets");
  add_common(shear);

  auto* sobolev = app.add_subcommand("sobolev",
                                     "congruence-average projections and norm properties");
  sobolev->add_option("--trials", cfg.trials, "number of random functions");
  add_common(sobolev);

  auto* margulis = app.add_subcommand("margulis",
                                      "random-walk contraction of the transverse function");
  margulis->add_option("--configs", cfg.trials, "number of random configurations");
  margulis->add_option("--c2", cfg.c2, "contraction constant (0 = measure)");
  margulis->add_option("--m-step", cfg.m_step, "walk step size (0 = derive)");
  add_common(margulis);

  auto* siegel = app.add_subcommand("siegel", "integer kernel bases with norm budgets");
  siegel->add_option("--trials", cfg.trials, "number of random matrices");
  add_common(siegel);

  auto* heights = app.add_subcommand("heights",
                                     "place norms, heights, and the product formula");
  heights->add_option("--trials", cfg.trials, "number of random rationals");
  add_common(heights);

  CLI11_PARSE(app, argc, argv);

  cfg.suite = app.get_subcommands().front()->get_name();
  if (*oa) cfg.coeff_a = ca;
  if (*ob) cfg.coeff_b = cb;
  if (*oc) cfg.coeff_c = cc;
  if (cfg.suite == "interpolation" && interp->count("--n") && !interp->count("--n-max"))
    cfg.n_max = cfg.n_min;

  RunReport rep;
  try {
    rep = run_suite(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (out_path.empty()) {
      std::cout << rep.text;
    } else {
      write_atomically(out_path, rep.text);
      if (format == "csv" && !rep.csv.empty())
        write_atomically(out_path + ".csv", rep.csv);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cerr << cfg.suite << ": " << (rep.passed ? "pass" : "FAIL") << "\n";
  return rep.exit_code;
}
