#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include "padiclab/experiments.hpp"

using namespace padiclab;

namespace {

RunConfig quick(const std::string& suite) {
  RunConfig cfg;
  cfg.suite = suite;
  cfg.p = 5;
  cfg.seed = 42;
  cfg.trials = 20;
  cfg.depth = 1;
  cfg.precision = 10;
  return cfg;
}

}  // namespace

TEST_CASE("every suite runs and reports schema 1") {
  for (const auto& name : suite_names()) {
    RunConfig cfg = quick(name);
    if (name == "interpolation") {
      cfg.n_min = -2;
      cfg.n_max = 0;
      cfg.depth = 1;
    }
    if (name == "bourgain") {
      cfg.depth = 6;
      cfg.trials = 2;
      cfg.alpha = 0.8;
      cfg.eps = 0.02;
      cfg.min_points = 300;
      cfg.max_points = 4000;
    }
    if (name == "projection") {
      cfg.set_kind = "w12-axis";
      cfg.alpha = 0.9;
      cfg.depth = 2;
    }
    if (name == "margulis") {
      cfg.trials = 2;
      cfg.c2 = 4.0;
    }
    if (name == "m-alpha" || name == "contraction") cfg.c2 = 4.0;
    if (name == "sobolev") {
      cfg.trials = 3;
      cfg.depth = 2;
    }
    if (name == "bch") cfg.precision = 12;
    CAPTURE(name);
    RunReport rep = run_suite(cfg);
    CHECK(rep.text.find("\"schema\": 1") != std::string::npos);
    CHECK(rep.passed);
    CHECK(rep.exit_code == 0);
  }
}

TEST_CASE("unknown suite and bad prime exit with config errors") {
  RunConfig cfg = quick("no-such-suite");
  RunReport rep = run_suite(cfg);
  CHECK(rep.exit_code == 2);
  RunConfig cfg2 = quick("bch");
  cfg2.p = 6;
  CHECK(run_suite(cfg2).exit_code == 2);
}

TEST_CASE("reports are byte-identical across thread counts") {
  for (const auto& name : {"contraction", "bourgain", "interpolation"}) {
    RunConfig cfg = quick(name);
    cfg.c2 = 4.0;
    if (std::string(name) == "bourgain") {
      cfg.depth = 6;
      cfg.trials = 3;
      cfg.alpha = 0.8;
      cfg.eps = 0.02;
      cfg.min_points = 300;
      cfg.max_points = 4000;
    }
    if (std::string(name) == "interpolation") {
      cfg.n_min = -2;
      cfg.n_max = 0;
    }
    cfg.threads = 1;
    RunReport one = run_suite(cfg);
    cfg.threads = 4;
    RunReport four = run_suite(cfg);
    CAPTURE(name);
    CHECK(one.text == four.text);
  }
}

TEST_CASE("reports are identical across reruns with the same seed") {
  RunConfig cfg = quick("bch");
  cfg.precision = 12;
  RunReport a = run_suite(cfg);
  RunReport b = run_suite(cfg);
  CHECK(a.text == b.text);
}

TEST_CASE("worked CLI examples") {
  // contraction at |lambda| = p reports the three-shell value for the
  // contracted axis direction
  RunConfig cfg = quick("contraction");
  cfg.alpha = 0.5;
  cfg.lambda_exp = 1;
  cfg.c2 = 4.0;
  RunReport rep = run_suite(cfg);
  auto j = nlohmann::json::parse(rep.text);
  bool found = false;
  for (const auto& c : j["cases"]) {
    if (c["w"] == nlohmann::json::array({0, 0, 1})) {
      found = true;
      CHECK(c["value"].get<double>() == doctest::Approx(0.52).epsilon(1e-12));
    }
  }
  CHECK(found);

  // single-coefficient sublevel measure: 1/5 against the bound 5
  RunConfig icfg = quick("interpolation");
  icfg.coeff_a = 1;
  icfg.coeff_b = 0;
  icfg.coeff_c = 0;
  icfg.n_min = icfg.n_max = -2;
  RunReport irep = run_suite(icfg);
  CHECK(irep.passed);
  auto ij = nlohmann::json::parse(irep.text);
  REQUIRE(ij["cases"].size() == 1);
  CHECK(ij["cases"][0]["measure"] == "1/5");

  // zero trials: vacuous pass
  RunConfig bcfg = quick("bch");
  bcfg.trials = 0;
  RunReport brep = run_suite(bcfg);
  CHECK(brep.passed);
  auto bj = nlohmann::json::parse(brep.text);
  CHECK(bj["failures"].get<int>() == 0);
}

TEST_CASE("generators produce sets with the requested shape") {
  PointSet line = axis_set(5, 3, 1, 0);
  CHECK(line.size() == 125);
  for (const auto& x : line.points()) {
    CHECK(x[0] == 0);
    CHECK(x[2] == 0);
  }
  PointSet ball = random_ball_set(1, 5, 4, 100, 2);
  CHECK(ball.size() == 100);
  for (const auto& x : ball.points()) CHECK(ball.point_valuation(x) >= 2);
  PointSet reg = random_regular_set(2, 5, 6, 0.8, 500, 4000);
  CHECK(reg.size() >= 100);
  CHECK(reg.size() <= 4000);
}
