#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "pdes/dynamics.hpp"

using namespace pdes;

namespace {

// Straight-line evaluation of the demo setup at x = (1, 0, 5, -1), v = 0,
// eps = 3/2, independent of the library code paths: hardcoded Laplacian
// rows and the selection formula written out case by case.
struct DemoByHand {
  double x[4] = {1.0, 0.0, 5.0, -1.0};
  double lap[4][4] = {{2, -1, -1, 0},
                      {-1, 2, -1, 0},
                      {-1, -1, 3, -1},
                      {0, 0, -1, 1}};
  double p[4] = {2.0, 4.0, 6.0, 8.0};
  double lambda = 0.1;
  double eps = 1.5;

  double subgrad(int i) const {
    const double xi = x[i];
    if (xi < -eps / 2) return xi - p[i] - lambda - lambda * eps / xi;
    if (xi > eps / 2) return xi - p[i] + lambda - lambda * eps / xi;
    return xi - p[i] + lambda;
  }
  double lap_x(int i) const {
    double acc = 0.0;
    for (int j = 0; j < 4; ++j) acc += lap[i][j] * x[j];
    return acc;
  }
};

NetworkState demo_state() {
  NetworkState s;
  s.x = fixtures::demo_x0();
  s.v = fixtures::zeros41();
  s.k = 1;
  return s;
}

// Same arithmetic as pd_step but visiting agents in reverse order; the
// update is double-buffered, so the result must be bit-identical.
NetworkState reverse_order_step(const CommGraph& g, const ProblemInstance& prob,
                                const NetworkState& s, double alpha,
                                double eps) {
  const int n = g.node_count();
  const int d = prob.dimension();
  NetworkState next;
  next.x.resize(n, d);
  next.v.resize(n, d);
  next.k = s.k + 1;
  for (int i = n - 1; i >= 0; --i) {
    const Eigen::VectorXd xhat = disagreement(g, s.x, i);
    const Eigen::VectorXd vhat = disagreement(g, s.v, i);
    const Eigen::VectorXd gi =
        prob.agent(i).objective.eps_subgradient(s.x.row(i).transpose(), eps);
    const Eigen::VectorXd inc = gi + xhat + vhat;
    const Eigen::VectorXd xi = s.x.row(i).transpose() - alpha * inc;
    next.x.row(i) = prob.agent(i).set->project(xi).transpose();
    next.v.row(i) = (s.v.row(i).transpose() + alpha * xhat).transpose();
  }
  return next;
}

ProblemInstance quadratic_2d_instance() {
  std::vector<Agent> agents;
  for (double shift : {1.0, -2.0}) {
    AgentObjective obj;
    obj.value = [shift](const Eigen::VectorXd& x) {
      return 0.5 * (x.array() - shift).matrix().squaredNorm();
    };
    obj.eps_subgradient = [shift](const Eigen::VectorXd& x, double) {
      return Eigen::VectorXd(x.array() - shift);
    };
    agents.push_back(
        {std::move(obj), std::make_shared<BoxSet>(std::vector<Interval>{
                             Interval(-5.0, 5.0), Interval(-5.0, 5.0)})});
  }
  return ProblemInstance(2, std::move(agents));
}

}  // namespace

TEST_CASE("disagreement") {
  const CommGraph g = fixtures::demo_graph();

  SUBCASE("consensus is annihilated") {
    const Eigen::MatrixXd y = Eigen::MatrixXd::Constant(4, 1, 3.25);
    for (int i = 0; i < 4; ++i) CHECK(disagreement(g, y, i)[0] == 0.0);
  }

  SUBCASE("demo graph, last agent") {
    Eigen::MatrixXd y = fixtures::demo_x0();
    CHECK(disagreement(g, y, 3)[0] == -6.0);
  }

  SUBCASE("two agents") {
    const CommGraph pair = CommGraph::from_edges(2, {{0, 1, 1.0}});
    Eigen::MatrixXd y(2, 1);
    y << 2.0, 0.0;
    CHECK(disagreement(pair, y, 0)[0] == 2.0);
  }

  SUBCASE("matches the Laplacian product row by row") {
    const DemoByHand hand;
    const Eigen::MatrixXd lx = apply_laplacian(g, fixtures::demo_x0());
    for (int i = 0; i < 4; ++i)
      CHECK(lx(i, 0) == doctest::Approx(hand.lap_x(i)).epsilon(1e-14));
  }
}

TEST_CASE("t_operator") {
  const CommGraph g = fixtures::demo_graph();
  const ProblemInstance prob = fixtures::demo_instance();

  SUBCASE("consensus state with exact-zero subgradients") {
    std::vector<Agent> agents;
    for (int i = 0; i < 4; ++i) {
      AgentObjective flat;
      flat.value = [](const Eigen::VectorXd&) { return 1.0; };
      flat.eps_subgradient = [](const Eigen::VectorXd&, double) {
        return Eigen::VectorXd::Zero(1).eval();
      };
      agents.push_back({std::move(flat), std::make_shared<BoxSet>(Interval())});
    }
    const ProblemInstance flat_prob(1, std::move(agents));
    NetworkState s;
    s.x = Eigen::MatrixXd::Constant(4, 1, 2.0);
    s.v = Eigen::MatrixXd::Constant(4, 1, -1.0);
    const Eigen::VectorXd t = t_operator(g, flat_prob, s, 0.0);
    CHECK(t.norm() == 0.0);
  }

  SUBCASE("single agent reduces to the subgradient") {
    const CommGraph solo(Eigen::MatrixXd::Zero(1, 1));
    const ProblemInstance prob1 =
        lasso_instance(0.1, {2.0}, {Interval(-10.0, 10.0)});
    NetworkState s;
    s.x = Eigen::MatrixXd::Constant(1, 1, 3.0);
    s.v = Eigen::MatrixXd::Zero(1, 1);
    const Eigen::VectorXd t = t_operator(solo, prob1, s, 0.0);
    CHECK(t.size() == 2);
    CHECK(t[0] == doctest::Approx(1.1));
    CHECK(t[1] == 0.0);
  }

  SUBCASE("demo state matches the straight-line evaluation") {
    const DemoByHand hand;
    const Eigen::VectorXd t = t_operator(g, prob, demo_state(), hand.eps);
    REQUIRE(t.size() == 8);
    for (int i = 0; i < 4; ++i) {
      const double top = hand.subgrad(i) + hand.lap_x(i);  // v = 0
      CHECK(t[i] == doctest::Approx(top).epsilon(1e-14));
      CHECK(t[4 + i] == doctest::Approx(-hand.lap_x(i)).epsilon(1e-14));
    }
  }
}

TEST_CASE("pd_step") {
  const CommGraph g = fixtures::demo_graph();
  const ProblemInstance prob = fixtures::demo_instance();

  SUBCASE("consensus with zero subgradients is a fixed point") {
    std::vector<Agent> agents;
    for (int i = 0; i < 3; ++i) {
      AgentObjective flat;
      flat.value = [](const Eigen::VectorXd&) { return 0.0; };
      flat.eps_subgradient = [](const Eigen::VectorXd&, double) {
        return Eigen::VectorXd::Zero(1).eval();
      };
      agents.push_back({std::move(flat), std::make_shared<BoxSet>(Interval())});
    }
    const ProblemInstance flat_prob(1, std::move(agents));
    const CommGraph ring = CommGraph::from_edges(
        3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}});
    NetworkState s;
    s.x = Eigen::MatrixXd::Constant(3, 1, 0.5);
    s.v = Eigen::MatrixXd::Constant(3, 1, 2.0);
    const NetworkState next = pd_step(ring, flat_prob, s, 0.7, 0.0);
    CHECK(fixtures::exactly_equal(next.x, s.x));
    CHECK(fixtures::exactly_equal(next.v, s.v));
    CHECK(next.k == 2);
  }

  SUBCASE("single agent projected subgradient step") {
    const CommGraph solo(Eigen::MatrixXd::Zero(1, 1));
    AgentObjective linear;
    linear.value = [](const Eigen::VectorXd& x) { return 2.0 * x[0]; };
    linear.eps_subgradient = [](const Eigen::VectorXd&, double) {
      return Eigen::VectorXd::Constant(1, 2.0).eval();
    };
    std::vector<Agent> agents;
    agents.push_back(
        {std::move(linear), std::make_shared<BoxSet>(Interval(0.0, 10.0))});
    const ProblemInstance prob1(1, std::move(agents));
    NetworkState s;
    s.x = Eigen::MatrixXd::Constant(1, 1, 5.0);
    s.v = Eigen::MatrixXd::Constant(1, 1, 1.5);
    const NetworkState next = pd_step(solo, prob1, s, 1.0, 0.0);
    CHECK(next.x(0, 0) == 3.0);
    CHECK(next.v(0, 0) == 1.5);
  }

  SUBCASE("one demo step matches the straight-line evaluation") {
    const DemoByHand hand;
    const double alpha = 1.5;
    const NetworkState next =
        pd_step(g, prob, demo_state(), alpha, hand.eps);
    const auto sets = fixtures::demo_sets();
    for (int i = 0; i < 4; ++i) {
      const double inc = hand.subgrad(i) + hand.lap_x(i);
      const double expected_x = sets[i].project(hand.x[i] - alpha * inc);
      CHECK(next.x(i, 0) == doctest::Approx(expected_x).epsilon(1e-14));
      CHECK(next.v(i, 0) ==
            doctest::Approx(alpha * hand.lap_x(i)).epsilon(1e-14));
    }
    // the loose iterates hit their bounds on this step
    CHECK(next.x(0, 0) == 7.0);
    CHECK(next.x(1, 0) == 6.0);
    CHECK(next.x(2, 0) == -8.0);
    CHECK(next.x(3, 0) == 4.0);
  }

  SUBCASE("agent update order does not matter") {
    NetworkState s = demo_state();
    for (int k = 0; k < 25; ++k) {
      const double alpha = 3.0 / (s.k + 1);
      const NetworkState a = pd_step(g, prob, s, alpha, alpha);
      const NetworkState b = reverse_order_step(g, prob, s, alpha, alpha);
      REQUIRE(fixtures::exactly_equal(a.x, b.x));
      REQUIRE(fixtures::exactly_equal(a.v, b.v));
      s = a;
    }
  }

  SUBCASE("iterates stay feasible") {
    NetworkState s = demo_state();
    const auto sets = fixtures::demo_sets();
    for (int k = 0; k < 100; ++k) {
      s = pd_step(g, prob, s, 3.0 / (s.k + 1), 3.0 / (s.k + 1));
      for (int i = 0; i < 4; ++i) CHECK(sets[i].contains(s.x(i, 0)));
    }
  }

  SUBCASE("argument validation") {
    CHECK_THROWS_AS(pd_step(g, prob, demo_state(), 0.0, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(pd_step(g, prob, demo_state(), 1.0, -0.1),
                    std::invalid_argument);
  }
}

TEST_CASE("stacked route agrees bitwise with the per-agent route") {
  SUBCASE("demo problem") {
    const CommGraph g = fixtures::demo_graph();
    const ProblemInstance prob = fixtures::demo_instance();
    NetworkState s = demo_state();
    for (int k = 0; k < 200; ++k) {
      const double alpha = 3.0 / (s.k + 1);
      const NetworkState a = pd_step(g, prob, s, alpha, alpha);
      const NetworkState b = stacked_pd_step(g, prob, s, alpha, alpha);
      REQUIRE(fixtures::exactly_equal(a.x, b.x));
      REQUIRE(fixtures::exactly_equal(a.v, b.v));
      s = a;
    }
  }

  SUBCASE("two agents in dimension 2") {
    const CommGraph pair = CommGraph::from_edges(2, {{0, 1, 0.8}});
    const ProblemInstance prob = quadratic_2d_instance();
    NetworkState s;
    s.x.resize(2, 2);
    s.x << 4.0, -3.0, 0.5, 2.0;
    s.v = Eigen::MatrixXd::Zero(2, 2);
    for (int k = 0; k < 50; ++k) {
      const double alpha = 1.0 / (s.k + 1);
      const NetworkState a = pd_step(pair, prob, s, alpha, 0.0);
      const NetworkState b = stacked_pd_step(pair, prob, s, alpha, 0.0);
      REQUIRE(fixtures::exactly_equal(a.x, b.x));
      REQUIRE(fixtures::exactly_equal(a.v, b.v));
      s = a;
    }
  }
}

TEST_CASE("npd_step") {
  const CommGraph g = fixtures::demo_graph();
  const ProblemInstance prob = fixtures::demo_instance();
  const NormalizationConfig norm{0.1, 3};

  SUBCASE("rejects too few rounds and bad floors") {
    CHECK_THROWS_AS(
        npd_step(g, prob, demo_state(), 1.0, 0.0, NormalizationConfig{0.1, 2}),
        std::invalid_argument);
    CHECK_THROWS_AS(
        npd_step(g, prob, demo_state(), 1.0, 0.0, NormalizationConfig{0.0, 3}),
        std::invalid_argument);
  }

  SUBCASE("consensus fixed point with zero subgradients") {
    std::vector<Agent> agents;
    for (int i = 0; i < 4; ++i) {
      AgentObjective flat;
      flat.value = [](const Eigen::VectorXd&) { return 0.0; };
      flat.eps_subgradient = [](const Eigen::VectorXd&, double) {
        return Eigen::VectorXd::Zero(1).eval();
      };
      agents.push_back({std::move(flat), std::make_shared<BoxSet>(Interval())});
    }
    const ProblemInstance flat_prob(1, std::move(agents));
    NetworkState s;
    s.x = Eigen::MatrixXd::Constant(4, 1, 1.0);
    s.v = Eigen::MatrixXd::Constant(4, 1, 0.25);
    const NetworkState next = npd_step(g, flat_prob, s, 0.9, 0.0, norm);
    CHECK(fixtures::exactly_equal(next.x, s.x));
    CHECK(fixtures::exactly_equal(next.v, s.v));
  }

  SUBCASE("active floor reduces to pd_step with alpha/c") {
    // tiny state, large floor: every block norm is below c
    NetworkState s;
    s.x = fixtures::demo_x0() * 1e-4;
    s.v = fixtures::zeros41();
    const NormalizationConfig big_floor{100.0, 3};
    const double alpha = 0.5;
    const NetworkState a = npd_step(g, prob, s, alpha, 0.0, big_floor);
    const NetworkState b = pd_step(g, prob, s, alpha / big_floor.c, 0.0);
    CHECK(fixtures::exactly_equal(a.x, b.x));
    CHECK(fixtures::exactly_equal(a.v, b.v));
  }

  SUBCASE("one demo step matches the straight-line evaluation") {
    const DemoByHand hand;
    const double alpha = 1.5;
    const NetworkState next =
        npd_step(g, prob, demo_state(), alpha, hand.eps, norm);
    // by hand: block norms, global max after 3 rounds, common step
    double block[4], biggest = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double top = hand.subgrad(i) + hand.lap_x(i);
      block[i] = std::sqrt(top * top + hand.lap_x(i) * hand.lap_x(i));
      biggest = std::max(biggest, block[i]);
    }
    const double step = alpha / std::max(norm.c, biggest);
    const auto sets = fixtures::demo_sets();
    for (int i = 0; i < 4; ++i) {
      const double inc = hand.subgrad(i) + hand.lap_x(i);
      CHECK(next.x(i, 0) ==
            doctest::Approx(sets[i].project(hand.x[i] - step * inc))
                .epsilon(1e-13));
      CHECK(next.v(i, 0) ==
            doctest::Approx(step * hand.lap_x(i)).epsilon(1e-13));
    }
  }

  SUBCASE("pre-projection increments are bounded by alpha") {
    NetworkState s = demo_state();
    for (int k = 0; k < 50; ++k) {
      const double alpha = 3.0 / (s.k + 1);
      const double eps = alpha;
      // reconstruct the per-agent increment norms from the operator blocks
      const Eigen::VectorXd t = t_operator(g, prob, s, eps);
      std::vector<double> norms(4);
      for (int i = 0; i < 4; ++i)
        norms[i] = std::sqrt(t.segment(i, 1).squaredNorm() +
                             t.segment(4 + i, 1).squaredNorm());
      const NetworkState next = npd_step(g, prob, s, alpha, eps, norm);
      const double global = *std::max_element(norms.begin(), norms.end());
      for (int i = 0; i < 4; ++i) {
        const double step = alpha / std::max(norm.c, global);
        const double inc_norm = step * norms[i];
        CHECK(inc_norm <= alpha * (1.0 + 1e-12));
      }
      s = next;
    }
  }
}

TEST_CASE("check_schedule") {
  const Schedule harmonic = Schedule::power(3, 1, 1);

  SUBCASE("matched harmonic pair is theorem2-valid") {
    const auto check =
        check_schedule(harmonic, harmonic, ScheduleMode::theorem2);
    CHECK(check.verdict == Verdict::valid);
  }

  SUBCASE("p = 1/2 fails the square-summability half") {
    const auto check = check_schedule(Schedule::power(1, 0, 0.5), harmonic,
                                      ScheduleMode::theorem2);
    CHECK(check.verdict == Verdict::invalid);
    CHECK(check.reason.find("alpha_k^2") != std::string::npos);
  }

  SUBCASE("constant alpha fails both modes") {
    const Schedule constant = Schedule::constant(0.1);
    CHECK(check_schedule(constant, harmonic, ScheduleMode::theorem1).verdict ==
          Verdict::invalid);
    CHECK(check_schedule(constant, harmonic, ScheduleMode::theorem2).verdict ==
          Verdict::invalid);
  }

  SUBCASE("constant eps: theorem1 valid, theorem2 invalid") {
    const Schedule eps0 = Schedule::constant(0.5);
    CHECK(check_schedule(harmonic, eps0, ScheduleMode::theorem1).verdict ==
          Verdict::valid);
    const auto t2 = check_schedule(harmonic, eps0, ScheduleMode::theorem2);
    CHECK(t2.verdict == Verdict::invalid);
    CHECK(t2.reason.find("alpha_k*eps_k") != std::string::npos);
  }

  SUBCASE("identically zero eps makes the product summable") {
    const Schedule zero = Schedule::constant(0.0);
    CHECK(check_schedule(harmonic, zero, ScheduleMode::theorem2).verdict ==
          Verdict::valid);
    CHECK(check_schedule(harmonic, zero, ScheduleMode::theorem1).verdict ==
          Verdict::invalid);
  }

  SUBCASE("fast-decaying alpha fails the divergence half") {
    CHECK(check_schedule(Schedule::power(1, 0, 1.5), harmonic,
                         ScheduleMode::theorem2)
              .verdict == Verdict::invalid);
  }

  SUBCASE("custom schedules are undecidable, never falsely valid") {
    const Schedule mystery = Schedule::custom([](long k) { return 1.0 / k; });
    CHECK(check_schedule(mystery, harmonic, ScheduleMode::theorem2).verdict ==
          Verdict::undecidable);
    CHECK(check_schedule(harmonic, mystery, ScheduleMode::theorem2).verdict ==
          Verdict::undecidable);
    // a decidable failure still wins
    CHECK(check_schedule(Schedule::constant(1.0), mystery,
                         ScheduleMode::theorem2)
              .verdict == Verdict::invalid);
  }

  SUBCASE("schedule evaluation") {
    CHECK(harmonic(1) == doctest::Approx(1.5));
    CHECK(harmonic(2) == doctest::Approx(1.0));
    CHECK(Schedule::constant(0.25)(17) == 0.25);
    CHECK_THROWS_AS(harmonic(0), std::invalid_argument);
  }
}

TEST_CASE("run") {
  const CommGraph g = fixtures::demo_graph();
  const ProblemInstance prob = fixtures::demo_instance();
  const Schedule alpha = fixtures::demo_alpha();
  const Schedule eps = fixtures::demo_eps();

  SUBCASE("zero iterations produce only the initial record") {
    const auto trace = run(g, prob, alpha, eps, fixtures::demo_x0(),
                           fixtures::zeros41(), 0, Variant::plain);
    REQUIRE(trace.size() == 1);
    CHECK(trace[0].k == 1);
    CHECK(trace[0].eps_used == doctest::Approx(1.5));
  }

  SUBCASE("trace length, counters and feasibility") {
    const auto trace = run(g, prob, alpha, eps, fixtures::demo_x0(),
                           fixtures::zeros41(), 250, Variant::plain);
    REQUIRE(trace.size() == 251);
    const auto sets = fixtures::demo_sets();
    for (size_t r = 0; r < trace.size(); ++r) {
      CHECK(trace[r].k == static_cast<long>(r + 1));
      for (int i = 0; i < 4; ++i) CHECK(sets[i].contains(trace[r].x(i, 0)));
    }
  }

  SUBCASE("infeasible starts are projected and logged") {
    Eigen::MatrixXd x0(4, 1);
    x0 << 100.0, 0.0, 5.0, -100.0;
    std::ostringstream log;
    const auto trace = run(g, prob, alpha, eps, x0, fixtures::zeros41(), 1,
                           Variant::plain, {}, &log);
    CHECK(trace[0].x(0, 0) == 7.0);
    CHECK(trace[0].x(3, 0) == -7.0);
    CHECK(log.str().find("projected") != std::string::npos);
  }

  SUBCASE("an invalid schedule pair warns but still runs") {
    std::ostringstream log;
    const auto trace =
        run(g, prob, Schedule::power(1, 0, 0.2), Schedule::constant(0.5),
            fixtures::demo_x0(), fixtures::zeros41(), 3, Variant::plain, {},
            &log);
    CHECK(trace.size() == 4);
    CHECK(log.str().find("warning") != std::string::npos);
  }

  SUBCASE("dual updates telescope and preserve the mean") {
    const auto trace = run(g, prob, alpha, eps, fixtures::demo_x0(),
                           fixtures::zeros41(), 400, Variant::plain);
    Eigen::MatrixXd acc = fixtures::zeros41();
    for (size_t r = 0; r + 1 < trace.size(); ++r) {
      const double a = 3.0 / (trace[r].k + 1);
      for (int i = 0; i < 4; ++i)
        acc(i, 0) += a * disagreement(g, trace[r].x, i)[0];
      REQUIRE(fixtures::exactly_equal(trace[r + 1].v, acc));
    }
    for (const auto& rec : trace)
      CHECK(std::abs(rec.v.col(0).mean()) <= 1e-9);
  }

  SUBCASE("single smooth agent reduces to projected gradient descent") {
    const CommGraph solo(Eigen::MatrixXd::Zero(1, 1));
    const ProblemInstance prob1 =
        lasso_instance(0.0, {3.0}, {Interval(0.0, 10.0)});
    const auto trace =
        run(solo, prob1, Schedule::power(1, 1, 0.8), Schedule::constant(0.0),
            Eigen::MatrixXd::Constant(1, 1, 9.0),
            Eigen::MatrixXd::Zero(1, 1), 2000, Variant::plain);
    CHECK(std::abs(trace.back().x(0, 0) - 3.0) <= 1e-6);
  }

  SUBCASE("normalized variant needs a complete config") {
    CHECK_THROWS_AS(run(g, prob, alpha, eps, fixtures::demo_x0(),
                        fixtures::zeros41(), 1, Variant::normalized),
                    std::invalid_argument);
    CHECK_THROWS_AS(run(g, prob, alpha, eps, fixtures::demo_x0(),
                        fixtures::zeros41(), 1, Variant::normalized,
                        NormalizationConfig{0.1, 2}),
                    std::invalid_argument);
  }

  SUBCASE("consensus error vanishes exactly on consensus states only") {
    const auto at_consensus =
        run(g, prob, alpha, eps, Eigen::MatrixXd::Constant(4, 1, 2.0),
            fixtures::zeros41(), 0, Variant::plain);
    CHECK(at_consensus[0].consensus_error == 0.0);
    const auto spread = run(g, prob, alpha, eps, fixtures::demo_x0(),
                            fixtures::zeros41(), 0, Variant::plain);
    CHECK(spread[0].consensus_error > 0.0);
  }

  SUBCASE("normalized runs record the effective minimum step") {
    const auto trace = run(g, prob, alpha, eps, fixtures::demo_x0(),
                           fixtures::zeros41(), 5, Variant::normalized,
                           NormalizationConfig{0.1, 3});
    REQUIRE(trace.size() == 6);
    // first step: alpha_1 = 1.5 divided by the largest block norm (> c)
    CHECK(trace[0].step_used < 1.5);
    CHECK(trace[0].step_used > 0.0);
  }
}
