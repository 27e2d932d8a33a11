#include <doctest.h>

#include <cmath>

#include "cryoflow/scenarios.hpp"

using namespace cryoflow;

TEST_CASE("bottle oracle: hand substitutions") {
    MaterialParams p;  // rho1 = 1, rho2 = 0.9, ell/theta_c = 1
    CHECK(bottle_freeze_oracle(p, p.theta_c - 0.05) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(bottle_freeze_oracle(p, p.theta_c) == doctest::Approx(0.0));
    CHECK_THROWS_AS(bottle_freeze_oracle(p, p.theta_c + 0.1), std::domain_error);

    MaterialParams q;
    q.rho1 = 1.2;
    q.rho2 = 0.8;
    q.ell = 2.0;
    q.theta_c = 4.0;  // slope 0.5
    CHECK(bottle_freeze_oracle(q, 3.8) == doctest::Approx(0.5 * 0.2 / 0.4).epsilon(1e-13));
}

TEST_CASE("emulsion oracle: both branches and the threshold") {
    MaterialParams p;
    const EmulsionTarget full = emulsion_oracle(p, 0.95);
    CHECK(full.beta1 == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(full.beta2 == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(!full.void_branch);

    const EmulsionTarget threshold = emulsion_oracle(p, 0.9);
    CHECK(threshold.beta1 == doctest::Approx(0.0));
    CHECK(threshold.beta2 == doctest::Approx(1.0));
    CHECK(!threshold.void_branch);

    // Derived void-branch value: rho2 beta2 = rho1 beta1_0.
    const EmulsionTarget voids = emulsion_oracle(p, 0.45);
    CHECK(voids.beta1 == 0.0);
    CHECK(voids.beta2 == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(voids.void_branch);

    CHECK_THROWS_AS(emulsion_oracle(p, 0.0), ParameterError);
    CHECK_THROWS_AS(emulsion_oracle(p, 1.0), ParameterError);
}

TEST_CASE("glacier relation: values, monotonicity, domain") {
    MaterialParams p;
    CHECK(glacier_relation(p, 0.0) == doctest::Approx(p.theta_c));
    // theta - theta_c = -0.02 corresponds to p = 0.2 on the curve.
    CHECK(glacier_relation(p, 0.2) == doctest::Approx(p.theta_c - 0.02).epsilon(1e-13));
    CHECK(glacier_relation(p, 1.0) < glacier_relation(p, 0.5));
    CHECK_THROWS_AS(glacier_relation(p, -0.1), std::domain_error);
}

TEST_CASE("scenario lookup") {
    CHECK(make_scenario("bottle_freeze").name == "bottle_freeze");
    CHECK(make_scenario("emulsion_freeze").name == "emulsion_freeze");
    CHECK(make_scenario("glacier_equilibrium").name == "glacier_equilibrium");
    CHECK_THROWS_AS(make_scenario("nope"), ParameterError);
    CHECK(scenario_names().size() == 3);
}

TEST_CASE("glacier preset runs stationary end to end") {
    const ScenarioSetup setup = make_glacier(0.2);
    const ScenarioOutcome out = run_scenario(setup);
    CHECK(out.report.pass);
    for (const OracleCheck& c : out.report.checks) CHECK(c.pass);
    REQUIRE(!out.run.series.empty());
    CHECK(out.run.series.back().vi_residual <= 1e-8);
}

TEST_CASE("emulsion void branch reaches ice plus voids (k -> 0 oracle)") {
    // Small, fast variant of the void branch: stronger cooling, beta1_0 well
    // below the threshold. Accepted within the preset's 2% tolerance.
    ScenarioSetup setup = make_emulsion_freeze(0.3, 1.0, 0.9, 0.1, 1e-3);
    const ScenarioOutcome out = run_scenario(setup);
    CHECK(out.report.pass);
}
