#include <doctest.h>

#include <cmath>

#include "weakstat/random_states.hpp"
#include "weakstat/scenarios.hpp"

using namespace weakstat;

namespace {

void check_near(const Matrix &actual, const Matrix &expected, double tol) {
    REQUIRE(actual.rows() == expected.rows());
    REQUIRE(actual.cols() == expected.cols());
    CHECK(max_abs(actual - expected) <= tol);
}

const double kSqrt2 = std::sqrt(2.0);

Matrix conj_matrix(const Matrix &m) { return m.conjugate(); }

// E[(X+Y)S+ + (X-Y)S-] evaluated as a plain two-qubit correlation function:
// A measures the conjugated spin components, B the X/Y sums.
double chsh_expectation_oracle(const Matrix &rho) {
    const Matrix s_plus = (pauli_x() + pauli_y()) / kSqrt2;
    const Matrix s_minus = (pauli_x() - pauli_y()) / kSqrt2;
    const Matrix op =
        tensor_product(conj_matrix(s_plus), pauli_x() + pauli_y()) +
        tensor_product(conj_matrix(s_minus), pauli_x() - pauli_y());
    return (rho * op).trace().real();
}

} // namespace

TEST_CASE("double slit: both branches keep the full coherence") {
    const Scenario scenario = double_slit_scenario();
    const ScenarioReport report = run_exact(scenario);

    const ConditionalState *r1 = report.find_state("path-1");
    const ConditionalState *r2 = report.find_state("path-2");
    REQUIRE(r1);
    REQUIRE(r2);
    check_near(r1->matrix(), matrix_from_rows({{1, 0.5}, {0.5, 0}}), 1e-14);
    check_near(r2->matrix(), matrix_from_rows({{0, 0.5}, {0.5, 1}}), 1e-14);
    CHECK(r1->preparation_prob() == doctest::Approx(0.5).epsilon(1e-14));

    const double *c1 = report.find_value("p(coherence|path-1)");
    const double *c2 = report.find_value("p(coherence|path-2)");
    const double *a1 = report.find_value("p(anti-coherence|path-1)");
    REQUIRE(c1);
    REQUIRE(c2);
    REQUIRE(a1);
    CHECK(std::abs(*c1 - 1.0) <= 1e-12);
    CHECK(std::abs(*c2 - 1.0) <= 1e-12);
    CHECK(std::abs(*c1 - *c2) <= 1e-12);
    CHECK(std::abs(*a1 - 0.0) <= 1e-12);

    // branch eigenvalues (1 +/- sqrt 2)/2: one negative
    const auto *eigs = [&]() -> const std::vector<double> * {
        for (const auto &[label, values] : report.eigen_summaries)
            if (label == "path-1")
                return &values;
        return nullptr;
    }();
    REQUIRE(eigs);
    CHECK(std::abs((*eigs)[0] - (1.0 - kSqrt2) / 2.0) <= 1e-12);
    CHECK(std::abs((*eigs)[1] - (1.0 + kSqrt2) / 2.0) <= 1e-12);
}

TEST_CASE("every scenario satisfies the mixture identity") {
    StateSampler sampler(31);
    std::vector<Scenario> scenarios;
    scenarios.push_back(double_slit_scenario());
    scenarios.push_back(entangled_scenario(3, sampler.random_ket(3)));
    scenarios.push_back(bell_chsh_scenario());
    for (const Scenario &scenario : scenarios) {
        for (const Pvm &pvm : scenario.pvms) {
            Matrix mixture = Matrix::Zero(scenario.dim(), scenario.dim());
            for (const auto &outcome : pvm.outcomes) {
                const ConditionalState state =
                    conditional_state(scenario.initial, outcome.projector);
                mixture += state.preparation_prob() * state.matrix();
            }
            CHECK(max_abs(mixture - scenario.initial.matrix()) <= 1e-10);
        }
    }
}

TEST_CASE("entangled scenario: post-selection leaves B in the conjugate state") {
    SUBCASE("f = |0> reproduces itself") {
        const KetVector f((Vector(2) << 1, 0).finished());
        const ScenarioReport report = run_exact(entangled_scenario(2, f));
        const ConditionalState *marginal = report.find_state("marginal_B(A=f)");
        REQUIRE(marginal);
        check_near(marginal->matrix(), matrix_from_rows({{1, 0}, {0, 0}}), 1e-12);
    }
    SUBCASE("complex f shows the conjugation") {
        const KetVector f((Vector(2) << 1.0 / kSqrt2, Complex(0, 1.0 / kSqrt2)).finished());
        const ScenarioReport report = run_exact(entangled_scenario(2, f));
        const ConditionalState *marginal = report.find_state("marginal_B(A=f)");
        REQUIRE(marginal);
        const Matrix expected = outer(f.conjugated(), f.conjugated());
        check_near(marginal->matrix(), expected, 1e-12);
        // and it differs from the unconjugated projector
        CHECK(max_abs(marginal->matrix() - outer(f, f)) > 0.9);
    }
    SUBCASE("conditional states rebuild the entangled state over the A basis") {
        StateSampler sampler(32);
        const KetVector f = sampler.random_ket(2);
        const Scenario scenario = entangled_scenario(2, f);
        Matrix mixture = Matrix::Zero(4, 4);
        for (const auto &outcome : scenario.pvms[0].outcomes) {
            const ConditionalState state =
                conditional_state(scenario.initial, outcome.projector);
            mixture += state.preparation_prob() * state.matrix();
        }
        check_near(mixture, scenario.initial.matrix(), 1e-10);
    }
    SUBCASE("dimension bounds") {
        const KetVector f((Vector(2) << 1, 0).finished());
        CHECK_THROWS_AS(entangled_scenario(9, KetVector((Vector(9) << 1, 0, 0, 0, 0, 0, 0, 0, 0)
                                                             .finished())),
                        BadDimensionError);
        CHECK_THROWS_AS(entangled_scenario(3, f), DimMismatchError);
    }
}

TEST_CASE("entangled scenario matches the rank-2 closed form") {
    // R_Ef = (sqrt(d)/2) (|E><f;f*| + |f;f*><E|)
    StateSampler sampler(33);
    for (const Eigen::Index d : {2, 3, 4}) {
        for (int trial = 0; trial < 10; ++trial) {
            const KetVector f = sampler.random_ket(d);
            const Scenario scenario = entangled_scenario(d, f);
            const ConditionalState state = conditional_state(
                scenario.initial, scenario.pvms[0].outcomes[0].projector);

            Vector e = Vector::Zero(d * d);
            for (Eigen::Index k = 0; k < d; ++k)
                e[k * d + k] = 1.0 / std::sqrt(static_cast<double>(d));
            Vector ff = Vector::Zero(d * d);
            for (Eigen::Index a = 0; a < d; ++a)
                for (Eigen::Index b = 0; b < d; ++b)
                    ff[a * d + b] = f.amplitudes()[a] * std::conj(f.amplitudes()[b]);
            const Matrix closed_form = 0.5 * std::sqrt(static_cast<double>(d)) *
                                       (e * ff.adjoint() + ff * e.adjoint());
            check_near(state.matrix(), closed_form, 1e-12);
        }
    }
}

TEST_CASE("B marginal equals |f*><f*| for random f at d = 2, 3, 4") {
    StateSampler sampler(34);
    for (const Eigen::Index d : {2, 3, 4}) {
        for (int trial = 0; trial < 50; ++trial) {
            const KetVector f = sampler.random_ket(d);
            const ScenarioReport report = run_exact(entangled_scenario(d, f));
            const ConditionalState *marginal = report.find_state("marginal_B(A=f)");
            REQUIRE(marginal);
            check_near(marginal->matrix(), outer(f.conjugated(), f.conjugated()), 1e-10);
        }
    }
}

TEST_CASE("bell operators: spectra, completeness, eigenbases") {
    const auto pis = bell_pi_operators();
    REQUIRE(pis.size() == 4);
    Matrix sum = Matrix::Zero(2, 2);
    for (const auto &[label, pi] : pis) {
        (void)label;
        const EigenSystem eig = hermitian_eig(HermitianOperator(pi));
        CHECK(std::abs(eig.values[0] - (1.0 - kSqrt2) / 4.0) <= 1e-12);
        CHECK(std::abs(eig.values[1] - (1.0 + kSqrt2) / 4.0) <= 1e-12);
        sum += pi;
    }
    check_near(sum, identity(2), 1e-14);

    // P(X=+1,Y=+1) and P(X=-1,Y=-1) diagonalize in the S+ basis,
    // P(X=+1,Y=-1) and P(X=-1,Y=+1) in the S- basis
    const Matrix s_plus = (pauli_x() + pauli_y()) / kSqrt2;
    const Matrix s_minus = (pauli_x() - pauli_y()) / kSqrt2;
    for (const auto &[label, pi] : pis) {
        const Matrix &spin =
            (label == "P(X=+1,Y=+1)" || label == "P(X=-1,Y=-1)") ? s_plus : s_minus;
        check_near(pi * spin - spin * pi, Matrix(Matrix::Zero(2, 2)), 1e-14);
    }
}

TEST_CASE("bell joint table reproduces the 60%/-10% quasi-probabilities") {
    const Scenario scenario = bell_chsh_scenario();
    const ScenarioReport table = bell_joint_table(scenario);

    const double hi = (1.0 + kSqrt2) / 4.0; // 0.6035533906
    const double lo = (1.0 - kSqrt2) / 4.0; // -0.1035533906

    const double *p1 = table.find_value("(X+Y)S+=+2");
    const double *p2 = table.find_value("(X-Y)S-=+2");
    const double *m1 = table.find_value("(X+Y)S+=-2");
    const double *m2 = table.find_value("(X-Y)S-=-2");
    REQUIRE(p1);
    REQUIRE(p2);
    REQUIRE(m1);
    REQUIRE(m2);
    CHECK(std::abs(*p1 - 0.6035533906) <= 1e-10);
    CHECK(std::abs(*p2 - 0.6035533906) <= 1e-10);
    CHECK(std::abs(*m1 - (-0.1035533906)) <= 1e-10);
    CHECK(std::abs(*m2 - (-0.1035533906)) <= 1e-10);
    CHECK(std::abs(*p1 - hi) <= 1e-12);
    CHECK(std::abs(*m1 - lo) <= 1e-12);

    SUBCASE("total mass is 1 and exactly two compound events are negative") {
        CHECK(std::abs(*p1 + *p2 + *m1 + *m2 - 1.0) <= 1e-10);
        int negative = 0;
        for (const double *p : {p1, p2, m1, m2})
            negative += (*p < 0.0) ? 1 : 0;
        CHECK(negative == 2);
    }

    SUBCASE("each setting's atom table is itself normalized") {
        for (const char *setting : {"S+", "S-"}) {
            double total = 0.0;
            for (const auto &[label, value] : table.exact_values)
                if (label.rfind(std::string("p(") + setting + "=", 0) == 0)
                    total += value;
            CHECK(std::abs(total - 1.0) <= 1e-10);
        }
    }

    SUBCASE("branch probabilities inside an S+ eigenstate") {
        const double *pp = table.find_value("p(S+=+1,X=+1,Y=+1)");
        const double *pm = table.find_value("p(S+=+1,X=+1,Y=-1)");
        REQUIRE(pp);
        REQUIRE(pm);
        // condition on the branch: divide by p(S+=+1) = 1/2
        CHECK(std::abs(*pp / 0.5 - hi) <= 1e-12);
        CHECK(std::abs(*pm / 0.5 - 0.25) <= 1e-12);
        double branch_total = 0.0;
        for (const auto &[label, value] : table.exact_values)
            if (label.rfind("p(S+=+1,", 0) == 0)
                branch_total += value;
        CHECK(std::abs(branch_total / 0.5 - 1.0) <= 1e-12);
    }

    SUBCASE("compound summand is +/-2 on every atom") {
        // x = y atoms carry (X+Y)S+ = +/-2; x != y atoms carry (X-Y)S- = +/-2
        for (const int s : {+1, -1})
            for (const int x : {+1, -1})
                for (const int y : {+1, -1}) {
                    const int v_plus = (x + y) * s;
                    const int v_minus = (x - y) * s;
                    if (x == y)
                        CHECK(std::abs(v_plus) == 2);
                    else
                        CHECK(std::abs(v_minus) == 2);
                }
    }
}

TEST_CASE("chsh value: quantum scenario beats 2, product control does not") {
    const ScenarioReport table = bell_joint_table(bell_chsh_scenario());
    REQUIRE(table.aggregate.has_value());
    CHECK(std::abs(*table.aggregate - 2.0 * kSqrt2) <= 1e-10);
    CHECK(std::abs(chsh_value(table) - 2.8284271247) <= 1e-10);

    SUBCASE("cross oracle: table average equals the direct correlation function") {
        CHECK(std::abs(chsh_value(table) -
                       chsh_expectation_oracle(bell_chsh_scenario().initial.matrix())) <=
              1e-10);
    }

    SUBCASE("product state |00> stays within the classical bound") {
        Scenario product = bell_chsh_scenario();
        Matrix rho00 = Matrix::Zero(4, 4);
        rho00(0, 0) = 1.0;
        product.initial = DensityMatrix(rho00);
        const ScenarioReport control = bell_joint_table(product);
        CHECK(std::abs(chsh_value(control)) <= 2.0 + 1e-10);
        CHECK(std::abs(chsh_value(control) - chsh_expectation_oracle(rho00)) <= 1e-10);
    }

    SUBCASE("random two-qubit states agree with the oracle") {
        StateSampler sampler(35);
        Scenario scenario = bell_chsh_scenario();
        for (int trial = 0; trial < 20; ++trial) {
            scenario.initial = sampler.random_density(4);
            const ScenarioReport report = bell_joint_table(scenario);
            CHECK(std::abs(chsh_value(report) -
                           chsh_expectation_oracle(scenario.initial.matrix())) <= 1e-10);
        }
    }
}

TEST_CASE("bell report errors") {
    CHECK_THROWS_AS(bell_joint_table(double_slit_scenario()), WrongScenarioError);
    const ScenarioReport bare = run_exact(double_slit_scenario());
    CHECK_THROWS_AS(chsh_value(bare), MissingEventsError);
}

TEST_CASE("scenario validation rejects malformed descriptions") {
    Scenario scenario = double_slit_scenario();
    SUBCASE("unknown query reference") {
        scenario.queries.push_back({"bad", QueryKind::Joint, "nope", "coherence"});
        CHECK_THROWS_AS(validate_scenario(scenario), ValidationError);
    }
    SUBCASE("duplicate probe label") {
        scenario.probes.push_back(scenario.probes.front());
        CHECK_THROWS_AS(validate_scenario(scenario), ValidationError);
    }
    SUBCASE("incomplete pvm") {
        scenario.pvms[0].outcomes.pop_back();
        CHECK_THROWS_AS(validate_scenario(scenario), IncompletePvmError);
    }
}
