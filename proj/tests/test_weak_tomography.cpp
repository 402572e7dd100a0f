#include <doctest.h>

#include <cmath>

#include "weakstat/random_states.hpp"
#include "weakstat/weak_tomography.hpp"

using namespace weakstat;

namespace {

void check_near(const Matrix &actual, const Matrix &expected, double tol) {
    REQUIRE(actual.rows() == expected.rows());
    REQUIRE(actual.cols() == expected.cols());
    CHECK(max_abs(actual - expected) <= tol);
}

DensityMatrix ket0_state() { return DensityMatrix(matrix_from_rows({{1, 0}, {0, 0}})); }

DensityMatrix plus_state() {
    return DensityMatrix(matrix_from_rows({{0.5, 0.5}, {0.5, 0.5}}));
}

const double kSqrt2 = std::sqrt(2.0);

} // namespace

TEST_CASE("build_weak_povm pairs probes into a complete set") {
    const TomographyBasis basis = TomographyBasis::gell_mann(2);
    const WeakPOVM povm = build_weak_povm(basis, 0.1);
    REQUIRE(povm.size() == 6);
    Matrix sum = Matrix::Zero(2, 2);
    for (std::size_t m = 0; m < povm.size(); ++m) {
        CHECK(povm.outcomes()[m].weight == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
        sum += povm.effect_matrix(m);
    }
    check_near(sum, identity(2), 1e-12);
    CHECK(povm.outcomes()[0].label == "+X");
    CHECK(povm.outcomes()[1].label == "-X");

    // ||eps S|| = 1 exactly sits on the allowed boundary
    CHECK_NOTHROW(build_weak_povm(basis, 1.0));
    CHECK_THROWS_AS(build_weak_povm(basis, 2.0), StrengthTooLargeError);
}

TEST_CASE("outcome probabilities follow w(1 + eps <S>)") {
    const TomographyBasis basis = TomographyBasis::gell_mann(2);
    const WeakPOVM povm = build_weak_povm(basis, 0.1);

    const auto probs0 = outcome_probabilities(ket0_state(), povm);
    // +Z outcome: (1/6)(1 + 0.1 * 1)
    CHECK(probs0[4] == doctest::Approx(1.1 / 6.0).epsilon(1e-14));
    CHECK(probs0[4] == doctest::Approx(0.1833333333).epsilon(1e-9));
    // -Z outcome: (1/6)(1 - 0.1) = 0.15
    CHECK(probs0[5] == doctest::Approx(0.15).epsilon(1e-14));

    const auto flat = outcome_probabilities(DensityMatrix::maximally_mixed(2), povm);
    double total = 0.0;
    for (const double p : flat) {
        CHECK(p == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
        CHECK(p >= 0.0);
        total += p;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(outcome_probabilities(DensityMatrix::maximally_mixed(3), povm),
                    DimMismatchError);
}

TEST_CASE("expectation reconstruction inverts the probabilities") {
    const TomographyBasis basis = TomographyBasis::gell_mann(2);
    const WeakPOVM povm = build_weak_povm(basis, 0.1);

    SUBCASE("|0> gives <Z> = 1") {
        const auto expectations =
            reconstruct_expectations(outcome_probabilities(ket0_state(), povm), povm);
        REQUIRE(expectations.size() == 3);
        CHECK(std::abs(expectations[0].value - 0.0) <= 1e-12); // X
        CHECK(std::abs(expectations[1].value - 0.0) <= 1e-12); // Y
        CHECK(std::abs(expectations[2].value - 1.0) <= 1e-12); // Z
    }
    SUBCASE("flat probabilities give zero expectations") {
        const std::vector<double> weights(6, 1.0 / 6.0);
        for (const auto &e : reconstruct_expectations(weights, povm))
            CHECK(std::abs(e.value) <= 1e-14);
    }
    SUBCASE("|+> gives <X> = 1") {
        const auto expectations =
            reconstruct_expectations(outcome_probabilities(plus_state(), povm), povm);
        CHECK(std::abs(expectations[0].value - 1.0) <= 1e-12);
    }
}

TEST_CASE("density reconstruction") {
    const TomographyBasis basis = TomographyBasis::gell_mann(2);

    SUBCASE("Bloch vector (0, 0, 1) -> |0><0|") {
        const std::vector<ProbeExpectation> expectations{{"X", 0.0}, {"Y", 0.0}, {"Z", 1.0}};
        check_near(reconstruct_density(expectations, basis).matrix(), ket0_state().matrix(),
                   1e-12);
    }
    SUBCASE("all-zero expectations -> maximally mixed") {
        const std::vector<ProbeExpectation> expectations{{"X", 0.0}, {"Y", 0.0}, {"Z", 0.0}};
        check_near(reconstruct_density(expectations, basis).matrix(),
                   Matrix(0.5 * identity(2)), 1e-14);
    }
    SUBCASE("round trip through measured expectations, d = 3") {
        StateSampler sampler(21);
        const TomographyBasis qutrit = TomographyBasis::gell_mann(3);
        const WeakPOVM povm = build_weak_povm(qutrit, 0.2);
        for (int trial = 0; trial < 20; ++trial) {
            const DensityMatrix rho = sampler.random_density(3);
            const auto expectations =
                reconstruct_expectations(outcome_probabilities(rho, povm), povm);
            check_near(reconstruct_density(expectations, qutrit).matrix(), rho.matrix(),
                       1e-10);
        }
    }
    SUBCASE("coverage is checked") {
        const std::vector<ProbeExpectation> wrong{{"X", 0.0}, {"Y", 0.0}};
        CHECK_THROWS_AS(reconstruct_density(wrong, basis), ValidationError);
    }
    SUBCASE("linearly dependent bases are rejected") {
        std::vector<HermitianOperator> dependent;
        dependent.emplace_back(pauli_x());
        dependent.emplace_back(Matrix(2.0 * pauli_x()));
        CHECK_THROWS_AS(TomographyBasis(2, {"a", "b"}, std::move(dependent)),
                        SingularGramError);
    }
}

TEST_CASE("joint outcome probability (weak outcome and final projection)") {
    const TomographyBasis basis = TomographyBasis::gell_mann(2);
    const WeakPOVM povm = build_weak_povm(basis, 0.1);
    const DensityMatrix rho = plus_state();

    SUBCASE("final = identity marginalizes to p(m)") {
        const Projector full(identity(2));
        const auto probs = outcome_probabilities(rho, povm);
        for (std::size_t m = 0; m < povm.size(); ++m)
            CHECK(std::abs(joint_outcome_probability(rho, povm.effect(m), full) - probs[m]) <=
                  1e-14);
    }
    SUBCASE("half-identity effect on |+> with path projection gives 1/4") {
        const EffectOperator half(Matrix(0.5 * identity(2)));
        const Projector path1(matrix_from_rows({{1, 0}, {0, 0}}));
        CHECK(joint_outcome_probability(rho, half, path1) ==
              doctest::Approx(0.25).epsilon(1e-14));
    }
    SUBCASE("eigenstate of the final projector factorizes") {
        const DensityMatrix eigen = ket0_state();
        const Projector p0(matrix_from_rows({{1, 0}, {0, 0}}));
        const auto probs = outcome_probabilities(eigen, povm);
        for (std::size_t m = 0; m < povm.size(); ++m)
            CHECK(std::abs(joint_outcome_probability(eigen, povm.effect(m), p0) - probs[m]) <=
                  1e-14);
    }
    SUBCASE("summing over the POVM yields p(f|i); over a PVM yields p(m)") {
        const Projector path1(matrix_from_rows({{1, 0}, {0, 0}}));
        const Projector path2(matrix_from_rows({{0, 0}, {0, 1}}));
        double total_f = 0.0;
        for (std::size_t m = 0; m < povm.size(); ++m)
            total_f += joint_outcome_probability(rho, povm.effect(m), path1);
        CHECK(std::abs(total_f - 0.5) <= 1e-10);
        const auto probs = outcome_probabilities(rho, povm);
        for (std::size_t m = 0; m < povm.size(); ++m) {
            const double total_m = joint_outcome_probability(rho, povm.effect(m), path1) +
                                   joint_outcome_probability(rho, povm.effect(m), path2);
            CHECK(std::abs(total_m - probs[m]) <= 1e-10);
        }
    }
}

TEST_CASE("conditional state of the two-slit superposition") {
    const DensityMatrix rho = plus_state();
    const Projector path1(matrix_from_rows({{1, 0}, {0, 0}}));

    const ConditionalState r = conditional_state(rho, path1);
    CHECK(r.preparation_prob() == doctest::Approx(0.5).epsilon(1e-14));
    check_near(r.matrix(), matrix_from_rows({{1, 0.5}, {0.5, 0}}), 1e-14);
    CHECK(r.matrix().trace().real() == doctest::Approx(1.0).epsilon(1e-14));

    // the branch state is genuinely non-positive
    const EigenSystem eig = hermitian_eig(r.op());
    CHECK(std::abs(eig.values[0] - (1.0 - kSqrt2) / 2.0) <= 1e-12);
    CHECK(std::abs(eig.values[1] - (1.0 + kSqrt2) / 2.0) <= 1e-12);
    CHECK(eig.values[0] < 0.0);

    SUBCASE("post-selection on a certain outcome returns the state itself") {
        const ConditionalState same = conditional_state(ket0_state(), path1);
        check_near(same.matrix(), ket0_state().matrix(), 1e-14);
        CHECK(same.preparation_prob() == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("impossible outcomes are refused") {
        const Projector path2(matrix_from_rows({{0, 0}, {0, 1}}));
        CHECK_THROWS_AS(conditional_state(ket0_state(), path2), ZeroProbabilityOutcomeError);
    }
}

TEST_CASE("decompose splits a state over a which-path measurement") {
    const DensityMatrix rho = plus_state();
    const std::vector<Projector> pvm{Projector(matrix_from_rows({{1, 0}, {0, 0}})),
                                     Projector(matrix_from_rows({{0, 0}, {0, 1}}))};
    const auto terms = decompose(rho, pvm);
    REQUIRE(terms.size() == 2);
    CHECK(terms[0].outcome == 0);
    CHECK(terms[0].state.preparation_prob() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(terms[1].state.preparation_prob() == doctest::Approx(0.5).epsilon(1e-14));
    check_near(terms[0].state.matrix(), matrix_from_rows({{1, 0.5}, {0.5, 0}}), 1e-14);
    check_near(terms[1].state.matrix(), matrix_from_rows({{0, 0.5}, {0.5, 1}}), 1e-14);
}

TEST_CASE("decompose on a diagonal state returns the basis projectors") {
    const DensityMatrix rho(matrix_from_rows({{0.3, 0}, {0, 0.7}}));
    const std::vector<Projector> pvm{Projector(matrix_from_rows({{1, 0}, {0, 0}})),
                                     Projector(matrix_from_rows({{0, 0}, {0, 1}}))};
    const auto terms = decompose(rho, pvm);
    REQUIRE(terms.size() == 2);
    check_near(terms[0].state.matrix(), pvm[0].matrix(), 1e-14);
    check_near(terms[1].state.matrix(), pvm[1].matrix(), 1e-14);
}

TEST_CASE("decomposition identity holds for random states and measurements") {
    StateSampler sampler(22);
    for (const Eigen::Index d : {2, 3, 4, 5}) {
        for (int trial = 0; trial < 100; ++trial) {
            const DensityMatrix rho = sampler.random_density(d);
            const auto pvm = sampler.random_rank1_pvm(d);
            Matrix mixture = Matrix::Zero(d, d);
            for (const auto &term : decompose(rho, pvm))
                mixture += term.state.preparation_prob() * term.state.matrix();
            CHECK(max_abs(mixture - rho.matrix()) <= 1e-10);
        }
    }
}

TEST_CASE("decompose validates the PVM") {
    const DensityMatrix rho = plus_state();
    const std::vector<Projector> incomplete{Projector(matrix_from_rows({{1, 0}, {0, 0}}))};
    CHECK_THROWS_AS(decompose(rho, incomplete), IncompletePvmError);

    const Matrix p_plus = matrix_from_rows({{0.5, 0.5}, {0.5, 0.5}});
    const std::vector<Projector> wrong{Projector(matrix_from_rows({{1, 0}, {0, 0}})),
                                       Projector(p_plus)};
    CHECK_THROWS_AS(decompose(rho, wrong), IncompletePvmError);
}

TEST_CASE("conditional probabilities can leave [0, 1]") {
    const ConditionalState r = conditional_state(
        plus_state(), Projector(matrix_from_rows({{1, 0}, {0, 0}})));

    const EffectOperator plus_effect(matrix_from_rows({{0.5, 0.5}, {0.5, 0.5}}));
    const EffectOperator minus_effect(matrix_from_rows({{0.5, -0.5}, {-0.5, 0.5}}));
    CHECK(conditional_probability(r, plus_effect) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(conditional_probability(r, minus_effect) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(conditional_probability(r, EffectOperator(identity(2))) ==
          doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("joint probability symmetry, marginals and classical limit") {
    StateSampler sampler(23);

    SUBCASE("identity effect marginalizes to p(f|i)") {
        for (int trial = 0; trial < 10; ++trial) {
            const DensityMatrix rho = sampler.random_density(3);
            const auto pvm = sampler.random_rank1_pvm(3);
            for (const auto &f : pvm) {
                const double expected = (rho.matrix() * f.matrix()).trace().real();
                CHECK(std::abs(joint_probability(rho, f, EffectOperator(identity(3))) -
                               expected) <= 1e-12);
            }
        }
    }
    SUBCASE("commuting diagonal case reduces to the classical product") {
        const DensityMatrix rho(matrix_from_rows({{0.2, 0, 0}, {0, 0.3, 0}, {0, 0, 0.5}}));
        const Projector final(matrix_from_rows({{1, 0, 0}, {0, 0, 0}, {0, 0, 0}}));
        const EffectOperator effect(
            matrix_from_rows({{0.5, 0, 0}, {0, 0.6, 0}, {0, 0, 0.7}}));
        CHECK(joint_probability(rho, final, effect) ==
              doctest::Approx(0.2 * 0.5).epsilon(1e-14));
    }
    SUBCASE("swapping the two measurements changes nothing") {
        for (int trial = 0; trial < 50; ++trial) {
            const DensityMatrix rho = sampler.random_density(4);
            const auto pvm_a = sampler.random_rank1_pvm(4);
            const auto pvm_b = sampler.random_rank1_pvm(4);
            const double ab = joint_probability(rho, pvm_a[0], EffectOperator(pvm_b[0].op()));
            const double ba = joint_probability(rho, pvm_b[0], EffectOperator(pvm_a[0].op()));
            CHECK(std::abs(ab - ba) <= 1e-12);
        }
    }
    SUBCASE("marginals over complete sets") {
        for (int trial = 0; trial < 10; ++trial) {
            const DensityMatrix rho = sampler.random_density(4);
            const auto finals = sampler.random_rank1_pvm(4);
            const auto effects = sampler.random_rank1_pvm(4);
            for (const auto &f : finals) {
                double sum_g = 0.0;
                for (const auto &g : effects)
                    sum_g += joint_probability(rho, f, EffectOperator(g.op()));
                CHECK(std::abs(sum_g - (rho.matrix() * f.matrix()).trace().real()) <= 1e-10);
            }
            for (const auto &g : effects) {
                double sum_f = 0.0;
                for (const auto &f : finals)
                    sum_f += joint_probability(rho, f, EffectOperator(g.op()));
                CHECK(std::abs(sum_f - (rho.matrix() * g.matrix()).trace().real()) <= 1e-10);
            }
        }
    }
}

TEST_CASE("consistency chain p(f,g|i) = p(f|i) p(g|i,f)") {
    StateSampler sampler(24);
    for (int instance = 0; instance < 200; ++instance) {
        const Eigen::Index d = 2 + instance % 4;
        const DensityMatrix rho = sampler.random_density(d);
        const auto pvm = sampler.random_rank1_pvm(d);
        const EffectOperator effect = sampler.random_effect(d);
        for (const auto &term : decompose(rho, pvm)) {
            const double joint = joint_probability(rho, pvm[term.outcome], effect);
            const double chained = term.state.preparation_prob() *
                                   conditional_probability(term.state, effect);
            CHECK(std::abs(joint - chained) <= 1e-12);
        }
    }
}
