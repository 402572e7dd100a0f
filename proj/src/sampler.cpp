#include "weakstat/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "weakstat/rng.hpp"

namespace weakstat {

namespace {

std::vector<double> cumulative(const std::vector<double> &probs) {
    std::vector<double> cum(probs.size());
    double total = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
        total += std::max(probs[k], 0.0);
        cum[k] = total;
    }
    return cum;
}

std::size_t pick(const std::vector<double> &cum, double u) {
    const double target = u * cum.back();
    const auto it = std::upper_bound(cum.begin(), cum.end(), target);
    if (it == cum.end())
        return cum.size() - 1;
    return static_cast<std::size_t>(it - cum.begin());
}

// Run `shots` independent per-shot draws split into contiguous shard ranges.
// Stream index = shot index, so the merged result does not depend on the
// shard count.
template <typename PerShot>
void run_sharded(const SampleConfig &cfg, std::size_t cells,
                 std::vector<std::uint64_t> &counts, PerShot per_shot) {
    const unsigned shards = std::max(1u, cfg.shards);
    std::vector<std::vector<std::uint64_t>> partial(shards,
                                                    std::vector<std::uint64_t>(cells, 0));
    const std::uint64_t chunk = cfg.shots / shards;
    const std::uint64_t rest = cfg.shots % shards;
    std::vector<std::thread> workers;
    std::uint64_t begin = 0;
    for (unsigned s = 0; s < shards; ++s) {
        const std::uint64_t size = chunk + (s < rest ? 1 : 0);
        const std::uint64_t end = begin + size;
        auto task = [&, s, begin, end]() {
            auto &local = partial[s];
            for (std::uint64_t shot = begin; shot < end; ++shot) {
                CounterRng rng(cfg.seed, shot);
                local[per_shot(rng)] += 1;
            }
        };
        if (shards == 1)
            task();
        else
            workers.emplace_back(task);
        begin = end;
    }
    for (auto &w : workers)
        w.join();
    counts.assign(cells, 0);
    for (const auto &local : partial)
        for (std::size_t c = 0; c < cells; ++c)
            counts[c] += local[c];
}

void require_config(const SampleConfig &cfg) {
    if (cfg.shots == 0)
        throw ValidationError("SampleConfig: shots must be positive");
}

std::vector<std::string> povm_labels(const WeakPOVM &povm) {
    std::vector<std::string> labels;
    labels.reserve(povm.size());
    for (const auto &out : povm.outcomes())
        labels.push_back(out.label);
    return labels;
}

} // namespace

std::vector<std::string> CountTable::labels() const {
    if (final_labels.empty())
        return weak_labels;
    std::vector<std::string> all;
    all.reserve(weak_labels.size() * final_labels.size());
    for (const auto &m : weak_labels)
        for (const auto &f : final_labels)
            all.push_back(m + "|" + f);
    return all;
}

const Estimate *EstimateReport::find(const std::string &label) const {
    for (const auto &[key, est] : estimates)
        if (key == label)
            return &est;
    return nullptr;
}

CountTable sample_weak(const DensityMatrix &rho, const WeakPOVM &povm,
                       const SampleConfig &cfg) {
    require_config(cfg);
    const std::vector<double> probs = outcome_probabilities(rho, povm);
    const std::vector<double> cum = cumulative(probs);

    CountTable table;
    table.weak_labels = povm_labels(povm);
    table.shots = cfg.shots;
    run_sharded(cfg, probs.size(), table.counts,
                [&cum](CounterRng &rng) { return pick(cum, rng.next_unit()); });
    return table;
}

EstimateReport estimate_expectations(const CountTable &counts, const WeakPOVM &povm) {
    if (!counts.final_labels.empty())
        throw ValidationError("estimate_expectations: expected a weak-only count table");
    if (counts.counts.size() != povm.size())
        throw DimMismatchError("estimate_expectations: table/POVM size mismatch");
    const double shots = static_cast<double>(counts.shots);
    const double eps = povm.strength();

    std::size_t pairs = 0;
    for (const auto &out : povm.outcomes())
        pairs = std::max(pairs, out.pair_index + 1);

    struct PairData {
        double plus_hat = 0.0, minus_hat = 0.0;
        double plus_coef = 0.0, minus_coef = 0.0;
        double plus_w = 0.0, minus_w = 0.0;
        std::string label;
    };
    std::vector<PairData> data(pairs);
    for (std::size_t m = 0; m < povm.size(); ++m) {
        const WeakOutcome &out = povm.outcomes()[m];
        PairData &pd = data[out.pair_index];
        const double p_hat = static_cast<double>(counts.counts[m]) / shots;
        const std::string &l = out.label;
        pd.label = (l.size() > 1 && (l[0] == '+' || l[0] == '-')) ? l.substr(1) : l;
        if (out.sign >= 0) {
            pd.plus_hat = p_hat;
            pd.plus_w = out.weight;
            pd.plus_coef = 1.0 / (2.0 * out.weight * eps);
        } else {
            pd.minus_hat = p_hat;
            pd.minus_w = out.weight;
            pd.minus_coef = -1.0 / (2.0 * out.weight * eps);
        }
    }

    EstimateReport report;
    report.shots_used = counts.shots;
    for (const auto &pd : data) {
        Estimate est;
        est.mean = pd.plus_coef * (pd.plus_hat - pd.plus_w) +
                   pd.minus_coef * (pd.minus_hat - pd.minus_w);
        // multinomial variance of a_+ p_+ + a_- p_-
        const double var_p = pd.plus_hat * (1.0 - pd.plus_hat) / shots;
        const double var_m = pd.minus_hat * (1.0 - pd.minus_hat) / shots;
        const double cov = -pd.plus_hat * pd.minus_hat / shots;
        const double var = pd.plus_coef * pd.plus_coef * var_p +
                           pd.minus_coef * pd.minus_coef * var_m +
                           2.0 * pd.plus_coef * pd.minus_coef * cov;
        est.stderr = std::sqrt(std::max(var, 0.0));
        report.estimates.emplace_back(pd.label, est);
    }
    return report;
}

namespace {

struct SequentialModel {
    std::vector<double> weak_cum;            // marginal over m
    std::vector<std::vector<double>> f_cum;  // conditional over f given m
    RealMatrix joint;                        // exact p(m, f)
};

SequentialModel build_sequential_model(const DensityMatrix &rho, const WeakPOVM &povm,
                                       const std::vector<NamedProjector> &pvm) {
    std::vector<Projector> projectors;
    projectors.reserve(pvm.size());
    for (const auto &p : pvm)
        projectors.push_back(p.projector);
    require_complete_pvm(projectors, rho.dim());
    if (povm.dim() != rho.dim())
        throw DimMismatchError("sample_sequential: state/POVM dimension mismatch");

    SequentialModel model;
    const std::size_t n_m = povm.size();
    const std::size_t n_f = pvm.size();
    model.joint.resize(static_cast<Eigen::Index>(n_m), static_cast<Eigen::Index>(n_f));
    std::vector<double> weak_probs(n_m);
    model.f_cum.resize(n_m);
    for (std::size_t m = 0; m < n_m; ++m) {
        const Matrix kraus = sqrt_psd(HermitianOperator(povm.effect_matrix(m)));
        const Matrix disturbed = kraus * rho.matrix() * kraus; // kraus is Hermitian
        const double p_m = disturbed.trace().real();
        weak_probs[m] = p_m;
        std::vector<double> cond(n_f);
        for (std::size_t f = 0; f < n_f; ++f) {
            const double joint = (projectors[f].matrix() * disturbed).trace().real();
            model.joint(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(f)) = joint;
            cond[f] = (p_m > 0.0) ? joint / p_m : 0.0;
        }
        model.f_cum[m] = cumulative(cond);
    }
    model.weak_cum = cumulative(weak_probs);
    return model;
}

} // namespace

RealMatrix sequential_joint_probabilities(const DensityMatrix &rho, const WeakPOVM &povm,
                                          const std::vector<NamedProjector> &pvm) {
    return build_sequential_model(rho, povm, pvm).joint;
}

RealMatrix symmetrized_joint_probabilities(const DensityMatrix &rho, const WeakPOVM &povm,
                                           const std::vector<NamedProjector> &pvm) {
    RealMatrix table(static_cast<Eigen::Index>(povm.size()),
                     static_cast<Eigen::Index>(pvm.size()));
    for (std::size_t m = 0; m < povm.size(); ++m)
        for (std::size_t f = 0; f < pvm.size(); ++f)
            table(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(f)) =
                joint_outcome_probability(rho, povm.effect(m), pvm[f].projector);
    return table;
}

CountTable sample_sequential(const DensityMatrix &rho, const WeakPOVM &povm,
                             const std::vector<NamedProjector> &pvm,
                             const SampleConfig &cfg) {
    require_config(cfg);
    const SequentialModel model = build_sequential_model(rho, povm, pvm);
    const std::size_t n_f = pvm.size();

    CountTable table;
    table.weak_labels = povm_labels(povm);
    table.final_labels.reserve(n_f);
    for (const auto &p : pvm)
        table.final_labels.push_back(p.label);
    table.shots = cfg.shots;
    run_sharded(cfg, povm.size() * n_f, table.counts, [&](CounterRng &rng) {
        const std::size_t m = pick(model.weak_cum, rng.next_unit());
        const std::size_t f = pick(model.f_cum[m], rng.next_unit());
        return m * n_f + f;
    });
    return table;
}

ConditionalStateEstimate estimate_conditional_state(const CountTable &counts,
                                                    const WeakPOVM &povm,
                                                    const TomographyBasis &basis,
                                                    const std::string &outcome_f,
                                                    std::uint64_t min_pair_shots) {
    if (counts.final_labels.empty())
        throw ValidationError("estimate_conditional_state: expected a sequential count table");
    if (counts.weak_labels.size() != povm.size())
        throw DimMismatchError("estimate_conditional_state: table/POVM size mismatch");
    const auto it =
        std::find(counts.final_labels.begin(), counts.final_labels.end(), outcome_f);
    if (it == counts.final_labels.end())
        throw ValidationError("estimate_conditional_state: unknown outcome " + outcome_f);
    const std::size_t f = static_cast<std::size_t>(it - counts.final_labels.begin());

    // Post-selected sub-table.
    CountTable selected;
    selected.weak_labels = counts.weak_labels;
    selected.counts.resize(povm.size());
    std::uint64_t n_f = 0;
    for (std::size_t m = 0; m < povm.size(); ++m) {
        selected.counts[m] = counts.at(m, f);
        n_f += selected.counts[m];
    }
    selected.shots = n_f;
    if (n_f == 0)
        throw InsufficientPostSelectionError(
            "estimate_conditional_state: no shots post-selected on " + outcome_f);

    std::size_t pairs = 0;
    for (const auto &out : povm.outcomes())
        pairs = std::max(pairs, out.pair_index + 1);
    std::vector<std::uint64_t> per_pair(pairs, 0);
    for (std::size_t m = 0; m < povm.size(); ++m)
        per_pair[povm.outcomes()[m].pair_index] += selected.counts[m];
    for (std::size_t k = 0; k < pairs; ++k)
        if (per_pair[k] < min_pair_shots) {
            std::ostringstream os;
            os << "estimate_conditional_state: probe pair " << basis.labels()[k] << " has "
               << per_pair[k] << " post-selected shots, need " << min_pair_shots;
            throw InsufficientPostSelectionError(os.str());
        }

    EstimateReport expectations = estimate_expectations(selected, povm);
    std::vector<ProbeExpectation> values;
    values.reserve(expectations.estimates.size());
    for (const auto &[label, est] : expectations.estimates)
        values.push_back({label, est.mean});
    Matrix reconstructed = reconstruct_density(values, basis).matrix();
    reconstructed /= reconstructed.trace().real(); // exact unit trace

    // Propagate expectation errors into per-entry magnitude errors through
    // the Gram solve: rho = 1/d + sum_k c_k S_k with c = G^{-1} e.
    const auto n = static_cast<Eigen::Index>(basis.size());
    const RealMatrix gram_inv = basis.gram().ldlt().solve(RealMatrix::Identity(n, n));
    RealVector var_c = RealVector::Zero(n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
            const double se = expectations.estimates[static_cast<std::size_t>(b)].second.stderr;
            var_c[a] += gram_inv(a, b) * gram_inv(a, b) * se * se;
        }
    const Eigen::Index d = basis.dim();
    RealMatrix entry_stderr = RealMatrix::Zero(d, d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index k = 0; k < d; ++k) {
            double var = 0.0;
            for (Eigen::Index a = 0; a < n; ++a) {
                const Complex s = basis.traceless()[static_cast<std::size_t>(a)].matrix()(j, k);
                var += std::norm(s) * var_c[a];
            }
            entry_stderr(j, k) = std::sqrt(var);
        }

    const double prep = static_cast<double>(n_f) / static_cast<double>(counts.shots);
    return ConditionalStateEstimate{
        ConditionalState(HermitianOperator(reconstructed), prep),
        std::move(expectations), std::move(entry_stderr), n_f};
}

} // namespace weakstat
