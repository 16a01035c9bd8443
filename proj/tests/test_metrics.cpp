#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "tsadapt/errors.hpp"
#include "tsadapt/metrics.hpp"

using namespace tsadapt;

namespace {

struct RandomInstance {
    std::vector<double> scores;
    std::vector<int> preds;
    std::vector<int> labels;
};

RandomInstance random_instance(std::mt19937_64& rng, std::size_t max_n, bool tie_heavy) {
    std::uniform_int_distribution<std::size_t> size(2, max_n);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    std::bernoulli_distribution label(0.25), pred(0.3);
    RandomInstance inst;
    const std::size_t n = size(rng);
    inst.scores.resize(n);
    inst.preds.resize(n);
    inst.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = value(rng);
        inst.scores[i] = tie_heavy ? std::round(v * 8.0) / 8.0 : v;
        inst.preds[i] = pred(rng) ? 1 : 0;
        inst.labels[i] = label(rng) ? 1 : 0;
    }
    return inst;
}

} // namespace

TEST_SUITE("metrics") {

TEST_CASE("confusion counts") {
    CHECK(confusion({0, 1}, {0, 1}) == ConfusionCounts{1, 0, 0, 1});
    CHECK(confusion({1, 1}, {0, 0}) == ConfusionCounts{0, 2, 0, 0});
    CHECK(confusion({0, 1, 0, 1}, {0, 0, 1, 1}) == ConfusionCounts{1, 1, 1, 1});
    CHECK_THROWS_AS(confusion({0}, {0, 1}), InvalidInput);
    CHECK_THROWS_AS(confusion({2}, {0}), InvalidInput);
}

TEST_CASE("prf1") {
    SUBCASE("hand arithmetic: tp=3, fp=0, fn=1") {
        const PrfStats s = prf1(ConfusionCounts{10, 0, 1, 3});
        CHECK(s.precision == 1.0);
        CHECK(s.recall == 0.75);
        CHECK(s.f1 == doctest::Approx(6.0 / 7.0));
    }

    SUBCASE("degenerate counts define to zero") {
        const PrfStats s = prf1(ConfusionCounts{5, 0, 0, 0});
        CHECK(s.precision == 0.0);
        CHECK(s.recall == 0.0);
        CHECK(s.f1 == 0.0);
        CHECK(s.accuracy == 1.0);
    }

    SUBCASE("tp = fp = fn makes precision = recall = f1") {
        const PrfStats s = prf1(ConfusionCounts{2, 4, 4, 4});
        CHECK(s.precision == 0.5);
        CHECK(s.recall == 0.5);
        CHECK(s.f1 == doctest::Approx(0.5));
    }
}

TEST_CASE("point_adjust") {
    SUBCASE("two segments, one hit") {
        const std::vector<int> labels = {0, 1, 1, 1, 0, 1};
        const std::vector<int> preds = {0, 0, 1, 0, 0, 0};
        CHECK(point_adjust(preds, labels) == std::vector<int>{0, 1, 1, 1, 0, 0});
    }

    SUBCASE("no trigger, no change") {
        const std::vector<int> labels = {0, 1, 1, 0};
        const std::vector<int> preds = {0, 0, 0, 0};
        CHECK(point_adjust(preds, labels) == preds);
    }

    SUBCASE("matches the brute-force segment enumeration on 200 instances") {
        std::mt19937_64 rng(12);
        for (int rep = 0; rep < 200; ++rep) {
            const RandomInstance inst = random_instance(rng, 120, false);
            CHECK(point_adjust(inst.preds, inst.labels) ==
                  testutil::brute_force_point_adjust(inst.preds, inst.labels));
        }
    }

    SUBCASE("idempotent and inert at label==0 positions") {
        std::mt19937_64 rng(13);
        for (int rep = 0; rep < 50; ++rep) {
            const RandomInstance inst = random_instance(rng, 80, false);
            const auto once = point_adjust(inst.preds, inst.labels);
            CHECK(point_adjust(once, inst.labels) == once);
            for (std::size_t i = 0; i < inst.labels.size(); ++i) {
                if (inst.labels[i] == 0) CHECK(once[i] == inst.preds[i]);
            }
        }
    }
}

TEST_CASE("auroc") {
    SUBCASE("pairwise example: 3 of 4 pairs ranked correctly") {
        CHECK(auroc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) == doctest::Approx(0.75));
    }

    SUBCASE("perfect separation") {
        CHECK(auroc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == 1.0);
    }

    SUBCASE("all ties") {
        CHECK(auroc({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}) == 0.5);
    }

    SUBCASE("single-class labels are rejected") {
        CHECK_THROWS_AS(auroc({0.1, 0.2}, {1, 1}), InvalidInput);
    }

    SUBCASE("matches exact pairwise counting on random instances") {
        std::mt19937_64 rng(14);
        for (int rep = 0; rep < 200; ++rep) {
            const RandomInstance inst = random_instance(rng, 200, rep % 2 == 0);
            bool has_pos = false, has_neg = false;
            for (int y : inst.labels) (y == 1 ? has_pos : has_neg) = true;
            if (!has_pos || !has_neg) continue;
            const double got = auroc(inst.scores, inst.labels);
            const double expected = testutil::pairwise_auroc(inst.scores, inst.labels);
            CHECK(std::abs(got - expected) < 1e-9);
        }
    }

    SUBCASE("invariant under strictly increasing transforms") {
        std::mt19937_64 rng(15);
        for (int rep = 0; rep < 20; ++rep) {
            const RandomInstance inst = random_instance(rng, 100, true);
            bool has_pos = false, has_neg = false;
            for (int y : inst.labels) (y == 1 ? has_pos : has_neg) = true;
            if (!has_pos || !has_neg) continue;
            const double base = auroc(inst.scores, inst.labels);

            std::vector<double> exp_scores = inst.scores;
            for (double& s : exp_scores) s = std::exp(s);
            CHECK(auroc(exp_scores, inst.labels) == doctest::Approx(base).epsilon(1e-12));

            std::vector<double> affine = inst.scores;
            for (double& s : affine) s = 3.0 * s + 11.0;
            CHECK(auroc(affine, inst.labels) == doctest::Approx(base).epsilon(1e-12));
        }
    }
}

TEST_CASE("auprc") {
    SUBCASE("perfect ranking is 1.0") {
        CHECK(auprc({0.9, 0.8, 0.1, 0.2}, {1, 1, 0, 0}) == 1.0);
    }

    SUBCASE("all-positive labels give 1.0") {
        CHECK(auprc({0.3, 0.9, 0.1}, {1, 1, 1}) == 1.0);
    }

    SUBCASE("hand enumeration: 1*(1/2) + (2/3)*(1/2)") {
        CHECK(auprc({0.9, 0.8, 0.7}, {1, 0, 1}) == doctest::Approx(5.0 / 6.0));
    }

    SUBCASE("no positives is an error") {
        CHECK_THROWS_AS(auprc({0.1, 0.2}, {0, 0}), InvalidInput);
    }

    SUBCASE("bounded by the worst and best orderings") {
        // The sharp lower bound puts every negative above every positive:
        // AP_min = (1/P) * sum_i i / (N_neg + i). The positive rate is NOT a
        // lower bound for step-wise AP (ranking all negatives first with
        // P >= 2 dips below it), so the bound is checked in this form.
        std::mt19937_64 rng(16);
        for (int rep = 0; rep < 100; ++rep) {
            const RandomInstance inst = random_instance(rng, 150, rep % 2 == 0);
            std::size_t pos = 0;
            for (int y : inst.labels) pos += (y == 1);
            if (pos == 0) continue;
            const std::size_t neg = inst.labels.size() - pos;
            double worst = 0.0;
            for (std::size_t i = 1; i <= pos; ++i) {
                worst += static_cast<double>(i) / static_cast<double>(neg + i);
            }
            worst /= static_cast<double>(pos);
            const double ap = auprc(inst.scores, inst.labels);
            CHECK(ap >= worst - 1e-12);
            CHECK(ap <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("kld_shift") {
    SUBCASE("identical datasets diverge by exactly zero") {
        std::mt19937_64 rng(18);
        auto ds = testutil::dataset_from({});
        ds.values = Matrix(100, 2);
        for (double& v : ds.values.data) v = std::uniform_real_distribution<>(-1, 1)(rng);
        ds.feature_names = {"a", "b"};
        const KldReport r = kld_shift(ds, ds, 20);
        CHECK(r.per_feature == std::vector<double>{0.0, 0.0});
        CHECK(r.total == 0.0);
    }

    SUBCASE("non-negative on random inputs") {
        std::mt19937_64 rng(19);
        for (int rep = 0; rep < 30; ++rep) {
            auto a = testutil::dataset_from({});
            auto b = testutil::dataset_from({});
            a.values = Matrix(60, 1);
            b.values = Matrix(80, 1);
            for (double& v : a.values.data) v = std::normal_distribution<>(0, 1)(rng);
            for (double& v : b.values.data) v = std::normal_distribution<>(0.5, 1.5)(rng);
            a.feature_names = b.feature_names = {"x"};
            CHECK(kld_shift(a, b, 10).total >= 0.0);
        }
    }

    SUBCASE("two separated uniform blobs match a direct-summation oracle") {
        auto train = testutil::dataset_from({});
        auto test = testutil::dataset_from({});
        train.values = Matrix(50, 1);
        test.values = Matrix(40, 1);
        train.feature_names = test.feature_names = {"x"};
        for (std::size_t i = 0; i < 50; ++i) {
            train.values(i, 0) = static_cast<double>(i) / 50.0; // [0,1)
        }
        for (std::size_t i = 0; i < 40; ++i) {
            test.values(i, 0) = 2.0 + static_cast<double>(i) / 40.0; // [2,3)
        }
        const std::size_t bins = 10;
        const KldReport r = kld_shift(train, test, bins);

        // oracle: histogram both by hand over the pooled range [0, 2.975]
        const double lo = 0.0, hi = 2.975;
        auto hist = [&](const TimeSeriesDataset& ds) {
            std::vector<double> counts(bins, 0.0);
            for (std::size_t i = 0; i < ds.timesteps(); ++i) {
                auto b = static_cast<std::size_t>((ds.values(i, 0) - lo) / (hi - lo) *
                                                  static_cast<double>(bins));
                counts[std::min(b, bins - 1)] += 1.0;
            }
            const double n = static_cast<double>(ds.timesteps());
            const double eps = 1.0 / (10.0 * n);
            for (double& c : counts) {
                c = (c / n + eps) / (1.0 + static_cast<double>(bins) * eps);
            }
            return counts;
        };
        const auto p = hist(test);
        const auto q = hist(train);
        double expected = 0.0;
        for (std::size_t b = 0; b < bins; ++b) expected += p[b] * std::log(p[b] / q[b]);
        CHECK(std::abs(r.total - expected) < 1e-9);
        CHECK(r.total > 0.0);
    }

    SUBCASE("argument validation") {
        auto a = testutil::dataset_from({{1.0}});
        auto b = testutil::dataset_from({{1.0, 2.0}});
        CHECK_THROWS_AS(kld_shift(a, b, 10), InvalidInput);
        CHECK_THROWS_AS(kld_shift(a, a, 1), InvalidInput);
    }
}

TEST_CASE("point adjustment only converts FN to TP") {
    std::mt19937_64 rng(20);
    for (int rep = 0; rep < 200; ++rep) {
        const RandomInstance inst = random_instance(rng, 120, false);
        const ConfusionCounts base = confusion(inst.preds, inst.labels);
        const ConfusionCounts adjusted =
            confusion(point_adjust(inst.preds, inst.labels), inst.labels);
        CHECK(adjusted.fp == base.fp);
        CHECK(adjusted.tn == base.tn);
        CHECK(adjusted.tp >= base.tp);
        CHECK(prf1(adjusted).f1 >= prf1(base).f1);
    }
}

TEST_CASE("evaluate assembles the full report") {
    const std::vector<double> scores = {0.1, 0.2, 0.9, 0.8};
    const std::vector<int> labels = {0, 0, 1, 1};
    std::vector<int> preds = {0, 0, 1, 0};
    const EvalReport r = evaluate(scores, preds, labels, 0.85, ThresholdSpec::parse("q99"));
    CHECK(r.counts.tp == 1);
    CHECK(r.counts.fn == 1);
    CHECK(r.f1_pa >= r.f1);
    CHECK(r.counts_pa.tp == 2); // the hit segment expands
    REQUIRE(r.auroc.has_value());
    CHECK(*r.auroc == 1.0);
    REQUIRE(r.auprc.has_value());
    CHECK(*r.auprc == 1.0);

    SUBCASE("single-class labels null the ranking metrics") {
        const EvalReport flat = evaluate(scores, {0, 0, 0, 0}, {0, 0, 0, 0}, 0.85,
                                         ThresholdSpec::parse("q99"));
        CHECK_FALSE(flat.auroc.has_value());
        CHECK_FALSE(flat.auprc.has_value());
        CHECK(flat.accuracy == 1.0);
    }
}

} // TEST_SUITE
