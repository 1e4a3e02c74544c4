#include <gtest/gtest.h>

#include <map>

#include "nle/pipeline.hpp"
#include "nle/synth.hpp"

using nle::DomainShiftSpec;
using nle::GeneratedData;
using nle::Matrix;
using nle::Vector;

namespace {

/// Small variant of the default task so training-based checks stay fast.
DomainShiftSpec small_task(std::uint64_t seed) {
    DomainShiftSpec spec = nle::default_task(seed);
    spec.source_frames_per_class = 400;
    spec.target_adapt_frames_per_class = 100;
    spec.target_test_frames_per_class = 150;
    return spec;
}

nle::TrainConfig quick_source_cfg(std::uint64_t seed) {
    nle::TrainConfig cfg;
    cfg.learning_rate = 0.05;
    cfg.batch_size = 128;
    cfg.max_epochs = 40;
    cfg.convergence_tol = 1e-5;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST(GenerateTest, SameSeedGivesBitIdenticalDatasets) {
    const DomainShiftSpec spec = small_task(9);
    const GeneratedData a = nle::generate(spec);
    const GeneratedData b = nle::generate(spec);
    EXPECT_TRUE((a.source.features.array() == b.source.features.array()).all());
    EXPECT_TRUE((a.target_adapt.features.array() == b.target_adapt.features.array()).all());
    EXPECT_TRUE((a.target_test.features.array() == b.target_test.features.array()).all());
    EXPECT_EQ(a.source.labels, b.source.labels);

    const GeneratedData c = nle::generate(small_task(10));
    EXPECT_FALSE((a.source.features.array() == c.source.features.array()).all());
}

TEST(GenerateTest, LabelBalanceIsExact) {
    const DomainShiftSpec spec = small_task(3);
    const GeneratedData data = nle::generate(spec);
    std::map<int, int> counts;
    for (int y : data.source.labels) ++counts[y];
    for (int c = 0; c < spec.num_classes; ++c) {
        EXPECT_EQ(counts[c], spec.source_frames_per_class);
    }
    counts.clear();
    for (int y : data.target_adapt.labels) ++counts[y];
    for (int c = 0; c < spec.num_classes; ++c) {
        EXPECT_EQ(counts[c], spec.target_adapt_frames_per_class);
    }
}

TEST(GenerateTest, PairedFeaturesAlignWithTargetAdapt) {
    const DomainShiftSpec spec = small_task(4);
    const GeneratedData data = nle::generate(spec);
    ASSERT_EQ(data.paired_source_features.rows(), data.target_adapt.size());
    // Each adapt row is the shift image of its paired source-side row.
    for (Eigen::Index n = 0; n < 20; ++n) {
        const Vector shifted = spec.shift.apply(data.paired_source_features.row(n).transpose());
        EXPECT_LT((shifted - data.target_adapt.features.row(n).transpose()).cwiseAbs().maxCoeff(),
                  1e-12);
    }
}

TEST(GenerateTest, InverseShiftRecoversPerClassMeans) {
    const DomainShiftSpec spec = small_task(8);
    const GeneratedData data = nle::generate(spec);
    const int dim = spec.feature_dim;
    // Per-class empirical means of source vs un-shifted target test data;
    // each coordinate should agree within 3 standard errors of the
    // two-sample mean difference.
    for (int c = 0; c < spec.num_classes; ++c) {
        Vector source_mean = Vector::Zero(dim);
        int n_source = 0;
        for (Eigen::Index n = 0; n < data.source.size(); ++n) {
            if (data.source.labels[static_cast<std::size_t>(n)] == c) {
                source_mean += data.source.features.row(n).transpose();
                ++n_source;
            }
        }
        source_mean /= n_source;
        Vector target_mean = Vector::Zero(dim);
        int n_target = 0;
        for (Eigen::Index n = 0; n < data.target_test.size(); ++n) {
            if (data.target_test.labels[static_cast<std::size_t>(n)] == c) {
                target_mean += spec.shift.invert(data.target_test.features.row(n).transpose());
                ++n_target;
            }
        }
        target_mean /= n_target;
        const double se = spec.covariance_scale *
                          std::sqrt(1.0 / n_source + 1.0 / n_target);
        for (int d = 0; d < dim; ++d) {
            EXPECT_NEAR(source_mean[d], target_mean[d], 3.0 * se) << "class " << c << " dim " << d;
        }
    }
}

TEST(GenerateTest, InvalidSpecFieldsThrow) {
    DomainShiftSpec spec = small_task(1);
    spec.num_classes = 0;
    EXPECT_THROW(nle::generate(spec), nle::ConfigError);
    spec = small_task(1);
    spec.covariance_scale = -1.0;
    EXPECT_THROW(nle::generate(spec), nle::ConfigError);
    spec = small_task(1);
    spec.shift.translation = Vector::Zero(3);  // wrong length
    EXPECT_THROW(nle::generate(spec), nle::ConfigError);
}

TEST(GenerateTest, IdentityShiftGivesMatchedErrorRates) {
    // Null-shift sanity: train on source, evaluate on both domains; the gap
    // should be small in mean over seeds.
    double gap_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        DomainShiftSpec spec = small_task(seed);
        spec.shift = nle::ShiftSpec{};  // identity
        const GeneratedData data = nle::generate(spec);
        const auto fit = nle::train_source(data.source, spec.num_classes, nle::NetworkSpec{},
                                           quick_source_cfg(seed), seed * 7 + 1);
        const double source_err = nle::error_rate(fit.net, data.source_test);
        const double target_err = nle::error_rate(fit.net, data.target_test);
        gap_sum += std::abs(target_err - source_err);
    }
    EXPECT_LE(gap_sum / 10.0, 0.02);
}

TEST(GenerateTest, DefaultShiftDegradesUnadaptedModel) {
    double gap_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const DomainShiftSpec spec = small_task(seed);
        const GeneratedData data = nle::generate(spec);
        const auto fit = nle::train_source(data.source, spec.num_classes, nle::NetworkSpec{},
                                           quick_source_cfg(seed), seed * 7 + 1);
        gap_sum += nle::error_rate(fit.net, data.target_test) -
                   nle::error_rate(fit.net, data.source_test);
    }
    EXPECT_GE(gap_sum / 10.0, 0.05);
}

TEST(BayesErrorTest, IndistinguishableClassesLandAtHalf) {
    DomainShiftSpec spec;
    spec.num_classes = 2;
    spec.feature_dim = 3;
    spec.class_means = Matrix::Zero(2, 3);  // identical means
    const auto est = nle::estimate_bayes_error(spec, 100000);
    EXPECT_NEAR(est.error, 0.5, 0.01);
    EXPECT_GT(est.std_error, 0.0);
}

TEST(BayesErrorTest, WellSeparatedClassesAreTrivial) {
    DomainShiftSpec spec;
    spec.num_classes = 2;
    spec.feature_dim = 3;
    spec.class_means = Matrix::Zero(2, 3);
    spec.class_means(1, 0) = 100.0;  // 100 sigma apart
    const auto est = nle::estimate_bayes_error(spec, 100000);
    EXPECT_LE(est.error, 0.001);
}

TEST(BayesErrorTest, DefaultTaskConstantIsRecorded) {
    // The calibrated default layout; the pipeline's accuracy thresholds
    // assume roughly this amount of irreducible confusion.
    const auto est = nle::estimate_bayes_error(nle::default_task(1), 200000);
    EXPECT_NEAR(est.error, 0.029, 0.005);
}

TEST(BayesErrorTest, RejectsTooFewSamples) {
    EXPECT_THROW(nle::estimate_bayes_error(nle::default_task(1), 999), nle::ConfigError);
}
