#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "nle/dataset.hpp"
#include "nle/synth.hpp"

using nle::Dataset;
using nle::Matrix;

namespace {

Dataset small_dataset() {
    Dataset ds;
    ds.domain_tag = "unit";
    ds.features = Matrix(3, 2);
    ds.features << 0.1, -2.5, 1e-17, 3.25, -0.0078125, 123456.75;
    ds.labels = {0, 2, 1};
    return ds;
}

}  // namespace

TEST(DatasetTest, ValidateCatchesBadLabelsAndShapes) {
    Dataset ds = small_dataset();
    EXPECT_NO_THROW(ds.validate(3));
    EXPECT_THROW(ds.validate(2), nle::ShapeError);
    ds.labels.pop_back();
    EXPECT_THROW(ds.validate(3), nle::ShapeError);
}

TEST(DatasetCsvTest, RoundTripIsValueExact) {
    const Dataset ds = small_dataset();
    const std::string path = ::testing::TempDir() + "nle_dataset_roundtrip.csv";
    nle::save_dataset_csv(ds, path);
    const Dataset back = nle::load_dataset_csv(path, "unit");
    ASSERT_EQ(back.size(), ds.size());
    ASSERT_EQ(back.labels, ds.labels);
    EXPECT_TRUE((back.features.array() == ds.features.array()).all());
    std::remove(path.c_str());
}

TEST(DatasetCsvTest, RandomValuesSurviveRoundTrip) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> normal(0.0, 100.0);
    Dataset ds;
    ds.features = Matrix(50, 4);
    for (Eigen::Index n = 0; n < 50; ++n) {
        for (Eigen::Index d = 0; d < 4; ++d) ds.features(n, d) = normal(rng);
        ds.labels.push_back(static_cast<int>(n % 3));
    }
    const std::string path = ::testing::TempDir() + "nle_dataset_random.csv";
    nle::save_dataset_csv(ds, path);
    const Dataset back = nle::load_dataset_csv(path);
    EXPECT_TRUE((back.features.array() == ds.features.array()).all());
    std::remove(path.c_str());
}

TEST(DatasetCsvTest, HeaderAndRowErrors) {
    const std::string path = ::testing::TempDir() + "nle_dataset_bad.csv";
    {
        std::ofstream out(path);
        out << "f0,f1\n0.5,0.25\n";  // header missing the label column
    }
    EXPECT_THROW(nle::load_dataset_csv(path), nle::IoError);
    {
        std::ofstream out(path);
        out << "f0,f1,label\n0.5,0.25\n";  // ragged row
    }
    EXPECT_THROW(nle::load_dataset_csv(path), nle::IoError);
    {
        std::ofstream out(path);
        out << "f0,f1,label\n0.5,oops,1\n";
    }
    EXPECT_THROW(nle::load_dataset_csv(path), nle::IoError);
    std::remove(path.c_str());
    EXPECT_THROW(nle::load_dataset_csv("/nonexistent/data.csv"), nle::IoError);
}

TEST(DatasetCsvTest, SidecarCarriesGeneratingSpec) {
    const Dataset ds = small_dataset();
    const std::string path = ::testing::TempDir() + "nle_dataset_sidecar.csv";
    nle::save_dataset_csv(ds, path);
    const nle::DomainShiftSpec spec = nle::default_task(5);
    nle::save_sidecar(nle::domain_shift_spec_to_json(spec), path);
    std::ifstream in(path + ".spec.json");
    ASSERT_TRUE(in.good());
    nlohmann::json j;
    in >> j;
    const nle::DomainShiftSpec back = nle::domain_shift_spec_from_json(j);
    EXPECT_EQ(back.seed, spec.seed);
    EXPECT_EQ(back.num_classes, spec.num_classes);
    EXPECT_DOUBLE_EQ(back.shift.rotation_angle, spec.shift.rotation_angle);
    std::remove(path.c_str());
    std::remove((path + ".spec.json").c_str());
}
