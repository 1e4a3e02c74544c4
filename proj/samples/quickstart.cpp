// End-to-end mini run: generate a shifted task, train a source model,
// distill it into an SKL codebook, adapt with soft targets, and compare the
// resulting target-domain error against one-hot retraining.

#include <iostream>

#include "nle/pipeline.hpp"

int main() {
    nle::DomainShiftSpec task = nle::default_task(/*seed=*/7);
    task.source_frames_per_class = 500;
    task.target_adapt_frames_per_class = 100;
    task.target_test_frames_per_class = 200;
    const nle::GeneratedData data = nle::generate(task);

    nle::NetworkSpec arch;
    nle::TrainConfig source_cfg;
    source_cfg.batch_size = 128;
    source_cfg.max_epochs = 40;
    source_cfg.seed = 1;
    const nle::TrainResult source =
        nle::train_source(data.source, task.num_classes, arch, source_cfg, 2);

    std::cout << "source error on source_test:  "
              << nle::error_rate(source.net, data.source_test) << "\n";
    std::cout << "source error on target_test:  "
              << nle::error_rate(source.net, data.target_test) << "\n";

    nle::TrainConfig adapt_cfg;
    adapt_cfg.learning_rate = 0.02;
    adapt_cfg.batch_size = 32;
    adapt_cfg.max_epochs = 100;
    adapt_cfg.seed = 3;

    const nle::TrainResult one_hot =
        nle::retrain_one_hot(source.net, data.target_adapt, task.num_classes, adapt_cfg);
    std::cout << "one-hot retrain target error: "
              << nle::error_rate(one_hot.net, data.target_test) << "\n";

    const nle::Codebook cb =
        nle::distill(source.net, data.source, nle::CodebookMethod::skl, nle::CentroidTrainConfig{});
    const nle::AdaptResult adapted =
        nle::adapt_nle(source.net, data.target_adapt, cb, adapt_cfg);
    std::cout << "skl-adapted target error:     "
              << nle::error_rate(adapted.train.net, data.target_test) << "\n";
    return 0;
}
