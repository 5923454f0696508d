#pragma once

#include <optional>
#include <vector>

namespace hcrbm {

struct EpochRecord {
    int epoch = 0;            // 1-based
    double recon_error = 0.0; // mean over examples of squared reconstruction norm
    double penalty = 0.0;     // orthogonality penalty value (0 for flat models)
    double train_error = 0.0; // training error rate after the epoch
};

struct RunMetrics {
    std::vector<EpochRecord> epochs;
    std::optional<double> test_error;
    double seconds = 0.0;
};

}  // namespace hcrbm
