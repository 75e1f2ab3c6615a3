#pragma once

#include <filesystem>

#include "stroke/dataset.hpp"
#include "stroke/network.hpp"

namespace stroke {

struct TrainConfig {
    std::int64_t epochs = 2000;
    double lr = 1e-4;
    double momentum = 0.5;
    double weight_decay = 0.005;
    std::int64_t batch_size = 8;
    std::int64_t plateau_patience = 50;
    double plateau_factor = 0.5;
    double min_lr = 1e-6;
    double improvement_eps = 1e-6; // absolute threshold for "improved"
    std::int64_t jitter = 8;       // temporal jitter amplitude for extraction
    bool augment = true;
    std::uint64_t seed = 0;

    bool operator==(const TrainConfig&) const = default;

    void validate() const;
};

struct EpochStats {
    std::int64_t epoch = 0;
    double train_loss = 0;
    double train_acc = 0;
    double val_loss = 0;
    double val_acc = 0;
    double lr = 0;
};

struct TrainResult {
    Model best;
    std::vector<EpochStats> stats;
    double best_val_loss = 0;
    std::int64_t best_epoch = -1;
};

// Reduce-on-plateau: when the validation loss has not improved on the best
// seen by more than `eps` for `patience` consecutive epochs, multiply the
// rate by `factor` (floored at min_lr) and restart the count.
class PlateauScheduler {
public:
    PlateauScheduler(double lr, std::int64_t patience, double factor, double min_lr, double eps)
        : lr_(lr), patience_(patience), factor_(factor), min_lr_(min_lr), eps_(eps) {}

    double step(double val_loss);
    double lr() const { return lr_; }

private:
    double lr_;
    std::int64_t patience_;
    double factor_;
    double min_lr_;
    double eps_;
    double best_ = 1e300;
    std::int64_t bad_epochs_ = 0;
};

// Full training loop: per epoch a seeded shuffle, jittered extraction,
// augmentation, batch-summed cross-entropy, Nesterov steps; then a
// validation pass. A snapshot is kept whenever the validation loss improves
// and that snapshot is returned. Deterministic given the seed.
TrainResult train(Model model, const VideoStore& store, const SplitData& train_split,
                  const SplitData& val_split, const TrainConfig& cfg);

// Mean per-sample loss and accuracy, centred clips, no augmentation, no
// parameter mutation.
std::pair<double, double> evaluate_split(const Model& model, const VideoStore& store, const SplitData& split,
                                          std::int64_t batch_size);

// CSV: epoch,train_loss,train_acc,val_loss,val_acc,lr
void write_stats_csv(const std::filesystem::path& path, const std::vector<EpochStats>& stats);

} // namespace stroke
