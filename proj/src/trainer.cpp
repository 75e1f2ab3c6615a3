#include "stroke/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "stroke/clips.hpp"
#include "stroke/optim.hpp"

namespace stroke {

void TrainConfig::validate() const {
    if (epochs < 0) {
        throw ConfigError("train: epochs must be >= 0, got " + std::to_string(epochs));
    }
    if (lr <= 0) {
        throw ConfigError("train: lr must be positive");
    }
    if (!(plateau_factor > 0 && plateau_factor < 1)) {
        throw ConfigError("train: plateau_factor must be in (0,1)");
    }
    if (batch_size < 1) {
        throw ConfigError("train: batch_size must be >= 1");
    }
    if (momentum < 0 || weight_decay < 0 || min_lr <= 0 || jitter < 0) {
        throw ConfigError("train: negative hyperparameter");
    }
}

double PlateauScheduler::step(double val_loss) {
    if (val_loss < best_ - eps_) {
        best_ = val_loss;
        bad_epochs_ = 0;
    } else {
        ++bad_epochs_;
        if (bad_epochs_ >= patience_) {
            lr_ = std::max(lr_ * factor_, min_lr_);
            bad_epochs_ = 0;
        }
    }
    return lr_;
}

namespace {

// Copies a clip tensor into row `slot` of the batch.
void place_clip(Tensor& batch, std::int64_t slot, const Tensor& clip) {
    const std::int64_t n = clip.size();
    std::copy(clip.ptr(), clip.ptr() + n, batch.ptr() + slot * n);
}

struct BatchEval {
    double loss_sum = 0; // batch-summed cross-entropy
    std::int64_t correct = 0;
};

BatchEval eval_logits(const Tensor& logits, const std::vector<int>& targets) {
    BatchEval out;
    const std::int64_t B = logits.shape[0], N = logits.shape[1];
    for (std::int64_t b = 0; b < B; ++b) {
        const float* row = logits.ptr() + b * N;
        std::int64_t arg = 0;
        float best = row[0];
        float m = row[0];
        for (std::int64_t i = 1; i < N; ++i) {
            if (row[i] > best) {
                best = row[i];
                arg = i;
            }
            m = std::max(m, row[i]);
        }
        double sum = 0;
        for (std::int64_t i = 0; i < N; ++i) {
            sum += std::exp(static_cast<double>(row[i] - m));
        }
        out.loss_sum += static_cast<double>(m) + std::log(sum) -
                        static_cast<double>(row[targets[static_cast<std::size_t>(b)]]);
        if (arg == targets[static_cast<std::size_t>(b)]) {
            ++out.correct;
        }
    }
    return out;
}

} // namespace

std::pair<double, double> evaluate_split(const Model& model, const VideoStore& store, const SplitData& split,
                                          std::int64_t batch_size) {
    if (split.items.empty()) {
        throw ConfigError("evaluate: empty split");
    }
    const std::int64_t L = model.spec.input_shape[1];
    const std::int64_t n = static_cast<std::int64_t>(split.items.size());
    double loss_sum = 0;
    std::int64_t correct = 0;
    for (std::int64_t at = 0; at < n; at += batch_size) {
        const std::int64_t bs = std::min(batch_size, n - at);
        Tensor batch({bs, model.spec.input_shape[0], L, model.spec.input_shape[2], model.spec.input_shape[3]});
        std::vector<int> targets;
        for (std::int64_t i = 0; i < bs; ++i) {
            const LabeledInterval& item = split.items[static_cast<std::size_t>(at + i)];
            const Clip clip = extract_clip(store.get(item.video_id), item.begin, item.end, L, 0);
            place_clip(batch, i, clip.tensor);
            targets.push_back(item.label);
        }
        const Tensor logits = model.forward(batch);
        const BatchEval ev = eval_logits(logits, targets);
        loss_sum += ev.loss_sum;
        correct += ev.correct;
    }
    return {loss_sum / static_cast<double>(n), static_cast<double>(correct) / static_cast<double>(n)};
}

TrainResult train(Model model, const VideoStore& store, const SplitData& train_split,
                  const SplitData& val_split, const TrainConfig& cfg) {
    cfg.validate();
    if (train_split.items.empty() || val_split.items.empty()) {
        throw ConfigError("train: empty train or validation split");
    }

    TrainResult result;
    result.best = model;
    if (cfg.epochs == 0) {
        return result;
    }

    const std::int64_t L = model.spec.input_shape[1];
    const std::int64_t C = model.spec.input_shape[0];
    const std::int64_t H = model.spec.input_shape[2];
    const std::int64_t W = model.spec.input_shape[3];
    const std::int64_t n = static_cast<std::int64_t>(train_split.items.size());

    Rng rng(cfg.seed);
    PlateauScheduler scheduler(cfg.lr, cfg.plateau_patience, cfg.plateau_factor, cfg.min_lr,
                               cfg.improvement_eps);
    const auto param_ptrs = model.param_ptrs();
    Tape tape;
    double best_val = 1e300;

    std::vector<std::int64_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    for (std::int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng epoch_rng = rng.fork(static_cast<std::uint64_t>(epoch));
        epoch_rng.shuffle(order.begin(), order.end());

        const double lr = scheduler.lr();
        double loss_sum = 0;
        std::int64_t correct = 0;

        for (std::int64_t at = 0; at < n; at += cfg.batch_size) {
            const std::int64_t bs = std::min(cfg.batch_size, n - at);
            Tensor batch({bs, C, L, H, W});
            std::vector<int> targets;
            for (std::int64_t i = 0; i < bs; ++i) {
                const LabeledInterval& item = train_split.items[static_cast<std::size_t>(order[static_cast<std::size_t>(at + i)])];
                const std::int64_t jitter =
                    cfg.jitter > 0 ? epoch_rng.uniform_int(2 * cfg.jitter + 1) - cfg.jitter : 0;
                Clip clip = extract_clip(store.get(item.video_id), item.begin, item.end, L, jitter);
                if (cfg.augment) {
                    clip = augment_clip(clip, epoch_rng.next_u64());
                }
                place_clip(batch, i, clip.tensor);
                targets.push_back(item.label);
            }

            NodeT<float>* logits = model.forward(tape, batch);
            const BatchEval ev = eval_logits(logits->value, targets);
            loss_sum += ev.loss_sum;
            correct += ev.correct;
            NodeT<float>* loss = cross_entropy(tape, logits, targets);
            if (!std::isfinite(static_cast<double>(loss->value[0]))) {
                throw NumericError("train: loss diverged at epoch " + std::to_string(epoch));
            }
            model.zero_grads();
            tape.backward(loss);
            sgd_nesterov_step(param_ptrs, lr, cfg.momentum, cfg.weight_decay);
        }

        const auto [val_loss, val_acc] = evaluate_split(model, store, val_split, cfg.batch_size);
        if (!std::isfinite(val_loss)) {
            throw NumericError("train: validation loss diverged at epoch " + std::to_string(epoch));
        }
        scheduler.step(val_loss);

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = loss_sum / static_cast<double>(n);
        stats.train_acc = static_cast<double>(correct) / static_cast<double>(n);
        stats.val_loss = val_loss;
        stats.val_acc = val_acc;
        stats.lr = lr;
        result.stats.push_back(stats);

        if (val_loss < best_val) {
            best_val = val_loss;
            result.best = model;
            result.best_val_loss = val_loss;
            result.best_epoch = epoch;
        }
    }
    return result;
}

void write_stats_csv(const std::filesystem::path& path, const std::vector<EpochStats>& stats) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw IoError("stats: cannot write " + path.string());
    }
    os << "epoch,train_loss,train_acc,val_loss,val_acc,lr\n";
    char buf[160];
    for (const EpochStats& s : stats) {
        std::snprintf(buf, sizeof(buf), "%lld,%.9g,%.9g,%.9g,%.9g,%.9g\n", static_cast<long long>(s.epoch),
                      s.train_loss, s.train_acc, s.val_loss, s.val_acc, s.lr);
        os << buf;
    }
}

} // namespace stroke
