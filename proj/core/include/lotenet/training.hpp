#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lotenet/autodiff.hpp"
#include "lotenet/data.hpp"
#include "lotenet/model.hpp"
#include "lotenet/tensor.hpp"

namespace lotenet {

template <typename T>
struct TrainConfigT {
    T learning_rate = T(5e-4);
    std::size_t batch_size = 512;
    std::size_t patience = 5;
    std::size_t max_epochs = 30;
    std::uint64_t seed = 0;
};

using TrainConfigF = TrainConfigT<float>;
using TrainConfigD = TrainConfigT<double>;

/// -log softmax(logits)[label], fused and evaluated in log-space so saturated
/// logits cannot overflow. Differentiable when the logits are on a tape.
template <typename T>
VarT<T> cross_entropy(const VarT<T>& logits, std::size_t label);

/// Same value without a tape, for validation passes.
template <typename T>
T cross_entropy_value(const TensorT<T>& logits, std::size_t label);

/// Probability assigned to class 1 of 2; the scalar score AUC ranks by.
template <typename T>
double positive_class_probability(const TensorT<T>& logits);

template <typename T>
struct AdamStateT {
    std::vector<TensorT<T>> first;
    std::vector<TensorT<T>> second;
    std::size_t step = 0;

    static AdamStateT zeros_like(std::span<const TensorT<T>> params);
};

using AdamStateF = AdamStateT<float>;
using AdamStateD = AdamStateT<double>;

/// One bias-corrected Adam update (beta1 0.9, beta2 0.999, eps 1e-8),
/// rebuilding params in place of the old values.
template <typename T>
void adam_step(std::vector<TensorT<T>>& params, const std::vector<TensorT<T>>& grads,
               AdamStateT<T>& state, T learning_rate);

/// One training epoch's learning-curve row. seconds is deterministic
/// work-seconds (multiply-accumulates / 1e9), not wall time, so logs are
/// byte-reproducible.
struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0;
    double train_auc = 0;
    double val_loss = 0;
    double val_auc = 0;
    double seconds = 0;
};

/// Test seams. val_auc_override substitutes the early-stopping signal;
/// on_epoch observes the model exactly as it stands after that epoch.
template <typename T>
struct FitHooksT {
    std::function<double(std::size_t epoch, double measured)> val_auc_override;
    std::function<void(const EpochRecord&, const LoTeNetModelT<T>&)> on_epoch;
};

template <typename T>
struct FitResultT {
    LoTeNetModelT<T> model;  // parameters from the best-validation epoch
    std::vector<EpochRecord> records;
    std::size_t best_epoch = 0;
    double best_val_auc = 0;
};

using FitHooksF = FitHooksT<float>;
using FitHooksD = FitHooksT<double>;
using FitResultF = FitResultT<float>;
using FitResultD = FitResultT<double>;

/// Mini-batch Adam with per-epoch derived shuffles and early stopping: the
/// run halts once `patience` consecutive epochs fail to strictly beat the
/// best validation AUC, and the returned model is the best epoch's snapshot.
template <typename T>
FitResultT<T> fit(const LoTeNetModelT<T>& model, const Dataset& train_set,
                  const Dataset& val_set, const TrainConfigT<T>& config,
                  const FitHooksT<T>& hooks = {});

struct GradCheckReport {
    double max_rel_error = 0;
    std::size_t worst_tensor = 0;   // canonical parameter-tensor index
    std::size_t worst_element = 0;  // flat index within that tensor
    std::size_t checked = 0;
    bool pass = false;
};

/// Central-difference audit (step 1e-5) of every parameter gradient of
/// cross_entropy(forward(sample)). inject_fault shifts one parameter after
/// the analytic pass, which must make the check fail; it exists so the
/// check can prove it is able to fail.
template <typename T>
GradCheckReport grad_check(const LoTeNetModelT<T>& model, const Sample& sample,
                           double tolerance, bool inject_fault = false);

}  // namespace lotenet
