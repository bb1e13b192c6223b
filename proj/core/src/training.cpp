#include "lotenet/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lotenet/errors.hpp"
#include "lotenet/mac_counter.hpp"
#include "lotenet/metrics.hpp"
#include "lotenet/rng.hpp"

namespace lotenet {
namespace {

template <typename T>
TensorT<T> to_precision(const TensorF& image) {
    if constexpr (std::is_same_v<T, float>)
        return image;
    else
        return image.template cast<T>();
}

// (peak - f_label) + log1p(rest) rather than log of the full sum: the
// maximal term contributes exactly 1, and keeping it out of the sum
// preserves relative precision when the softmax saturates.
template <typename T>
T stable_nll(std::span<const T> logits, std::size_t label) {
    const auto peak_it = std::max_element(logits.begin(), logits.end());
    const T peak = *peak_it;
    const std::size_t peak_at = std::size_t(peak_it - logits.begin());
    T rest = T(0);
    for (std::size_t i = 0; i < logits.size(); ++i)
        if (i != peak_at) rest += std::exp(logits[i] - peak);
    return (peak - logits[label]) + std::log1p(rest);
}

template <typename T>
void check_logits(const TensorT<T>& logits, std::size_t label) {
    if (logits.rank() != 1)
        throw ShapeError("cross_entropy: logits must be rank 1, got " + logits.shape().str());
    if (label >= logits.shape().extent(0))
        throw UsageError("cross_entropy: label " + std::to_string(label) + " out of range for " +
                         std::to_string(logits.shape().extent(0)) + " classes");
}

}  // namespace

template <typename T>
VarT<T> cross_entropy(const VarT<T>& logits, std::size_t label) {
    check_logits(logits.value, label);
    const T loss = stable_nll(logits.value.data(), label);
    TensorT<T> out = TensorT<T>::scalar(loss);
    if (!logits.on_tape()) return VarT<T>::constant(std::move(out));

    // Softmax recovered from the fused evaluation; the node's gradient is
    // upstream * (softmax - onehot(label)).
    const T lse = loss + logits.value[label];
    TensorT<T> probs = TensorT<T>::generate(logits.shape(), [&](std::size_t i) {
        return std::exp(logits.value[i] - lse);
    });
    return logits.tape->record(
        std::move(out), {logits.id}, [probs, label](const TensorT<T>& upstream) {
            const T u = upstream[0];
            std::vector<TensorT<T>> grads;
            grads.push_back(TensorT<T>::generate(probs.shape(), [&](std::size_t i) {
                return u * (probs[i] - (i == label ? T(1) : T(0)));
            }));
            return grads;
        });
}

template <typename T>
T cross_entropy_value(const TensorT<T>& logits, std::size_t label) {
    check_logits(logits, label);
    return stable_nll(logits.data(), label);
}

template <typename T>
double positive_class_probability(const TensorT<T>& logits) {
    if (logits.rank() != 1 || logits.shape().extent(0) != 2)
        throw UsageError("positive_class_probability: need exactly 2 logits, got " +
                         logits.shape().str());
    const double margin = double(logits[1]) - double(logits[0]);
    if (margin >= 0) return 1.0 / (1.0 + std::exp(-margin));
    const double e = std::exp(margin);
    return e / (1.0 + e);
}

template <typename T>
AdamStateT<T> AdamStateT<T>::zeros_like(std::span<const TensorT<T>> params) {
    AdamStateT<T> state;
    for (const auto& p : params) {
        state.first.push_back(TensorT<T>(p.shape()));
        state.second.push_back(TensorT<T>(p.shape()));
    }
    return state;
}

template <typename T>
void adam_step(std::vector<TensorT<T>>& params, const std::vector<TensorT<T>>& grads,
               AdamStateT<T>& state, T learning_rate) {
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    if (params.size() != grads.size() || params.size() != state.first.size())
        throw UsageError("adam_step: params, grads and state must have equal length");
    state.step += 1;
    const double fix1 = 1.0 - std::pow(kBeta1, double(state.step));
    const double fix2 = 1.0 - std::pow(kBeta2, double(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!(grads[i].shape() == params[i].shape()))
            throw UsageError("adam_step: gradient " + std::to_string(i) + " shape " +
                             grads[i].shape().str() + " does not match parameter " +
                             params[i].shape().str());
        const TensorT<T>&p = params[i], &g = grads[i], &m = state.first[i],
                        &v = state.second[i];
        TensorT<T> m_next = TensorT<T>::generate(p.shape(), [&](std::size_t j) {
            return T(kBeta1) * m[j] + T(1 - kBeta1) * g[j];
        });
        TensorT<T> v_next = TensorT<T>::generate(p.shape(), [&](std::size_t j) {
            return T(kBeta2) * v[j] + T(1 - kBeta2) * g[j] * g[j];
        });
        params[i] = TensorT<T>::generate(p.shape(), [&](std::size_t j) {
            const double m_hat = double(m_next[j]) / fix1;
            const double v_hat = double(v_next[j]) / fix2;
            return T(double(p[j]) - double(learning_rate) * m_hat / (std::sqrt(v_hat) + kEps));
        });
        state.first[i] = std::move(m_next);
        state.second[i] = std::move(v_next);
    }
}

namespace {

template <typename T>
struct PreparedSet {
    std::vector<TensorT<T>> images;
    std::vector<std::size_t> labels;
};

template <typename T>
PreparedSet<T> prepare(const Dataset& ds) {
    PreparedSet<T> out;
    out.images.reserve(ds.size());
    out.labels.reserve(ds.size());
    for (const auto& s : ds.samples) {
        out.images.push_back(to_precision<T>(s.image));
        out.labels.push_back(s.label);
    }
    return out;
}

}  // namespace

template <typename T>
FitResultT<T> fit(const LoTeNetModelT<T>& model, const Dataset& train_set,
                  const Dataset& val_set, const TrainConfigT<T>& config,
                  const FitHooksT<T>& hooks) {
    if (train_set.samples.empty() || val_set.samples.empty())
        throw UsageError("fit: datasets must be non-empty");
    if (!(config.learning_rate > T(0))) throw UsageError("fit: learning_rate must be positive");
    if (config.batch_size < 1 || config.patience < 1 || config.max_epochs < 1)
        throw UsageError("fit: batch_size, patience and max_epochs must be at least 1");
    if (model.config().classes != 2)
        throw UsageError("fit: validation AUC needs exactly 2 classes, model has " +
                         std::to_string(model.config().classes));

    const PreparedSet<T> train = prepare<T>(train_set);
    const PreparedSet<T> val = prepare<T>(val_set);
    const std::size_t n = train.images.size();

    LoTeNetModelT<T> work = model;
    std::vector<TensorT<T>> params = work.parameters();
    AdamStateT<T> state = AdamStateT<T>::zeros_like(params);

    FitResultT<T> result{work, {}, 0, 0.0};
    std::vector<TensorT<T>> best_params = params;
    double best_auc = -1.0;
    std::size_t stale_epochs = 0;

    std::vector<std::size_t> order(n);
    std::vector<std::vector<T>> grad_acc(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) grad_acc[i].resize(params[i].count());

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const macs::Scope work_meter;
        std::iota(order.begin(), order.end(), 0);
        Rng shuffle_rng = Rng::derive(config.seed, {epoch});
        shuffle_rng.shuffle(order);

        double loss_sum = 0;
        std::vector<double> train_scores(n);
        std::vector<std::size_t> train_labels(n);

        for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
            const std::size_t end = std::min(begin + config.batch_size, n);
            for (auto& acc : grad_acc) std::fill(acc.begin(), acc.end(), T(0));

            for (std::size_t at = begin; at < end; ++at) {
                const std::size_t idx = order[at];
                TapeT<T> tape;
                const ModelVarsT<T> vars = work.leaves(tape);
                const VarT<T> logits =
                    work.forward_vars(vars, VarT<T>::constant(train.images[idx]));
                const VarT<T> loss = cross_entropy(logits, train.labels[idx]);
                loss_sum += double(loss.value[0]);
                train_scores[at] = positive_class_probability(logits.value);
                train_labels[at] = train.labels[idx];

                const std::vector<TensorT<T>> grads = tape.backward(loss);
                for (std::size_t i = 0; i < grads.size(); ++i) {
                    const auto view = grads[i].data();
                    for (std::size_t j = 0; j < view.size(); ++j) grad_acc[i][j] += view[j];
                }
            }

            const T inv = T(1) / T(end - begin);
            std::vector<TensorT<T>> grads;
            grads.reserve(params.size());
            for (std::size_t i = 0; i < params.size(); ++i) {
                auto mean = grad_acc[i];
                for (auto& g : mean) g *= inv;
                grads.push_back(TensorT<T>(params[i].shape(), std::move(mean)));
            }
            adam_step(params, grads, state, config.learning_rate);
            work.set_parameters(params);
        }

        double val_loss_sum = 0;
        std::vector<double> val_scores(val.images.size());
        for (std::size_t i = 0; i < val.images.size(); ++i) {
            const TensorT<T> logits = work.forward(val.images[i]);
            val_loss_sum += double(cross_entropy_value(logits, val.labels[i]));
            val_scores[i] = positive_class_probability(logits);
        }
        double val_auc = auc_roc(val_scores, val.labels);
        if (hooks.val_auc_override) val_auc = hooks.val_auc_override(epoch, val_auc);

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / double(n);
        rec.train_auc = auc_roc(train_scores, train_labels);
        rec.val_loss = val_loss_sum / double(val.images.size());
        rec.val_auc = val_auc;
        rec.seconds = double(work_meter.elapsed()) / 1e9;
        result.records.push_back(rec);
        if (hooks.on_epoch) hooks.on_epoch(rec, work);

        if (val_auc > best_auc) {
            best_auc = val_auc;
            best_params = params;
            result.best_epoch = epoch;
            stale_epochs = 0;
        } else if (++stale_epochs >= config.patience) {
            break;
        }
    }

    work.set_parameters(best_params);
    result.model = std::move(work);
    result.best_val_auc = best_auc;
    return result;
}

template <typename T>
GradCheckReport grad_check(const LoTeNetModelT<T>& model, const Sample& sample,
                           double tolerance, bool inject_fault) {
    LoTeNetModelT<T> work = model;
    const TensorT<T> image = to_precision<T>(sample.image);

    TapeT<T> tape;
    const ModelVarsT<T> vars = work.leaves(tape);
    const VarT<T> loss = cross_entropy(work.forward_vars(vars, VarT<T>::constant(image)),
                                       sample.label);
    const std::vector<TensorT<T>> analytic = tape.backward(loss);

    std::vector<TensorT<T>> params = work.parameters();
    if (inject_fault && !params.empty() && params[0].count() > 0) {
        const TensorT<T>& p0 = params[0];
        params[0] = TensorT<T>::generate(p0.shape(), [&](std::size_t j) {
            return j == 0 ? p0[j] + T(0.25) : p0[j];
        });
    }

    const double h = 1e-5;
    const auto eval = [&](std::size_t t, std::size_t e, double delta) {
        const TensorT<T> kept = params[t];
        params[t] = TensorT<T>::generate(kept.shape(), [&](std::size_t j) {
            return j == e ? T(double(kept[j]) + delta) : kept[j];
        });
        work.set_parameters(params);
        params[t] = kept;
        return double(cross_entropy_value(work.forward(image), sample.label));
    };

    GradCheckReport report;
    for (std::size_t t = 0; t < params.size(); ++t) {
        for (std::size_t e = 0; e < params[t].count(); ++e) {
            const double a = double(analytic[t][e]);
            const double numeric = (eval(t, e, h) - eval(t, e, -h)) / (2 * h);
            double rel = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
            if (!std::isfinite(a) || !std::isfinite(numeric)) rel = HUGE_VAL;
            if (report.checked == 0 || rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_tensor = t;
                report.worst_element = e;
            }
            report.checked += 1;
        }
    }
    report.pass = report.max_rel_error <= tolerance;
    return report;
}

#define LOTENET_INSTANTIATE_TRAINING(T)                                                      \
    template VarT<T> cross_entropy<T>(const VarT<T>&, std::size_t);                         \
    template T cross_entropy_value<T>(const TensorT<T>&, std::size_t);                      \
    template double positive_class_probability<T>(const TensorT<T>&);                       \
    template struct AdamStateT<T>;                                                          \
    template void adam_step<T>(std::vector<TensorT<T>>&, const std::vector<TensorT<T>>&,    \
                               AdamStateT<T>&, T);                                          \
    template FitResultT<T> fit<T>(const LoTeNetModelT<T>&, const Dataset&, const Dataset&,  \
                                  const TrainConfigT<T>&, const FitHooksT<T>&);             \
    template GradCheckReport grad_check<T>(const LoTeNetModelT<T>&, const Sample&, double,  \
                                           bool);

LOTENET_INSTANTIATE_TRAINING(float)
LOTENET_INSTANTIATE_TRAINING(double)

}  // namespace lotenet
