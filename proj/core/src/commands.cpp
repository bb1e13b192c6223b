#include "lotenet/commands.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "lotenet/checkpoint.hpp"
#include "lotenet/data.hpp"
#include "lotenet/errors.hpp"
#include "lotenet/metrics.hpp"
#include "lotenet/rng.hpp"
#include "lotenet/training.hpp"

namespace lotenet {
namespace {

int run_guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const DataError& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const MetricError& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

std::string fixed6(double v) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(6) << v;
    return out.str();
}

/// Dataset loading failures map to the data exit code even when the loader
/// reports them as stream-format problems.
Dataset resolve_dataset(const RunConfig& cfg) {
    try {
        if (!cfg.data_images.empty()) {
            if (cfg.data_labels.empty())
                throw ConfigError("config: data_images requires data_labels");
            return load_ltt_dataset(cfg.data_images, cfg.data_labels);
        }
        if (!cfg.data_csv.empty())
            return load_image_dir(cfg.data_dir.empty() ? "." : cfg.data_dir, cfg.data_csv);
        return synth_generate(cfg.synth_count, cfg.synth_size, cfg.seed);
    } catch (const FormatError& e) {
        throw DataError(e.what());
    } catch (const ShapeError& e) {
        throw DataError(e.what());
    }
}

void check_dataset_matches(const Dataset& ds, const LoTeNetConfig& model) {
    const Shape want({model.height, model.width, model.channels});
    const Shape& got = ds.samples.front().image.shape();
    if (!(got == want))
        throw ConfigError("config: dataset images are " + got.str() +
                          " but the model expects " + want.str());
    if (ds.class_count > model.classes)
        throw ConfigError("config: dataset has " + std::to_string(ds.class_count) +
                          " classes, model allows " + std::to_string(model.classes));
}

template <typename T>
TensorT<T> image_as(const TensorF& image) {
    if constexpr (std::is_same_v<T, float>)
        return image;
    else
        return image.template cast<T>();
}

template <typename T>
TrainConfigT<T> train_settings(const RunConfig& cfg) {
    TrainConfigT<T> tc;
    tc.learning_rate = T(cfg.learning_rate);
    tc.batch_size = cfg.batch_size;
    tc.patience = cfg.patience;
    tc.max_epochs = cfg.max_epochs;
    tc.seed = cfg.seed;
    return tc;
}

struct SplitSets {
    Dataset train;
    Dataset val;
};

SplitSets prepare_sets(const RunConfig& cfg, const Dataset& ds) {
    if (cfg.split.size() < 2 || cfg.split.size() > 3)
        throw ConfigError("config: split needs 2 or 3 fractions, got " +
                          std::to_string(cfg.split.size()));
    auto parts = split(ds, cfg.split, cfg.seed);
    SplitSets sets{std::move(parts[0]), std::move(parts[1])};
    if (cfg.augment) sets.train = augment_dataset(sets.train, AugmentConfig{}, cfg.seed);
    return sets;
}

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<EpochRecord>& records) {
    std::ofstream csv(path, std::ios::trunc);
    if (!csv) throw DataError("cannot write " + path.string());
    csv << "epoch,train_loss,train_auc,val_loss,val_auc,seconds\n";
    for (const auto& r : records)
        csv << r.epoch << ',' << fixed6(r.train_loss) << ',' << fixed6(r.train_auc) << ','
            << fixed6(r.val_loss) << ',' << fixed6(r.val_auc) << ',' << fixed6(r.seconds)
            << "\n";
    csv.flush();
    if (!csv) throw DataError("write to " + path.string() + " failed");
}

template <typename T>
int train_impl(const RunConfig& cfg, std::ostream& out) {
    const ShapePlan plan = shape_plan(cfg.model);
    out << plan.describe();

    const Dataset ds = resolve_dataset(cfg);
    check_dataset_matches(ds, cfg.model);
    const SplitSets sets = prepare_sets(cfg, ds);

    const auto model = LoTeNetModelT<T>::init(cfg.model, cfg.seed);
    std::vector<TensorT<T>> final_params;
    EpochRecord final_record;
    FitHooksT<T> hooks;
    hooks.on_epoch = [&](const EpochRecord& r, const LoTeNetModelT<T>& m) {
        final_params = m.parameters();
        final_record = r;
    };
    const FitResultT<T> result = fit(model, sets.train, sets.val, train_settings<T>(cfg), hooks);

    std::filesystem::create_directories(cfg.out_dir);
    const std::filesystem::path dir(cfg.out_dir);
    write_metrics_csv(dir / "metrics.csv", result.records);

    save_checkpoint(
        (dir / "best.ltnc").string(), result.model, cfg,
        CheckpointMeta{std::uint32_t(result.best_epoch), float(result.best_val_auc)});
    LoTeNetModelT<T> final_model = model;
    final_model.set_parameters(final_params);
    save_checkpoint((dir / "final.ltnc").string(), final_model, cfg,
                    CheckpointMeta{std::uint32_t(final_record.epoch), float(final_record.val_auc)});

    out << "trained " << result.records.size() << " epochs, best epoch " << result.best_epoch
        << ", best val_auc " << fixed6(result.best_val_auc) << "\n";
    out << "wrote " << (dir / "metrics.csv").string() << ", " << (dir / "best.ltnc").string()
        << ", " << (dir / "final.ltnc").string() << "\n";
    return kExitOk;
}

template <typename T>
int eval_impl(const RunConfig& cfg, const std::string& checkpoint_path, std::ostream& out) {
    const LoadedCheckpointT<T> loaded = load_checkpoint<T>(checkpoint_path);
    if (loaded.config.model.classes != 2)
        throw ConfigError("eval: AUC needs a binary model, checkpoint has " +
                          std::to_string(loaded.config.model.classes) + " classes");

    const Dataset ds = resolve_dataset(cfg);
    check_dataset_matches(ds, loaded.config.model);

    std::vector<double> scores;
    std::vector<std::size_t> predictions, labels;
    for (const auto& s : ds.samples) {
        const TensorT<T> logits = loaded.model.forward(image_as<T>(s.image));
        scores.push_back(positive_class_probability(logits));
        predictions.push_back(argmax_tie_low(logits.data()));
        labels.push_back(s.label);
    }
    out << "auc=" << fixed6(auc_roc(scores, labels)) << " accuracy="
        << fixed6(accuracy(predictions, labels)) << "\n";
    return kExitOk;
}

template <typename T>
int sweep_impl(const RunConfig& cfg, std::ostream& out) {
    if (cfg.sweep_betas.empty()) throw ConfigError("config: sweep_betas is empty");
    std::set<std::size_t> unique(cfg.sweep_betas.begin(), cfg.sweep_betas.end());
    if (unique.size() != cfg.sweep_betas.size())
        throw ConfigError("config: sweep_betas contains duplicate bond dimensions");

    const Dataset ds = resolve_dataset(cfg);
    check_dataset_matches(ds, cfg.model);
    const SplitSets sets = prepare_sets(cfg, ds);

    std::vector<std::pair<std::size_t, double>> rows;
    for (const std::size_t beta : cfg.sweep_betas) {
        RunConfig run = cfg;
        run.model.bond_dim = beta;
        run.model.out_dim = beta;
        shape_plan(run.model);
        const auto model = LoTeNetModelT<T>::init(run.model, cfg.seed);
        const FitResultT<T> result =
            fit(model, sets.train, sets.val, train_settings<T>(run), FitHooksT<T>{});
        rows.emplace_back(beta, result.best_val_auc);
        out << "beta " << beta << ": best val_auc " << fixed6(result.best_val_auc) << "\n";
    }

    std::filesystem::create_directories(cfg.out_dir);
    const auto csv_path = std::filesystem::path(cfg.out_dir) / "sweep.csv";
    std::ofstream csv(csv_path, std::ios::trunc);
    if (!csv) throw DataError("cannot write " + csv_path.string());
    csv << "beta,best_val_auc\n";
    for (const auto& [beta, auc] : rows) csv << beta << ',' << fixed6(auc) << "\n";
    csv.flush();
    if (!csv) throw DataError("write to " + csv_path.string() + " failed");
    out << "wrote " << csv_path.string() << "\n";
    return kExitOk;
}

}  // namespace

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return run_guarded(err, [&] {
        return cfg.precision == "wide" ? train_impl<double>(cfg, out)
                                       : train_impl<float>(cfg, out);
    });
}

int cmd_eval(const RunConfig& cfg, const std::string& checkpoint_path, std::ostream& out,
             std::ostream& err) {
    return run_guarded(err, [&] {
        const RunConfig stored = read_checkpoint_config(checkpoint_path);
        return stored.precision == "wide" ? eval_impl<double>(cfg, checkpoint_path, out)
                                          : eval_impl<float>(cfg, checkpoint_path, out);
    });
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return run_guarded(err, [&] {
        return cfg.precision == "wide" ? sweep_impl<double>(cfg, out)
                                       : sweep_impl<float>(cfg, out);
    });
}

int cmd_gradcheck(const RunConfig& cfg, bool inject_fault, std::ostream& out,
                  std::ostream& err) {
    return run_guarded(err, [&] {
        shape_plan(cfg.model);
        Rng rng = Rng::derive(cfg.seed, {7});
        const TensorF image =
            TensorF::generate(Shape({cfg.model.height, cfg.model.width, cfg.model.channels}),
                              [&](std::size_t) { return float(rng.next_unit()); });
        const Sample sample{image, 1};

        // Always audited at wide precision; float roundoff would drown the
        // finite-difference signal.
        const auto model = LoTeNetModelD::init(cfg.model, cfg.seed);
        const GradCheckReport report = grad_check(model, sample, 1e-4, inject_fault);

        std::ostringstream sci;
        sci << std::scientific << std::setprecision(6) << report.max_rel_error;
        out << "checked=" << report.checked << " max_rel_error=" << sci.str()
            << " worst_tensor=" << report.worst_tensor
            << " worst_element=" << report.worst_element << "\n";
        out << (report.pass ? "PASS" : "FAIL") << "\n";
        return report.pass ? kExitOk : kExitCheckFailed;
    });
}

int cmd_shapes(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return run_guarded(err, [&] {
        const ShapePlan plan = shape_plan(cfg.model);
        out << "resolution chain: ";
        for (const auto& layer : plan.layers) out << layer.in_h << " -> ";
        out << plan.final_block.in_h << "\n";
        out << plan.describe();
        return kExitOk;
    });
}

int cmd_synth(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return run_guarded(err, [&] {
        const Dataset ds = synth_generate(cfg.synth_count, cfg.synth_size, cfg.seed);
        std::filesystem::create_directories(cfg.out_dir);
        const std::filesystem::path dir(cfg.out_dir);
        const auto images = (dir / "synth_images.ltt").string();
        const auto labels = (dir / "synth_labels.ltt").string();
        save_ltt_dataset(ds, images, labels);
        out << "wrote " << images << " and " << labels << " (" << ds.size() << " samples of "
            << cfg.synth_size << "x" << cfg.synth_size << ")\n";
        return kExitOk;
    });
}

}  // namespace lotenet
