#pragma once

#include <iosfwd>
#include <string>

#include "lotenet/run_config.hpp"

namespace lotenet {

/// Exit codes shared by all commands: 0 success, 1 failed check,
/// 2 configuration error, 3 data error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;

/// Prints the shape plan, trains with early stopping, and writes
/// metrics.csv, best.ltnc and final.ltnc into out_dir.
int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Scores a checkpoint on a dataset; prints "auc=<v> accuracy=<v>".
int cmd_eval(const RunConfig& config, const std::string& checkpoint_path, std::ostream& out,
             std::ostream& err);

/// Trains once per bond dimension on identical data and seed; writes
/// sweep.csv (beta,best_val_auc).
int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Audits analytic gradients against central differences at wide precision;
/// exit 0 iff the worst relative error is within 1e-4. inject_fault forces
/// a failure to prove the audit can fail.
int cmd_gradcheck(const RunConfig& config, bool inject_fault, std::ostream& out,
                  std::ostream& err);

/// Prints the layer-by-layer shape plan without training.
int cmd_shapes(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Writes the synthetic dataset as an LTT pair into out_dir.
int cmd_synth(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace lotenet
