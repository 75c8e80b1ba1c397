#pragma once

#include <string>
#include <vector>

#include "tc3l/config.hpp"
#include "tc3l/trainer.hpp"

namespace tc3l {

// one full training run: resolved-config echo, curve.csv, metrics.json,
// checkpoint.bin + checkpoint.json, centers.csv, confusion.csv, all under
// out_dir.  Returns the final test-split report.
MetricsReport run_experiment(const RunConfig& rc, const std::string& out_dir);

// CLI entry points; all throw std::invalid_argument for config problems
// and std::runtime_error for runtime/IO failures
int cmd_gen_data(RunConfig rc, const std::string& out_path);
int cmd_train(RunConfig rc, const std::string& out_dir);
int cmd_eval(const std::string& checkpoint_path, const std::string& data_path);
int cmd_sweep(RunConfig rc, const std::vector<double>& lambdas,
              const std::vector<NssMode>& nss_list, const std::string& out_dir);
int cmd_ablate(RunConfig rc, const std::string& out_dir);

// formatting helpers shared with the tests
std::string render_curve(const std::vector<CurveRow>& rows);
std::string render_metrics_json(const MetricsReport& report);

}  // namespace tc3l
