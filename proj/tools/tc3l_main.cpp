#include <cstdlib>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tc3l/commands.hpp"
#include "tc3l/config.hpp"

namespace {

using tc3l::NssMode;
using tc3l::RunConfig;

struct ConfigOpts {
  std::string config_path;
  std::map<std::string, std::string> overrides;
};

// every config key doubles as a --key flag; flags win over the file
void add_config_options(CLI::App* sub, ConfigOpts& opts,
                        const std::vector<std::string>& skip = {}) {
  sub->add_option("--config", opts.config_path,
                  "config file, one key = value per line");
  for (const std::string& key : tc3l::config_keys()) {
    bool skipped = false;
    for (const std::string& s : skip) skipped = skipped || s == key;
    if (skipped) continue;
    opts.overrides[key];  // stable storage for the option target
    sub->add_option("--" + key, opts.overrides[key], "override key " + key);
  }
}

RunConfig load_run_config(const CLI::App* sub, const ConfigOpts& opts) {
  RunConfig rc;
  if (!opts.config_path.empty()) rc = tc3l::parse_config_file(opts.config_path);
  for (const auto& [key, value] : opts.overrides)
    if (sub->count("--" + key) > 0)
      tc3l::apply_kv(rc, key, value, "--" + key);
  return rc;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::vector<double> parse_lambda_list(const std::string& s) {
  std::vector<double> out;
  for (const std::string& cell : split_list(s)) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (cell.empty() || end != begin + cell.size())
      throw std::invalid_argument("sweep: bad lambda value '" + cell + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("sweep: empty lambda list");
  return out;
}

std::vector<NssMode> parse_nss_list(const std::string& s) {
  std::vector<NssMode> out;
  for (const std::string& cell : split_list(s)) {
    if (cell == "ms") out.push_back(NssMode::kMs);
    else if (cell == "ns") out.push_back(NssMode::kNs);
    else if (cell == "mm") out.push_back(NssMode::kMm);
    else throw std::invalid_argument("sweep: bad nss value '" + cell + "'");
  }
  if (out.empty()) throw std::invalid_argument("sweep: empty nss list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tc3l: adaptive-margin triplet center loss experiments"};
  app.require_subcommand(1);

  ConfigOpts gen_opts;
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic CSV dataset");
  add_config_options(gen, gen_opts);
  gen->add_option("--out", gen_out, "output CSV path")->required();

  ConfigOpts train_opts;
  std::string train_out;
  CLI::App* train = app.add_subcommand("train", "train one model");
  add_config_options(train, train_opts);
  train->add_option("--out", train_out, "output directory")->required();

  std::string eval_checkpoint, eval_data;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on a CSV dataset");
  eval->add_option("--checkpoint", eval_checkpoint, "checkpoint.bin path")->required();
  eval->add_option("--data", eval_data, "dataset CSV path")->required();

  ConfigOpts sweep_opts;
  std::string sweep_out;
  std::string sweep_lambdas = "0.01,0.05,0.1,0.5,1.0";
  std::string sweep_nss = "ms,ns,mm";
  CLI::App* sweep = app.add_subcommand("sweep", "grid of runs over lambda and nss");
  add_config_options(sweep, sweep_opts, {"lambda", "nss"});
  sweep->add_option("--lambda", sweep_lambdas, "comma-separated lambda values");
  sweep->add_option("--nss", sweep_nss, "comma-separated nss modes");
  sweep->add_option("--out", sweep_out, "output directory")->required();

  ConfigOpts ablate_opts;
  std::string ablate_out;
  CLI::App* ablate = app.add_subcommand(
      "ablate", "baseline + {ms,ns,mm} x {fixed,adaptive} grid");
  add_config_options(ablate, ablate_opts);
  ablate->add_option("--out", ablate_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (gen->parsed())
      return tc3l::cmd_gen_data(load_run_config(gen, gen_opts), gen_out);
    if (train->parsed())
      return tc3l::cmd_train(load_run_config(train, train_opts), train_out);
    if (eval->parsed()) return tc3l::cmd_eval(eval_checkpoint, eval_data);
    if (sweep->parsed())
      return tc3l::cmd_sweep(load_run_config(sweep, sweep_opts),
                             parse_lambda_list(sweep_lambdas),
                             parse_nss_list(sweep_nss), sweep_out);
    if (ablate->parsed())
      return tc3l::cmd_ablate(load_run_config(ablate, ablate_opts), ablate_out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
