#pragma once

#include <string>
#include <vector>

#include "tc3l/attention.hpp"
#include "tc3l/data.hpp"
#include "tc3l/model.hpp"
#include "tc3l/nss.hpp"
#include "tc3l/trainer.hpp"

namespace tc3l {

// union of every experiment setting one run needs
struct RunConfig {
  ModelConfig model;
  AttentionConfig attention;
  TrainConfig train;
  DataConfig data;
  double train_fraction = 0.75;

  // which optional keys were given explicitly (resolution fills the rest)
  bool data_seed_set = false;
  bool proportions_set = false;
};

// every recognized `key = value` name, in canonical echo order
const std::vector<std::string>& config_keys();

// applies one key/value pair; `where` names the source for error
// messages ("line 12" or "--lambda").  Unknown keys are errors.
void apply_kv(RunConfig& rc, const std::string& key, const std::string& value,
              const std::string& where);

// parses a `key = value` file (# starts a comment).  Defaults remain for
// absent keys; call finalize_config afterwards.
RunConfig parse_config_file(const std::string& path);

// resolves derived defaults (center_lr, fixed_margin, data seed, shared
// dims, uniform proportions for nonstandard K) and validates everything
void finalize_config(RunConfig& rc);

// re-parseable echo of a finalized config, 17-significant-digit floats
std::string render_config(const RunConfig& rc);

const char* nss_name(NssMode mode);
const char* margin_mode_name(MarginMode mode);
const char* attention_name(AttentionMode mode);

}  // namespace tc3l
