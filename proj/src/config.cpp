#include "tc3l/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace tc3l {

namespace {

[[noreturn]] void kv_error(const std::string& where, const std::string& what) {
  throw std::invalid_argument("config: " + where + ": " + what);
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

int parse_int(const std::string& v, const std::string& where) {
  const char* begin = v.c_str();
  char* end = nullptr;
  const long x = std::strtol(begin, &end, 10);
  if (v.empty() || end != begin + v.size())
    kv_error(where, "expected an integer, got '" + v + "'");
  return static_cast<int>(x);
}

std::uint64_t parse_u64(const std::string& v, const std::string& where) {
  const char* begin = v.c_str();
  char* end = nullptr;
  const unsigned long long x = std::strtoull(begin, &end, 10);
  if (v.empty() || end != begin + v.size() || v[0] == '-')
    kv_error(where, "expected an unsigned integer, got '" + v + "'");
  return static_cast<std::uint64_t>(x);
}

double parse_double(const std::string& v, const std::string& where) {
  const char* begin = v.c_str();
  char* end = nullptr;
  const double x = std::strtod(begin, &end);
  if (v.empty() || end != begin + v.size())
    kv_error(where, "expected a number, got '" + v + "'");
  return x;
}

std::vector<double> parse_double_list(const std::string& v,
                                      const std::string& where) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string cell;
  while (std::getline(ss, cell, ','))
    out.push_back(parse_double(trim(cell), where));
  if (out.empty()) kv_error(where, "expected a comma-separated number list");
  return out;
}

NssMode parse_nss(const std::string& v, const std::string& where) {
  if (v == "none") return NssMode::kNone;
  if (v == "ms") return NssMode::kMs;
  if (v == "ns") return NssMode::kNs;
  if (v == "mm") return NssMode::kMm;
  kv_error(where, "nss must be one of none, ms, ns, mm; got '" + v + "'");
}

MarginMode parse_margin_mode(const std::string& v, const std::string& where) {
  if (v == "adaptive") return MarginMode::kAdaptive;
  if (v == "fixed") return MarginMode::kFixed;
  kv_error(where, "margin_mode must be adaptive or fixed; got '" + v + "'");
}

AttentionMode parse_attention(const std::string& v, const std::string& where) {
  if (v == "none") return AttentionMode::kNone;
  if (v == "element") return AttentionMode::kElement;
  if (v == "pixel") return AttentionMode::kPixel;
  if (v == "both") return AttentionMode::kBoth;
  kv_error(where,
           "attention must be one of none, element, pixel, both; got '" + v + "'");
}

}  // namespace

const char* nss_name(NssMode mode) {
  switch (mode) {
    case NssMode::kNone: return "none";
    case NssMode::kMs: return "ms";
    case NssMode::kNs: return "ns";
    case NssMode::kMm: return "mm";
  }
  return "none";
}

const char* margin_mode_name(MarginMode mode) {
  return mode == MarginMode::kAdaptive ? "adaptive" : "fixed";
}

const char* attention_name(AttentionMode mode) {
  switch (mode) {
    case AttentionMode::kNone: return "none";
    case AttentionMode::kElement: return "element";
    case AttentionMode::kPixel: return "pixel";
    case AttentionMode::kBoth: return "both";
  }
  return "none";
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "d_in", "c_f", "h_f", "w_f", "c_d", "k_classes", "hidden",
      "attention", "reduction",
      "lambda", "nss", "margin_mode", "fixed_margin", "lr", "center_lr",
      "momentum", "weight_decay", "epochs", "lr_decay_every",
      "lr_decay_factor", "batch_size", "seed", "jitter_std",
      "n_total", "proportions", "separation", "noise_std", "data_seed",
      "train_fraction"};
  return keys;
}

void apply_kv(RunConfig& rc, const std::string& key, const std::string& value,
              const std::string& where) {
  if (key == "d_in") rc.model.d_in = parse_int(value, where);
  else if (key == "c_f") rc.model.c_f = parse_int(value, where);
  else if (key == "h_f") rc.model.h_f = parse_int(value, where);
  else if (key == "w_f") rc.model.w_f = parse_int(value, where);
  else if (key == "c_d") rc.model.c_d = parse_int(value, where);
  else if (key == "k_classes") rc.model.k_classes = parse_int(value, where);
  else if (key == "hidden") rc.model.hidden = parse_int(value, where);
  else if (key == "attention") rc.attention.mode = parse_attention(value, where);
  else if (key == "reduction") rc.attention.reduction = parse_int(value, where);
  else if (key == "lambda") rc.train.lambda = parse_double(value, where);
  else if (key == "nss") rc.train.nss = parse_nss(value, where);
  else if (key == "margin_mode")
    rc.train.margin_mode = parse_margin_mode(value, where);
  else if (key == "fixed_margin")
    rc.train.fixed_margin = parse_double(value, where);
  else if (key == "lr") rc.train.lr = parse_double(value, where);
  else if (key == "center_lr") rc.train.center_lr = parse_double(value, where);
  else if (key == "momentum") rc.train.momentum = parse_double(value, where);
  else if (key == "weight_decay")
    rc.train.weight_decay = parse_double(value, where);
  else if (key == "epochs") rc.train.epochs = parse_int(value, where);
  else if (key == "lr_decay_every")
    rc.train.lr_decay_every = parse_int(value, where);
  else if (key == "lr_decay_factor")
    rc.train.lr_decay_factor = parse_double(value, where);
  else if (key == "batch_size") rc.train.batch_size = parse_int(value, where);
  else if (key == "seed") rc.train.seed = parse_u64(value, where);
  else if (key == "jitter_std") rc.train.jitter_std = parse_double(value, where);
  else if (key == "n_total") rc.data.n_total = parse_int(value, where);
  else if (key == "proportions") {
    rc.data.proportions = parse_double_list(value, where);
    rc.proportions_set = true;
  } else if (key == "separation")
    rc.data.separation = parse_double(value, where);
  else if (key == "noise_std") rc.data.noise_std = parse_double(value, where);
  else if (key == "data_seed") {
    rc.data.seed = parse_u64(value, where);
    rc.data_seed_set = true;
  } else if (key == "train_fraction")
    rc.train_fraction = parse_double(value, where);
  else
    kv_error(where, "unknown key '" + key + "'");
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good())
    throw std::invalid_argument("config: cannot open " + path);
  RunConfig rc;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = path + ": line " + std::to_string(line_no);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      kv_error(where, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) kv_error(where, "missing key before '='");
    if (value.empty()) kv_error(where, "missing value for '" + key + "'");
    apply_kv(rc, key, value, where);
  }
  return rc;
}

void finalize_config(RunConfig& rc) {
  rc.data.d_in = rc.model.d_in;
  rc.data.k_classes = rc.model.k_classes;
  if (!rc.proportions_set &&
      static_cast<int>(rc.data.proportions.size()) != rc.model.k_classes)
    rc.data.proportions.assign(rc.model.k_classes, 1.0 / rc.model.k_classes);
  if (!rc.data_seed_set) rc.data.seed = rc.train.seed;
  rc.data.jitter_std = rc.train.jitter_std;
  if (rc.train.center_lr < 0.0)
    rc.train.center_lr = TrainConfig::kDefaultCenterLr;
  if (rc.train.fixed_margin <= 0.0) rc.train.fixed_margin = rc.model.c_d / 2.0;
  TC3L_CHECK(rc.train_fraction > 0.0 && rc.train_fraction < 1.0,
             "config: train_fraction must lie in (0,1)");
  rc.model.validate();
  rc.attention.validate(rc.model.c_d);
  validate_train_setup(rc.model, rc.attention, rc.train);
  rc.data.validate();
}

std::string render_config(const RunConfig& rc) {
  std::ostringstream out;
  out << "d_in = " << rc.model.d_in << "\n";
  out << "c_f = " << rc.model.c_f << "\n";
  out << "h_f = " << rc.model.h_f << "\n";
  out << "w_f = " << rc.model.w_f << "\n";
  out << "c_d = " << rc.model.c_d << "\n";
  out << "k_classes = " << rc.model.k_classes << "\n";
  out << "hidden = " << rc.model.hidden << "\n";
  out << "attention = " << attention_name(rc.attention.mode) << "\n";
  out << "reduction = " << rc.attention.reduction << "\n";
  out << "lambda = " << format_g17(rc.train.lambda) << "\n";
  out << "nss = " << nss_name(rc.train.nss) << "\n";
  out << "margin_mode = " << margin_mode_name(rc.train.margin_mode) << "\n";
  out << "fixed_margin = " << format_g17(rc.train.fixed_margin) << "\n";
  out << "lr = " << format_g17(rc.train.lr) << "\n";
  out << "center_lr = " << format_g17(rc.train.center_lr) << "\n";
  out << "momentum = " << format_g17(rc.train.momentum) << "\n";
  out << "weight_decay = " << format_g17(rc.train.weight_decay) << "\n";
  out << "epochs = " << rc.train.epochs << "\n";
  out << "lr_decay_every = " << rc.train.lr_decay_every << "\n";
  out << "lr_decay_factor = " << format_g17(rc.train.lr_decay_factor) << "\n";
  out << "batch_size = " << rc.train.batch_size << "\n";
  out << "seed = " << rc.train.seed << "\n";
  out << "jitter_std = " << format_g17(rc.train.jitter_std) << "\n";
  out << "n_total = " << rc.data.n_total << "\n";
  out << "proportions = ";
  for (std::size_t i = 0; i < rc.data.proportions.size(); ++i) {
    if (i > 0) out << ",";
    out << format_g17(rc.data.proportions[i]);
  }
  out << "\n";
  out << "separation = " << format_g17(rc.data.separation) << "\n";
  out << "noise_std = " << format_g17(rc.data.noise_std) << "\n";
  out << "data_seed = " << rc.data.seed << "\n";
  out << "train_fraction = " << format_g17(rc.train_fraction) << "\n";
  return out.str();
}

}  // namespace tc3l
