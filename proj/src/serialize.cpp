#include "tc3l/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace tc3l {

namespace {

const char kMagic[5] = {'T', 'C', '3', 'L', '\x01'};

void append_i32(std::string& out, std::int32_t v) {
  const std::uint32_t u = static_cast<std::uint32_t>(v);
  for (int b = 0; b < 4; ++b)
    out.push_back(static_cast<char>((u >> (8 * b)) & 0xFF));
}

void append_f64(std::string& out, double v) {
  const std::uint64_t u = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b)
    out.push_back(static_cast<char>((u >> (8 * b)) & 0xFF));
}

struct Reader {
  const std::string& bytes;
  std::size_t pos = 0;

  std::int32_t read_i32() {
    TC3L_CHECK(pos + 4 <= bytes.size(), "checkpoint: truncated int field");
    std::uint32_t u = 0;
    for (int b = 0; b < 4; ++b)
      u |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + b]))
           << (8 * b);
    pos += 4;
    return static_cast<std::int32_t>(u);
  }

  double read_f64() {
    TC3L_CHECK(pos + 8 <= bytes.size(), "checkpoint: truncated float field");
    std::uint64_t u = 0;
    for (int b = 0; b < 8; ++b)
      u |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + b]))
           << (8 * b);
    pos += 8;
    return std::bit_cast<double>(u);
  }

  void read_array(std::vector<double>& v) {
    for (double& x : v) x = read_f64();
  }
};

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t n) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ull;
  }
  return h;
}

std::string encode_checkpoint(const TrainState& state) {
  const ModelConfig& mc = state.model_cfg;
  TC3L_CHECK(!mc.identity_nonlin,
             "checkpoint: identity_nonlin is a test hook and not serializable");
  std::string out(kMagic, sizeof(kMagic));
  append_i32(out, mc.d_in);
  append_i32(out, mc.c_f);
  append_i32(out, mc.h_f);
  append_i32(out, mc.w_f);
  append_i32(out, mc.c_d);
  append_i32(out, mc.k_classes);
  append_i32(out, mc.hidden);
  append_i32(out, static_cast<std::int32_t>(state.att_cfg.mode));
  append_i32(out, state.att_cfg.reduction);
  state.params.for_each_array([&](const char*, const std::vector<double>& v) {
    for (double x : v) append_f64(out, x);
  });
  for (double x : state.centers.values) append_f64(out, x);
  state.att.for_each_array([&](const char*, const std::vector<double>& v) {
    for (double x : v) append_f64(out, x);
  });
  return out;
}

TrainState decode_checkpoint(const std::string& bytes) {
  TC3L_CHECK(bytes.size() >= sizeof(kMagic) &&
                 std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) == 0,
             "checkpoint: bad magic bytes");
  Reader r{bytes, sizeof(kMagic)};
  ModelConfig mc;
  mc.d_in = r.read_i32();
  mc.c_f = r.read_i32();
  mc.h_f = r.read_i32();
  mc.w_f = r.read_i32();
  mc.c_d = r.read_i32();
  mc.k_classes = r.read_i32();
  mc.hidden = r.read_i32();
  const std::int32_t mode = r.read_i32();
  AttentionConfig ac;
  TC3L_CHECK(mode >= 0 && mode <= 3, "checkpoint: bad attention mode");
  ac.mode = static_cast<AttentionMode>(mode);
  ac.reduction = r.read_i32();
  mc.validate();
  ac.validate(mc.c_d);
  TrainState s;
  s.model_cfg = mc;
  s.att_cfg = ac;
  s.params = zero_params(mc);
  s.velocity = zero_params(mc);
  s.att = zero_attention(mc, ac);
  s.att_velocity = zero_attention(mc, ac);
  s.centers = zero_centers(mc.k_classes, mc.c_d);
  s.stats = ConfusionStats(mc.k_classes);
  s.epoch_stats = ConfusionStats(mc.k_classes);
  s.params.for_each_array(
      [&](const char*, std::vector<double>& v) { r.read_array(v); });
  r.read_array(s.centers.values);
  s.att.for_each_array(
      [&](const char*, std::vector<double>& v) { r.read_array(v); });
  TC3L_CHECK(r.pos == bytes.size(), "checkpoint: trailing bytes");
  return s;
}

void save_checkpoint(const TrainState& state, const std::string& bin_path,
                     const std::string& manifest_path) {
  const std::string payload = encode_checkpoint(state);
  {
    std::ofstream out(bin_path, std::ios::binary);
    if (!out.good())
      throw std::runtime_error("save_checkpoint: cannot open " + bin_path);
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    out.flush();
    if (!out.good())
      throw std::runtime_error("save_checkpoint: write failed for " + bin_path);
  }
  nlohmann::ordered_json manifest;
  manifest["format"] = "tc3l-checkpoint-v1";
  manifest["model"] = {
      {"d_in", state.model_cfg.d_in},     {"c_f", state.model_cfg.c_f},
      {"h_f", state.model_cfg.h_f},       {"w_f", state.model_cfg.w_f},
      {"c_d", state.model_cfg.c_d},       {"k_classes", state.model_cfg.k_classes},
      {"hidden", state.model_cfg.hidden}, {"c_mid", state.model_cfg.c_mid()}};
  manifest["attention"] = {
      {"mode", static_cast<int>(state.att_cfg.mode)},
      {"reduction", state.att_cfg.reduction}};
  nlohmann::ordered_json arrays = nlohmann::ordered_json::array();
  state.params.for_each_array([&](const char* name,
                                  const std::vector<double>& v) {
    arrays.push_back({{"name", name}, {"length", v.size()}});
  });
  arrays.push_back(
      {{"name", "centers"}, {"length", state.centers.values.size()}});
  state.att.for_each_array([&](const char* name, const std::vector<double>& v) {
    arrays.push_back({{"name", name}, {"length", v.size()}});
  });
  manifest["arrays"] = arrays;
  manifest["payload_bytes"] = payload.size();
  manifest["fnv1a64"] = hex64(fnv1a64(payload.data(), payload.size()));
  std::ofstream out(manifest_path);
  if (!out.good())
    throw std::runtime_error("save_checkpoint: cannot open " + manifest_path);
  out << manifest.dump(2) << "\n";
  out.flush();
  if (!out.good())
    throw std::runtime_error("save_checkpoint: write failed for " +
                             manifest_path);
}

TrainState load_checkpoint(const std::string& bin_path) {
  std::ifstream in(bin_path, std::ios::binary);
  if (!in.good())
    throw std::runtime_error("load_checkpoint: cannot open " + bin_path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace tc3l
