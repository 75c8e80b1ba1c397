#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <functional>
#include <string>

#include "tc3l/config.hpp"

using namespace tc3l;

namespace {

std::string write_temp(const std::string& body) {
  static int counter = 0;
  const std::string path =
      "/tmp/tc3l_cfg_" + std::to_string(counter++) + ".cfg";
  std::ofstream out(path);
  out << body;
  return path;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("empty file keeps every default") {
  const std::string path = write_temp("# nothing but a comment\n\n");
  RunConfig rc = parse_config_file(path);
  CHECK(rc.model.d_in == 32);
  CHECK(rc.model.c_f == 16);
  CHECK(rc.model.c_d == 8);
  CHECK(rc.model.k_classes == 7);
  CHECK(rc.attention.mode == AttentionMode::kElement);
  CHECK(rc.attention.reduction == 4);
  CHECK(rc.train.lambda == 0.1);
  CHECK(rc.train.nss == NssMode::kMs);
  CHECK(rc.train.margin_mode == MarginMode::kAdaptive);
  CHECK(rc.train.lr == 0.05);
  CHECK(rc.train.momentum == 0.9);
  CHECK(rc.train.weight_decay == 5e-4);
  CHECK(rc.train.epochs == 60);
  CHECK(rc.train.batch_size == 32);
  CHECK(rc.data.n_total == 2800);
  CHECK(rc.train_fraction == 0.75);
  std::remove(path.c_str());
}

TEST_CASE("flags override file values") {
  const std::string path = write_temp("lambda = 0.5\nepochs = 10\n");
  RunConfig rc = parse_config_file(path);
  CHECK(rc.train.lambda == 0.5);
  apply_kv(rc, "lambda", "1.0", "--lambda");
  CHECK(rc.train.lambda == 1.0);
  CHECK(rc.train.epochs == 10);  // untouched keys keep file values
  std::remove(path.c_str());
}

TEST_CASE("unknown keys are rejected with their source location") {
  const std::string path = write_temp("lambda = 0.5\nbogus = 3\n");
  const std::string msg =
      message_of([&] { (void)parse_config_file(path); });
  CHECK(msg.find("line 2") != std::string::npos);
  CHECK(msg.find("bogus") != std::string::npos);
  std::remove(path.c_str());

  RunConfig rc;
  const std::string flag_msg =
      message_of([&] { apply_kv(rc, "lamda", "1", "--lamda"); });
  CHECK(flag_msg.find("--lamda") != std::string::npos);
  CHECK(flag_msg.find("unknown key") != std::string::npos);
}

TEST_CASE("malformed values name the offending line") {
  const std::string path = write_temp("epochs = banana\n");
  const std::string msg = message_of([&] { (void)parse_config_file(path); });
  CHECK(msg.find("line 1") != std::string::npos);
  CHECK(msg.find("banana") != std::string::npos);

  RunConfig rc;
  CHECK_THROWS_AS(apply_kv(rc, "seed", "-5", "--seed"), std::invalid_argument);
  CHECK_THROWS_AS(apply_kv(rc, "lambda", "0.1x", "--lambda"),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_kv(rc, "proportions", "", "--proportions"),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_kv(rc, "nss", "msd", "--nss"), std::invalid_argument);
  CHECK_THROWS_AS(apply_kv(rc, "margin_mode", "loose", "--margin-mode"),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_kv(rc, "attention", "full", "--attention"),
                  std::invalid_argument);
  std::remove(path.c_str());
}

TEST_CASE("structural file errors: missing '=', key, value, or file") {
  CHECK_THROWS_AS(parse_config_file(write_temp("lambda 0.5\n")),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config_file(write_temp("= 0.5\n")),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config_file(write_temp("lambda =\n")),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config_file("/tmp/tc3l_no_such_file.cfg"),
                  std::invalid_argument);
}

TEST_CASE("whitespace and trailing comments are tolerated") {
  const std::string path =
      write_temp("   lambda   =  0.25   # metric weight\n\t epochs=3\n");
  RunConfig rc = parse_config_file(path);
  CHECK(rc.train.lambda == 0.25);
  CHECK(rc.train.epochs == 3);
  std::remove(path.c_str());
}

TEST_CASE("constraint violations surface at finalize") {
  RunConfig rc;
  rc.train.margin_mode = MarginMode::kFixed;
  rc.train.fixed_margin = 9.0;  // c_d defaults to 8
  CHECK_THROWS_AS(finalize_config(rc), std::invalid_argument);

  RunConfig rc2;
  rc2.train.lambda = 0.5;
  rc2.train.nss = NssMode::kNone;
  CHECK_THROWS_AS(finalize_config(rc2), std::invalid_argument);

  RunConfig rc3;
  rc3.train_fraction = 1.0;
  CHECK_THROWS_AS(finalize_config(rc3), std::invalid_argument);
}

TEST_CASE("finalize resolves the derived defaults") {
  RunConfig rc;
  rc.model.d_in = 12;
  rc.model.c_f = 6;
  rc.model.h_f = 2;
  rc.model.w_f = 1;
  rc.model.c_d = 6;
  rc.model.k_classes = 4;
  rc.train.seed = 123;
  finalize_config(rc);
  CHECK(rc.data.d_in == 12);
  CHECK(rc.data.k_classes == 4);
  CHECK(rc.data.seed == 123);  // follows the train seed when unset
  REQUIRE(rc.data.proportions.size() == 4);  // uniform for nonstandard K
  for (double p : rc.data.proportions) CHECK(p == 0.25);
  CHECK(rc.train.center_lr == TrainConfig::kDefaultCenterLr);
  CHECK(rc.train.fixed_margin == 3.0);  // c_d / 2

  RunConfig rc2;
  apply_kv(rc2, "data_seed", "77", "--data-seed");
  apply_kv(rc2, "center_lr", "0.001", "--center-lr");
  apply_kv(rc2, "fixed_margin", "2.5", "--fixed-margin");
  finalize_config(rc2);
  CHECK(rc2.data.seed == 77);  // explicit value survives
  CHECK(rc2.train.center_lr == 0.001);
  CHECK(rc2.train.fixed_margin == 2.5);
}

TEST_CASE("explicit proportions must still match the class count") {
  RunConfig rc;
  apply_kv(rc, "proportions", "0.5,0.5", "--proportions");
  CHECK_THROWS_AS(finalize_config(rc), std::invalid_argument);  // K = 7
  RunConfig rc2;
  apply_kv(rc2, "k_classes", "2", "--k-classes");
  apply_kv(rc2, "proportions", "0.5,0.5", "--proportions");
  finalize_config(rc2);
  CHECK(rc2.data.proportions == std::vector<double>{0.5, 0.5});
}

TEST_CASE("the adaptive mm combination is accepted") {
  RunConfig rc;
  apply_kv(rc, "nss", "mm", "--nss");
  apply_kv(rc, "margin_mode", "adaptive", "--margin-mode");
  finalize_config(rc);
  CHECK(rc.train.nss == NssMode::kMm);
  CHECK(rc.train.margin_mode == MarginMode::kAdaptive);
}

TEST_CASE("rendered configs re-parse to the same render") {
  RunConfig rc;
  apply_kv(rc, "lambda", "0.37", "--lambda");
  apply_kv(rc, "lr", "0.0125", "--lr");
  apply_kv(rc, "k_classes", "5", "--k-classes");
  apply_kv(rc, "seed", "424242", "--seed");
  apply_kv(rc, "noise_std", "0.73", "--noise-std");
  finalize_config(rc);
  const std::string first = render_config(rc);

  const std::string path = write_temp(first);
  RunConfig back = parse_config_file(path);
  finalize_config(back);
  CHECK(render_config(back) == first);
  CHECK(back.train.lambda == rc.train.lambda);
  CHECK(back.data.seed == rc.data.seed);
  CHECK(back.data.proportions == rc.data.proportions);
  std::remove(path.c_str());
}

TEST_CASE("every canonical key is accepted and echoed") {
  RunConfig rc;
  finalize_config(rc);
  const std::string rendered = render_config(rc);
  for (const std::string& key : config_keys()) {
    CHECK(rendered.find(key + " = ") != std::string::npos);
  }
  // the echo holds nothing but canonical keys
  std::size_t lines = 0;
  for (char c : rendered)
    if (c == '\n') ++lines;
  CHECK(lines == config_keys().size());
}

TEST_CASE("mode names round-trip through their parsers") {
  for (const char* name : {"none", "ms", "ns", "mm"}) {
    RunConfig rc;
    apply_kv(rc, "nss", name, "--nss");
    CHECK(std::string(nss_name(rc.train.nss)) == name);
  }
  for (const char* name : {"adaptive", "fixed"}) {
    RunConfig rc;
    apply_kv(rc, "margin_mode", name, "--margin-mode");
    CHECK(std::string(margin_mode_name(rc.train.margin_mode)) == name);
  }
  for (const char* name : {"none", "element", "pixel", "both"}) {
    RunConfig rc;
    apply_kv(rc, "attention", name, "--attention");
    CHECK(std::string(attention_name(rc.attention.mode)) == name);
  }
}
