#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "naima/config.hpp"
#include "naima/error.hpp"
#include "test_util.hpp"

using naima::Config;
using naima::LossConfig;
using naima::ModelConfig;
using naima::TrainConfig;
using naima::UsageError;
using testutil::TempDir;

TEST_CASE("defaults resolve and parse") {
  Config c = Config::defaults();
  CHECK(c.get_int("model.channels") == 64);
  CHECK(c.get_str("model.variant") == "naima");
  CHECK(c.get_double("loss.lambda") == 0.05);
  CHECK(c.get_bool("model.attention.raw_qkv") == false);
  CHECK(c.get_u64("semantic_encoder.seed") == 1234);
  CHECK(c.has("train.lr0"));
  CHECK(!c.has("nonexistent.key"));
  CHECK_THROWS_AS(c.get_str("nonexistent.key"), UsageError);
}

TEST_CASE("text parsing: comments, blanks, whitespace, overlay order") {
  Config c = Config::defaults();
  c.load_text("# comment line\n"
              "\n"
              "  model.channels = 16  \n"
              "train.lr0=3e-3   # trailing comment\n",
              "inline");
  CHECK(c.get_int("model.channels") == 16);
  CHECK(c.get_double("train.lr0") == 3e-3);
  // later overlays win
  c.load_text("model.channels = 8\n", "inline2");
  CHECK(c.get_int("model.channels") == 8);
  c.set("model.channels", "4");
  CHECK(c.get_int("model.channels") == 4);
  c.set_kv("model.channels=2");
  CHECK(c.get_int("model.channels") == 2);
}

TEST_CASE("malformed input reports file and line") {
  Config c = Config::defaults();
  try {
    c.load_text("model.channels = 8\nthis line has no equals\n", "conf.txt");
    FAIL("expected UsageError");
  } catch (const UsageError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("conf.txt") != std::string::npos);
    CHECK(msg.find("2") != std::string::npos);  // line number
  }
  CHECK_THROWS_AS(c.load_text("= value\n", "x"), UsageError);
  CHECK_THROWS_AS(c.set_kv("no_equals_sign"), UsageError);
  CHECK_THROWS_AS(c.load_file("/nonexistent/path/config"), UsageError);
}

TEST_CASE("typed getters validate their input") {
  Config c = Config::defaults();
  c.set("k.int", "12");
  c.set("k.bad", "12abc");
  c.set("k.dbl", "2.5e-3");
  c.set("k.b1", "true");
  c.set("k.b0", "false");
  CHECK(c.get_int("k.int") == 12);
  CHECK(c.get_double("k.dbl") == 2.5e-3);
  CHECK(c.get_bool("k.b1"));
  CHECK(!c.get_bool("k.b0"));
  CHECK_THROWS_AS(c.get_int("k.bad"), UsageError);
  CHECK_THROWS_AS(c.get_bool("k.int"), UsageError);
  CHECK_THROWS_AS(c.get_double("k.bad"), UsageError);
}

TEST_CASE("resolved_text round-trips through load_text") {
  Config c = Config::defaults();
  c.set("model.channels", "8");
  const std::string snap = c.resolved_text();
  Config d = Config::defaults();
  d.load_text(snap, "snapshot");
  CHECK(d.resolved_text() == snap);
  CHECK(d.get_int("model.channels") == 8);
}

TEST_CASE("ModelConfig::from maps keys and applies the d_k default") {
  Config c = Config::defaults();
  ModelConfig m = ModelConfig::from(c);
  CHECK(m.levels == 4);
  CHECK(m.channels == 64);
  CHECK(m.d_k == 64);  // d_k = 0 follows channels
  CHECK(m.variant == "naima");
  CHECK(m.encoder_kind == "stub");

  c.set("model.d_k", "16");
  c.set("model.channels", "32");
  c.set("model.variant", "naima_plus");
  ModelConfig m2 = ModelConfig::from(c);
  CHECK(m2.d_k == 16);
  CHECK(m2.channels == 32);
  CHECK(m2.variant == "naima_plus");
}

TEST_CASE("ModelConfig::validate rejects bad geometry") {
  ModelConfig m;  // defaults are valid
  CHECK_NOTHROW(m.validate());

  ModelConfig bad = m;
  bad.levels = 3;
  CHECK_THROWS_AS(bad.validate(), UsageError);

  bad = m;
  bad.channels = 0;
  CHECK_THROWS_AS(bad.validate(), UsageError);

  bad = m;
  bad.channels = 30;  // not divisible by reduction 16
  CHECK_THROWS_AS(bad.validate(), UsageError);

  bad = m;
  bad.d_k = -1;
  CHECK_THROWS_AS(bad.validate(), UsageError);

  bad = m;
  bad.variant = "mystery";
  CHECK_THROWS_AS(bad.validate(), UsageError);

  bad = m;
  bad.raw_qkv = true;  // requires d_k == channels
  bad.d_k = 8;
  CHECK_THROWS_AS(bad.validate(), UsageError);
  bad.d_k = bad.channels;
  CHECK_NOTHROW(bad.validate());

  bad = m;
  bad.scale = 8;
  CHECK_NOTHROW(bad.validate());
  bad.scale = 16;
  CHECK_NOTHROW(bad.validate());
  bad.scale = 3;  // only the studied factors are accepted
  CHECK_THROWS_AS(bad.validate(), UsageError);
}

TEST_CASE("LossConfig: l1 kind forces lambda to zero") {
  Config c = Config::defaults();
  LossConfig l = LossConfig::from(c);
  CHECK(l.kind == "l1_grad");
  CHECK(l.lambda == 0.05);

  c.set("loss.kind", "l1");
  LossConfig l2 = LossConfig::from(c);
  CHECK(l2.kind == "l1");
  CHECK(l2.lambda == 0.0);

  c.set("loss.kind", "huber");
  CHECK_THROWS_AS(LossConfig::from(c), UsageError);
}

TEST_CASE("TrainConfig mapping and validation") {
  Config c = Config::defaults();
  TrainConfig t = TrainConfig::from(c);
  CHECK(t.lr0 == 1e-4);
  CHECK(t.decay_factor == 0.3);
  CHECK(t.decay_every == 50);
  CHECK(t.epochs == 200);
  CHECK(t.scale == 4);  // follows model.scale
  CHECK_NOTHROW(t.validate());

  TrainConfig bad = t;
  bad.epochs = -1;
  CHECK_THROWS_AS(bad.validate(), UsageError);
  bad = t;
  bad.epochs = 0;  // zero epochs is a legal no-op run
  CHECK_NOTHROW(bad.validate());

  bad = t;
  bad.patch = 15;  // must be divisible by the token patch size
  CHECK_THROWS_AS(bad.validate(), UsageError);
  bad.patch = 28;
  CHECK_NOTHROW(bad.validate());

  bad = t;
  bad.batch_size = 2;  // single-sample pipeline
  CHECK_THROWS_AS(bad.validate(), UsageError);

  bad = t;
  bad.lr0 = 0.0;
  CHECK_THROWS_AS(bad.validate(), UsageError);
}
