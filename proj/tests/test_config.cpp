#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "lomap/config.hpp"
#include "lomap/error.hpp"
#include "lomap/io.hpp"

using namespace lomap;

namespace {

template <typename Fn>
int error_code(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return static_cast<int>(e.kind());
  }
  return 0;
}

}  // namespace

TEST_CASE("parses key=value lines with comments and blank lines") {
  Config cfg = Config::from_text(
      "# header comment\n"
      "alpha = 1.5\n"
      "\n"
      "name=four_room   # trailing comment\n"
      "  list = 1, 2,3 \n");
  CHECK(cfg.get_double("alpha", 0) == 1.5);
  CHECK(cfg.get_string("name", "") == "four_room");
  const std::vector<long> xs = cfg.get_long_list("list", {});
  REQUIRE(xs.size() == 3);
  CHECK(xs[0] == 1);
  CHECK(xs[2] == 3);
  CHECK(cfg.has("alpha"));
  CHECK(!cfg.has("missing"));
  CHECK(cfg.get_long("missing", 77) == 77);
}

TEST_CASE("malformed lines are parameter errors") {
  CHECK(error_code([] { Config::from_text("novalue\n"); }) == 2);
  CHECK(error_code([] { Config::from_text("=5\n"); }) == 2);
  CHECK(error_code([] { Config::from_text("a=1\nb\n"); }) == 2);
}

TEST_CASE("typed getters reject junk") {
  Config cfg = Config::from_text("x=abc\ny=1.5z\nflag=maybe\n");
  CHECK(error_code([&] { cfg.get_double("x", 0); }) == 2);
  CHECK(error_code([&] { cfg.get_long("y", 0); }) == 2);
  CHECK(error_code([&] { cfg.get_bool("flag", false); }) == 2);
  Config ok = Config::from_text("a=true\nb=0\nc=-7\n");
  CHECK(ok.get_bool("a", false));
  CHECK(!ok.get_bool("b", true));
  CHECK(ok.get_long("c", 0) == -7);
}

TEST_CASE("set overrides and rejects malformed keys") {
  Config cfg = Config::from_text("a=1\n");
  cfg.set("a", "2");
  CHECK(cfg.get_long("a", 0) == 2);
  CHECK(error_code([&] { cfg.set("bad=key", "1"); }) == 2);
  CHECK(error_code([&] { cfg.set("", "1"); }) == 2);
}

TEST_CASE("restrict_keys rejects unknown keys by name") {
  Config cfg = Config::from_text("known=1\nmystery=2\n");
  try {
    cfg.restrict_keys({"known"});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("mystery") != std::string::npos);
    CHECK(static_cast<int>(e.kind()) == 2);
  }
}

TEST_CASE("hash is order-independent and change-sensitive") {
  const Config a = Config::from_text("x=1\ny=2\n");
  const Config b = Config::from_text("y=2\nx=1\n");
  CHECK(a.hash() == b.hash());
  // independent oracle: hash is FNV-1a64 over sorted key=value lines
  CHECK(a.hash() == io::fnv1a64("x=1\ny=2\n"));
  const Config c = Config::from_text("x=1\ny=3\n");
  CHECK(a.hash() != c.hash());
  CHECK(Config().hash() == io::fnv1a64(""));
}

TEST_CASE("from_file reads and missing file is a data error") {
  const std::string path = "config_test_tmp.cfg";
  io::write_text_file(path, "k=v\n");
  Config cfg = Config::from_file(path);
  CHECK(cfg.get_string("k", "") == "v");
  std::remove(path.c_str());
  CHECK(error_code([&] { Config::from_file(path); }) == 3);
}

TEST_CASE("merge prefers override values") {
  Config base = Config::from_text("a=1\nb=2\n");
  Config over = Config::from_text("b=9\nc=3\n");
  base.merge(over);
  CHECK(base.get_long("a", 0) == 1);
  CHECK(base.get_long("b", 0) == 9);
  CHECK(base.get_long("c", 0) == 3);
}
