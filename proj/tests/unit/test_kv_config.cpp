#include <doctest.h>

#include <fstream>
#include <sstream>

#include "superpure/errors.hpp"
#include "superpure/kv_config.hpp"
#include "test_support.hpp"

using superpure::ConfigError;
using superpure::KeyValues;

TEST_SUITE("settings") {

TEST_CASE("key-value settings") {
  std::istringstream in(
      "# comment\n"
      "\n"
      "lambda = 0.5\n"
      "max-iters=12   # trailing\n"
      "enhance = yes\n"
      "values = 1, 2.5 ,3\n"
      "name = down_up\n");
  const auto kv = KeyValues::parse(in);
  CHECK(kv.get_double("lambda", 0.7) == 0.5);
  CHECK(kv.get_int("max_iters", 30) == 12);
  CHECK(kv.get_bool("enhance", false));
  CHECK(kv.get_doubles("values") == std::vector<double>{1.0, 2.5, 3.0});
  CHECK(kv.get_double("epsilon", 4.0) == 4.0);
  CHECK(kv.unused() == std::vector<std::string>{"name"});
  CHECK(kv.get_string("name", "") == "down_up");
  CHECK(kv.unused().empty());
}

TEST_CASE("malformed settings") {
  std::istringstream no_equals("lambda 0.5\n");
  CHECK_THROWS_AS(KeyValues::parse(no_equals), ConfigError);

  std::istringstream values("a = x\nb = 1.5\nc = maybe\n");
  const auto kv = KeyValues::parse(values);
  CHECK_THROWS_AS(kv.get_double("a", 0), ConfigError);
  CHECK_THROWS_AS(kv.get_int("b", 0), ConfigError);
  CHECK_THROWS_AS(kv.get_bool("c", false), ConfigError);
  CHECK_THROWS_AS(superpure::parse_number_list("1,,x"), ConfigError);
  CHECK(superpure::parse_number_list("").empty());
}

TEST_CASE("settings files") {
  superpure::testing::TempDir dir("kv");
  {
    std::ofstream f(dir / "run.conf");
    f << "lambda = 0.6\n";
  }
  CHECK(KeyValues::load(dir / "run.conf").get_double("lambda", 0) == 0.6);
  CHECK_THROWS_AS(KeyValues::load(dir / "missing.conf"), ConfigError);
}

}
