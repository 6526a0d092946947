#include <doctest.h>

#include "subit/config.hpp"
#include "subit/errors.hpp"

using namespace subit;

TEST_CASE("config parsing") {
    const Config cfg = Config::parse(
        "top = 1\n"
        "# comment\n"
        "[battery]\n"
        "seed = 42   ; trailing comment\n"
        "lr = 0.001\n"
        "strict = true\n"
        "name = baseline run\n");
    CHECK(cfg.get_int("top", 0) == 1);
    CHECK(cfg.get_int("battery.seed", 0) == 42);
    CHECK(cfg.get_double("battery.lr", 0) == doctest::Approx(0.001));
    CHECK(cfg.get_bool("battery.strict", false));
    CHECK(cfg.get_string("battery.name", "") == "baseline run");
    CHECK(cfg.get_int("battery.missing", 7) == 7);
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS((void)Config::parse("[unterminated\n"), ConfigError);
    CHECK_THROWS_AS((void)Config::parse("novalue\n"), ConfigError);
    const Config cfg = Config::parse("x = abc\n");
    CHECK_THROWS_AS((void)cfg.get_int("x", 0), ConfigError);
    CHECK_THROWS_AS((void)cfg.get_bool("x", false), ConfigError);
}

TEST_CASE("config hash is stable and order independent") {
    const Config a = Config::parse("b = 2\na = 1\n");
    const Config b = Config::parse("a = 1\nb = 2\n");
    CHECK(a.hash() == b.hash());
    Config c = a;
    c.set("c", "3");
    CHECK(c.hash() != a.hash());
}
