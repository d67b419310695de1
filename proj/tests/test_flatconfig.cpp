#include "doctest.h"
#include "umom/errors.hpp"
#include "umom/flatconfig.hpp"

using namespace umom;

TEST_CASE("flat config parsing") {
    const auto config = FlatConfig::parse(
        "# experiment\n"
        "dist=student_t\n"
        "dof = 5\n"
        "scale=1 # inline comment\n"
        "\n"
        "seed=42\n");
    CHECK(config.get_string("dist") == "student_t");
    CHECK(config.get_double("dof") == 5.0);
    CHECK(config.get_double("scale") == 1.0);
    CHECK(config.get_uint64("seed") == 42);
    CHECK(config.get_int_or("missing", 7) == 7);
}

TEST_CASE("flat config rejects malformed input") {
    CHECK_THROWS_AS(FlatConfig::parse("novalue\n"), ConfigError);
    CHECK_THROWS_AS(FlatConfig::parse("a=1\na=2\n"), ConfigError);
    CHECK_THROWS_AS(FlatConfig::parse("=5\n"), ConfigError);

    const auto config = FlatConfig::parse("k=ten\n");
    CHECK_THROWS_AS(config.get_int("k"), ConfigError);
    try {
        config.get_int("k");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "k");
    }
    CHECK_THROWS_AS(config.get_string("absent"), ConfigError);
}

TEST_CASE("unknown keys are a hard error naming the stray key") {
    const auto config = FlatConfig::parse("estmator=sample_mean\n");
    try {
        config.require_known_keys({"estimator", "k", "m"});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "estmator");
    }
}

TEST_CASE("boolean values") {
    const auto config = FlatConfig::parse("a=true\nb=0\nc=maybe\n");
    CHECK(config.get_bool_or("a", false));
    CHECK_FALSE(config.get_bool_or("b", true));
    CHECK(config.get_bool_or("absent", true));
    CHECK_THROWS_AS(config.get_bool_or("c", true), ConfigError);
}

TEST_CASE("doubles format with shortest round-trip text") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(2.0) == "2");
    CHECK(parse_double(format_double(0.1), "x") == 0.1);
    CHECK(parse_double("1e-3", "x") == 1e-3);
    CHECK_THROWS_AS(parse_double("1,5", "x"), ConfigError);
}
