#include <doctest.h>

#include <filesystem>

#include "core/config.hpp"
#include "core/textio.hpp"

using namespace fgsmbench;

TEST_CASE("config defaults are valid and epsilon 0 is prepended") {
    ExperimentConfig cfg;
    cfg.validate_and_normalize();
    REQUIRE_FALSE(cfg.attack.epsilons.empty());
    CHECK(cfg.attack.epsilons.front() == 0.0);
    CHECK(cfg.dataset.n == 100);
    CHECK(cfg.dataset.size == 64);
    CHECK(cfg.split.train_fraction == 0.9);

    std::size_t zeros = 0;
    for (const double e : cfg.attack.epsilons) {
        if (e == 0.0) ++zeros;
    }
    CHECK(zeros == 1);

    // Normalizing twice must not duplicate the zero row.
    cfg.validate_and_normalize();
    zeros = 0;
    for (const double e : cfg.attack.epsilons) {
        if (e == 0.0) ++zeros;
    }
    CHECK(zeros == 1);
}

TEST_CASE("config file text parses into sections") {
    const char* text = R"(
# comment
[dataset]
source = synthetic
n = 20
size = 16
seed = 5

[split]
train_fraction = 0.75
seed = 6

[train]
learning_rate = 0.05
epochs = 2
batch_size = 4
seed = 7

[attack]
epsilons = 0.1, 0.2
clip = true

[metrics]
ssim_window = 8

[report]
out = somewhere
formats = csv,json
)";
    ExperimentConfig cfg = ExperimentConfig::parse_text(text);
    cfg.validate_and_normalize();
    CHECK(cfg.dataset.n == 20);
    CHECK(cfg.dataset.size == 16);
    CHECK(cfg.split.train_fraction == 0.75);
    CHECK(cfg.train.train.epochs == 2);
    REQUIRE(cfg.attack.epsilons.size() == 3);
    CHECK(cfg.attack.epsilons[0] == 0.0);
    CHECK(cfg.attack.epsilons[1] == 0.1);
    CHECK(cfg.report.out == "somewhere");
    CHECK(cfg.report.formats == std::vector<std::string>{"csv", "json"});
}

TEST_CASE("config rejects unknown keys, sections and bad values") {
    CHECK_THROWS_AS(ExperimentConfig::parse_text("[dataset]\nbogus = 1\n"), ParseError);
    CHECK_THROWS_AS(ExperimentConfig::parse_text("[nosuch]\nx = 1\n"), ParseError);
    CHECK_THROWS_AS(ExperimentConfig::parse_text("[dataset]\nn = ten\n"), ParseError);
    CHECK_THROWS_AS(ExperimentConfig::parse_text("key_without_section = 1\n"), ParseError);
    CHECK_THROWS_AS(ExperimentConfig::parse_text("[dataset\nn = 10\n"), ParseError);
    CHECK_THROWS_AS(ExperimentConfig::parse_text("[attack]\ngrid = gigantic\n"), ParseError);
    CHECK_THROWS_AS(ExperimentConfig::parse_text("[attack]\nnorm = l2\n"), ParseError);

    ExperimentConfig eps_range = ExperimentConfig::parse_text("[attack]\nepsilons = 2.0\n");
    CHECK_THROWS_AS(eps_range.validate_and_normalize(), ParseError);

    ExperimentConfig bad_frac = ExperimentConfig::parse_text("[split]\ntrain_fraction = 1.5\n");
    CHECK_THROWS_AS(bad_frac.validate_and_normalize(), ParseError);

    ExperimentConfig no_manifest =
        ExperimentConfig::parse_text("[dataset]\nsource = manifest\n");
    CHECK_THROWS_AS(no_manifest.validate_and_normalize(), ParseError);

    ExperimentConfig window = ExperimentConfig::parse_text(
        "[dataset]\nsize = 16\n[metrics]\nssim_window = 32\n");
    CHECK_THROWS_AS(window.validate_and_normalize(), ParseError);
}

TEST_CASE("epsilon grids carry the documented values") {
    CHECK(epsilon_grid("small") == std::vector<double>{0.001, 0.005, 0.01, 0.02, 0.05});
    CHECK(epsilon_grid("high") == std::vector<double>{0.1, 0.2, 0.3, 0.5, 0.7, 0.9});
    CHECK(epsilon_grid("full").size() == 11);
    CHECK_THROWS_AS(epsilon_grid("medium"), ParseError);
}

TEST_CASE("experiment.seed spreads across stage seeds") {
    ExperimentConfig cfg;
    cfg.set("experiment.seed", "100");
    CHECK(cfg.dataset.seed == 100);
    CHECK(cfg.split.seed == 101);
    CHECK(cfg.train.train.seed == 102);

    // Explicit stage seeds set afterwards still win.
    cfg.set("train.seed", "7");
    CHECK(cfg.train.train.seed == 7);
}

TEST_CASE("config echo reflects the effective state") {
    ExperimentConfig cfg;
    cfg.set("dataset.n", "42");
    const auto echo = cfg.echo();
    CHECK(echo.at("dataset.n") == "42");
    CHECK(echo.at("attack.norm") == "infinity");
    CHECK(echo.at("split.train_fraction") == "0.9");
}

TEST_CASE("the shipped default config equals the built-in defaults") {
    // configs/default.ini documents the defaults; parsing it must change
    // nothing. An empty config text must behave the same way.
    const auto here = std::filesystem::path(__FILE__).parent_path();
    const auto shipped_path = here / ".." / "configs" / "default.ini";
    REQUIRE(std::filesystem::exists(shipped_path));
    ExperimentConfig shipped = ExperimentConfig::parse_file(shipped_path.string());
    ExperimentConfig builtin;
    ExperimentConfig empty = ExperimentConfig::parse_text("");
    shipped.validate_and_normalize();
    builtin.validate_and_normalize();
    empty.validate_and_normalize();
    CHECK(shipped.echo() == builtin.echo());
    CHECK(empty.echo() == builtin.echo());
}

TEST_CASE("numbers serialize with six significant digits and no locale") {
    CHECK(fmt_g6(0.0) == "0");
    CHECK(fmt_g6(1.0) == "1");
    CHECK(fmt_g6(0.1) == "0.1");
    CHECK(fmt_g6(0.123456789) == "0.123457");
    CHECK(fmt_g6(1234567.0) == "1.23457e+06");
    CHECK(fmt_g6(-0.000437638123) == "-0.000437638");
    CHECK(fmt_f6(1.0) == "1.000000");
    CHECK(fmt_f6(0.2905951) == "0.290595");
}
