#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <stdexcept>

#include <json.hpp>

#include "editodds/checkpoint.hpp"
#include "editodds/logistic.hpp"
#include "editodds/model.hpp"
#include "support.hpp"

using namespace editodds;
namespace ts = testsupport;

// Reference values computed with 50-digit arithmetic, rounded to 20 digits.
constexpr double kLogistic1 = 0.73105857863000487925;
constexpr double kLogistic2 = 0.88079707797788244406;
constexpr double kLogisticMinus2 = 0.11920292202211755594;

TEST_CASE("logistic matches high-precision references") {
    CHECK(logistic(1.0) == doctest::Approx(kLogistic1).epsilon(1e-15));
    CHECK(logistic(2.0) == doctest::Approx(kLogistic2).epsilon(1e-15));
    CHECK(logistic(-2.0) == doctest::Approx(kLogisticMinus2).epsilon(1e-15));
    CHECK(logistic(0.0) == 0.5);
}

TEST_CASE("logistic stays inside the open unit interval at extreme arguments") {
    CHECK(logistic(1000.0) < 1.0);
    CHECK(logistic(-1000.0) > 0.0);
    CHECK(std::isfinite(std::log(logistic(-1000.0))));
    CHECK(std::isfinite(std::log1p(-logistic(1000.0))));
    CHECK(clamp_probability(0.0) > 0.0);
    CHECK(clamp_probability(1.0) < 1.0);
    CHECK(clamp_probability(0.25) == 0.25);
}

TEST_CASE("variant names round-trip") {
    for (Variant v : {Variant::average, Variant::user_only, Variant::basic, Variant::full,
                      Variant::glad}) {
        CHECK(variant_from_name(variant_name(v)) == v);
    }
    CHECK(variant_from_name("user_only") == Variant::user_only);
    CHECK(variant_from_name("user-only") == Variant::user_only);
    CHECK_THROWS_AS(variant_from_name("bilinear"), std::invalid_argument);
}

TEST_CASE("prediction formulas") {
    SUBCASE("average returns its stored probability") {
        CHECK(predict_average(AverageParams{0.7}) == 0.7);
    }
    SUBCASE("user-only is logistic(s_u + b)") {
        UserOnlyParams p{1.0, {0.0, 1.0}};
        CHECK(predict_user_only(p.b, p.s, 0) == doctest::Approx(kLogistic1).epsilon(1e-15));
        CHECK(predict_user_only(p.b, p.s, 1) == doctest::Approx(kLogistic2).epsilon(1e-15));
    }
    SUBCASE("basic is logistic(s_u - d_i + b)") {
        BasicParams p{1.0, {2.0}, {1.0, 5.0}};
        CHECK(predict_basic(p, 0, 0) == doctest::Approx(kLogistic2).epsilon(1e-15));
        CHECK(predict_basic(p, 0, 1) == doctest::Approx(kLogisticMinus2).epsilon(1e-15));
    }
    SUBCASE("full adds the bilinear term to the basic score") {
        FullParams p;
        p.base = BasicParams{0.0, {0.0}, {0.0}};
        p.dim = 2;
        p.x = {1.0, 2.0};
        p.y = {3.0, -1.0};  // dot = 1
        CHECK(predict_full(p, 0, 0) == doctest::Approx(kLogistic1).epsilon(1e-15));
        p.base.b = 1.0;  // z = 2
        CHECK(predict_full(p, 0, 0) == doctest::Approx(kLogistic2).epsilon(1e-15));
    }
    SUBCASE("glad divides skill by exp(beta)") {
        GladParams p{0.0, {2.0}, {std::log(2.0)}};
        CHECK(predict_glad(p, 0, 0) == doctest::Approx(kLogistic1).epsilon(1e-15));
        p.beta[0] = 0.0;
        CHECK(predict_glad(p, 0, 0) == doctest::Approx(kLogistic2).epsilon(1e-15));
    }
}

namespace {

Predictor small_basic() {
    Vocabulary users;
    users.add("alice");
    users.add("bob");
    Vocabulary items;
    items.add("page/a");
    items.add("page/b");
    items.add("page/c");
    BasicParams p{0.5, {1.0, -0.5}, {0.25, -1.0, 2.0}};
    return Predictor(Params{p}, std::move(users), std::move(items), 0.722);
}

}  // namespace

TEST_CASE("predictor index lookups match the free functions") {
    const Predictor pred = small_basic();
    const auto& p = std::get<BasicParams>(pred.params());
    for (int u = 0; u < 2; ++u) {
        for (int i = 0; i < 3; ++i) {
            CHECK(pred.predict(u, i) == predict_basic(p, u, i));
        }
    }
    CHECK_THROWS_AS(pred.predict(2, 0), std::out_of_range);
    CHECK_THROWS_AS(pred.predict(0, 3), std::out_of_range);
    CHECK_THROWS_AS(pred.predict(-1, 0), std::out_of_range);
}

TEST_CASE("raw-id prediction applies the fallback ladder") {
    const Predictor pred = small_basic();

    SUBCASE("seen pair routes through the index path") {
        CHECK(pred.predict("alice", "page/b") == pred.predict(0, 1));
    }
    SUBCASE("both ids unseen returns the stored fallback") {
        CHECK(pred.predict("nobody", "page/zz") == 0.722);
    }
    SUBCASE("unseen user scores with skill zero") {
        // z = 0 - d_0 + b = 0.25
        CHECK(pred.predict("nobody", "page/a") == logistic(0.5 - 0.25));
    }
    SUBCASE("unseen item scores with difficulty zero") {
        // z = s_0 - 0 + b = 1.5
        CHECK(pred.predict("alice", "page/zz") == logistic(1.0 + 0.5));
    }
}

TEST_CASE("raw-id prediction for the glad variant treats an unseen item as difficulty one") {
    Vocabulary users;
    users.add("alice");
    Vocabulary items;
    items.add("page/a");
    GladParams p{0.5, {1.5}, {std::log(3.0)}};
    const Predictor pred(Params{p}, std::move(users), std::move(items), 0.5);
    CHECK(pred.predict("alice", "page/zz") == logistic(1.5 + 0.5));  // beta = 0
    CHECK(pred.predict("nobody", "page/a") == logistic(0.5));        // skill = 0
}

TEST_CASE("full-variant raw-id prediction zeroes the unseen side's embedding") {
    Vocabulary users;
    users.add("alice");
    Vocabulary items;
    items.add("page/a");
    FullParams p;
    p.base = BasicParams{0.25, {1.0}, {0.5}};
    p.dim = 2;
    p.x = {3.0, 4.0};
    p.y = {1.0, 1.0};
    const Predictor pred(Params{p}, std::move(users), std::move(items), 0.5);
    CHECK(pred.predict("alice", "page/a") == logistic(1.0 - 0.5 + 7.0 + 0.25));
    CHECK(pred.predict("alice", "page/zz") == logistic(1.0 - 0.0 + 0.0 + 0.25));
    CHECK(pred.predict("nobody", "page/a") == logistic(0.0 - 0.5 + 0.0 + 0.25));
    CHECK(pred.dim() == 2);
}

TEST_CASE("item difficulties per variant") {
    SUBCASE("basic exposes d directly") {
        const Predictor pred = small_basic();
        CHECK(pred.has_difficulty());
        CHECK(pred.item_difficulties() == std::vector<double>{0.25, -1.0, 2.0});
    }
    SUBCASE("glad exposes exp(beta)") {
        Vocabulary users;
        users.add("u");
        Vocabulary items;
        items.add("i");
        const Predictor pred(Params{GladParams{0.0, {0.0}, {std::log(4.0)}}}, std::move(users),
                             std::move(items), 0.5);
        CHECK(pred.has_difficulty());
        CHECK(pred.item_difficulties()[0] == doctest::Approx(4.0).epsilon(1e-15));
    }
    SUBCASE("user-only has none") {
        Vocabulary users;
        users.add("u");
        const Predictor pred(Params{UserOnlyParams{0.0, {0.0}}}, std::move(users), Vocabulary{},
                             0.5);
        CHECK_FALSE(pred.has_difficulty());
        CHECK_THROWS_AS(pred.item_difficulties(), std::invalid_argument);
    }
}

TEST_CASE("predictor construction validates shapes and probabilities") {
    Vocabulary users;
    users.add("u");
    Vocabulary items;
    items.add("i");
    CHECK_THROWS_AS(Predictor(Params{BasicParams{0.0, {0.0, 0.0}, {0.0}}}, users, items, 0.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(Predictor(Params{BasicParams{0.0, {0.0}, {0.0}}}, users, items, 1.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(Predictor(Params{AverageParams{-0.1}}, users, items, 0.5),
                    std::invalid_argument);
    FullParams bad;
    bad.base = BasicParams{0.0, {0.0}, {0.0}};
    bad.dim = 2;
    bad.x = {0.0, 0.0};
    bad.y = {0.0};  // wrong length
    CHECK_THROWS_AS(Predictor(Params{bad}, users, items, 0.5), std::invalid_argument);
}

TEST_CASE("checkpoint save/load/save reproduces the file byte for byte") {
    const auto dir = ts::unique_temp_dir("ckpt");
    const auto first = dir / "model.json";
    const auto second = dir / "model2.json";

    FullParams p;
    p.base = BasicParams{0.125, {0.5, -1.5}, {0.75, 2.0, -0.0625}};
    p.dim = 2;
    p.x = {0.1, -0.2, 0.3, 0.4};
    p.y = {1e-17, 2.5, -3.125, 0.0, 1.0 / 3.0, 7.0};
    Vocabulary users;
    users.add("alice");
    users.add("bob");
    Vocabulary items;
    items.add("page/a");
    items.add("page/b");
    items.add("ünïcode");
    const Predictor pred(Params{p}, users, items, 0.7);

    save_checkpoint(pred, first.string());
    const Predictor loaded = load_checkpoint(first.string());
    save_checkpoint(loaded, second.string());

    CHECK(ts::read_file(first) == ts::read_file(second));
    CHECK(loaded.variant() == Variant::full);
    CHECK(loaded.fallback() == 0.7);
    CHECK(loaded.users().ids() == users.ids());
    CHECK(loaded.items().ids() == items.ids());
    for (int u = 0; u < 2; ++u) {
        for (int i = 0; i < 3; ++i) {
            CHECK(loaded.predict(u, i) == pred.predict(u, i));
        }
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("checkpoint loader rejects bad files") {
    const auto dir = ts::unique_temp_dir("ckpt_bad");
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_checkpoint((dir / "absent.json").string()), std::runtime_error);
    }
    SUBCASE("not JSON") {
        const auto path = dir / "garbage.json";
        ts::write_file(path, "not a checkpoint");
        CHECK_THROWS_WITH_AS(load_checkpoint(path.string()),
                             doctest::Contains("not valid JSON"), std::runtime_error);
    }
    SUBCASE("unknown format version") {
        const auto path = dir / "v99.json";
        const Predictor pred = small_basic();
        save_checkpoint(pred, path.string());
        auto doc = nlohmann::json::parse(ts::read_file(path));
        doc["format_version"] = 99;
        ts::write_file(path, doc.dump(2) + "\n");
        CHECK_THROWS_WITH_AS(load_checkpoint(path.string()),
                             doctest::Contains("format_version"), std::runtime_error);
    }
    std::filesystem::remove_all(dir);
}
