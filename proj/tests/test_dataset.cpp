#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <stdexcept>

#include "editodds/dataset.hpp"
#include "support.hpp"

using namespace editodds;
namespace ts = testsupport;

namespace {

const char* kSmallTsv =
    "user\titem\tq\tts\n"
    "bob\tpage/b\t0.25\t300\n"
    "ana\tpage/a\t1\t100\n"
    "ana\tpage/b\t0.75\t200\n"
    "cyd\tpage/a\t0\t100\n";

}  // namespace

TEST_CASE("loader sorts by time then assigns first-appearance indices") {
    const auto dir = ts::unique_temp_dir("load");
    const auto path = dir / "obs.tsv";
    ts::write_file(path, kSmallTsv);

    const Dataset ds = load_observations(path.string());
    REQUIRE(ds.size() == 4);

    // Sorted order: (100, ana), (100, cyd), (200, ana), (300, bob).
    CHECK(ds.users.ids() == std::vector<std::string>{"ana", "cyd", "bob"});
    CHECK(ds.items.ids() == std::vector<std::string>{"page/a", "page/b"});
    CHECK(ds.observations[0].ts == 100);
    CHECK(ds.observations[0].user == 0);
    CHECK(ds.observations[1].user == 1);
    CHECK(ds.observations[2].q == 0.75);
    CHECK(ds.observations[3].user == 2);

    CHECK(ds.user_counts == std::vector<long>{2, 1, 1});
    CHECK(ds.item_counts == std::vector<long>{2, 2});
    CHECK(ds.mean_q() == doctest::Approx(0.5).epsilon(1e-15));
    std::filesystem::remove_all(dir);
}

TEST_CASE("reloading a sorted dump reproduces identical indices") {
    const auto dir = ts::unique_temp_dir("reload");
    const auto first = dir / "a.tsv";
    ts::write_file(first, kSmallTsv);
    const Dataset ds = load_observations(first.string());

    // Re-dump in the sorted order the loader produced.
    std::string dump = "user\titem\tq\tts\n";
    char buf[64];
    for (const auto& o : ds.observations) {
        std::snprintf(buf, sizeof(buf), "%.9g", o.q);
        dump += ds.users.id(o.user) + "\t" + ds.items.id(o.item) + "\t" + buf + "\t" +
                std::to_string(o.ts) + "\n";
    }
    const auto second = dir / "b.tsv";
    ts::write_file(second, dump);
    const Dataset again = load_observations(second.string());

    CHECK(again.users.ids() == ds.users.ids());
    CHECK(again.items.ids() == ds.items.ids());
    REQUIRE(again.size() == ds.size());
    for (long i = 0; i < ds.size(); ++i) {
        CHECK(again.observations[i].user == ds.observations[i].user);
        CHECK(again.observations[i].item == ds.observations[i].item);
        CHECK(again.observations[i].q == ds.observations[i].q);
        CHECK(again.observations[i].ts == ds.observations[i].ts);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("loader accepts blank lines and CRLF endings") {
    const auto dir = ts::unique_temp_dir("crlf");
    const auto path = dir / "obs.tsv";
    ts::write_file(path, "user\titem\tq\tts\r\n\r\nana\tpage/a\t0.5\t100\r\n");
    const Dataset ds = load_observations(path.string());
    REQUIRE(ds.size() == 1);
    CHECK(ds.observations[0].q == 0.5);
    CHECK(ds.items.id(0) == "page/a");
    std::filesystem::remove_all(dir);
}

TEST_CASE("loader errors name the offending line") {
    const auto dir = ts::unique_temp_dir("loaderr");
    const auto path = (dir / "obs.tsv").string();
    auto expect_error = [&](std::string_view content, const char* fragment) {
        ts::write_file(path, content);
        CHECK_THROWS_WITH_AS(load_observations(path), doctest::Contains(fragment),
                             std::runtime_error);
    };
    expect_error("user\titem\tq\tts\nana\tpage/a\t0.5\t100\nana\tpage/a\t1.5\t200\n",
                 ":3: q = 1.5 outside [0, 1]");
    expect_error("user\titem\tq\tts\nana\tpage/a\tabc\t100\n", "cannot parse q value 'abc'");
    expect_error("user\titem\tq\tts\nana\tpage/a\t0.5\t1x0\n", "cannot parse timestamp '1x0'");
    expect_error("user\titem\tq\tts\nana\tpage/a\t0.5\n", ":2:");
    expect_error("ana\tpage/a\t0.5\t100\n", "expected header");
    expect_error("user\titem\tq\tts\nuser\titem\tq\tts\n", "duplicate header row");
    expect_error("", "missing header row");
    CHECK_THROWS_WITH_AS(load_observations((dir / "absent.tsv").string()),
                         doctest::Contains("cannot open"), std::runtime_error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("pruning drops empty ids and never-accepted items") {
    const auto dir = ts::unique_temp_dir("prune");
    const auto path = dir / "obs.tsv";
    ts::write_file(path,
                   "user\titem\tq\tts\n"
                   "\tpage/a\t1\t100\n"       // empty user
                   "ana\t\t1\t110\n"           // empty item
                   "ana\tpage/bad\t0.2\t120\n" // item with no accepted row
                   "bob\tpage/bad\t0.4\t130\n"
                   "ana\tpage/ok\t0.9\t140\n"
                   "bob\tpage/ok\t0.1\t150\n");

    const Dataset plain = load_observations(path.string());
    CHECK(plain.size() == 6);

    const Dataset pruned = load_observations(path.string(), {.prune = true});
    REQUIRE(pruned.size() == 2);
    CHECK(pruned.items.ids() == std::vector<std::string>{"page/ok"});
    CHECK(pruned.users.ids() == std::vector<std::string>{"ana", "bob"});
    CHECK(pruned.user_counts == std::vector<long>{1, 1});
    CHECK(pruned.item_counts == std::vector<long>{2});
    std::filesystem::remove_all(dir);
}

TEST_CASE("chronological split keeps the vocabulary on both sides") {
    std::vector<ts::Row> rows;
    for (int i = 0; i < 10; ++i) rows.push_back({i % 3, i % 2, 1.0, 1000 + i});
    const Dataset ds = ts::make_dataset(rows);

    const auto [train, val] = chronological_split(ds, 0.8);
    CHECK(train.size() == 8);
    CHECK(val.size() == 2);
    CHECK(train.users.size() == ds.users.size());
    CHECK(val.users.size() == ds.users.size());
    CHECK(val.items.size() == ds.items.size());
    CHECK(train.observations.back().ts < val.observations.front().ts);

    long train_total = 0;
    for (long c : train.user_counts) train_total += c;
    CHECK(train_total == 8);
    long val_total = 0;
    for (long c : val.item_counts) val_total += c;
    CHECK(val_total == 2);

    SUBCASE("explicit row split matches") {
        const auto [t2, v2] = split_at_row(ds, 8);
        CHECK(t2.size() == train.size());
        CHECK(v2.observations.front().ts == val.observations.front().ts);
    }
    SUBCASE("degenerate fractions are rejected") {
        CHECK_THROWS_AS(chronological_split(ds, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(chronological_split(ds, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(chronological_split(ds, 0.01), std::invalid_argument);  // empty train
        CHECK_THROWS_AS(split_at_row(ds, 10), std::invalid_argument);
        CHECK_THROWS_AS(split_at_row(ds, 0), std::invalid_argument);
    }
}

TEST_CASE("binarization threshold sits at one half") {
    CHECK(binarize(0.49) == Label::bad);
    CHECK(binarize(0.5) == Label::good);
    CHECK(is_good(0.5));
    CHECK_FALSE(is_good(0.499999));
    CHECK(is_good(1.0));
    CHECK_FALSE(is_good(0.0));
}

TEST_CASE("frequency bins") {
    const BinSpec spec;
    CHECK(bin_index(0, spec) == 0);
    CHECK(bin_index(1, spec) == 1);
    CHECK(bin_index(9, spec) == 1);
    CHECK(bin_index(10, spec) == 2);
    CHECK(bin_index(99, spec) == 2);
    CHECK(bin_index(100, spec) == 3);
    CHECK(bin_index(999, spec) == 3);
    CHECK(bin_index(1000, spec) == 4);
    CHECK(bin_index(123456, spec) == 4);
    CHECK_THROWS_AS(bin_index(-1, spec), std::invalid_argument);

    CHECK(bin_label(spec, 0) == "[0,1)");
    CHECK(bin_label(spec, 1) == "[1,10)");
    CHECK(bin_label(spec, 2) == "[10,100)");
    CHECK(bin_label(spec, 4) == "[1000,inf)");
    CHECK_THROWS_AS(bin_label(spec, 5), std::out_of_range);

    const std::vector<long> counts{0, 5, 1000};
    CHECK(bin_by_frequency(counts, spec) == std::vector<int>{0, 1, 4});

    SUBCASE("malformed edge lists are rejected") {
        CHECK_THROWS_AS(bin_index(1, BinSpec{{1, 10}}), std::invalid_argument);
        CHECK_THROWS_AS(bin_index(1, BinSpec{{0, 10, 10}}), std::invalid_argument);
    }
}

TEST_CASE("split manifest round-trips") {
    const auto dir = ts::unique_temp_dir("manifest");
    const auto path = (dir / "ckpt.json.split.json").string();
    const SplitManifest manifest{1234, 567, 1700000000};
    write_split_manifest(path, manifest);
    const SplitManifest back = read_split_manifest(path);
    CHECK(back.train_rows == 1234);
    CHECK(back.val_rows == 567);
    CHECK(back.boundary_ts == 1700000000);

    CHECK_THROWS_WITH_AS(read_split_manifest((dir / "absent.json").string()),
                         doctest::Contains("cannot open"), std::runtime_error);
    ts::write_file(dir / "bad.json", "{oops");
    CHECK_THROWS_WITH_AS(read_split_manifest((dir / "bad.json").string()),
                         doctest::Contains("not valid JSON"), std::runtime_error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("mean of an empty dataset is an error") {
    Dataset empty;
    CHECK_THROWS_AS(empty.mean_q(), std::invalid_argument);
}
