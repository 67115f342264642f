#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "glove/data.hpp"
#include "glove/errors.hpp"
#include "glove/metrics.hpp"

using namespace glove;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    REQUIRE(f);
    f << text;
}

LabeledSession nice_session(const std::string& id, size_t n) {
    // values exactly representable at the CSV print precision
    LabeledSession s;
    s.id = id;
    for (size_t i = 0; i < n; ++i) {
        SensorFrame f;
        f.t = double(i) / 50.0;
        f.accel = {float(i % 5) * 0.015625f, -0.25f, float(i % 3) * 0.5f};
        f.cap = {1000.0f + float(i % 7) * 0.125f, 1100.5f, 1200.0f,
                 900.0f - float(i % 4) * 0.25f};
        s.frames.push_back(f);
        s.labels.push_back(int(i / 10) % kNumClasses);
    }
    return s;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const char* tag)
        : path(fs::temp_directory_path() / tag) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("csv write/read round trip is exact and stable") {
    TempDir dir("glove_csv_test");
    auto s = nice_session("session_00", 60);
    auto p1 = dir.path / "session_00.csv";
    write_session_csv(p1, s);

    auto s2 = read_session_csv(p1);
    CHECK(s2.id == "session_00");
    REQUIRE(s2.frames.size() == s.frames.size());
    REQUIRE(s2.labels == s.labels);
    for (size_t i = 0; i < s.frames.size(); ++i) {
        CHECK(s2.frames[i].t == s.frames[i].t);
        CHECK(s2.frames[i].accel == s.frames[i].accel);
        CHECK(s2.frames[i].cap == s.frames[i].cap);
    }

    // a second write of the parsed session is byte-identical
    auto p2 = dir.path / "again.csv";
    write_session_csv(p2, s2);
    CHECK(slurp(p2) == slurp(p1));
}

TEST_CASE("csv errors carry the file and line number") {
    TempDir dir("glove_csv_err_test");
    const std::string header = "t,ax,ay,az,c1,c2,c3,c4,label\n";
    const std::string good = "0.020,0,0,0,1000,1000,1000,1000,0\n";

    auto expect_throw_with = [&](const std::string& text,
                                 const std::string& needle) {
        auto p = dir.path / "bad.csv";
        spit(p, text);
        try {
            read_session_csv(p);
            FAIL_CHECK("expected DataError for ", needle);
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };

    expect_throw_with("time,stuff\n", ":1:");
    expect_throw_with(header + good + "0.040,0,0\n", ":3:");
    expect_throw_with(header + "0.020,x,0,0,1,1,1,1,0\n", "accel");
    expect_throw_with(header + "0.020,0,0,0,1,1,1,1,9\n", "label");
    expect_throw_with(header + good + "0.020,0,0,0,1,1,1,1,0\n",
                      "strictly increasing");
    expect_throw_with(header, "no frames");
    expect_throw_with("", "empty");

    CHECK_THROWS_AS(read_session_csv(dir.path / "missing.csv"), DataError);

    // CRLF input parses fine
    auto p = dir.path / "crlf.csv";
    spit(p, "t,ax,ay,az,c1,c2,c3,c4,label\r\n0.020,0,0,0,1,1,1,1,3\r\n");
    auto s = read_session_csv(p);
    REQUIRE(s.frames.size() == 1);
    CHECK(s.labels[0] == 3);
}

TEST_CASE("datasets load sorted by filename") {
    TempDir dir("glove_dataset_test");
    for (const char* id : {"session_02", "session_00", "session_01"})
        write_session_csv(dir.path / (std::string(id) + ".csv"),
                          nice_session(id, 12));
    spit(dir.path / "notes.txt", "ignored\n");

    auto d = load_dataset(dir.path);
    REQUIRE(d.sessions.size() == 3);
    CHECK(d.sessions[0].id == "session_00");
    CHECK(d.sessions[1].id == "session_01");
    CHECK(d.sessions[2].id == "session_02");

    CHECK_THROWS_AS(load_dataset(dir.path / "nope"), DataError);
    TempDir empty("glove_dataset_empty");
    CHECK_THROWS_AS(load_dataset(empty.path), DataError);
}

TEST_CASE("leave-one-session-out folds partition the dataset") {
    for (size_t n : {size_t(2), size_t(3), size_t(5)}) {
        Dataset d;
        for (size_t i = 0; i < n; ++i)
            d.sessions.push_back(nice_session("s" + std::to_string(i), 5));
        auto folds = loso_folds(d);
        REQUIRE(folds.size() == n);
        std::set<size_t> tested;
        for (const auto& f : folds) {
            CHECK(tested.insert(f.test).second);  // each session tested once
            CHECK(f.train.size() == n - 1);
            std::set<size_t> all(f.train.begin(), f.train.end());
            CHECK(all.count(f.test) == 0);  // disjoint
            all.insert(f.test);
            CHECK(all.size() == n);  // covering
        }
    }

    Dataset one;
    one.sessions.push_back(nice_session("solo", 5));
    try {
        loso_folds(one);
        FAIL_CHECK("expected DataError");
    } catch (const DataError& e) {
        // the message tells the user what to do about it
        CHECK(std::string(e.what()).find("at least 2 sessions") !=
              std::string::npos);
    }
}

TEST_CASE("window labels take the majority frame label") {
    std::vector<int> all5(100, 5);
    CHECK(window_label(all5, 0, 100) == 5);

    std::vector<int> half(100, 0);
    std::fill(half.begin() + 50, half.end(), 3);
    CHECK(window_label(half, 0, 100) == 0);  // tie goes to null

    std::vector<int> majority7(100, 0);
    std::fill(majority7.begin() + 40, majority7.end(), 7);
    CHECK(window_label(majority7, 0, 100) == 7);

    std::vector<int> tie23 = {2, 2, 3, 3, 0};
    CHECK(window_label(tie23, 0, 5) == 2);  // ties pick the smaller label

    CHECK_THROWS_AS(window_label(all5, 50, 100), DataError);
}

TEST_CASE("session windows carry aligned labels and normalized data") {
    auto s = nice_session("w", 150);
    std::fill(s.labels.begin(), s.labels.end(), 0);
    std::fill(s.labels.begin() + 25, s.labels.begin() + 125, 4);

    auto sw = session_windows(s, 100, 25);
    REQUIRE(sw.inertial.size() == 3);
    REQUIRE(sw.capacitive.size() == 3);
    CHECK(sw.starts == std::vector<size_t>{0, 25, 50});
    CHECK(sw.labels == std::vector<int>{4, 4, 4});
    CHECK(sw.gesture == std::vector<int>{1, 1, 1});
    for (const auto& t : sw.inertial) {
        CHECK(t.ch == 3);
        CHECK(t.len == 100);
        for (float v : t.v) {
            CHECK(v >= 0.0f);
            CHECK(v <= 1.0f);
        }
    }
    for (const auto& t : sw.capacitive) CHECK(t.ch == 4);

    // window 0 has 75 gesture frames of 100 -> 4; all-null head would differ
    std::fill(s.labels.begin(), s.labels.end(), 0);
    s.labels[130] = 2;
    auto sw2 = session_windows(s, 100, 25);
    CHECK(sw2.labels == std::vector<int>{0, 0, 0});
    CHECK(sw2.gesture == std::vector<int>{0, 0, 0});

    // too short for one window -> empty
    auto tiny = nice_session("t", 40);
    auto sw3 = session_windows(tiny, 100, 25);
    CHECK(sw3.inertial.empty());
    CHECK(sw3.labels.empty());
}

TEST_CASE("confusion matrix bookkeeping") {
    std::vector<int> truth = {0, 0, 1, 1, 2, 2, 2};
    std::vector<int> pred = {0, 1, 1, 1, 2, 0, 2};
    auto m = confusion(truth, pred);
    CHECK(m.total() == 7);
    CHECK(m.counts[0][0] == 1);
    CHECK(m.counts[0][1] == 1);
    CHECK(m.counts[2][0] == 1);
    CHECK(m.row_sum(2) == 3);
    CHECK(m.col_sum(1) == 3);

    auto m2 = m;
    m2 += m;
    CHECK(m2.total() == 14);
    CHECK(m2.counts[2][2] == 4);

    std::vector<int> shorter = {0};
    CHECK_THROWS_AS(confusion(truth, shorter), DataError);
    std::vector<int> bad = {0, 0, 1, 1, 2, 2, 11};
    CHECK_THROWS_AS(confusion(bad, bad), DataError);
}

TEST_CASE("macro f1 hand-worked example") {
    // truth: 4x class0, 3x class1, 3x class2
    std::vector<int> truth = {0, 0, 0, 0, 1, 1, 1, 2, 2, 2};
    std::vector<int> pred = {0, 0, 0, 1, 1, 1, 0, 2, 2, 2};
    // class 0: P = 3/4, R = 3/4 -> 0.75
    // class 1: P = 2/3, R = 2/3 -> 2/3
    // class 2: P = R = 1 -> 1
    auto m = confusion(truth, pred);
    CHECK(macro_f1(m) == doctest::Approx((0.75 + 2.0 / 3.0 + 1.0) / 3.0));

    // absent classes stay out of the mean; perfect diagonal scores 1
    std::vector<int> diag = {3, 4, 5, 3};
    CHECK(macro_f1(confusion(diag, diag)) == doctest::Approx(1.0));

    // a class with instances but no correct predictions contributes zero
    std::vector<int> t2 = {1, 1};
    std::vector<int> p2 = {2, 2};
    CHECK(macro_f1(confusion(t2, p2)) == doctest::Approx(0.0));

    ConfusionMatrix empty;
    CHECK_THROWS_AS(macro_f1(empty), DataError);
}

TEST_CASE("confusion csv lists all classes by name") {
    std::vector<int> truth = {0, 8};
    std::vector<int> pred = {0, 8};
    auto text = to_csv(confusion(truth, pred));
    CHECK(text.find("null") != std::string::npos);
    CHECK(text.find("right") != std::string::npos);
    CHECK(text.find("up,down,back,forward,land,stop,left,right") !=
          std::string::npos);
    // 1 header + 9 rows
    CHECK(std::count(text.begin(), text.end(), '\n') == 10);
}
