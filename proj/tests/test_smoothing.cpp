#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "glove/errors.hpp"
#include "glove/rng.hpp"
#include "glove/smoothing.hpp"

using namespace glove;

namespace {
using V = std::vector<int>;
}

TEST_CASE("gap fill closes isolated holes between equal flanks") {
    CHECK(gap_fill(V{2, 2, 0, 2, 2}, 1) == V{2, 2, 2, 2, 2});
    CHECK(gap_fill(V{2, 2, 5, 2, 2}, 1) == V{2, 2, 2, 2, 2});
    // different flanks stay untouched
    CHECK(gap_fill(V{1, 0, 2}, 1) == V{1, 0, 2});
    // gap longer than max_gap survives
    CHECK(gap_fill(V{3, 0, 0, 3}, 1) == V{3, 0, 0, 3});
    CHECK(gap_fill(V{3, 0, 0, 3}, 2) == V{3, 3, 3, 3});
    // runs at the array edges have only one flank and never change
    CHECK(gap_fill(V{0, 1, 1, 0}, 1) == V{0, 1, 1, 0});
    CHECK(gap_fill(V{7}, 3) == V{7});
    // disabled
    CHECK(gap_fill(V{2, 0, 2}, 0) == V{2, 0, 2});
    CHECK(gap_fill(V{}, 1).empty());
}

TEST_CASE("gap fill reaches a fixpoint") {
    // closing one hole can create a longer flank enabling another close
    V w = {4, 0, 4, 0, 4, 0, 4};
    auto once = gap_fill(w, 1);
    CHECK(once == V(7, 4));
    CHECK(gap_fill(once, 1) == once);  // idempotent

    // alternating singletons all sit between equal flanks and collapse
    V alt = {1, 2, 1, 2, 1};
    CHECK(gap_fill(alt, 1) == V(5, 1));
}

TEST_CASE("gap fill never rewrites agreeing neighbourhoods") {
    // property: elements whose value already matches both flanking runs, and
    // long runs, are untouched; output labels are drawn from the input set
    Rng rng(44);
    for (int trial = 0; trial < 50; ++trial) {
        V labels(40);
        for (auto& l : labels) l = int(rng.below(4));
        auto out = gap_fill(labels, 1);
        REQUIRE(out.size() == labels.size());
        std::set<int> in_set(labels.begin(), labels.end());
        for (int v : out) CHECK(in_set.count(v) == 1);
        // any change must re-create the flanking label
        for (size_t i = 0; i < out.size(); ++i)
            if (out[i] != labels[i]) {
                REQUIRE(i > 0);
                REQUIRE(i + 1 < out.size());
                CHECK(out[i] == out[i - 1]);
            }
    }
}

TEST_CASE("majority vote") {
    // single-window glitch: every centered window still votes the flank label
    CHECK(majority_smooth(V{0, 0, 3, 0, 0}, 3) == V{0, 0, 0, 0, 0});
    CHECK(majority_smooth(V{3, 3, 3, 0, 3, 3, 3}, 5) == V(7, 3));
    // a two-window run survives k = 3
    CHECK(majority_smooth(V{0, 0, 3, 3, 0, 0, 0}, 3) ==
          V{0, 0, 3, 3, 0, 0, 0});
    // k = 1 is the identity, constants are fixed points
    CHECK(majority_smooth(V{1, 0, 2, 0}, 1) == V{1, 0, 2, 0});
    CHECK(majority_smooth(V(9, 6), 5) == V(9, 6));
    // ties keep the original value (truncated edge windows of even size)
    CHECK(majority_smooth(V{1, 2}, 3) == V{1, 2});
    CHECK(majority_smooth(V{1, 1, 2, 2}, 3) == V{1, 1, 2, 2});
    CHECK(majority_smooth(V{5}, 5) == V{5});
    CHECK(majority_smooth(V{}, 3).empty());
    CHECK_THROWS_AS(majority_smooth(V{1, 2, 3}, 4), ConfigError);
    CHECK_THROWS_AS(majority_smooth(V{1, 2, 3}, 0), ConfigError);
}

TEST_CASE("combined smoothing pipeline") {
    SmoothingConfig cfg;  // gap 1, majority 5
    V noisy = {0, 0, 4, 4, 0, 4, 4, 4, 0, 0, 0, 1, 0, 0, 0};
    auto out = smooth_labels(noisy, cfg);
    REQUIRE(out.size() == noisy.size());
    // the hole inside the gesture run closes, the isolated spike dies
    CHECK(out[4] == 4);
    CHECK(out[11] == 0);

    SmoothingConfig off{.max_gap = 0, .majority_k = 1};
    CHECK(smooth_labels(noisy, off) == noisy);
}

TEST_CASE("isolated single-window errors are nearly all repaired") {
    // ground truth: long runs; corrupt ~10% of positions, isolated only
    Rng rng(7);
    V truth;
    for (int block = 0; block < 60; ++block) {
        int label = block % 2 == 0 ? 0 : 1 + int(rng.below(8));
        int len = 6 + int(rng.below(5));
        truth.insert(truth.end(), len, label);
    }
    V noisy = truth;
    std::vector<size_t> corrupted;
    for (size_t i = 1; i + 1 < noisy.size(); i += 10) {
        // flip one window, keeping both neighbours intact -> isolated error;
        // a flip that mimics the label two steps away would make the stream
        // ambiguous (two truths explain it), so those sites are skipped
        int wrong = (noisy[i] + 1 + int(rng.below(8))) % 9;
        if (noisy[i - 1] != noisy[i] || noisy[i + 1] != noisy[i]) continue;
        if (i >= 2 && wrong == noisy[i - 2]) continue;
        if (i + 2 < noisy.size() && wrong == noisy[i + 2]) continue;
        noisy[i] = wrong;
        corrupted.push_back(i);
    }
    REQUIRE(corrupted.size() > 20);

    auto fixed = gap_fill(noisy, 1);
    size_t repaired = 0;
    for (size_t i : corrupted)
        if (fixed[i] == truth[i]) ++repaired;
    CHECK(double(repaired) >= 0.95 * double(corrupted.size()));

    // and it never breaks positions that were already right
    for (size_t i = 0; i < noisy.size(); ++i)
        if (noisy[i] == truth[i]) CHECK(fixed[i] == truth[i]);
}

TEST_CASE("label runs convert to events and back") {
    V labels = {0, 0, 3, 3, 3, 0, 7, 7, 0};
    auto ev = events_from_labels(labels);
    REQUIRE(ev.size() == 5);
    CHECK(ev[1].label == 3);
    CHECK(ev[1].start == 2);
    CHECK(ev[1].end == 4);
    CHECK(ev[3].label == 7);
    CHECK(ev[3].start == 6);
    CHECK(ev[3].end == 7);
    CHECK(expand_events(ev) == labels);

    CHECK(events_from_labels(V{}).empty());
    auto single = events_from_labels(V{5});
    REQUIRE(single.size() == 1);
    CHECK(single[0].start == 0);
    CHECK(single[0].end == 0);
    CHECK(expand_events(single) == V{5});
}

TEST_CASE("round trip holds for arbitrary label streams") {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        V labels(1 + rng.below(60));
        for (auto& l : labels) l = int(rng.below(9));
        auto ev = events_from_labels(labels);
        CHECK(expand_events(ev) == labels);
        // events are maximal: adjacent events differ in label
        for (size_t i = 1; i < ev.size(); ++i) {
            CHECK(ev[i].label != ev[i - 1].label);
            CHECK(ev[i].start == ev[i - 1].end + 1);
        }
    }
}

TEST_CASE("expand rejects non-contiguous event lists") {
    std::vector<GestureEvent> bad = {{1, 0, 2}, {2, 4, 5}};  // hole at 3
    CHECK_THROWS_AS(expand_events(bad), DataError);
    std::vector<GestureEvent> rev = {{1, 2, 1}};  // end before start
    CHECK_THROWS_AS(expand_events(rev), DataError);
}
