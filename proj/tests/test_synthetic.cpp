#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vtcav/clip.hpp"
#include "vtcav/synthetic.hpp"

using namespace vtcav;

namespace {

SyntheticSpec small_spec() {
    SyntheticSpec s;
    s.n_train = 10;
    s.n_test = 4;
    s.seed = 7;
    return s;
}

}  // namespace

TEST_CASE("same seed gives bit-identical corpora") {
    auto a = generate_synthetic_dataset(small_spec());
    auto b = generate_synthetic_dataset(small_spec());
    REQUIRE(a.train.size() == b.train.size());
    for (size_t i = 0; i < a.train.size(); ++i) {
        CHECK(a.train[i].label == b.train[i].label);
        CHECK(a.train[i].clip.frames.data == b.train[i].clip.frames.data);
    }
}

TEST_CASE("different seeds give different corpora") {
    auto a = generate_synthetic_dataset(small_spec());
    auto spec = small_spec();
    spec.seed = 8;
    auto b = generate_synthetic_dataset(spec);
    CHECK(a.train[0].clip.frames.data != b.train[0].clip.frames.data);
}

TEST_CASE("speed 0 is rejected as degenerate") {
    auto spec = small_spec();
    spec.speed = 0;
    CHECK_THROWS_WITH_AS(generate_synthetic_dataset(spec), doctest::Contains("degenerate motion"),
                         std::invalid_argument);
}

TEST_CASE("shape that cannot stay inside the frame is rejected") {
    auto spec = small_spec();
    spec.speed = 10;  // travel (T-1)*10 = 70 > W - shape_size
    CHECK_THROWS(generate_synthetic_dataset(spec));
    spec = small_spec();
    spec.shape_size = 40;  // wider than the frame
    CHECK_THROWS(generate_synthetic_dataset(spec));
}

TEST_CASE("non-positive clip counts are rejected") {
    auto spec = small_spec();
    spec.n_train = 0;
    CHECK_THROWS(generate_synthetic_dataset(spec));
}

TEST_CASE("every generated clip is a valid VideoClip with per-frame boxes") {
    auto corpus = generate_synthetic_dataset(small_spec());
    CHECK(corpus.train.size() == 10);
    CHECK(corpus.test.size() == 4);
    for (const auto& sc : corpus.train) {
        CHECK(validate_clip(sc.clip).empty());
        REQUIRE(static_cast<int64_t>(sc.boxes.size()) == sc.clip.T());
        for (const auto& b : sc.boxes) {
            CHECK(b.x1 >= 0);
            CHECK(b.x2 <= 32);
            CHECK(b.width() == 6);
            CHECK(b.height() == 6);
        }
    }
}

TEST_CASE("labels match the motion direction and reversal flips them") {
    auto corpus = generate_synthetic_dataset(small_spec());
    int lefts = 0;
    for (const auto& sc : corpus.train) {
        const bool left = is_leftward(sc.boxes);
        CHECK(left == (sc.label == 0));
        lefts += left;

        // reversing the frame/box order flips the ground-truth predicate
        std::vector<Box> reversed(sc.boxes.rbegin(), sc.boxes.rend());
        CHECK(is_leftward(reversed) == (sc.label == 1));
    }
    CHECK(lefts > 0);
    CHECK(lefts < 10);
}

TEST_CASE("presence task: blanks have no boxes, shapes have boxes") {
    auto spec = small_spec();
    spec.task = SyntheticTask::presence;
    auto corpus = generate_synthetic_dataset(spec);
    for (const auto& sc : corpus.train) {
        if (sc.label == 0)
            CHECK(sc.boxes.empty());
        else
            CHECK_FALSE(sc.boxes.empty());
        CHECK(validate_clip(sc.clip).empty());
    }
}

TEST_CASE("class names match the task") {
    auto corpus = generate_synthetic_dataset(small_spec());
    CHECK(corpus.class_names() == std::vector<std::string>{"left", "right"});
}
