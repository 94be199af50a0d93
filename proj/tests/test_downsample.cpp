#include <doctest.h>

#include <set>

#include "geospark/downsample.hpp"
#include "testutil.hpp"

using namespace geospark;

namespace {

void check_valid_partition_map(const DownsampleMap& map, std::size_t n) {
    REQUIRE(map.group_of.size() == n);
    std::vector<int> seen(map.output_count(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        REQUIRE(map.group_of[i] >= 0);
        REQUIRE(map.group_of[i] < static_cast<int>(map.output_count()));
        ++seen[map.group_of[i]];
    }
    std::size_t total = 0;
    for (std::size_t g = 0; g < map.output_count(); ++g) {
        CHECK(seen[g] == static_cast<int>(map.parents[g].size()));
        CHECK(!map.parents[g].empty());  // no empty groups
        for (int i : map.parents[g]) CHECK(map.group_of[i] == static_cast<int>(g));
        total += map.parents[g].size();
    }
    CHECK(total == n);  // parents partition [0, n)
    REQUIRE(map.coarse_coords.size() == map.output_count());
}

}  // namespace

TEST_CASE("small partitions collapse to a single coarse point at the mean") {
    std::vector<Vec3> coords = {{0, 0, 0}, {0.1, 0, 0}, {0, 0.1, 0}};
    std::vector<int> part = {0, 0, 0};
    DownsampleMap map = geometric_downsample_map(coords, part, 1.0);
    REQUIRE(map.output_count() == 1);
    CHECK(map.coarse_coords[0][0] == doctest::Approx(0.1 / 3.0));
    CHECK(map.coarse_partition[0] == 0);
    check_valid_partition_map(map, 3);
}

TEST_CASE("oversized partitions split into cells no larger than the cap") {
    SplitMix64 rng(81);
    std::vector<Vec3> coords;
    for (int i = 0; i < 300; ++i)
        coords.push_back({rng.uniform(0, 3), rng.uniform(0, 3), 0.0});
    std::vector<int> part(300, 0);
    double a = 0.5;
    DownsampleMap map = geometric_downsample_map(coords, part, a);
    CHECK(map.output_count() > 1);
    check_valid_partition_map(map, 300);
    // each group's member bbox diagonal fits within the target diameter
    for (std::size_t g = 0; g < map.output_count(); ++g) {
        CHECK(bounding_box(coords, map.parents[g]).diagonal() <= a + 1e-9);
        CHECK(map.coarse_partition[g] == 0);  // inherited partition identity
    }
}

TEST_CASE("mixed partitions: group count never exceeds points and respects partitions") {
    SplitMix64 rng(82);
    std::vector<Vec3> coords;
    std::vector<int> part;
    for (int p = 0; p < 5; ++p) {
        Vec3 base = {static_cast<double>(3 * p), 0, 0};
        for (int i = 0; i < 40; ++i) {
            coords.push_back(base + Vec3{rng.uniform(0, 1.2), rng.uniform(0, 1.2), 0});
            part.push_back(p);
        }
    }
    DownsampleMap map = geometric_downsample_map(coords, part, 0.8);
    check_valid_partition_map(map, coords.size());
    // no group mixes points from two partitions
    for (std::size_t g = 0; g < map.output_count(); ++g)
        for (int i : map.parents[g]) CHECK(part[i] == map.coarse_partition[g]);
}

TEST_CASE("voxel map groups by scene-global cells") {
    std::vector<Vec3> coords = {{0.05, 0.05, 0.05}, {0.08, 0.02, 0.01},
                                {0.95, 0.05, 0.05}, {0.05, 0.95, 0.05}};
    DownsampleMap map = voxel_downsample_map(coords, 0.5);
    CHECK(map.output_count() == 3);
    CHECK(map.group_of[0] == map.group_of[1]);
    CHECK(map.group_of[0] != map.group_of[2]);
    check_valid_partition_map(map, 4);
    for (int p : map.coarse_partition) CHECK(p == -1);
}

TEST_CASE("downsampling is deterministic and ordering is first-appearance") {
    SplitMix64 rng(83);
    std::vector<Vec3> coords;
    std::vector<int> part;
    for (int i = 0; i < 100; ++i) {
        coords.push_back({rng.uniform(0, 4), rng.uniform(0, 4), rng.uniform(0, 2)});
        part.push_back(static_cast<int>(rng.below(7)));
    }
    // densify partition ids
    std::vector<int> remap(7, -1);
    int next = 0;
    for (int& p : part) {
        if (remap[p] < 0) remap[p] = next++;
        p = remap[p];
    }
    DownsampleMap a = geometric_downsample_map(coords, part, 0.6);
    DownsampleMap b = geometric_downsample_map(coords, part, 0.6);
    CHECK(a.group_of == b.group_of);
    check_valid_partition_map(a, 100);
    // groups of one partition are contiguous and ordered by first appearance
    int prev_partition = -1, prev_first = -1;
    for (std::size_t g = 0; g < a.output_count(); ++g) {
        if (a.coarse_partition[g] != prev_partition) {
            CHECK(a.coarse_partition[g] == prev_partition + 1);
            prev_partition = a.coarse_partition[g];
            prev_first = -1;
        }
        CHECK(a.parents[g].front() > prev_first);
        prev_first = a.parents[g].front();
    }
}

TEST_CASE("fuse_features takes the columnwise max of the projected features") {
    SplitMix64 rng(84);
    std::vector<Vec3> coords = {{0, 0, 0}, {0.1, 0, 0}, {3, 3, 3}};
    std::vector<int> part = {0, 0, 1};
    DownsampleMap map = geometric_downsample_map(coords, part, 1.0);
    REQUIRE(map.output_count() == 2);

    Matrix feats(3, 2);
    for (double& v : feats.data) v = rng.uniform(-1, 1);
    Tensor w = testutil::random_tensor(2, 3, rng);
    Tensor b = testutil::random_tensor(1, 3, rng);
    Matrix fused = fuse_features(feats, map, w, b);
    REQUIRE(fused.rows == 2);
    REQUIRE(fused.cols == 3);
    for (std::size_t g = 0; g < 2; ++g)
        for (std::size_t c = 0; c < 3; ++c) {
            double best = -1e300;
            for (int i : map.parents[g]) {
                double y = b(0, c);
                for (std::size_t k = 0; k < 2; ++k) y += feats(i, k) * w(k, c);
                best = std::max(best, y);
            }
            CHECK(fused(g, c) == doctest::Approx(best).epsilon(1e-9));
        }
}

TEST_CASE("fuse_features_on_tape routes gradients to the argmax member") {
    SplitMix64 rng(85);
    std::vector<Vec3> coords = {{0, 0, 0}, {0.1, 0, 0}, {2, 2, 2}, {2.1, 2, 2}};
    std::vector<int> part = {0, 0, 1, 1};
    DownsampleMap map = geometric_downsample_map(coords, part, 1.0);
    Tape tape;
    Tape::Id feats = tape.input(testutil::random_tensor(4, 3, rng), true);
    Tape::Id w = tape.input(testutil::random_tensor(3, 2, rng), true);
    Tape::Id b = tape.input(testutil::random_tensor(1, 2, rng), true);
    Tape::Id fused = fuse_features_on_tape(tape, feats, map, w, b);
    CHECK(tape.value(fused).rows == map.output_count());
    Tape::Id loss = tape.sum_all(tape.mul(fused, fused));
    auto r = testutil::finite_difference_check(tape, loss, {feats, w, b});
    CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("argument validation") {
    std::vector<Vec3> coords = {{0, 0, 0}};
    CHECK_THROWS_AS(geometric_downsample_map(coords, {0, 0}, 1.0), ArgumentError);
    CHECK_THROWS_AS(geometric_downsample_map(coords, {0}, 0.0), ArgumentError);
    CHECK_THROWS_AS(voxel_downsample_map(coords, -1.0), ArgumentError);
}
