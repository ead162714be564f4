#include <gtest/gtest.h>

#include <random>

#include "mdk/core/box.hpp"
#include "mdk/core/system.hpp"
#include "support.hpp"

using namespace mdk;

TEST(BuildSystem, DefaultsToSingleSample) {
  const System s = build_system({Vec3{0, 0, 0}, Vec3{1, 0, 0}}, {1, 1});
  EXPECT_EQ(s.batch, (std::vector<int>{0, 0}));
  EXPECT_EQ(s.num_samples(), 1u);
}

TEST(BuildSystem, RejectsGapInBatchCodes) {
  try {
    build_system({Vec3{}, Vec3{1, 0, 0}}, {1, 1}, std::vector<int>{0, 2});
    FAIL() << "expected an error";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("non-contiguous batch"), std::string::npos);
  }
}

TEST(BuildSystem, RejectsLengthMismatch) {
  try {
    build_system({Vec3{}, Vec3{1, 0, 0}}, {1});
    FAIL() << "expected an error";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("length mismatch"), std::string::npos);
  }
  EXPECT_THROW(build_system({Vec3{}}, {1}, std::nullopt, std::nullopt, std::vector<double>{1, 2}), InputError);
}

TEST(BuildSystem, RejectsUnreducedTriclinicBox) {
  const Box bad{BoxKind::triclinic, {Vec3{10, 0, 0}, Vec3{6, 9, 0}, Vec3{0, 0, 8}}};
  try {
    build_system({Vec3{}}, {1}, std::nullopt, bad);
    FAIL() << "expected an error";
  } catch (const GeometryError& e) {
    EXPECT_NE(std::string(e.what()).find("box not reduced"), std::string::npos);
  }
}

TEST(BuildSystem, RejectsNonFinitePositions) {
  EXPECT_THROW(build_system({Vec3{std::nan(""), 0, 0}}, {1}), InputError);
}

TEST(MinimumImage, OrthorhombicWraps) {
  const Box box = Box::orthorhombic(10, 10, 10);
  const Vec3 r = minimum_image({9.8, 0, 0}, box);
  EXPECT_NEAR(r.x, -0.2, 1e-12);
  EXPECT_EQ(r.y, 0.0);
  EXPECT_EQ(r.z, 0.0);
}

TEST(MinimumImage, NoBoxIsIdentity) {
  EXPECT_EQ(minimum_image({5, 5, 5}, Box::none()), (Vec3{5, 5, 5}));
}

TEST(MinimumImage, TriclinicMatchesExhaustiveSearch) {
  const Box box = Box::triclinic({10, 0, 0}, {5, 9, 0}, {0, 0, 8});
  const Vec3 delta{-4.7, 8.5, 0};
  const Vec3 expected = check::exhaustive_image(delta, box, 2);
  const Vec3 got = minimum_image(delta, box);
  // Exhaustive search lands on (0.3, -0.5, 0).
  EXPECT_NEAR(expected.x, 0.3, 1e-12);
  EXPECT_NEAR(expected.y, -0.5, 1e-12);
  EXPECT_NEAR(norm(got - expected), 0.0, 1e-12);
}

TEST(MinimumImage, OptimalOverNeighborImagesForRandomBoxes) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10000; ++trial) {
    const BoxKind kind = trial % 2 ? BoxKind::triclinic : BoxKind::orthorhombic;
    const Box box = check::random_box(rng, kind, 4.0, 12.0);
    const double half = 0.5 * box.min_perpendicular_width();
    Vec3 r;
    do {
      r = {check::uniform(rng, -half, half), check::uniform(rng, -half, half), check::uniform(rng, -half, half)};
    } while (norm(r) >= half);
    const Vec3 delta = r + box.vectors[0] * check::uniform_int(rng, -1, 1) +
                       box.vectors[1] * check::uniform_int(rng, -1, 1) +
                       box.vectors[2] * check::uniform_int(rng, -1, 1);
    const Vec3 m = minimum_image(delta, box);
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j)
        for (int k = -1; k <= 1; ++k) {
          const Vec3 cand = delta + box.vectors[0] * i + box.vectors[1] * j + box.vectors[2] * k;
          ASSERT_LE(norm(m), norm(cand) + 1e-12);
        }
  }
}

TEST(MinimumImage, ExactForAnyDeltaInSkewedBoxes) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20000; ++trial) {
    const Box box = check::random_box(rng, BoxKind::triclinic, 2.0, 20.0);
    const Vec3 f{check::uniform(rng, -3, 3), check::uniform(rng, -3, 3), check::uniform(rng, -3, 3)};
    const Vec3 delta = box.from_fractional(f);
    const Vec3 m = minimum_image(delta, box);
    ASSERT_NEAR(norm(m), norm(check::exhaustive_image(reduce_image(delta, box), box, 3)), 1e-12) << trial;
    // Still a lattice image of delta.
    const Vec3 shift = box.to_fractional(m - delta);
    for (std::size_t d = 0; d < 3; ++d) ASSERT_NEAR(shift[d], std::round(shift[d]), 1e-9);
  }
}

TEST(MinimumImage, ReductionAgreesWithinHalfWidth) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10000; ++trial) {
    const Box box = check::random_box(rng, BoxKind::triclinic, 4.0, 12.0);
    const Vec3 delta = box.from_fractional({check::uniform(rng, -2, 2), check::uniform(rng, -2, 2), check::uniform(rng, -2, 2)});
    const Vec3 m = minimum_image(delta, box);
    if (norm(m) < 0.5 * box.min_perpendicular_width()) {
      ASSERT_LT(norm(reduce_image(delta, box) - m), 1e-12);
    }
  }
}

TEST(Box, FractionalRoundTrip) {
  const Box box = Box::triclinic({10, 0, 0}, {3, 9, 0}, {-2, 4, 8});
  const Vec3 r{1.5, -2.0, 7.25};
  const Vec3 back = box.from_fractional(box.to_fractional(r));
  EXPECT_NEAR(norm(back - r), 0.0, 1e-12);
  EXPECT_NEAR(box.perpendicular_widths().z, 8.0, 1e-12);
}
