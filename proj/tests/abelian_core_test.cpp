#include "homotopy_ledger/canonical_group.hpp"

#include <gtest/gtest.h>

using namespace hl;

TEST(Smith, Identity) {
    auto snf = smith_normal_form(IntMatrix{{1}});
    EXPECT_EQ(snf.invariants, IntVector{1});
}

TEST(Smith, UpperTriangular) {
    IntMatrix m{{2, 1}, {0, 2}};
    auto snf = smith_normal_form(m);
    EXPECT_EQ(snf.invariants, (IntVector{1, 4}));
    EXPECT_EQ(snf.left * m * snf.right, (IntMatrix{{1, 0}, {0, 4}}));
    EXPECT_EQ(snf.left * snf.left_inverse, IntMatrix::identity(2));
    EXPECT_EQ(snf.right * snf.right_inverse, IntMatrix::identity(2));
}

TEST(Canonical, Descriptors) {
    EXPECT_EQ(to_descriptor(parse_descriptor("Z12")), "Z4+Z3");
    EXPECT_EQ(to_descriptor(parse_descriptor("Z2+Z4+Z@{2}")), "Z+Z4+Z2@{2}");
    auto groups = enumerate_abelian_groups(8);
    ASSERT_EQ(groups.size(), 3u);
    EXPECT_EQ(to_descriptor(groups[0]), "Z8");
    EXPECT_EQ(to_descriptor(groups[1]), "Z4+Z2");
    EXPECT_EQ(to_descriptor(groups[2]), "Z2+Z2+Z2");
}
