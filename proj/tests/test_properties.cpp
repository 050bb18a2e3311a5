#include <gtest/gtest.h>

#include "property_suites.hpp"

TEST(Properties, ReflexivityAndOrthogonalInvariance) {
  const auto r = oracle::reflexivity_and_invariance(100, 81);
  EXPECT_TRUE(r.all()) << r.passed << "/" << r.total << ", " << r.first_failure;
}

TEST(Properties, DirectSumReductionsAgree) {
  const auto r = oracle::direct_sum_agreement(50, 82);
  EXPECT_TRUE(r.all()) << r.passed << "/" << r.total << ", " << r.first_failure;
}

TEST(Properties, GridOracleNeverContradicts) {
  int positives = 0;
  const auto r = oracle::grid_never_contradicts(50, 83, &positives);
  EXPECT_TRUE(r.all()) << r.first_failure;
  EXPECT_GE(positives, 20);
}
