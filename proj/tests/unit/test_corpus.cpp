#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "mvclt/corpus.hpp"

using namespace mvclt;

TEST(Corpus, IdentityCorpusShapeAndDeterminism) {
  const auto a = identity_corpus(30, 4);
  const auto b = identity_corpus(30, 4);
  ASSERT_EQ(a.size(), 30u);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ids.insert(a[i].id);
    EXPECT_LE(a[i].model.size(), 6u);
    for (const auto& c : a[i].model.components()) EXPECT_LE(c.atoms().size(), 3u);
    EXPECT_EQ(a[i].statistic.dim, 2u);
    const auto x = std::vector<double>(a[i].model.size(), 0.5);
    EXPECT_EQ(a[i].statistic.eval(x), b[i].statistic.eval(x));
  }
  EXPECT_EQ(ids.size(), a.size());
}

TEST(Corpus, RandomMultilinearIsNormalized) {
  RandomStream rng(1, 0);
  for (int i = 0; i < 50; ++i) {
    const auto terms = random_multilinear(5, 3, rng);
    double s = 0.0;
    for (const auto& t : terms) {
      s += std::abs(t.coef);
      EXPECT_LE(t.coords.size(), 3u);
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Corpus, SpecializedInstancesAreSmall) {
  for (const auto& inst : runs_instances()) {
    ASSERT_TRUE(inst.runs);
    EXPECT_LE(inst.runs->coordinates(), 12u);
  }
  for (const auto& inst : quadform_instances()) {
    ASSERT_TRUE(inst.quadform);
    EXPECT_LE(inst.quadform->n, 10u);
  }
  EXPECT_FALSE(default_bound_instances().empty());
  EXPECT_EQ(rademacher_corpus(5, 1).size(), 5u + 7u);
}
