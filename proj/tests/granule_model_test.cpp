#include "granstream/granule_model.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace granstream;

namespace
{
	BoundingBox box2(double x0, double y0, double x1, double y1) { return BoundingBox({x0, y0}, {x1, y1}); }

	Granule granule(BoundingBox box, double mean, GranuleId id)
	{
		Granule g;
		g.box = box;
		g.mean_target = {mean};
		g.granule_id = id;
		g.members.push_back(Instance{box.min, {mean}, id});
		return g;
	}

	std::vector<double> pt(std::initializer_list<double> v) { return v; }
}

TEST(Covers, InteriorPoint)
{
	EXPECT_TRUE(covers(box2(0, 0, 1, 1), pt({0.5, 0.5})));
}

TEST(Covers, BoundaryIsInclusive)
{
	EXPECT_TRUE(covers(box2(0, 0, 1, 1), pt({1.0, 1.0})));
	EXPECT_TRUE(covers(box2(0, 0, 1, 1), pt({0.0, 0.0})));
	EXPECT_FALSE(covers(box2(0, 0, 1, 1), pt({1.0 + 1e-15, 0.5})));
}

TEST(Covers, IgnoredDimensionIsNotChecked)
{
	const std::size_t ignore[] = {0};
	EXPECT_TRUE(covers(box2(0, 0, 1, 1), pt({1.5, 0.5}), ignore));
	EXPECT_FALSE(covers(box2(0, 0, 1, 1), pt({1.5, 0.5})));
}

TEST(Covers, DimensionMismatchThrows)
{
	EXPECT_THROW((void)covers(box2(0, 0, 1, 1), pt({0.5})), ContractViolation);
	EXPECT_THROW((void)mindist_sq(box2(0, 0, 1, 1), pt({0.5, 0.5, 0.5})), ContractViolation);
}

TEST(MinDist, CoveredPointIsZero)
{
	EXPECT_EQ(mindist_sq(box2(0, 0, 1, 1), pt({0.5, 0.5})), 0.0);
}

TEST(MinDist, MatchesBoundaryGridOracle)
{
	const auto box = box2(0, 0, 1, 1);
	// Grid oracle values for these queries are 1.0 (nearest face) and 5.0 (corner (1,1)).
	const auto side = pt({2.0, 0.5});
	const auto corner = pt({2.0, 3.0});
	EXPECT_NEAR(oracle::grid_distance_sq_2d(box, side), 1.0, 1e-12);
	EXPECT_NEAR(oracle::grid_distance_sq_2d(box, corner), 5.0, 1e-12);
	EXPECT_DOUBLE_EQ(mindist_sq(box, side), 1.0);
	EXPECT_DOUBLE_EQ(mindist_sq(box, corner), 5.0);
}

TEST(MinDist, ZeroExactlyWhenCovered)
{
	std::mt19937_64 rng(3);
	std::uniform_real_distribution<double> u(-1.0, 2.0);
	for (int trial = 0; trial < 20000; ++trial)
	{
		const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
		const auto box = box2(std::min(a, b), std::min(c, d), std::max(a, b), std::max(c, d));
		// Snap half of the queries onto the box faces.
		std::vector<double> q{u(rng), u(rng)};
		if (trial % 2)
			q[trial % 4 == 1 ? 0 : 1] = trial % 3 ? box.max[trial % 4 == 1 ? 0 : 1] : box.min[trial % 4 == 1 ? 0 : 1];
		EXPECT_EQ(mindist_sq(box, q) == 0.0, covers(box, q));
		EXPECT_NEAR(mindist_sq(box, q), oracle::clamp_distance_sq(box, q), 1e-15);
	}
}

TEST(FindClosest, PicksNearestBox)
{
	const std::vector<Granule> gs{granule(box2(0, 0, 1, 1), 1.0, 0), granule(box2(5, 5, 6, 6), 2.0, 1)};
	const auto q = pt({2.0, 2.0});
	ASSERT_DOUBLE_EQ(oracle::clamp_distance_sq(gs[0].box, q), 2.0);
	ASSERT_DOUBLE_EQ(oracle::clamp_distance_sq(gs[1].box, q), 18.0);
	EXPECT_EQ(find_closest_granule(gs, q).granule_id, 0u);
}

TEST(FindClosest, SingleGranuleAlwaysWins)
{
	const std::vector<Granule> gs{granule(box2(3, 3, 4, 4), 1.0, 7)};
	EXPECT_EQ(find_closest_granule(gs, pt({-100.0, 42.0})).granule_id, 7u);
}

TEST(FindClosest, TiesGoToSmallerId)
{
	// (2,2) is at squared distance 2 from both boxes.
	const std::vector<Granule> gs{granule(box2(3, 3, 4, 4), 1.0, 9), granule(box2(0, 0, 1, 1), 2.0, 4)};
	EXPECT_EQ(find_closest_granule(gs, pt({2.0, 2.0})).granule_id, 4u);
}

TEST(FindClosest, EmptyThrows)
{
	EXPECT_THROW((void)find_closest_granule({}, pt({0.0})), EmptyModelError);
}

TEST(CoveringGranules, SelectsByCoverageOrderedById)
{
	const std::vector<Granule> gs{granule(box2(0, 0, 2, 2), 1.0, 5), granule(box2(1, 1, 3, 3), 2.0, 2),
		granule(box2(5, 5, 6, 6), 3.0, 1)};

	auto one = covering_granules(gs, pt({0.5, 0.5}));
	ASSERT_EQ(one.size(), 1u);
	EXPECT_EQ(one[0]->granule_id, 5u);

	auto both = covering_granules(gs, pt({1.5, 1.5}));
	ASSERT_EQ(both.size(), 2u);
	EXPECT_EQ(both[0]->granule_id, 2u);
	EXPECT_EQ(both[1]->granule_id, 5u);

	EXPECT_TRUE(covering_granules(gs, pt({4.0, 4.0})).empty());
}

TEST(Predict, AveragesCoveringGranules)
{
	const std::vector<Granule> gs{granule(box2(0, 0, 2, 2), 2.0, 0), granule(box2(1, 1, 3, 3), 4.0, 1)};
	EXPECT_EQ(predict(gs, pt({1.5, 1.5})), std::vector<double>{3.0});
}

TEST(Predict, FallsBackToClosest)
{
	const std::vector<Granule> gs{granule(box2(0, 0, 1, 1), 7.0, 0), granule(box2(5, 5, 6, 6), -3.0, 1)};
	EXPECT_EQ(predict(gs, pt({1.5, 1.2})), std::vector<double>{7.0});
}

TEST(Predict, SingleCoverReturnsItsMean)
{
	const std::vector<Granule> gs{granule(box2(0, 0, 1, 1), -1.5, 0), granule(box2(5, 5, 6, 6), 3.0, 1)};
	EXPECT_EQ(predict(gs, pt({0.2, 0.9})), std::vector<double>{-1.5});
}

TEST(Predict, EmptyThrows)
{
	EXPECT_THROW((void)predict({}, pt({0.0})), EmptyModelError);
}

TEST(Predict, MultiTargetAveragesComponentwise)
{
	Granule a = granule(box2(0, 0, 2, 2), 0.0, 0);
	Granule b = granule(box2(1, 1, 3, 3), 0.0, 1);
	a.mean_target = {1.0, 10.0};
	b.mean_target = {3.0, -10.0};
	EXPECT_EQ(predict(std::vector<Granule>{a, b}, pt({1.5, 1.5})), (std::vector<double>{2.0, 0.0}));
}

TEST(PredictProperty, MatchesBruteForceAndIgnoresOrder)
{
	std::mt19937_64 rng(11);
	std::uniform_real_distribution<double> u(-0.2, 1.2);
	for (int fixture = 0; fixture < 40; ++fixture)
	{
		const std::size_t dx = 1 + fixture % 4;
		auto gs = oracle::random_granules(rng, 1 + fixture % 25, dx, 6, fixture % 2 == 0);
		auto shuffled = gs;
		for (int q = 0; q < 100; ++q)
		{
			std::vector<double> point(dx);
			for (auto& v : point)
				v = fixture % 2 == 0 ? std::round(u(rng) * 8.0) / 8.0 : u(rng);
			const auto expected = oracle::brute_force_predict(gs, point);
			EXPECT_EQ(predict(gs, point), expected);
			std::shuffle(shuffled.begin(), shuffled.end(), rng);
			EXPECT_EQ(predict(shuffled, point), expected);
		}
	}
}

TEST(PredictProperty, UniqueCoverReturnsMeanExactly)
{
	std::mt19937_64 rng(5);
	auto gs = oracle::random_granules(rng, 30, 3, 5, false);
	for (const auto& g : gs)
	{
		for (const auto& m : g.members)
		{
			if (covering_granules(gs, m.features).size() == 1)
			{
				EXPECT_EQ(predict(gs, m.features), g.mean_target);
			}
		}
	}
}
