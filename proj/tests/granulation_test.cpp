#include "granstream/granulation.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace granstream;

namespace
{
	double naive_avar(const std::vector<double>& s)
	{
		double acc = 0.0;
		for (std::size_t i = 0; i + 1 < s.size(); ++i)
			acc += (s[i + 1] - s[i]) * (s[i + 1] - s[i]);
		return acc / 2.0 / static_cast<double>(s.size() - 1);
	}

	std::vector<Instance> series(const std::vector<double>& targets)
	{
		std::vector<Instance> out;
		for (std::size_t i = 0; i < targets.size(); ++i)
			out.push_back(Instance{{static_cast<double>(i + 1)}, {targets[i]}, i});
		return out;
	}

	void expect_partition(const std::vector<Granule>& gs, const std::vector<Instance>& input)
	{
		std::multiset<SequenceId> ids;
		for (const auto& g : gs)
			for (const auto& m : g.members)
				ids.insert(m.sequence_id);
		std::multiset<SequenceId> expected;
		for (const auto& i : input)
			expected.insert(i.sequence_id);
		EXPECT_EQ(ids, expected);
	}
}

TEST(AllanVariance, Examples)
{
	EXPECT_EQ(allan_variance(std::vector<double>{5, 5, 5, 5}), 0.0);
	EXPECT_DOUBLE_EQ(allan_variance(std::vector<double>{0, 1, 0, 1}), 0.5);
	EXPECT_DOUBLE_EQ(allan_variance(std::vector<double>{2.0, 7.0}), 12.5);
}

TEST(AllanVariance, TooShortThrows)
{
	EXPECT_THROW((void)allan_variance(std::vector<double>{}), InsufficientSamplesError);
	EXPECT_THROW((void)allan_variance(std::vector<double>{1.0}), InsufficientSamplesError);
}

TEST(AllanVariance, PropertiesOnRandomSequences)
{
	std::mt19937_64 rng(21);
	std::normal_distribution<double> g(0.0, 3.0);
	for (int trial = 0; trial < 100; ++trial)
	{
		std::vector<double> s(2 + rng() % 200);
		for (auto& v : s)
			v = g(rng);
		const double a = allan_variance(s);
		EXPECT_GE(a, 0.0);
		EXPECT_LE(oracle::rel_diff(a, naive_avar(s)), 1e-9);

		auto shifted = s;
		for (auto& v : shifted)
			v += 17.25;
		EXPECT_LE(oracle::rel_diff(allan_variance(shifted), a), 1e-9);

		auto scaled = s;
		for (auto& v : scaled)
			v *= -2.5;
		EXPECT_LE(oracle::rel_diff(allan_variance(scaled), 6.25 * a), 1e-9);
	}
}

TEST(Granulate, StepSeriesSplitsAtTheStep)
{
	// A binary tree is needed for a 4/4 split: with larger fanout the root's
	// children are the four leaves and both halves are never formed.
	const auto data = series({0, 0, 0, 0, 10, 10, 10, 10});
	const auto tree = build_index(data, 2, 2);
	const auto gs = granulate(tree, {}, 0);
	ASSERT_EQ(gs.size(), 2u);
	EXPECT_EQ(gs[0].mean_target, std::vector<double>{0.0});
	EXPECT_EQ(gs[1].mean_target, std::vector<double>{10.0});
	EXPECT_EQ(gs[0].granule_id, 0u);
	EXPECT_EQ(gs[1].granule_id, 1u);
	expect_partition(gs, data);
}

TEST(Granulate, IdenticalTargetsGiveRootGranule)
{
	std::mt19937_64 rng(3);
	auto data = oracle::random_instances(rng, 500, 2);
	for (auto& d : data)
		d.target = {0.1 + 0.2};
	const auto tree = build_index(data);
	const auto gs = granulate(tree, {}, 1);
	ASSERT_EQ(gs.size(), 1u);
	EXPECT_EQ(gs[0].count(), 500u);
	EXPECT_EQ(gs[0].box, tree.root().box);
}

TEST(Granulate, SingleInstance)
{
	const std::vector<Instance> data{Instance{{1.0, 2.0}, {3.0}, 9}};
	const auto gs = granulate(build_index(data), {}, 1);
	ASSERT_EQ(gs.size(), 1u);
	EXPECT_EQ(gs[0].members, data);
	EXPECT_EQ(gs[0].box, BoundingBox::of_point(data[0].features));
	EXPECT_EQ(gs[0].mean_target, std::vector<double>{3.0});
}

TEST(Granulate, PureButDifferentChildrenSplit)
{
	// Within-child variance is zero while child means differ: must descend.
	const auto data = series({1, 1, 5, 5});
	const auto gs = granulate(build_index(data, 2, 2), {}, 0);
	EXPECT_EQ(gs.size(), 2u);
}

TEST(Granulate, MinGranuleSizeStopsDescent)
{
	const auto data = series({0, 0, 0, 0, 10, 10, 10, 10});
	GranulationParams params;
	params.min_granule_size = 9;
	const auto gs = granulate(build_index(data, 2, 2), params, 0);
	EXPECT_EQ(gs.size(), 1u);
}

TEST(Granulate, MultiTargetRequiresEveryComponent)
{
	// First component is constant, second steps: the step alone forces a split.
	auto data = series({0, 0, 0, 0, 0, 0, 0, 0});
	for (std::size_t i = 0; i < data.size(); ++i)
		data[i].target.push_back(i < 4 ? -3.0 : 3.0);
	const auto gs = granulate(build_index(data, 2, 2), {}, 0);
	ASSERT_EQ(gs.size(), 2u);
	EXPECT_EQ(gs[0].mean_target, (std::vector<double>{0.0, -3.0}));
	EXPECT_EQ(gs[1].mean_target, (std::vector<double>{0.0, 3.0}));
}

TEST(Granulate, NoiseMergesMoreThanStructure)
{
	std::mt19937_64 rng(13);
	std::normal_distribution<double> noise(0.0, 1.0);
	std::vector<Instance> flat;
	std::vector<Instance> stepped;
	for (std::size_t i = 0; i < 4096; ++i)
	{
		const double t = static_cast<double>(i) / 4096.0;
		const double x = static_cast<double>(rng() % 1000) / 1000.0;
		const double e = noise(rng);
		flat.push_back(Instance{{x, t}, {e}, i});
		stepped.push_back(Instance{{x, t}, {e + 20.0 * std::floor(t * 8.0)}, i});
	}
	const auto flat_g = granulate(build_index(flat), {}, 1);
	const auto step_g = granulate(build_index(stepped), {}, 1);
	EXPECT_LT(flat_g.size(), step_g.size());
	expect_partition(flat_g, flat);
	expect_partition(step_g, stepped);
}

TEST(Granulate, CutPartitionsRandomTrees)
{
	std::mt19937_64 rng(17);
	for (int trial = 0; trial < 20; ++trial)
	{
		const std::size_t dx = 1 + trial % 4;
		const auto data = oracle::random_instances(rng, 1 + rng() % 2000, dx, 1 + trial % 2);
		const auto tree = build_index(data, 2 + trial % 10, 2 + trial % 6);
		GranulationParams params;
		params.avar_ratio_threshold = 0.25 + trial % 4;
		const auto gs = granulate(tree, params, dx - 1);
		expect_partition(gs, data);
		for (std::size_t i = 0; i < gs.size(); ++i)
		{
			EXPECT_EQ(gs[i].granule_id, i);
			for (const auto& m : gs[i].members)
				EXPECT_TRUE(oracle::inside(gs[i].box, m.features));
		}
	}
}

TEST(Granulate, InvalidParams)
{
	const auto tree = build_index(series({1, 2}));
	GranulationParams bad;
	bad.avar_ratio_threshold = 0.0;
	EXPECT_THROW((void)granulate(tree, bad, 0), ConfigError);
	EXPECT_THROW((void)granulate(tree, {}, 3), ContractViolation);
}

TEST(GranuleFromNode, LeafAndMean)
{
	const auto single = build_index({Instance{{4.0}, {1.0}, 0}});
	const auto leaf = granule_from_node(single, single.root(), 5);
	EXPECT_EQ(leaf.granule_id, 5u);
	EXPECT_EQ(leaf.box, BoundingBox({4.0}, {4.0}));

	const auto pair = build_index(series({1, 3}));
	EXPECT_EQ(granule_from_node(pair, pair.root(), 0).mean_target, std::vector<double>{2.0});
}
