#include "granstream/str_tree.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace granstream;

namespace
{
	std::vector<Instance> line(std::initializer_list<double> xs)
	{
		std::vector<Instance> out;
		SequenceId id = 0;
		for (double x : xs)
			out.push_back(Instance{{x}, {x * 2.0}, id++});
		return out;
	}

	void preorder(const IndexTree& tree, std::size_t n, std::vector<std::size_t>& out)
	{
		out.push_back(n);
		for (std::size_t c : tree.node(n).children)
			preorder(tree, c, out);
	}
}

TEST(BuildIndex, SingleInstanceIsDegenerateLeafRoot)
{
	const auto tree = build_index({Instance{{0.25, 3.0}, {1.0}, 0}}, 16, 8);
	ASSERT_EQ(tree.nodes().size(), 1u);
	EXPECT_TRUE(tree.root().is_leaf());
	EXPECT_EQ(tree.root().count(), 1u);
	EXPECT_EQ(tree.root().box, BoundingBox({0.25, 3.0}, {0.25, 3.0}));
}

TEST(BuildIndex, CollinearPairsPackIntoAdjacentLeaves)
{
	// Out-of-order input: packing sorts by coordinate, so leaves are {1,2},{3,4},{5,6},{7,8}.
	const auto tree = build_index(line({5, 1, 8, 3, 2, 7, 4, 6}), 2, 8);
	std::vector<std::vector<double>> leaves;
	for (const auto& n : iterate_nodes(tree))
		if (n.is_leaf())
		{
			std::vector<double> xs;
			for (const auto& m : tree.members(n))
				xs.push_back(m.features[0]);
			leaves.push_back(xs);
		}
	const std::vector<std::vector<double>> expected{{1, 2}, {3, 4}, {5, 6}, {7, 8}};
	EXPECT_EQ(leaves, expected);
	EXPECT_EQ(tree.root().children.size(), 4u);
}

TEST(BuildIndex, EqualCoordinatesKeepInputOrder)
{
	const auto tree = build_index(line({1, 1, 1, 1}), 2, 8);
	std::vector<SequenceId> ids;
	for (const auto& inst : tree.instances())
		ids.push_back(inst.sequence_id);
	EXPECT_EQ(ids, (std::vector<SequenceId>{0, 1, 2, 3}));
}

TEST(BuildIndex, Errors)
{
	EXPECT_THROW((void)build_index({}, 16, 8), EmptyBatchError);
	EXPECT_THROW((void)build_index(line({1, 2}), 1, 8), ConfigError);
	EXPECT_THROW((void)build_index(line({1, 2}), 16, 1), ConfigError);

	auto mixed = line({1, 2});
	mixed[1].features.push_back(3.0);
	EXPECT_THROW((void)build_index(mixed, 16, 8), ContractViolation);

	auto nan = line({1, 2});
	nan[0].target[0] = std::nan("");
	EXPECT_THROW((void)build_index(nan, 16, 8), ContractViolation);
}

TEST(BuildIndex, LeafCountsSumToInput)
{
	std::mt19937_64 rng(1);
	const auto data = oracle::random_instances(rng, 1234, 3);
	const auto tree = build_index(data, 16, 8);
	std::size_t total = 0;
	for (const auto& n : iterate_nodes(tree))
		if (n.is_leaf())
			total += n.count();
	EXPECT_EQ(total, data.size());
	EXPECT_EQ(tree.root().count(), data.size());
}

TEST(BuildIndex, InvariantsOnRandomBuilds)
{
	std::mt19937_64 rng(2);
	for (int trial = 0; trial < 30; ++trial)
	{
		const std::size_t dx = 1 + trial % 5;
		const std::size_t n = 1 + static_cast<std::size_t>(rng() % 3000);
		IndexParams params;
		params.leaf_capacity = 2 + trial % 20;
		params.max_fanout = 2 + trial % 9;
		params.min_fanout = std::min<std::size_t>(2, params.max_fanout);
		const auto data = oracle::random_instances(rng, n, dx, 1 + trial % 2);
		const auto tree = build_index(data, params);
		const auto problem = oracle::check_tree(tree, data);
		EXPECT_FALSE(problem.has_value()) << *problem << " (trial " << trial << ")";
	}
}

TEST(BuildIndex, RootAggregatesMatchGlobalMean)
{
	std::mt19937_64 rng(4);
	const auto data = oracle::random_instances(rng, 5000, 2, 2);
	const auto tree = build_index(data);
	for (std::size_t c = 0; c < 2; ++c)
	{
		double sum = 0.0;
		for (const auto& d : data)
			sum += d.target[c];
		EXPECT_LE(oracle::rel_diff(sum / data.size(), tree.root().mean_target[c]), 1e-9);
	}
}

TEST(BuildIndex, Deterministic)
{
	std::mt19937_64 rng(8);
	const auto data = oracle::random_instances(rng, 777, 3);
	const auto a = build_index(data);
	const auto b = build_index(data);
	ASSERT_EQ(a.nodes().size(), b.nodes().size());
	for (std::size_t i = 0; i < a.nodes().size(); ++i)
	{
		EXPECT_EQ(a.nodes()[i].box, b.nodes()[i].box);
		EXPECT_EQ(a.nodes()[i].children, b.nodes()[i].children);
		EXPECT_EQ(a.nodes()[i].first, b.nodes()[i].first);
	}
	EXPECT_TRUE(std::equal(a.instances().begin(), a.instances().end(), b.instances().begin()));
}

TEST(IterateNodes, PreorderRootFirst)
{
	std::mt19937_64 rng(9);
	const auto tree = build_index(oracle::random_instances(rng, 600, 2), 4, 3);
	std::vector<std::size_t> order;
	preorder(tree, 0, order);
	ASSERT_EQ(order.size(), iterate_nodes(tree).size());
	for (std::size_t i = 0; i < order.size(); ++i)
		EXPECT_EQ(order[i], i);
}

TEST(IterateNodes, SingleLeafAndTwoChildren)
{
	EXPECT_EQ(iterate_nodes(build_index(line({1, 2}), 2, 2)).size(), 1u);

	// Four leaves under two internal nodes under the root.
	const auto tree = build_index(line({1, 2, 3, 4, 5, 6, 7, 8}), 2, 2);
	const auto nodes = iterate_nodes(tree);
	ASSERT_EQ(nodes.size(), 7u);
	EXPECT_EQ(nodes[0].children, (std::vector<std::size_t>{1, 4}));
	EXPECT_EQ(nodes[1].children, (std::vector<std::size_t>{2, 3}));
	EXPECT_TRUE(nodes[2].is_leaf());
}
