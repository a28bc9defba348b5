#pragma once

// Chooses a cut through an IndexTree and promotes the cut nodes to granules.
//
// The descent rule is a stand-in for the adaptive Allan-variance granulation it
// is modelled on, whose exact criterion is not reproduced here. At a node v with
// children c_1..c_k ordered along time, let A be the Allan variance of the child
// mean targets and W the pooled within-child target variance. Under a locally
// constant truth the child means differ only by sampling noise of size about
// W / mean_child_count, so
//
//     A <= avar_ratio_threshold * W / mean_child_count   ->  v becomes a granule
//     otherwise                                          ->  descend into children
//
// Leaves, and nodes with fewer than min_granule_size instances, are always accepted.
// Multi-target trees accept a node only if every target component passes.

#include "granstream/str_tree.hpp"
#include "granstream/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace granstream
{
	struct GranulationParams
	{
		double avar_ratio_threshold = 1.0;
		std::size_t min_granule_size = 2;

		void validate() const
		{
			if (!(avar_ratio_threshold > 0.0) || !std::isfinite(avar_ratio_threshold))
				throw ConfigError("avar_ratio_threshold must be a positive finite number");
			if (min_granule_size < 1)
				throw ConfigError("min_granule_size must be at least 1");
		}
	};

	/// Two-sample (Allan) variance: half the mean squared difference of consecutive elements.
	[[nodiscard]] inline double allan_variance(std::span<const double> seq)
	{
		if (seq.size() < 2)
			throw InsufficientSamplesError("allan variance needs at least two samples, got " + std::to_string(seq.size()));
		double sum = 0.0;
		for (std::size_t i = 1; i < seq.size(); ++i)
		{
			const double d = seq[i] - seq[i - 1];
			sum += d * d;
		}
		return sum / (2.0 * static_cast<double>(seq.size() - 1));
	}

	[[nodiscard]] inline Granule granule_from_node(const IndexTree& tree, const IndexNode& node, GranuleId id)
	{
		Granule g;
		g.box = node.box;
		const auto members = tree.members(node);
		g.members.assign(members.begin(), members.end());
		g.mean_target = node.mean_target;
		g.granule_id = id;
		return g;
	}

	namespace detail
	{
		inline bool accept_node(const IndexTree& tree, const IndexNode& node, const GranulationParams& params,
			std::size_t temporal_dim)
		{
			std::vector<const IndexNode*> kids;
			kids.reserve(node.children.size());
			for (std::size_t c : node.children)
				kids.push_back(&tree.node(c));
			std::stable_sort(kids.begin(), kids.end(), [&](const IndexNode* a, const IndexNode* b) {
				return a->box.midpoint(temporal_dim) < b->box.midpoint(temporal_dim);
			});

			const double total = static_cast<double>(node.count());
			const double mean_child_count = total / static_cast<double>(kids.size());

			std::vector<double> seq(kids.size());
			for (std::size_t comp = 0; comp < node.mean_target.size(); ++comp)
			{
				double pooled = 0.0;
				double scale = 1.0;
				for (std::size_t i = 0; i < kids.size(); ++i)
				{
					seq[i] = kids[i]->mean_target[comp];
					pooled += kids[i]->target_m2[comp];
					scale = std::max(scale, std::abs(seq[i]));
				}
				const double within = pooled / total;
				const double avar = allan_variance(seq);
				// Rounding floor so that identical targets accumulated along different paths still merge.
				const double floor = (1e-12 * scale) * (1e-12 * scale);
				if (avar > params.avar_ratio_threshold * within / mean_child_count + floor)
					return false;
			}
			return true;
		}
	}

	/// Returns the granules of the chosen cut, ids assigned 0.. in preorder.
	/// Members of the returned granules partition the tree's instances.
	[[nodiscard]] inline std::vector<Granule> granulate(const IndexTree& tree, const GranulationParams& params,
		std::size_t temporal_dim)
	{
		params.validate();
		detail::require(temporal_dim < tree.feature_dims(), "temporal_dim out of range");

		std::vector<Granule> result;
		auto visit = [&](auto& self, const IndexNode& node) -> void {
			const bool accept = node.is_leaf() || node.count() < params.min_granule_size ||
				(node.children.size() >= 2 && detail::accept_node(tree, node, params, temporal_dim));
			if (accept)
			{
				result.push_back(granule_from_node(tree, node, result.size()));
				return;
			}
			for (std::size_t c : node.children)
				self(self, tree.node(c));
		};
		visit(visit, tree.root());
		return result;
	}
}
