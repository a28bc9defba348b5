#pragma once

// Bulk-loaded R-tree over a batch of instances. Nodes carry their MBR and
// target aggregates so that any node can be promoted to a granule directly.

#include "granstream/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace granstream
{
	struct IndexParams
	{
		std::size_t leaf_capacity = 16;
		std::size_t max_fanout = 8;
		std::size_t min_fanout = 2;

		void validate() const
		{
			if (leaf_capacity < 2)
				throw ConfigError("leaf_capacity must be at least 2");
			if (max_fanout < 2)
				throw ConfigError("max_fanout must be at least 2");
			if (min_fanout < 1 || min_fanout > max_fanout)
				throw ConfigError("min_fanout must lie in [1, max_fanout]");
		}
	};

	struct IndexNode
	{
		BoundingBox box;
		std::vector<std::size_t> children;  // indices into IndexTree::nodes()
		std::size_t first = 0;              // subtree instances are [first, last) of IndexTree::instances()
		std::size_t last = 0;
		std::vector<double> mean_target;
		std::vector<double> target_m2;      // per component sum of squared deviations from mean_target

		[[nodiscard]] bool is_leaf() const noexcept { return children.empty(); }
		[[nodiscard]] std::size_t count() const noexcept { return last - first; }
	};

	/// Nodes are stored in preorder with the root first; instances are laid out
	/// in the same preorder so that every subtree owns a contiguous range.
	class IndexTree
	{
	public:
		[[nodiscard]] const IndexNode& root() const { return nodes_.front(); }
		[[nodiscard]] const IndexNode& node(std::size_t i) const { return nodes_.at(i); }
		[[nodiscard]] std::span<const IndexNode> nodes() const noexcept { return nodes_; }
		[[nodiscard]] std::span<const Instance> instances() const noexcept { return instances_; }

		[[nodiscard]] std::span<const Instance> members(const IndexNode& n) const
		{
			return std::span<const Instance>(instances_).subspan(n.first, n.last - n.first);
		}

		[[nodiscard]] const IndexParams& params() const noexcept { return params_; }
		[[nodiscard]] std::size_t feature_dims() const noexcept { return root().box.dims(); }
		[[nodiscard]] std::size_t target_dims() const noexcept { return root().mean_target.size(); }

	private:
		friend IndexTree build_index(std::vector<Instance> instances, const IndexParams& params);

		std::vector<IndexNode> nodes_;
		std::vector<Instance> instances_;
		IndexParams params_;
	};

	namespace detail
	{
		// Sort-tile-recursive grouping. Reorders items so that consecutive runs of the
		// returned sizes are the tiles. Group sizes differ by at most one.
		template <class Coord>
		std::vector<std::size_t> str_partition(std::vector<std::size_t>& items, std::size_t dims, std::size_t capacity,
			const Coord& coord)
		{
			const std::size_t n = items.size();
			const std::size_t groups = (n + capacity - 1) / capacity;
			std::vector<std::size_t> sizes(groups, n / groups);
			for (std::size_t g = 0; g < n % groups; ++g)
				++sizes[g];

			auto tile = [&](auto& self, std::size_t item_begin, std::size_t group_begin, std::size_t group_count,
							std::size_t dim) -> void {
				std::size_t item_count = 0;
				for (std::size_t g = group_begin; g < group_begin + group_count; ++g)
					item_count += sizes[g];

				auto first = items.begin() + static_cast<std::ptrdiff_t>(item_begin);
				std::stable_sort(first, first + static_cast<std::ptrdiff_t>(item_count),
					[&](std::size_t a, std::size_t b) { return coord(a, dim) < coord(b, dim); });

				if (group_count == 1 || dim + 1 >= dims)
					return;

				const double remaining = static_cast<double>(dims - dim);
				auto slabs = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(group_count), 1.0 / remaining) - 1e-9));
				slabs = std::clamp<std::size_t>(slabs, 1, group_count);

				std::size_t next_item = item_begin;
				std::size_t next_group = group_begin;
				for (std::size_t s = 0; s < slabs; ++s)
				{
					const std::size_t slab_groups = group_count / slabs + (s < group_count % slabs ? 1 : 0);
					std::size_t slab_items = 0;
					for (std::size_t g = next_group; g < next_group + slab_groups; ++g)
						slab_items += sizes[g];
					self(self, next_item, next_group, slab_groups, dim + 1);
					next_item += slab_items;
					next_group += slab_groups;
				}
			};
			tile(tile, 0, 0, groups, 0);
			return sizes;
		}

		struct ProtoNode
		{
			BoundingBox box;
			std::vector<std::size_t> children;  // proto node ids
			std::vector<std::size_t> members;   // instance ids, leaves only
		};
	}

	/// Packs instances into leaves of at most leaf_capacity and internal nodes of
	/// at most max_fanout children using sort-tile-recursive bulk loading over the
	/// raw feature coordinates, dimension 0 first. Equal coordinates keep input order.
	/// A tile holding a single node is carried up unchanged, so every internal node
	/// has at least two children.
	inline IndexTree build_index(std::vector<Instance> instances, const IndexParams& params = {})
	{
		params.validate();
		if (instances.empty())
			throw EmptyBatchError("cannot index an empty batch");

		const std::size_t dx = instances.front().features.size();
		const std::size_t dy = instances.front().target.size();
		detail::require(dx > 0 && dy > 0, "instances need at least one feature and one target");
		for (const auto& inst : instances)
			validate_instance(inst, dx, dy);

		std::vector<detail::ProtoNode> proto;

		std::vector<std::size_t> order(instances.size());
		std::iota(order.begin(), order.end(), std::size_t{0});
		const auto leaf_sizes = detail::str_partition(order, dx, params.leaf_capacity,
			[&](std::size_t i, std::size_t k) { return instances[i].features[k]; });

		std::vector<std::size_t> level;
		for (std::size_t pos = 0; const std::size_t size : leaf_sizes)
		{
			detail::ProtoNode leaf;
			leaf.members.assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
				order.begin() + static_cast<std::ptrdiff_t>(pos + size));
			leaf.box = BoundingBox::of_point(instances[leaf.members.front()].features);
			for (std::size_t m : leaf.members)
				leaf.box.expand(instances[m].features);
			level.push_back(proto.size());
			proto.push_back(std::move(leaf));
			pos += size;
		}

		auto make_internal = [&](std::span<const std::size_t> children) {
			detail::ProtoNode node;
			node.children.assign(children.begin(), children.end());
			node.box = proto[children.front()].box;
			for (std::size_t c : children)
				node.box.expand(proto[c].box);
			proto.push_back(std::move(node));
			return proto.size() - 1;
		};

		while (level.size() > params.max_fanout)
		{
			const auto sizes = detail::str_partition(level, dx, params.max_fanout,
				[&](std::size_t id, std::size_t k) { return proto[id].box.midpoint(k); });
			std::vector<std::size_t> next;
			for (std::size_t pos = 0; const std::size_t size : sizes)
			{
				if (size == 1)
					next.push_back(level[pos]);
				else
					next.push_back(make_internal(std::span<const std::size_t>(level).subspan(pos, size)));
				pos += size;
			}
			level = std::move(next);
		}
		const std::size_t root = level.size() == 1 ? level.front() : make_internal(level);

		IndexTree tree;
		tree.params_ = params;
		tree.nodes_.reserve(proto.size());
		tree.instances_.reserve(instances.size());

		auto emit = [&](auto& self, std::size_t proto_id) -> std::size_t {
			const std::size_t idx = tree.nodes_.size();
			tree.nodes_.emplace_back();
			tree.nodes_[idx].box = proto[proto_id].box;
			tree.nodes_[idx].first = tree.instances_.size();

			std::vector<double> mean(dy, 0.0);
			std::vector<double> m2(dy, 0.0);
			if (proto[proto_id].children.empty())
			{
				const auto& members = proto[proto_id].members;
				for (std::size_t m : members)
					for (std::size_t c = 0; c < dy; ++c)
						mean[c] += instances[m].target[c];
				for (auto& v : mean)
					v /= static_cast<double>(members.size());
				for (std::size_t m : members)
				{
					for (std::size_t c = 0; c < dy; ++c)
					{
						const double d = instances[m].target[c] - mean[c];
						m2[c] += d * d;
					}
					tree.instances_.push_back(std::move(instances[m]));
				}
			}
			else
			{
				std::vector<std::size_t> kids;
				for (std::size_t child : proto[proto_id].children)
					kids.push_back(self(self, child));

				// Pairwise-combined mean and M2 (Chan et al.).
				double total = 0.0;
				for (std::size_t k : kids)
				{
					const auto& child = tree.nodes_[k];
					const double nc = static_cast<double>(child.count());
					const double merged = total + nc;
					for (std::size_t c = 0; c < dy; ++c)
					{
						const double delta = child.mean_target[c] - mean[c];
						mean[c] += delta * nc / merged;
						m2[c] += child.target_m2[c] + delta * delta * total * nc / merged;
					}
					total = merged;
				}
				tree.nodes_[idx].children = std::move(kids);
			}
			tree.nodes_[idx].last = tree.instances_.size();
			tree.nodes_[idx].mean_target = std::move(mean);
			tree.nodes_[idx].target_m2 = std::move(m2);
			return idx;
		};
		emit(emit, root);
		return tree;
	}

	inline IndexTree build_index(std::vector<Instance> instances, std::size_t leaf_capacity, std::size_t max_fanout)
	{
		IndexParams params;
		params.leaf_capacity = leaf_capacity;
		params.max_fanout = max_fanout;
		params.min_fanout = std::min<std::size_t>(params.min_fanout, max_fanout);
		return build_index(std::move(instances), params);
	}

	/// Root-first preorder, children in stored order.
	[[nodiscard]] inline std::span<const IndexNode> iterate_nodes(const IndexTree& tree) noexcept
	{
		return tree.nodes();
	}
}
