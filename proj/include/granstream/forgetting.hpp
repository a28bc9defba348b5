#pragma once

// Recent-granule extraction and the per-batch forgetting cycle.

#include "granstream/granulation.hpp"
#include "granstream/granule_model.hpp"
#include "granstream/str_tree.hpp"
#include "granstream/types.hpp"

#include <algorithm>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <span>
#include <unordered_set>
#include <vector>

namespace granstream
{
	/// How a granule earns its place in the recent set.
	enum class RecentRule
	{
		// Kept iff one of its own members has it as newest spatial cover.
		self_witnessed,
		// Every newest cover found while scanning members is kept, including foreign ones;
		// the scan of a granule stops at the first member that selects it.
		scan_inserts_all,
	};

	struct RecentModel
	{
		std::vector<Granule> recent_granules;
		std::vector<Instance> recent_data;  // members of recent_granules, by sequence_id
		std::size_t temporal_dim = 0;
		double model_clock = -std::numeric_limits<double>::infinity();

		[[nodiscard]] bool empty() const noexcept { return recent_granules.empty(); }
	};

	struct RegressorState
	{
		std::shared_ptr<const RecentModel> model = std::make_shared<const RecentModel>();
		GranulationParams granulation;
		IndexParams index;
		std::uint64_t batch_counter = 0;
		std::size_t temporal_dim = 0;
		// false reproduces the no-forgetting ablation: every granule and instance is kept.
		bool forgetting = true;
	};

	namespace detail
	{
		// Newest granule whose spatial projection covers point; ties go to the smaller id.
		// by_recency must be sorted by (temporal max desc, id asc), so the first hit wins.
		inline const Granule* newest_cover(std::span<const Granule* const> by_recency, QueryPoint point,
			std::size_t temporal_dim)
		{
			const std::size_t ignore[] = {temporal_dim};
			for (const Granule* g : by_recency)
				if (covers(g->box, point, ignore))
					return g;
			return nullptr;
		}

		inline std::vector<bool> recent_mask(std::span<const Granule> granules, std::size_t temporal_dim, RecentRule rule)
		{
			if (granules.empty())
				throw EmptyModelError();
			detail::require(temporal_dim < granules.front().box.dims(), "temporal_dim out of range");

			std::vector<const Granule*> by_recency;
			by_recency.reserve(granules.size());
			for (const auto& g : granules)
				by_recency.push_back(&g);
			std::sort(by_recency.begin(), by_recency.end(), [&](const Granule* a, const Granule* b) {
				const double ta = a->temporal_max(temporal_dim);
				const double tb = b->temporal_max(temporal_dim);
				return ta != tb ? ta > tb : a->granule_id < b->granule_id;
			});

			std::vector<bool> keep(granules.size(), false);
			const Granule* base = granules.data();
			for (std::size_t i = 0; i < granules.size(); ++i)
			{
				for (const auto& member : granules[i].members)
				{
					// A granule always covers its own members, so a cover exists.
					const Granule* top = newest_cover(by_recency, member.features, temporal_dim);
					if (top == &granules[i])
					{
						keep[i] = true;
						break;
					}
					if (rule == RecentRule::scan_inserts_all)
						keep[static_cast<std::size_t>(top - base)] = true;
				}
			}
			return keep;
		}
	}

	/// Granules visible from the current-time hyperplane, ordered by granule_id.
	[[nodiscard]] inline std::vector<Granule> extract_recent(std::span<const Granule> granules, std::size_t temporal_dim,
		RecentRule rule = RecentRule::self_witnessed)
	{
		const auto keep = detail::recent_mask(granules, temporal_dim, rule);
		std::vector<Granule> result;
		for (std::size_t i = 0; i < granules.size(); ++i)
			if (keep[i])
				result.push_back(granules[i]);
		std::sort(result.begin(), result.end(),
			[](const Granule& a, const Granule& b) { return a.granule_id < b.granule_id; });
		return result;
	}

	/// Members of the given granules, one copy per sequence_id, ordered by sequence_id.
	[[nodiscard]] inline std::vector<Instance> collect_recent_data(std::span<const Granule> recent)
	{
		std::vector<const Instance*> all;
		for (const auto& g : recent)
			for (const auto& m : g.members)
				all.push_back(&m);
		std::stable_sort(all.begin(), all.end(),
			[](const Instance* a, const Instance* b) { return a->sequence_id < b->sequence_id; });

		std::vector<Instance> out;
		out.reserve(all.size());
		for (const Instance* inst : all)
			if (out.empty() || out.back().sequence_id != inst->sequence_id)
				out.push_back(*inst);
		return out;
	}

	/// Merges the batch with the retained data, regranulates, and keeps the recent
	/// granules. The input state is left untouched and stays queryable.
	[[nodiscard]] inline RegressorState observe_batch(const RegressorState& state, std::span<const Instance> batch)
	{
		if (batch.empty())
			throw EmptyBatchError();

		const RecentModel& prior = *state.model;
		std::vector<Instance> combined;
		combined.reserve(prior.recent_data.size() + batch.size());
		combined.insert(combined.end(), prior.recent_data.begin(), prior.recent_data.end());
		combined.insert(combined.end(), batch.begin(), batch.end());

		detail::require(state.temporal_dim < batch.front().features.size(), "temporal_dim out of range");
		double clock = prior.model_clock;
		for (const auto& inst : combined)
			clock = std::max(clock, inst.features.at(state.temporal_dim));

		const IndexTree tree = build_index(std::move(combined), state.index);
		std::vector<Granule> granules = granulate(tree, state.granulation, state.temporal_dim);

		auto next = std::make_shared<RecentModel>();
		next->temporal_dim = state.temporal_dim;
		next->model_clock = clock;
		if (state.forgetting)
		{
			const auto keep = detail::recent_mask(granules, state.temporal_dim, RecentRule::self_witnessed);
			for (std::size_t i = 0; i < granules.size(); ++i)
				if (keep[i])
					next->recent_granules.push_back(std::move(granules[i]));
		}
		else
		{
			next->recent_granules = std::move(granules);
		}
		next->recent_data = collect_recent_data(next->recent_granules);

		RegressorState out = state;
		out.model = std::move(next);
		++out.batch_counter;
		return out;
	}

	[[nodiscard]] inline std::vector<double> predict_current(const RegressorState& state, QueryPoint q)
	{
		if (state.model->empty())
			throw ColdStartError();
		return predict(state.model->recent_granules, q);
	}

	/// One writer, many readers. Readers always see a complete state; observe()
	/// builds the successor off to the side and installs it with a pointer swap.
	class StreamRegressor
	{
	public:
		explicit StreamRegressor(RegressorState initial)
			: state_(std::make_shared<const RegressorState>(std::move(initial)))
		{
		}

		[[nodiscard]] std::shared_ptr<const RegressorState> snapshot() const
		{
			std::lock_guard lock(swap_mutex_);
			return state_;
		}

		void observe(std::span<const Instance> batch)
		{
			std::lock_guard writer(writer_mutex_);
			auto current = snapshot();
			auto next = std::make_shared<const RegressorState>(observe_batch(*current, batch));
			std::lock_guard lock(swap_mutex_);
			state_ = std::move(next);
		}

		[[nodiscard]] std::vector<double> predict(QueryPoint q) const { return predict_current(*snapshot(), q); }

	private:
		mutable std::mutex swap_mutex_;
		std::mutex writer_mutex_;
		std::shared_ptr<const RegressorState> state_;
	};
}
