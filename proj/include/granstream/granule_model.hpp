#pragma once

// Granule-set regression: coverage test, box distance and the query procedure.

#include "granstream/types.hpp"

#include <algorithm>
#include <limits>
#include <span>
#include <vector>

namespace granstream
{
	namespace detail
	{
		inline bool is_ignored(IgnoreDims ignore, std::size_t k)
		{
			return std::find(ignore.begin(), ignore.end(), k) != ignore.end();
		}

		inline void require_same_dims(const BoundingBox& box, QueryPoint q)
		{
			if (box.dims() != q.size())
				throw ContractViolation("query has " + std::to_string(q.size()) + " dimensions, box has " +
					std::to_string(box.dims()));
		}
	}

	/// True iff min[k] <= q[k] <= max[k] for every dimension k not in ignore.
	[[nodiscard]] inline bool covers(const BoundingBox& box, QueryPoint q, IgnoreDims ignore = {})
	{
		detail::require_same_dims(box, q);
		for (std::size_t k = 0; k < q.size(); ++k)
		{
			if (!ignore.empty() && detail::is_ignored(ignore, k))
				continue;
			if (q[k] < box.min[k] || q[k] > box.max[k])
				return false;
		}
		return true;
	}

	/// Squared distance from q to the nearest point of box. Dimensions where q is
	/// inside the interval contribute nothing, so the result is zero exactly when
	/// the box covers q.
	///
	/// Note: the "nearest vertex" formulation sometimes quoted for this distance,
	/// sum_k min(q-max, q-min)^2, is nonzero for interior coordinates. This is the
	/// clamped MINDIST instead. Only ever used for an argmin, so no square root.
	[[nodiscard]] inline double mindist_sq(const BoundingBox& box, QueryPoint q)
	{
		detail::require_same_dims(box, q);
		double sum = 0.0;
		for (std::size_t k = 0; k < q.size(); ++k)
		{
			if (q[k] < box.min[k])
			{
				const double d = box.min[k] - q[k];
				sum += d * d;
			}
			else if (q[k] > box.max[k])
			{
				const double d = q[k] - box.max[k];
				sum += d * d;
			}
		}
		return sum;
	}

	/// Granule with the smallest mindist_sq to q; ties go to the smaller granule_id.
	[[nodiscard]] inline const Granule& find_closest_granule(std::span<const Granule> granules, QueryPoint q)
	{
		if (granules.empty())
			throw EmptyModelError();

		const Granule* best = nullptr;
		double best_dist = std::numeric_limits<double>::infinity();
		for (const auto& g : granules)
		{
			const double d = mindist_sq(g.box, q);
			if (best == nullptr || d < best_dist || (d == best_dist && g.granule_id < best->granule_id))
			{
				best = &g;
				best_dist = d;
			}
		}
		return *best;
	}

	/// All granules covering q outside ignore, ordered by granule_id.
	[[nodiscard]] inline std::vector<const Granule*> covering_granules(
		std::span<const Granule> granules, QueryPoint q, IgnoreDims ignore = {})
	{
		std::vector<const Granule*> result;
		for (const auto& g : granules)
			if (covers(g.box, q, ignore))
				result.push_back(&g);
		std::sort(result.begin(), result.end(),
			[](const Granule* a, const Granule* b) { return a->granule_id < b->granule_id; });
		return result;
	}

	/// Mean of the covering granules' mean targets, summed in granule_id order.
	/// Falls back to the closest granule when nothing covers q.
	[[nodiscard]] inline std::vector<double> predict(std::span<const Granule> granules, QueryPoint q)
	{
		if (granules.empty())
			throw EmptyModelError();

		auto chosen = covering_granules(granules, q);
		if (chosen.empty())
			chosen.push_back(&find_closest_granule(granules, q));

		std::vector<double> sum(chosen.front()->mean_target.size(), 0.0);
		for (const Granule* g : chosen)
			for (std::size_t c = 0; c < sum.size(); ++c)
				sum[c] += g->mean_target[c];
		for (auto& v : sum)
			v /= static_cast<double>(chosen.size());
		return sum;
	}
}
