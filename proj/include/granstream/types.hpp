#pragma once

#include "granstream/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace granstream
{
	using SequenceId = std::uint64_t;
	using GranuleId = std::uint64_t;

	// Feature-space query; any contiguous run of doubles works.
	using QueryPoint = std::span<const double>;

	// Dimensions excluded from a coverage test (Algorithm 2 drops the temporal axis).
	using IgnoreDims = std::span<const std::size_t>;

	/// One stream record. One feature coordinate is the temporal one; which one is
	/// decided by the owner of the stream (RecentModel::temporal_dim).
	struct Instance
	{
		std::vector<double> features;
		std::vector<double> target;
		SequenceId sequence_id = 0;

		friend bool operator==(const Instance&, const Instance&) = default;
	};

	namespace detail
	{
		inline bool all_finite(std::span<const double> values)
		{
			return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
		}
	}

	inline void validate_instance(const Instance& inst, std::size_t feature_dims, std::size_t target_dims)
	{
		detail::require(inst.features.size() == feature_dims,
			"instance " + std::to_string(inst.sequence_id) + " has " + std::to_string(inst.features.size()) +
				" features, expected " + std::to_string(feature_dims));
		detail::require(inst.target.size() == target_dims,
			"instance " + std::to_string(inst.sequence_id) + " has " + std::to_string(inst.target.size()) +
				" targets, expected " + std::to_string(target_dims));
		detail::require(detail::all_finite(inst.features) && detail::all_finite(inst.target),
			"instance " + std::to_string(inst.sequence_id) + " has non-finite components");
	}

	/// Axis-aligned hyper-rectangle, both bounds inclusive.
	struct BoundingBox
	{
		std::vector<double> min;
		std::vector<double> max;

		BoundingBox() = default;

		BoundingBox(std::vector<double> lo, std::vector<double> hi) : min(std::move(lo)), max(std::move(hi))
		{
			detail::require(min.size() == max.size(), "bounding box bounds differ in dimensionality");
			for (std::size_t k = 0; k < min.size(); ++k)
				detail::require(min[k] <= max[k], "bounding box has min > max in dimension " + std::to_string(k));
		}

		static BoundingBox of_point(std::span<const double> p)
		{
			BoundingBox box;
			box.min.assign(p.begin(), p.end());
			box.max.assign(p.begin(), p.end());
			return box;
		}

		[[nodiscard]] std::size_t dims() const noexcept { return min.size(); }

		[[nodiscard]] double midpoint(std::size_t k) const { return 0.5 * (min[k] + max[k]); }

		void expand(std::span<const double> p)
		{
			for (std::size_t k = 0; k < min.size(); ++k)
			{
				min[k] = std::min(min[k], p[k]);
				max[k] = std::max(max[k], p[k]);
			}
		}

		void expand(const BoundingBox& other)
		{
			for (std::size_t k = 0; k < min.size(); ++k)
			{
				min[k] = std::min(min[k], other.min[k]);
				max[k] = std::max(max[k], other.max[k]);
			}
		}

		friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
	};

	/// A box of proximate instances summarised by their mean target.
	/// Invariants: members is nonempty, every member lies in box, mean_target is
	/// the componentwise mean of member targets.
	struct Granule
	{
		BoundingBox box;
		std::vector<Instance> members;
		std::vector<double> mean_target;
		GranuleId granule_id = 0;

		[[nodiscard]] std::size_t count() const noexcept { return members.size(); }
		[[nodiscard]] double temporal_max(std::size_t temporal_dim) const { return box.max[temporal_dim]; }
	};

	// Builds a granule from members, computing the box and mean. Used by tests and model loading.
	inline Granule make_granule(std::vector<Instance> members, GranuleId id)
	{
		if (members.empty())
			throw ContractViolation("granule needs at least one member");

		Granule g;
		g.granule_id = id;
		g.box = BoundingBox::of_point(members.front().features);
		g.mean_target.assign(members.front().target.size(), 0.0);
		for (const auto& m : members)
		{
			g.box.expand(m.features);
			for (std::size_t c = 0; c < g.mean_target.size(); ++c)
				g.mean_target[c] += m.target[c];
		}
		for (auto& v : g.mean_target)
			v /= static_cast<double>(members.size());
		g.members = std::move(members);
		return g;
	}
}
