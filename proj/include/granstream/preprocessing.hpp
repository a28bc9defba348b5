#pragma once

#include "granstream/types.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace granstream
{
	/// Per-dimension count, sum and sum of squares over features and targets.
	/// Variance is sum_sq/n - mean^2, clamped at zero; this form cancels badly when
	/// |mean| >> sigma, which is accepted here in exchange for O(1) mergeable state.
	class RunningStats
	{
	public:
		[[nodiscard]] std::uint64_t count() const noexcept { return n_; }
		[[nodiscard]] std::size_t feature_dims() const noexcept { return feature_sum_.size(); }
		[[nodiscard]] std::size_t target_dims() const noexcept { return target_sum_.size(); }

		[[nodiscard]] double feature_mean(std::size_t k) const { return mean(feature_sum_.at(k)); }
		[[nodiscard]] double feature_variance(std::size_t k) const { return variance(feature_sum_.at(k), feature_sq_.at(k)); }
		[[nodiscard]] double target_mean(std::size_t c) const { return mean(target_sum_.at(c)); }
		[[nodiscard]] double target_variance(std::size_t c) const { return variance(target_sum_.at(c), target_sq_.at(c)); }

		[[nodiscard]] std::vector<double> target_means() const
		{
			std::vector<double> out(target_sum_.size(), 0.0);
			for (std::size_t c = 0; c < out.size(); ++c)
				out[c] = mean(target_sum_[c]);
			return out;
		}

		void add(const Instance& inst)
		{
			if (n_ == 0)
			{
				feature_sum_.assign(inst.features.size(), 0.0);
				feature_sq_.assign(inst.features.size(), 0.0);
				target_sum_.assign(inst.target.size(), 0.0);
				target_sq_.assign(inst.target.size(), 0.0);
			}
			validate_instance(inst, feature_sum_.size(), target_sum_.size());
			for (std::size_t k = 0; k < inst.features.size(); ++k)
			{
				feature_sum_[k] += inst.features[k];
				feature_sq_[k] += inst.features[k] * inst.features[k];
			}
			for (std::size_t c = 0; c < inst.target.size(); ++c)
			{
				target_sum_[c] += inst.target[c];
				target_sq_[c] += inst.target[c] * inst.target[c];
			}
			++n_;
		}

	private:
		[[nodiscard]] double mean(double sum) const { return n_ == 0 ? 0.0 : sum / static_cast<double>(n_); }

		[[nodiscard]] double variance(double sum, double sq) const
		{
			if (n_ == 0)
				return 0.0;
			const double m = sum / static_cast<double>(n_);
			return std::max(0.0, sq / static_cast<double>(n_) - m * m);
		}

		std::uint64_t n_ = 0;
		std::vector<double> feature_sum_;
		std::vector<double> feature_sq_;
		std::vector<double> target_sum_;
		std::vector<double> target_sq_;
	};

	[[nodiscard]] inline RunningStats update_stats(RunningStats stats, const Instance& inst)
	{
		stats.add(inst);
		return stats;
	}

	struct OutlierParams
	{
		std::uint64_t warmup = 30;
		double sigmas = 3.0;
	};

	/// True iff some feature dimension (outside skip) lies strictly beyond
	/// mean +- sigmas * sd. Targets are never tested. Always false during warmup.
	[[nodiscard]] inline bool is_outlier(const RunningStats& stats, const Instance& inst, const OutlierParams& params = {},
		std::span<const std::size_t> skip = {})
	{
		if (stats.count() < params.warmup || stats.count() == 0)
			return false;
		detail::require(inst.features.size() == stats.feature_dims(), "instance dimensionality differs from stats");

		for (std::size_t k = 0; k < inst.features.size(); ++k)
		{
			if (std::find(skip.begin(), skip.end(), k) != skip.end())
				continue;
			const double mu = stats.feature_mean(k);
			const double sd = std::sqrt(stats.feature_variance(k));
			const double dev = std::abs(inst.features[k] - mu);
			if (sd == 0.0)
			{
				// Constant so far: only the constant passes, up to accumulated rounding in the mean.
				if (dev > 1e-12 * std::max(1.0, std::abs(mu)))
					return true;
			}
			else if (dev > params.sigmas * sd)
			{
				return true;
			}
		}
		return false;
	}

	/// Split calendar fields of one record. Absent fields default to the start of
	/// the enclosing unit (month 1, day 1, hour 0...) and year to the epoch year.
	struct TimeFields
	{
		std::optional<double> year;
		std::optional<double> month;
		std::optional<double> day;
		std::optional<double> hour;
		std::optional<double> minute;
		std::optional<double> second;
	};

	namespace detail
	{
		inline int as_integer(double v, const char* what)
		{
			if (!std::isfinite(v) || std::floor(v) != v || std::abs(v) > 1e7)
				throw RecordError(std::string(what) + " must be an integer");
			return static_cast<int>(v);
		}
	}

	/// Seconds elapsed since 00:00:00 on January 1st of epoch_year.
	[[nodiscard]] inline double consolidate_time(const TimeFields& f, int epoch_year)
	{
		using namespace std::chrono;

		const int y = f.year ? detail::as_integer(*f.year, "year") : epoch_year;
		const int m = f.month ? detail::as_integer(*f.month, "month") : 1;
		const int d = f.day ? detail::as_integer(*f.day, "day") : 1;
		if (m < 1 || m > 12)
			throw RecordError("month out of range");
		const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(std::max(d, 0))}};
		if (d < 1 || !ymd.ok())
			throw RecordError("day out of range");

		const double h = f.hour.value_or(0.0);
		const double mi = f.minute.value_or(0.0);
		const double s = f.second.value_or(0.0);
		if (!std::isfinite(h) || h < 0.0 || h >= 24.0)
			throw RecordError("hour out of range");
		if (!std::isfinite(mi) || mi < 0.0 || mi >= 60.0)
			throw RecordError("minute out of range");
		if (!std::isfinite(s) || s < 0.0 || s > 60.0)
			throw RecordError("second out of range");

		const auto days = (sys_days{ymd} - sys_days{year{epoch_year} / January / 1}).count();
		return static_cast<double>(days) * 86400.0 + h * 3600.0 + mi * 60.0 + s;
	}

	/// Builds an instance whose temporal coordinate (seconds since the epoch) sits at
	/// temporal_dim, with the other features copied through in order.
	[[nodiscard]] inline Instance consolidate_temporal(std::span<const double> features, const TimeFields& time,
		std::span<const double> target, std::size_t temporal_dim, int epoch_year, SequenceId id = 0)
	{
		detail::require(temporal_dim <= features.size(), "temporal_dim beyond feature count");
		Instance inst;
		inst.sequence_id = id;
		inst.features.assign(features.begin(), features.end());
		inst.features.insert(inst.features.begin() + static_cast<std::ptrdiff_t>(temporal_dim),
			consolidate_time(time, epoch_year));
		inst.target.assign(target.begin(), target.end());
		return inst;
	}
}
