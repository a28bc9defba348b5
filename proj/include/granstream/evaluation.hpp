#pragma once

// Prequential (test-then-train) evaluation of the forgetting regressor.

#include "granstream/forgetting.hpp"
#include "granstream/preprocessing.hpp"
#include "granstream/text.hpp"
#include "granstream/types.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

namespace granstream
{
	struct BatchPolicy
	{
		enum class Mode
		{
			count,
			time,
		};

		Mode mode = Mode::count;
		std::size_t count_threshold = 1000;
		double time_threshold = 0.0;  // same units as the temporal coordinate

		static BatchPolicy by_count(std::size_t n) { return {Mode::count, n, 0.0}; }
		static BatchPolicy by_time(double span) { return {Mode::time, 0, span}; }

		void validate() const
		{
			if (mode == Mode::count && count_threshold == 0)
				throw ConfigError("count batch policy needs a positive threshold");
			if (mode == Mode::time && !(time_threshold > 0.0 && std::isfinite(time_threshold)))
				throw ConfigError("time batch policy needs a positive threshold");
		}
	};

	/// Running MAE / RMSE over every target component of every scored instance.
	struct ErrorAccumulator
	{
		std::uint64_t samples = 0;
		std::uint64_t components = 0;
		double abs_sum = 0.0;
		double sq_sum = 0.0;

		[[nodiscard]] double mae() const { return components ? abs_sum / static_cast<double>(components) : 0.0; }
		[[nodiscard]] double rmse() const { return components ? std::sqrt(sq_sum / static_cast<double>(components)) : 0.0; }
	};

	[[nodiscard]] inline ErrorAccumulator accumulate_error(ErrorAccumulator acc, std::span<const double> y_true,
		std::span<const double> y_pred)
	{
		detail::require(y_true.size() == y_pred.size(), "truth and prediction differ in dimensionality");
		for (std::size_t c = 0; c < y_true.size(); ++c)
		{
			const double e = y_true[c] - y_pred[c];
			acc.abs_sum += std::abs(e);
			acc.sq_sum += e * e;
		}
		acc.components += y_true.size();
		++acc.samples;
		return acc;
	}

	/// Analytic model footprint in bytes:
	///   per granule  16*d_x (bounds) + 8*d_y (mean) + 16 (id, count)
	///   per instance 8*(d_x + d_y) + 8 (sequence id)
	[[nodiscard]] inline std::size_t estimate_model_size(const RecentModel& model)
	{
		if (model.empty())
			return 0;
		const std::size_t dx = model.recent_granules.front().box.dims();
		const std::size_t dy = model.recent_granules.front().mean_target.size();
		return model.recent_granules.size() * (16 * dx + 8 * dy + 16) + model.recent_data.size() * (8 * (dx + dy) + 8);
	}

	[[nodiscard]] inline std::size_t estimate_model_size(const RegressorState& state)
	{
		return estimate_model_size(*state.model);
	}

	struct Checkpoint
	{
		std::uint64_t instances_seen = 0;
		double mae = 0.0;
		double rmse = 0.0;
		double cumulative_eval_time_s = 0.0;
		double mean_query_latency_s = 0.0;
		double max_query_latency_s = 0.0;
		std::size_t model_size_bytes = 0;
		std::size_t retained_instances = 0;
		std::size_t granule_count = 0;
		std::uint64_t outliers_excluded = 0;
		std::uint64_t cold_start_predictions = 0;
		std::uint64_t batches = 0;
	};

	/// State right after each observe_batch call.
	struct BatchRecord
	{
		std::uint64_t batch = 0;  // 1-based
		std::uint64_t instances_seen = 0;
		std::size_t batch_size = 0;
		std::size_t retained_instances = 0;
		std::size_t granule_count = 0;
		std::size_t model_size_bytes = 0;
	};

	struct RunReport
	{
		std::vector<Checkpoint> checkpoints;
		std::vector<BatchRecord> batches;
		std::uint64_t predictions = 0;
		ErrorAccumulator error;
		double predict_time_s = 0.0;
		double train_time_s = 0.0;
		std::size_t max_model_size_bytes = 0;
		std::shared_ptr<const RecentModel> final_model;

		[[nodiscard]] double eval_time_s() const { return predict_time_s + train_time_s; }
	};

	struct RunOptions
	{
		BatchPolicy policy;
		GranulationParams granulation;
		IndexParams index;
		std::optional<std::size_t> temporal_dim;  // last feature when unset
		std::size_t checkpoint_every = 1000;
		bool ablation_no_forget = false;
		bool reject_outliers = true;
		OutlierParams outliers;
		// Called once per scored instance with the prediction it received.
		std::function<void(const Instance&, std::span<const double> prediction, bool cold_start)> on_prediction;
	};

	/// Scores every instance against the current model before it can train it.
	/// Outliers are scored but kept out of the batches. Predictions before the first
	/// batch use the running target mean (zero for the very first instance) and are
	/// counted as cold starts. A trailing partial batch is observed at end of stream.
	/// Only predict and observe calls are timed; checkpoint bookkeeping is not.
	template <class NextInstance>
		requires std::is_invocable_r_v<std::optional<Instance>, NextInstance&>
	[[nodiscard]] RunReport run_prequential(NextInstance&& next, const RunOptions& options)
	{
		using clock = std::chrono::steady_clock;
		options.policy.validate();
		options.granulation.validate();
		options.index.validate();
		if (options.checkpoint_every == 0)
			throw ConfigError("checkpoint_every must be positive");

		RunReport report;
		RunningStats stats;
		std::optional<RegressorState> state;
		std::vector<Instance> buffer;
		std::size_t feature_dims = 0;
		std::size_t target_dims = 0;
		std::size_t temporal_dim = 0;
		double buffer_start = 0.0;
		double latency_sum = 0.0;
		double latency_max = 0.0;
		std::uint64_t outliers = 0;
		std::uint64_t cold_starts = 0;

		auto observe = [&] {
			const auto start = clock::now();
			*state = observe_batch(*state, buffer);
			report.train_time_s += std::chrono::duration<double>(clock::now() - start).count();

			BatchRecord rec;
			rec.batch = state->batch_counter;
			rec.instances_seen = report.predictions;
			rec.batch_size = buffer.size();
			rec.retained_instances = state->model->recent_data.size();
			rec.granule_count = state->model->recent_granules.size();
			rec.model_size_bytes = estimate_model_size(*state);
			report.max_model_size_bytes = std::max(report.max_model_size_bytes, rec.model_size_bytes);
			report.batches.push_back(rec);
			buffer.clear();
		};

		auto checkpoint = [&] {
			Checkpoint cp;
			cp.instances_seen = report.predictions;
			cp.mae = report.error.mae();
			cp.rmse = report.error.rmse();
			cp.cumulative_eval_time_s = report.eval_time_s();
			cp.mean_query_latency_s = report.predictions ? latency_sum / static_cast<double>(report.predictions) : 0.0;
			cp.max_query_latency_s = latency_max;
			cp.model_size_bytes = state ? estimate_model_size(*state) : 0;
			cp.retained_instances = state ? state->model->recent_data.size() : 0;
			cp.granule_count = state ? state->model->recent_granules.size() : 0;
			cp.outliers_excluded = outliers;
			cp.cold_start_predictions = cold_starts;
			cp.batches = state ? state->batch_counter : 0;
			report.checkpoints.push_back(cp);
		};

		while (std::optional<Instance> item = next())
		{
			Instance& inst = *item;
			if (!state)
			{
				feature_dims = inst.features.size();
				target_dims = inst.target.size();
				temporal_dim = options.temporal_dim.value_or(feature_dims - 1);
				if (feature_dims == 0 || temporal_dim >= feature_dims)
					throw ConfigError("temporal_dim out of range for the stream's features");
				state.emplace();
				state->granulation = options.granulation;
				state->index = options.index;
				state->temporal_dim = temporal_dim;
				state->forgetting = !options.ablation_no_forget;
			}
			validate_instance(inst, feature_dims, target_dims);

			// Test.
			std::vector<double> prediction;
			bool cold = false;
			const auto start = clock::now();
			if (state->model->empty())
			{
				prediction = stats.count() ? stats.target_means() : std::vector<double>(target_dims, 0.0);
				cold = true;
			}
			else
			{
				prediction = predict_current(*state, inst.features);
			}
			const double latency = std::chrono::duration<double>(clock::now() - start).count();
			report.predict_time_s += latency;
			latency_sum += latency;
			latency_max = std::max(latency_max, latency);
			cold_starts += cold ? 1 : 0;
			report.error = accumulate_error(report.error, inst.target, prediction);
			++report.predictions;
			if (options.on_prediction)
				options.on_prediction(inst, prediction, cold);

			// Train.
			const std::size_t skip[] = {temporal_dim};
			const bool outlier = options.reject_outliers && is_outlier(stats, inst, options.outliers, skip);
			stats.add(inst);
			if (outlier)
			{
				++outliers;
			}
			else
			{
				const double t = inst.features[temporal_dim];
				if (buffer.empty())
					buffer_start = t;
				buffer.push_back(std::move(inst));
				const bool full = options.policy.mode == BatchPolicy::Mode::count
					? buffer.size() >= options.policy.count_threshold
					: t - buffer_start >= options.policy.time_threshold;
				if (full)
					observe();
			}

			if (report.predictions % options.checkpoint_every == 0)
				checkpoint();
		}

		if (report.predictions == 0)
			throw EmptyBatchError("stream yielded no instances");
		if (!buffer.empty())
			observe();
		// The final checkpoint reflects the flushed model.
		if (!report.checkpoints.empty() && report.checkpoints.back().instances_seen == report.predictions)
			report.checkpoints.pop_back();
		checkpoint();
		report.final_model = state->model;
		return report;
	}

	[[nodiscard]] inline RunReport run_prequential(std::span<const Instance> stream, const RunOptions& options)
	{
		std::size_t i = 0;
		return run_prequential([&]() -> std::optional<Instance> {
			if (i >= stream.size())
				return std::nullopt;
			return stream[i++];
		}, options);
	}

	enum class ReportFormat
	{
		csv,
		jsonl,
	};

	inline std::optional<ReportFormat> parse_report_format(std::string_view s)
	{
		if (s == "csv")
			return ReportFormat::csv;
		if (s == "jsonl")
			return ReportFormat::jsonl;
		return std::nullopt;
	}

	namespace detail
	{
		// Deterministic columns first; wall-clock columns only when requested.
		inline std::vector<std::pair<std::string, std::string>> checkpoint_fields(const Checkpoint& cp, bool timing)
		{
			std::vector<std::pair<std::string, std::string>> f = {
				{"instances_seen", std::to_string(cp.instances_seen)},
				{"mae", format_double(cp.mae)},
				{"rmse", format_double(cp.rmse)},
				{"model_size_bytes", std::to_string(cp.model_size_bytes)},
				{"retained_instances", std::to_string(cp.retained_instances)},
				{"granule_count", std::to_string(cp.granule_count)},
				{"outliers_excluded", std::to_string(cp.outliers_excluded)},
				{"cold_start_predictions", std::to_string(cp.cold_start_predictions)},
				{"batches", std::to_string(cp.batches)},
			};
			if (timing)
			{
				f.emplace_back("cumulative_eval_time_s", format_double(cp.cumulative_eval_time_s));
				f.emplace_back("mean_query_latency_s", format_double(cp.mean_query_latency_s));
				f.emplace_back("max_query_latency_s", format_double(cp.max_query_latency_s));
			}
			return f;
		}
	}

	/// One record per checkpoint. CSV has a header line; JSONL has one object per line.
	/// Wall-clock fields are left out unless include_timing is set, which keeps reports
	/// of identical runs byte-identical.
	inline void emit_report(const RunReport& report, const std::string& path, ReportFormat format, bool include_timing = false)
	{
		std::ofstream out(path, std::ios::binary | std::ios::trunc);
		if (!out)
			throw IoError("cannot write report '" + path + "'");

		if (format == ReportFormat::csv)
		{
			const auto names = detail::checkpoint_fields(Checkpoint{}, include_timing);
			for (std::size_t i = 0; i < names.size(); ++i)
				out << (i ? "," : "") << names[i].first;
			out << '\n';
			for (const auto& cp : report.checkpoints)
			{
				const auto fields = detail::checkpoint_fields(cp, include_timing);
				for (std::size_t i = 0; i < fields.size(); ++i)
					out << (i ? "," : "") << fields[i].second;
				out << '\n';
			}
		}
		else
		{
			for (const auto& cp : report.checkpoints)
			{
				nlohmann::ordered_json row;
				row["instances_seen"] = cp.instances_seen;
				row["mae"] = cp.mae;
				row["rmse"] = cp.rmse;
				row["model_size_bytes"] = cp.model_size_bytes;
				row["retained_instances"] = cp.retained_instances;
				row["granule_count"] = cp.granule_count;
				row["outliers_excluded"] = cp.outliers_excluded;
				row["cold_start_predictions"] = cp.cold_start_predictions;
				row["batches"] = cp.batches;
				if (include_timing)
				{
					row["cumulative_eval_time_s"] = cp.cumulative_eval_time_s;
					row["mean_query_latency_s"] = cp.mean_query_latency_s;
					row["max_query_latency_s"] = cp.max_query_latency_s;
				}
				out << row.dump() << '\n';
			}
		}
		if (!out.flush())
			throw IoError("write to report '" + path + "' failed");
	}

	/// Reads back a report written by emit_report; absent timing fields stay zero.
	inline std::vector<Checkpoint> load_report(const std::string& path, ReportFormat format)
	{
		std::ifstream in(path);
		if (!in)
			throw IoError("cannot open report '" + path + "'");

		std::vector<Checkpoint> out;
		auto assign = [](Checkpoint& cp, std::string_view key, double v) {
			if (key == "instances_seen") cp.instances_seen = static_cast<std::uint64_t>(v);
			else if (key == "mae") cp.mae = v;
			else if (key == "rmse") cp.rmse = v;
			else if (key == "model_size_bytes") cp.model_size_bytes = static_cast<std::size_t>(v);
			else if (key == "retained_instances") cp.retained_instances = static_cast<std::size_t>(v);
			else if (key == "granule_count") cp.granule_count = static_cast<std::size_t>(v);
			else if (key == "outliers_excluded") cp.outliers_excluded = static_cast<std::uint64_t>(v);
			else if (key == "cold_start_predictions") cp.cold_start_predictions = static_cast<std::uint64_t>(v);
			else if (key == "batches") cp.batches = static_cast<std::uint64_t>(v);
			else if (key == "cumulative_eval_time_s") cp.cumulative_eval_time_s = v;
			else if (key == "mean_query_latency_s") cp.mean_query_latency_s = v;
			else if (key == "max_query_latency_s") cp.max_query_latency_s = v;
		};

		std::string line;
		if (format == ReportFormat::csv)
		{
			if (!std::getline(in, line))
				return out;
			std::vector<std::string> names;
			for (auto n : detail::split(detail::trim(line), ','))
				names.emplace_back(n);
			while (std::getline(in, line))
			{
				if (detail::trim(line).empty())
					continue;
				const auto fields = detail::split(detail::trim(line), ',');
				if (fields.size() != names.size())
					throw IoError("malformed report row in '" + path + "'");
				Checkpoint cp;
				for (std::size_t i = 0; i < names.size(); ++i)
				{
					const auto v = detail::parse_double(fields[i]);
					if (!v)
						throw IoError("malformed report value in '" + path + "'");
					assign(cp, names[i], *v);
				}
				out.push_back(cp);
			}
		}
		else
		{
			while (std::getline(in, line))
			{
				if (detail::trim(line).empty())
					continue;
				Checkpoint cp;
				try
				{
					const auto row = nlohmann::json::parse(line);
					for (const auto& [key, value] : row.items())
						assign(cp, key, value.get<double>());
				}
				catch (const nlohmann::json::exception&)
				{
					throw IoError("malformed report row in '" + path + "'");
				}
				out.push_back(cp);
			}
		}
		return out;
	}
}
