#pragma once

// Comma-delimited stream files: one header line, '.' decimals, unquoted numerics.

#include "granstream/preprocessing.hpp"
#include "granstream/text.hpp"
#include "granstream/types.hpp"

#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace granstream
{
	enum class ColumnRole
	{
		feature,
		target,
		ignore,
		time,  // already-consolidated numeric timestamp
		year,
		month,
		day,
		hour,
		minute,
		second,
	};

	inline std::optional<ColumnRole> parse_column_role(std::string_view s)
	{
		if (s == "feature") return ColumnRole::feature;
		if (s == "target") return ColumnRole::target;
		if (s == "ignore") return ColumnRole::ignore;
		if (s == "time") return ColumnRole::time;
		if (s == "year") return ColumnRole::year;
		if (s == "month") return ColumnRole::month;
		if (s == "day") return ColumnRole::day;
		if (s == "hour") return ColumnRole::hour;
		if (s == "minute") return ColumnRole::minute;
		if (s == "second") return ColumnRole::second;
		return std::nullopt;
	}

	struct ColumnSpec
	{
		std::string name;
		ColumnRole role = ColumnRole::feature;
	};

	/// How file columns map onto instance features and targets. The consolidated
	/// temporal coordinate is inserted at temporal_dim among the feature columns
	/// (after them all when unset).
	struct StreamSchema
	{
		std::vector<ColumnSpec> columns;
		char delimiter = ',';
		bool header = true;
		int epoch_year = 1970;
		std::optional<std::size_t> temporal_dim;

		[[nodiscard]] std::size_t count(ColumnRole role) const
		{
			return static_cast<std::size_t>(std::count_if(columns.begin(), columns.end(),
				[&](const ColumnSpec& c) { return c.role == role; }));
		}

		[[nodiscard]] bool has_calendar_fields() const
		{
			for (const auto& c : columns)
				if (c.role >= ColumnRole::year)
					return true;
			return false;
		}

		[[nodiscard]] std::size_t feature_dims() const { return count(ColumnRole::feature) + 1; }
		[[nodiscard]] std::size_t target_dims() const { return count(ColumnRole::target); }
		[[nodiscard]] std::size_t resolved_temporal_dim() const { return temporal_dim.value_or(count(ColumnRole::feature)); }

		void validate() const
		{
			const std::size_t raw = count(ColumnRole::time);
			if (raw > 1)
				throw ConfigError("schema has more than one time column");
			if (raw == 1 && has_calendar_fields())
				throw ConfigError("schema mixes a time column with calendar fields");
			if (raw == 0 && !has_calendar_fields())
				throw ConfigError("schema has no temporal column");
			for (auto role : {ColumnRole::year, ColumnRole::month, ColumnRole::day, ColumnRole::hour, ColumnRole::minute,
					 ColumnRole::second})
				if (count(role) > 1)
					throw ConfigError("schema repeats a calendar field");
			if (target_dims() == 0)
				throw ConfigError("schema has no target column");
			if (resolved_temporal_dim() > count(ColumnRole::feature))
				throw ConfigError("schema temporal_dim beyond feature count");
		}

		/// "name:role,name:role,..." with roles feature|target|ignore|time|year|month|day|hour|minute|second.
		static StreamSchema parse(std::string_view text)
		{
			StreamSchema schema;
			for (auto item : detail::split(text, ','))
			{
				item = detail::trim(item);
				const auto colon = item.rfind(':');
				if (colon == std::string_view::npos)
					throw ConfigError("schema entry '" + std::string(item) + "' is not name:role");
				const auto role = parse_column_role(detail::trim(item.substr(colon + 1)));
				if (!role)
					throw ConfigError("schema entry '" + std::string(item) + "' has an unknown role");
				schema.columns.push_back({std::string(detail::trim(item.substr(0, colon))), *role});
			}
			schema.validate();
			return schema;
		}

		/// Header-driven default: "t" or "time" is the timestamp, names starting
		/// with 'y' are targets, everything else is a feature.
		static StreamSchema infer(std::span<const std::string> header)
		{
			StreamSchema schema;
			for (const auto& name : header)
			{
				ColumnRole role = ColumnRole::feature;
				if (name == "t" || name == "time")
					role = ColumnRole::time;
				else if (!name.empty() && name.front() == 'y')
					role = ColumnRole::target;
				schema.columns.push_back({name, role});
			}
			schema.validate();
			return schema;
		}

		/// Columns x0.., t, y0.. for instances with the temporal coordinate at temporal_dim.
		static StreamSchema for_dims(std::size_t feature_dims, std::size_t target_dims, std::size_t temporal_dim)
		{
			StreamSchema schema;
			for (std::size_t k = 0; k + 1 < feature_dims; ++k)
				schema.columns.push_back({"x" + std::to_string(k), ColumnRole::feature});
			schema.columns.push_back({"t", ColumnRole::time});
			for (std::size_t c = 0; c < target_dims; ++c)
				schema.columns.push_back({"y" + std::to_string(c), ColumnRole::target});
			schema.temporal_dim = temporal_dim;
			schema.validate();
			return schema;
		}
	};

	/// Yields instances in file order. Rows that fail to parse are skipped and
	/// counted; a missing file or a header that does not match the schema throws.
	class CsvStreamReader
	{
	public:
		CsvStreamReader(const std::string& path, std::optional<StreamSchema> schema = std::nullopt) : in_(path)
		{
			if (!in_)
				throw IoError("cannot open '" + path + "'");

			std::vector<std::string> header;
			const bool has_header = schema ? schema->header : true;
			if (has_header)
			{
				std::string line;
				if (!std::getline(in_, line))
					throw ConfigError("'" + path + "' has no header line");
				for (auto field : detail::split(detail::trim(line), schema ? schema->delimiter : ','))
					header.emplace_back(detail::trim(field));
			}
			schema_ = schema ? std::move(*schema) : StreamSchema::infer(header);
			schema_.validate();

			// Column position in the file for each schema entry.
			if (has_header)
			{
				for (const auto& col : schema_.columns)
				{
					const auto it = std::find(header.begin(), header.end(), col.name);
					if (it == header.end())
						throw ConfigError("column '" + col.name + "' missing from header of '" + path + "'");
					positions_.push_back(static_cast<std::size_t>(it - header.begin()));
				}
				width_ = header.size();
			}
			else
			{
				for (std::size_t i = 0; i < schema_.columns.size(); ++i)
					positions_.push_back(i);
				width_ = schema_.columns.size();
			}
		}

		[[nodiscard]] const StreamSchema& schema() const noexcept { return schema_; }
		[[nodiscard]] std::size_t skipped() const noexcept { return skipped_; }
		[[nodiscard]] std::size_t feature_dims() const { return schema_.feature_dims(); }
		[[nodiscard]] std::size_t temporal_dim() const { return schema_.resolved_temporal_dim(); }

		std::optional<Instance> next()
		{
			std::string line;
			while (std::getline(in_, line))
			{
				if (detail::trim(line).empty())
					continue;
				if (auto inst = parse_row(line))
					return inst;
				++skipped_;
			}
			return std::nullopt;
		}

	private:
		std::optional<Instance> parse_row(std::string_view line)
		{
			const auto fields = detail::split(detail::trim(line), schema_.delimiter);
			if (fields.size() != width_)
				return std::nullopt;

			std::vector<double> features;
			std::vector<double> target;
			std::optional<double> raw_time;
			TimeFields calendar;
			for (std::size_t i = 0; i < schema_.columns.size(); ++i)
			{
				const auto role = schema_.columns[i].role;
				if (role == ColumnRole::ignore)
					continue;
				const auto value = detail::parse_double(fields[positions_[i]]);
				if (!value || !std::isfinite(*value))
					return std::nullopt;
				switch (role)
				{
				case ColumnRole::feature: features.push_back(*value); break;
				case ColumnRole::target: target.push_back(*value); break;
				case ColumnRole::time: raw_time = *value; break;
				case ColumnRole::year: calendar.year = *value; break;
				case ColumnRole::month: calendar.month = *value; break;
				case ColumnRole::day: calendar.day = *value; break;
				case ColumnRole::hour: calendar.hour = *value; break;
				case ColumnRole::minute: calendar.minute = *value; break;
				case ColumnRole::second: calendar.second = *value; break;
				case ColumnRole::ignore: break;
				}
			}

			Instance inst;
			try
			{
				if (raw_time)
				{
					inst.features = std::move(features);
					inst.features.insert(inst.features.begin() + static_cast<std::ptrdiff_t>(schema_.resolved_temporal_dim()),
						*raw_time);
					inst.target = std::move(target);
				}
				else
				{
					inst = consolidate_temporal(features, calendar, target, schema_.resolved_temporal_dim(), schema_.epoch_year);
				}
			}
			catch (const RecordError&)
			{
				return std::nullopt;
			}
			inst.sequence_id = next_id_++;
			return inst;
		}

		std::ifstream in_;
		StreamSchema schema_;
		std::vector<std::size_t> positions_;
		std::size_t width_ = 0;
		std::size_t skipped_ = 0;
		SequenceId next_id_ = 0;
	};

	inline CsvStreamReader read_csv_stream(const std::string& path, std::optional<StreamSchema> schema = std::nullopt)
	{
		return CsvStreamReader(path, std::move(schema));
	}

	inline std::vector<Instance> read_csv(const std::string& path, std::optional<StreamSchema> schema = std::nullopt,
		std::size_t* skipped = nullptr)
	{
		auto reader = read_csv_stream(path, std::move(schema));
		std::vector<Instance> out;
		while (auto inst = reader.next())
			out.push_back(std::move(*inst));
		if (skipped)
			*skipped = reader.skipped();
		return out;
	}

	/// Header plus one row per instance. Only schemas with a single `time` column
	/// can be written, since calendar fields are not reconstructed.
	inline void write_csv(std::span<const Instance> instances, const std::string& path, const StreamSchema& schema)
	{
		schema.validate();
		if (schema.count(ColumnRole::time) != 1)
			throw ConfigError("write_csv needs a schema with a single time column");

		std::ofstream out(path, std::ios::binary | std::ios::trunc);
		if (!out)
			throw IoError("cannot write '" + path + "'");

		for (std::size_t i = 0; i < schema.columns.size(); ++i)
			out << (i ? std::string(1, schema.delimiter) : "") << schema.columns[i].name;
		out << '\n';

		const std::size_t tdim = schema.resolved_temporal_dim();
		for (const auto& inst : instances)
		{
			detail::require(inst.features.size() == schema.feature_dims() && inst.target.size() == schema.target_dims(),
				"instance does not match schema dimensions");
			std::size_t feature = 0;
			std::size_t target = 0;
			for (std::size_t i = 0; i < schema.columns.size(); ++i)
			{
				if (i)
					out << schema.delimiter;
				switch (schema.columns[i].role)
				{
				case ColumnRole::feature:
					if (feature == tdim)
						++feature;
					out << format_double(inst.features[feature++]);
					break;
				case ColumnRole::time: out << format_double(inst.features[tdim]); break;
				case ColumnRole::target: out << format_double(inst.target[target++]); break;
				default: out << '0'; break;
				}
			}
			out << '\n';
		}
		if (!out.flush())
			throw IoError("write to '" + path + "' failed");
	}
}
