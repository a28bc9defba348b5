#pragma once

// Text serialisation of a RecentModel.
//
//   granstream-model,1
//   dims,<d_x>,<d_y>,<temporal_dim>,<model_clock>,<granule_count>
//   g,<granule_id>,<count>,<min x d_x>,<max x d_x>,<mean x d_y>
//   m,<sequence_id>,<features x d_x>,<target x d_y>      (count lines after each g)
//
// Doubles use up to 17 significant digits and read back exactly.

#include "granstream/forgetting.hpp"
#include "granstream/text.hpp"

#include <fstream>
#include <string>
#include <vector>

namespace granstream
{
	inline void save_model(const RecentModel& model, const std::string& path)
	{
		std::ofstream out(path, std::ios::binary | std::ios::trunc);
		if (!out)
			throw IoError("cannot write model '" + path + "'");

		const std::size_t dx = model.empty() ? 0 : model.recent_granules.front().box.dims();
		const std::size_t dy = model.empty() ? 0 : model.recent_granules.front().mean_target.size();
		out << "granstream-model,1\n";
		out << "dims," << dx << ',' << dy << ',' << model.temporal_dim << ',' << format_double(model.model_clock) << ','
			<< model.recent_granules.size() << '\n';

		auto write_values = [&](std::span<const double> values) {
			for (double v : values)
				out << ',' << format_double(v);
		};
		for (const auto& g : model.recent_granules)
		{
			out << "g," << g.granule_id << ',' << g.count();
			write_values(g.box.min);
			write_values(g.box.max);
			write_values(g.mean_target);
			out << '\n';
			for (const auto& m : g.members)
			{
				out << "m," << m.sequence_id;
				write_values(m.features);
				write_values(m.target);
				out << '\n';
			}
		}
		if (!out.flush())
			throw IoError("write to model '" + path + "' failed");
	}

	inline RecentModel load_model(const std::string& path)
	{
		std::ifstream in(path);
		if (!in)
			throw IoError("cannot open model '" + path + "'");

		std::string line;
		auto fail = [&](const std::string& why) -> IoError { return IoError("model '" + path + "': " + why); };
		auto number = [&](std::string_view s) {
			const auto v = detail::parse_double(s);
			if (!v)
				throw fail("bad number '" + std::string(s) + "'");
			return *v;
		};
		auto integer = [&](std::string_view s) {
			const double v = number(s);
			if (v < 0 || std::floor(v) != v)
				throw fail("bad integer '" + std::string(s) + "'");
			return static_cast<std::uint64_t>(v);
		};

		if (!std::getline(in, line) || detail::trim(line) != "granstream-model,1")
			throw fail("missing header");
		if (!std::getline(in, line))
			throw fail("missing dims line");
		const auto dims = detail::split(detail::trim(line), ',');
		if (dims.size() != 6 || dims[0] != "dims")
			throw fail("malformed dims line");

		const std::size_t dx = integer(dims[1]);
		const std::size_t dy = integer(dims[2]);
		RecentModel model;
		model.temporal_dim = integer(dims[3]);
		model.model_clock = number(dims[4]);
		const std::size_t granules = integer(dims[5]);

		for (std::size_t gi = 0; gi < granules; ++gi)
		{
			if (!std::getline(in, line))
				throw fail("truncated granule list");
			const auto f = detail::split(detail::trim(line), ',');
			if (f.size() != 3 + 2 * dx + dy || f[0] != "g")
				throw fail("malformed granule line");

			Granule g;
			g.granule_id = integer(f[1]);
			const std::size_t count = integer(f[2]);
			std::vector<double> lo;
			std::vector<double> hi;
			for (std::size_t k = 0; k < dx; ++k)
			{
				lo.push_back(number(f[3 + k]));
				hi.push_back(number(f[3 + dx + k]));
			}
			try
			{
				g.box = BoundingBox(std::move(lo), std::move(hi));
			}
			catch (const ContractViolation& e)
			{
				throw fail(e.what());
			}
			for (std::size_t c = 0; c < dy; ++c)
				g.mean_target.push_back(number(f[3 + 2 * dx + c]));

			for (std::size_t mi = 0; mi < count; ++mi)
			{
				if (!std::getline(in, line))
					throw fail("truncated member list");
				const auto mf = detail::split(detail::trim(line), ',');
				if (mf.size() != 2 + dx + dy || mf[0] != "m")
					throw fail("malformed member line");
				Instance inst;
				inst.sequence_id = integer(mf[1]);
				for (std::size_t k = 0; k < dx; ++k)
					inst.features.push_back(number(mf[2 + k]));
				for (std::size_t c = 0; c < dy; ++c)
					inst.target.push_back(number(mf[2 + dx + c]));
				g.members.push_back(std::move(inst));
			}
			if (g.members.empty())
				throw fail("granule without members");
			model.recent_granules.push_back(std::move(g));
		}
		if (!model.empty() && model.temporal_dim >= dx)
			throw fail("temporal_dim out of range");
		model.recent_data = collect_recent_data(model.recent_granules);
		return model;
	}
}
