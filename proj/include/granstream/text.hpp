#pragma once

// Small parsing helpers shared by the generator spec, CSV and model readers.

#include "granstream/errors.hpp"

#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace granstream
{
	namespace detail
	{
		inline std::vector<std::string_view> split(std::string_view s, char sep)
		{
			std::vector<std::string_view> out;
			std::size_t start = 0;
			while (true)
			{
				const auto pos = s.find(sep, start);
				out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
				if (pos == std::string_view::npos)
					break;
				start = pos + 1;
			}
			return out;
		}

		inline std::string_view trim(std::string_view s)
		{
			while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n'))
				s.remove_prefix(1);
			while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
				s.remove_suffix(1);
			return s;
		}

		// Whole-field double parse; nullopt on anything else.
		inline std::optional<double> parse_double(std::string_view s)
		{
			s = trim(s);
			if (!s.empty() && s.front() == '+')
				s.remove_prefix(1);
			double v = 0.0;
			const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
			if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
				return std::nullopt;
			return v;
		}

		inline double parse_number(std::string_view s, std::string_view what)
		{
			const auto v = parse_double(s);
			if (!v || !std::isfinite(*v))
				throw ConfigError("invalid number '" + std::string(s) + "' for " + std::string(what));
			return *v;
		}

		inline std::vector<double> parse_number_list(std::string_view s, std::string_view what)
		{
			std::vector<double> out;
			if (trim(s).empty())
				return out;
			for (auto part : split(s, ','))
				out.push_back(parse_number(part, what));
			return out;
		}
	}


	// Shortest text that reads back to the same double (17 significant digits at most).
	inline std::string format_double(double v)
	{
		char buf[64];
		const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
		return std::string(buf, res.ptr);
	}
}
