#pragma once

// Seeded synthetic streams. Every generator is a pure function of (n, seed, params)
// and emits instances in time order with t_i = i / n as the last feature.

#include "granstream/text.hpp"
#include "granstream/types.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace granstream
{
	/// Ground-truth function of the spatial feature.
	struct BaseFunction
	{
		enum class Kind
		{
			sine,      // amplitude * sin(cycles * pi * x)
			constant,  // value
			linear,    // slope * x + intercept
		};

		Kind kind = Kind::sine;
		double a = 4.0;  // sine: cycles, constant: value, linear: slope
		double b = 1.0;  // sine: amplitude, linear: intercept

		[[nodiscard]] double operator()(double x) const
		{
			switch (kind)
			{
			case Kind::sine: return b * std::sin(a * std::numbers::pi * x);
			case Kind::constant: return a;
			case Kind::linear: return a * x + b;
			}
			return 0.0;
		}

		static BaseFunction sine(double cycles, double amplitude = 1.0) { return {Kind::sine, cycles, amplitude}; }
		static BaseFunction constant(double value) { return {Kind::constant, value, 0.0}; }
		static BaseFunction linear(double slope, double intercept) { return {Kind::linear, slope, intercept}; }

		/// Accepts "sin4pi", "sin:<cycles>[:<amplitude>]", "const:<value>", "linear:<slope>:<intercept>".
		static BaseFunction parse(std::string_view text)
		{
			text = detail::trim(text);
			if (text == "sin4pi")
				return sine(4.0);
			const auto parts = detail::split(text, ':');
			if (parts[0] == "sin" && (parts.size() == 2 || parts.size() == 3))
				return sine(detail::parse_number(parts[1], "sin cycles"),
					parts.size() == 3 ? detail::parse_number(parts[2], "sin amplitude") : 1.0);
			if (parts[0] == "const" && parts.size() == 2)
				return constant(detail::parse_number(parts[1], "const value"));
			if (parts[0] == "linear" && parts.size() == 3)
				return linear(detail::parse_number(parts[1], "linear slope"), detail::parse_number(parts[2], "linear intercept"));
			throw ConfigError("unknown base function '" + std::string(text) + "'");
		}
	};

	namespace detail
	{
		inline void validate_breakpoints(std::span<const double> breakpoints, std::size_t segments, std::string_view what)
		{
			if (segments != breakpoints.size() + 1)
				throw ConfigError(std::string(what) + ": need exactly one more segment than breakpoints");
			for (std::size_t i = 0; i < breakpoints.size(); ++i)
			{
				if (!(breakpoints[i] > 0.0 && breakpoints[i] < 1.0))
					throw ConfigError(std::string(what) + ": breakpoints must lie strictly inside (0, 1)");
				if (i > 0 && !(breakpoints[i] > breakpoints[i - 1]))
					throw ConfigError(std::string(what) + ": breakpoints overlap or are out of order");
			}
		}

		inline std::size_t segment_of(std::span<const double> breakpoints, double t)
		{
			return static_cast<std::size_t>(std::upper_bound(breakpoints.begin(), breakpoints.end(), t) - breakpoints.begin());
		}
	}

	/// Piecewise-constant noise level over time. A breakpoint belongs to the segment after it.
	struct NoiseProfile
	{
		std::vector<double> breakpoints;
		std::vector<double> sigmas{0.0};

		static NoiseProfile constant(double sigma) { return {{}, {sigma}}; }
		static NoiseProfile stepped() { return {{1.0 / 3.0, 2.0 / 3.0}, {0.05, 0.3, 0.1}}; }

		void validate() const
		{
			detail::validate_breakpoints(breakpoints, sigmas.size(), "noise profile");
			for (double s : sigmas)
				if (!(s >= 0.0) || !std::isfinite(s))
					throw ConfigError("noise profile: sigmas must be finite and nonnegative");
		}

		[[nodiscard]] double sigma_at(double t) const { return sigmas[detail::segment_of(breakpoints, t)]; }
	};

	/// Base function switching at temporal breakpoints (concept drift).
	struct FunctionSchedule
	{
		std::vector<double> breakpoints;
		std::vector<BaseFunction> functions{BaseFunction::sine(4.0)};

		static FunctionSchedule single(BaseFunction f) { return {{}, {f}}; }

		void validate() const { detail::validate_breakpoints(breakpoints, functions.size(), "function schedule"); }

		[[nodiscard]] const BaseFunction& at(double t) const { return functions[detail::segment_of(breakpoints, t)]; }
	};

	struct NoiseVaryingParams
	{
		BaseFunction base_fn = BaseFunction::sine(4.0);
		NoiseProfile noise = NoiseProfile::stepped();
	};

	struct NoiseParamVaryingParams
	{
		FunctionSchedule fn_schedule;
		NoiseProfile noise = NoiseProfile::stepped();
	};

	/// Features (x, t); target = schedule(t)(x) + N(0, sigma(t)^2).
	[[nodiscard]] inline std::vector<Instance> gen_noise_param_varying(std::size_t n, std::uint64_t seed,
		const NoiseParamVaryingParams& params)
	{
		if (n < 1)
			throw ConfigError("generator needs n >= 1");
		params.fn_schedule.validate();
		params.noise.validate();

		std::mt19937_64 rng(seed);
		std::uniform_real_distribution<double> uniform(0.0, 1.0);
		std::normal_distribution<double> normal(0.0, 1.0);

		std::vector<Instance> out;
		out.reserve(n);
		for (std::size_t i = 0; i < n; ++i)
		{
			const double t = static_cast<double>(i) / static_cast<double>(n);
			const double x = uniform(rng);
			const double z = normal(rng);
			const double sigma = params.noise.sigma_at(t);
			const double noise = sigma == 0.0 ? 0.0 : sigma * z;
			out.push_back(Instance{{x, t}, {params.fn_schedule.at(t)(x) + noise}, i});
		}
		return out;
	}

	[[nodiscard]] inline std::vector<Instance> gen_noise_varying(std::size_t n, std::uint64_t seed,
		const NoiseVaryingParams& params)
	{
		return gen_noise_param_varying(n, seed, NoiseParamVaryingParams{FunctionSchedule::single(params.base_fn), params.noise});
	}

	/// Reduced vehicle-style scenario: a Gaussian bump whose centre drifts across the
	/// (east, north) plane over time.
	struct DriftingSurfaceParams
	{
		double amplitude = 10.0;
		double width = 0.15;
		double start_east = 0.25;
		double start_north = 0.25;
		double end_east = 0.75;
		double end_north = 0.75;
		NoiseProfile noise = NoiseProfile::constant(0.3);

		[[nodiscard]] double truth(double east, double north, double t) const
		{
			const double ce = start_east + (end_east - start_east) * t;
			const double cn = start_north + (end_north - start_north) * t;
			const double r2 = (east - ce) * (east - ce) + (north - cn) * (north - cn);
			return amplitude * std::exp(-r2 / (2.0 * width * width));
		}
	};

	/// Features (east, north, t).
	[[nodiscard]] inline std::vector<Instance> gen_drifting_surface(std::size_t n, std::uint64_t seed,
		const DriftingSurfaceParams& params)
	{
		if (n < 1)
			throw ConfigError("generator needs n >= 1");
		if (!(params.width > 0.0))
			throw ConfigError("surface width must be positive");
		params.noise.validate();

		std::mt19937_64 rng(seed);
		std::uniform_real_distribution<double> uniform(0.0, 1.0);
		std::normal_distribution<double> normal(0.0, 1.0);

		std::vector<Instance> out;
		out.reserve(n);
		for (std::size_t i = 0; i < n; ++i)
		{
			const double t = static_cast<double>(i) / static_cast<double>(n);
			const double east = uniform(rng);
			const double north = uniform(rng);
			const double z = normal(rng);
			const double sigma = params.noise.sigma_at(t);
			const double noise = sigma == 0.0 ? 0.0 : sigma * z;
			out.push_back(Instance{{east, north, t}, {params.truth(east, north, t) + noise}, i});
		}
		return out;
	}

	/// Textual generator description, e.g.
	///   kind=drift;n=20000;fn=const:0,const:10;fn_breaks=0.5;sigmas=0.3
	///   kind=noise-varying;fn=sin4pi;sigmas=0.05,0.3,0.1;sigma_breaks=0.3333,0.6667
	///   kind=surface;n=50000;sigmas=0.3
	struct GeneratorSpec
	{
		enum class Kind
		{
			noise_varying,
			drift,
			surface,
		};

		Kind kind = Kind::noise_varying;
		std::size_t n = 100000;
		std::uint64_t seed = 1;
		FunctionSchedule schedule;
		NoiseProfile noise = NoiseProfile::stepped();
		DriftingSurfaceParams surface;

		static GeneratorSpec parse(std::string_view text)
		{
			GeneratorSpec spec;
			bool have_noise = false;
			std::vector<double> sigma_breaks;
			std::vector<double> fn_breaks;
			std::vector<BaseFunction> functions;
			for (auto item : detail::split(text, ';'))
			{
				item = detail::trim(item);
				if (item.empty())
					continue;
				const auto eq = item.find('=');
				if (eq == std::string_view::npos)
					throw ConfigError("generator spec item '" + std::string(item) + "' is not key=value");
				const auto key = detail::trim(item.substr(0, eq));
				const auto value = detail::trim(item.substr(eq + 1));
				if (key == "kind")
				{
					if (value == "noise-varying")
						spec.kind = Kind::noise_varying;
					else if (value == "drift" || value == "noise-param-varying")
						spec.kind = Kind::drift;
					else if (value == "surface")
						spec.kind = Kind::surface;
					else
						throw ConfigError("unknown generator kind '" + std::string(value) + "'");
				}
				else if (key == "n")
				{
					const double v = detail::parse_number(value, "n");
					if (v < 1 || std::floor(v) != v)
						throw ConfigError("generator n must be a positive integer");
					spec.n = static_cast<std::size_t>(v);
				}
				else if (key == "seed")
				{
					spec.seed = static_cast<std::uint64_t>(detail::parse_number(value, "seed"));
				}
				else if (key == "fn")
				{
					for (auto f : detail::split(value, ','))
						functions.push_back(BaseFunction::parse(f));
				}
				else if (key == "fn_breaks")
				{
					fn_breaks = detail::parse_number_list(value, "fn_breaks");
				}
				else if (key == "sigmas")
				{
					spec.noise.sigmas = detail::parse_number_list(value, "sigmas");
					have_noise = true;
				}
				else if (key == "sigma_breaks")
				{
					sigma_breaks = detail::parse_number_list(value, "sigma_breaks");
				}
				else if (key == "amplitude")
				{
					spec.surface.amplitude = detail::parse_number(value, "amplitude");
				}
				else if (key == "width")
				{
					spec.surface.width = detail::parse_number(value, "width");
				}
				else
				{
					throw ConfigError("unknown generator spec key '" + std::string(key) + "'");
				}
			}
			if (have_noise || !sigma_breaks.empty())
				spec.noise.breakpoints = sigma_breaks;
			if (spec.kind == Kind::surface && !have_noise)
				spec.noise = NoiseProfile::constant(0.3);
			if (!functions.empty())
				spec.schedule = FunctionSchedule{fn_breaks, functions};
			else if (!fn_breaks.empty())
				throw ConfigError("fn_breaks given without fn");
			if (spec.kind == Kind::noise_varying && spec.schedule.functions.size() != 1)
				throw ConfigError("noise-varying takes a single base function; use kind=drift for a schedule");
			spec.schedule.validate();
			spec.noise.validate();
			spec.surface.noise = spec.noise;
			return spec;
		}

		[[nodiscard]] std::vector<Instance> generate() const
		{
			switch (kind)
			{
			case Kind::noise_varying: return gen_noise_varying(n, seed, NoiseVaryingParams{schedule.functions.front(), noise});
			case Kind::drift: return gen_noise_param_varying(n, seed, NoiseParamVaryingParams{schedule, noise});
			case Kind::surface: return gen_drifting_surface(n, seed, surface);
			}
			return {};
		}

		[[nodiscard]] std::size_t feature_dims() const { return kind == Kind::surface ? 3 : 2; }
	};
}
