// granstream command-line front end.
//
//   granstream generate --spec "kind=drift;fn=const:0,const:10;fn_breaks=0.5;sigmas=0.3" --n 20000 --output s.csv
//   granstream run --input s.csv --batch-count 500 --report r.csv --save-model m.txt
//   granstream run --config run.toml --avar-threshold 2
//   granstream query --model m.txt --point 0.3,0.99
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include "granstream/granstream.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <optional>
#include <string>

namespace
{
	using namespace granstream;

	constexpr int exit_runtime = 1;
	constexpr int exit_usage = 2;

	struct GenerateArgs
	{
		std::string spec;
		std::optional<std::size_t> n;
		std::optional<std::uint64_t> seed;
		std::string output;
	};

	struct RunArgs
	{
		std::string input;
		std::string schema;
		std::string generate;
		std::optional<std::size_t> batch_count;
		std::optional<double> batch_time;
		std::size_t leaf_capacity = IndexParams{}.leaf_capacity;
		std::size_t max_fanout = IndexParams{}.max_fanout;
		double avar_threshold = GranulationParams{}.avar_ratio_threshold;
		std::size_t min_granule_size = GranulationParams{}.min_granule_size;
		std::optional<std::uint64_t> seed;
		std::size_t checkpoint_every = 1000;
		bool ablation_no_forget = false;
		bool keep_outliers = false;
		std::optional<std::size_t> temporal_dim;
		std::string save_model;
		std::string report;
		std::string format = "csv";
		bool report_timing = false;
		std::size_t repeats = 5;
	};

	struct QueryArgs
	{
		std::string model;
		std::string point;
	};

	GeneratorSpec resolve_spec(const std::string& text, std::optional<std::size_t> n, std::optional<std::uint64_t> seed)
	{
		auto spec = GeneratorSpec::parse(text);
		if (n)
			spec.n = *n;
		if (seed)
			spec.seed = *seed;
		if (spec.n < 1)
			throw ConfigError("n must be positive");
		return spec;
	}

	int cmd_generate(const GenerateArgs& a)
	{
		const auto spec = resolve_spec(a.spec, a.n, a.seed);
		const auto data = spec.generate();
		write_csv(data, a.output, StreamSchema::for_dims(spec.feature_dims(), 1, spec.feature_dims() - 1));
		std::cout << "wrote " << data.size() << " instances to " << a.output << '\n';
		return 0;
	}

	RunOptions run_options(const RunArgs& a)
	{
		RunOptions o;
		if (a.batch_time)
			o.policy = BatchPolicy::by_time(*a.batch_time);
		else
			o.policy = BatchPolicy::by_count(a.batch_count.value_or(1000));
		o.index.leaf_capacity = a.leaf_capacity;
		o.index.max_fanout = a.max_fanout;
		o.granulation.avar_ratio_threshold = a.avar_threshold;
		o.granulation.min_granule_size = a.min_granule_size;
		o.checkpoint_every = a.checkpoint_every;
		o.ablation_no_forget = a.ablation_no_forget;
		o.reject_outliers = !a.keep_outliers;
		o.temporal_dim = a.temporal_dim;
		o.index.validate();
		o.granulation.validate();
		o.policy.validate();
		if (o.checkpoint_every == 0)
			throw ConfigError("checkpoint-every must be positive");
		return o;
	}

	int cmd_run(const RunArgs& a)
	{
		auto options = run_options(a);
		const auto format = parse_report_format(a.format);
		if (!format)
			throw ConfigError("unknown report format '" + a.format + "'");
		if (a.repeats == 0)
			throw ConfigError("repeats must be positive");

		std::optional<std::vector<Instance>> generated;
		std::optional<StreamSchema> schema;
		if (!a.generate.empty())
		{
			if (!a.schema.empty())
				throw ConfigError("--schema only applies to --input");
			generated = resolve_spec(a.generate, std::nullopt, a.seed).generate();
		}
		else
		{
			if (!a.schema.empty())
				schema = StreamSchema::parse(a.schema);
			if (a.temporal_dim)
			{
				if (!schema)
					schema = read_csv_stream(a.input).schema();
				schema->temporal_dim = a.temporal_dim;
				schema->validate();
			}
		}

		RunReport report;
		double eval_sum = 0.0;
		std::size_t skipped = 0;
		for (std::size_t r = 0; r < a.repeats; ++r)
		{
			if (generated)
			{
				report = run_prequential(*generated, options);
			}
			else
			{
				auto reader = read_csv_stream(a.input, schema);
				options.temporal_dim = reader.temporal_dim();
				report = run_prequential([&] { return reader.next(); }, options);
				skipped = reader.skipped();
			}
			eval_sum += report.eval_time_s();
		}

		if (!a.report.empty())
			emit_report(report, a.report, *format, a.report_timing);
		if (!a.save_model.empty())
			save_model(*report.final_model, a.save_model);

		std::cout << "instances=" << report.predictions << " batches=" << report.batches.size()
				  << " final_mae=" << format_double(report.error.mae()) << " final_rmse=" << format_double(report.error.rmse())
				  << " eval_time_s=" << format_double(eval_sum / static_cast<double>(a.repeats))
				  << " max_model_size_bytes=" << report.max_model_size_bytes;
		if (skipped)
			std::cout << " skipped_rows=" << skipped;
		std::cout << '\n';
		return 0;
	}

	int cmd_query(const QueryArgs& a)
	{
		const RecentModel model = load_model(a.model);
		const auto point = detail::parse_number_list(a.point, "point");
		if (model.empty())
			throw EmptyModelError();
		if (point.size() != model.recent_granules.front().box.dims())
			throw ConfigError("point has " + std::to_string(point.size()) + " coordinates, model expects " +
				std::to_string(model.recent_granules.front().box.dims()));

		const auto start = std::chrono::steady_clock::now();
		const auto y = predict(model.recent_granules, point);
		const double latency = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

		std::cout << "prediction=";
		for (std::size_t c = 0; c < y.size(); ++c)
			std::cout << (c ? "," : "") << format_double(y[c]);
		std::cout << " latency_s=" << format_double(latency) << '\n';
		return 0;
	}

	void add_run_options(CLI::App& run, RunArgs& a)
	{
		auto* input = run.add_option("--input", a.input, "CSV stream to evaluate")->check(CLI::ExistingFile);
		auto* gen = run.add_option("--generate", a.generate, "generator spec used instead of a CSV input");
		input->excludes(gen);
		run.add_option("--schema", a.schema, "CSV column roles, name:role,...");
		auto* count = run.add_option("--batch-count", a.batch_count, "close a batch after N instances (default 1000)");
		auto* time = run.add_option("--batch-time", a.batch_time, "close a batch after S units of the temporal coordinate");
		count->excludes(time);
		run.add_option("--leaf-capacity", a.leaf_capacity, "index leaf capacity")->capture_default_str();
		run.add_option("--max-fanout", a.max_fanout, "index fanout")->capture_default_str();
		run.add_option("--avar-threshold", a.avar_threshold, "granulation acceptance ratio")->capture_default_str();
		run.add_option("--min-granule-size", a.min_granule_size, "nodes smaller than this are never split")
			->capture_default_str();
		run.add_option("--seed", a.seed, "overrides the generator spec's seed");
		run.add_option("--checkpoint-every", a.checkpoint_every, "instances between report checkpoints")
			->capture_default_str();
		run.add_flag("--ablation-no-forget", a.ablation_no_forget, "keep every granule and instance");
		run.add_flag("--keep-outliers", a.keep_outliers, "train on instances outside mean +- 3 sd");
		run.add_option("--temporal-dim", a.temporal_dim, "feature index of the temporal coordinate");
		run.add_option("--save-model", a.save_model, "write the final model here");
		run.add_option("--report", a.report, "write checkpoint records here");
		run.add_option("--format", a.format, "report format, csv or jsonl")->capture_default_str();
		run.add_flag("--report-timing", a.report_timing, "add wall-clock columns to the report");
		run.add_option("--repeats", a.repeats, "runs averaged for the reported eval time")->capture_default_str();
	}
}

int main(int argc, char** argv)
{
	CLI::App app{"Streaming granule regression with iterative forgetting"};
	app.require_subcommand(1);

	GenerateArgs gen_args;
	auto* generate = app.add_subcommand("generate", "write a seeded synthetic stream as CSV");
	generate->add_option("--spec,--generate", gen_args.spec, "generator spec, e.g. kind=drift;fn=const:0,const:10;fn_breaks=0.5")
		->required();
	generate->add_option("--n", gen_args.n, "number of instances (overrides the spec)");
	generate->add_option("--seed", gen_args.seed, "seed (overrides the spec)");
	generate->add_option("--output,-o", gen_args.output, "CSV path")->required();

	RunArgs run_args;
	auto* run = app.add_subcommand("run", "prequential evaluation of a stream");
	add_run_options(*run, run_args);
	app.set_config("--config", "", "TOML-style key = value file for run; command-line flags take precedence");
	run->fallthrough();

	QueryArgs query_args;
	auto* query = app.add_subcommand("query", "predict one point with a saved model");
	query->add_option("--model", query_args.model, "model file written by run --save-model")->required();
	query->add_option("--point", query_args.point, "comma-separated feature vector")->required();

	try
	{
		app.parse(argc, argv);
	}
	catch (const CLI::ParseError& e)
	{
		const int code = app.exit(e);
		return code == 0 ? 0 : exit_usage;
	}

	try
	{
		if (*generate)
			return cmd_generate(gen_args);
		if (*run)
		{
			if (run_args.input.empty() && run_args.generate.empty())
				throw ConfigError("run needs --input or --generate");
			return cmd_run(run_args);
		}
		return cmd_query(query_args);
	}
	catch (const ConfigError& e)
	{
		std::cerr << "error: " << e.what() << '\n';
		return exit_usage;
	}
	catch (const IoError& e)
	{
		std::cerr << "error: " << e.what() << '\n';
		return exit_usage;
	}
	catch (const std::exception& e)
	{
		std::cerr << "error: " << e.what() << '\n';
		return exit_runtime;
	}
}
