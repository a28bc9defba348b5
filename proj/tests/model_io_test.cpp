#include "granstream/model_io.hpp"
#include "granstream/generators.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace granstream;

namespace
{
	std::string temp_path(const std::string& name)
	{
		const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
		return (std::filesystem::temp_directory_path() / ("granstream_model_" + std::string(info->name()) + "_" + name)).string();
	}

	RecentModel trained_model()
	{
		RegressorState s;
		s.temporal_dim = 2;
		const auto data = gen_drifting_surface(3000, 6, {});
		for (std::size_t b = 0; b < 3; ++b)
			s = observe_batch(s, std::span(data).subspan(b * 1000, 1000));
		return *s.model;
	}
}

TEST(ModelIo, RoundTripIsExact)
{
	const auto model = trained_model();
	const auto path = temp_path("m.txt");
	save_model(model, path);
	const auto back = load_model(path);

	EXPECT_EQ(back.temporal_dim, model.temporal_dim);
	EXPECT_EQ(back.model_clock, model.model_clock);
	ASSERT_EQ(back.recent_granules.size(), model.recent_granules.size());
	for (std::size_t i = 0; i < model.recent_granules.size(); ++i)
	{
		EXPECT_EQ(back.recent_granules[i].granule_id, model.recent_granules[i].granule_id);
		EXPECT_EQ(back.recent_granules[i].box, model.recent_granules[i].box);
		EXPECT_EQ(back.recent_granules[i].mean_target, model.recent_granules[i].mean_target);
		EXPECT_EQ(back.recent_granules[i].members, model.recent_granules[i].members);
	}
	EXPECT_EQ(back.recent_data, model.recent_data);

	const double q[] = {0.4, 0.6, 1.0};
	EXPECT_EQ(predict(back.recent_granules, q), predict(model.recent_granules, q));
}

TEST(ModelIo, EmptyModelRoundTrips)
{
	const auto path = temp_path("e.txt");
	save_model(RecentModel{}, path);
	EXPECT_TRUE(load_model(path).empty());
}

TEST(ModelIo, MalformedInputThrowsIoError)
{
	EXPECT_THROW((void)load_model(temp_path("missing")), IoError);

	const auto model = trained_model();
	const auto good = temp_path("good.txt");
	save_model(model, good);
	std::ifstream in(good);
	std::vector<std::string> lines;
	for (std::string l; std::getline(in, l);)
		lines.push_back(l);

	auto write = [&](const std::string& name, const std::vector<std::string>& ls) {
		const auto p = temp_path(name);
		std::ofstream out(p);
		for (const auto& l : ls)
			out << l << '\n';
		return p;
	};

	auto header = lines;
	header[0] = "not-a-model";
	EXPECT_THROW((void)load_model(write("h.txt", header)), IoError);

	auto truncated = lines;
	truncated.resize(lines.size() - 1);
	EXPECT_THROW((void)load_model(write("t.txt", truncated)), IoError);

	auto garbage = lines;
	garbage[2] = "g,0,1,abc";
	EXPECT_THROW((void)load_model(write("g.txt", garbage)), IoError);

	auto inverted = lines;
	inverted[2] = "g,0,1,1,0,0,0,0,0,0";
	EXPECT_THROW((void)load_model(write("i.txt", inverted)), IoError);
}
