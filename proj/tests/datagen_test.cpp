#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "stacknet/datagen.hpp"
#include "stacknet/errors.hpp"

using namespace stacknet;

namespace {

GenConfig small_config() {
  GenConfig cfg;
  cfg.train_utterances = 20;
  cfg.dev_utterances = 5;
  cfg.test_utterances = 5;
  cfg.min_frames = 10;
  cfg.max_frames = 30;
  return cfg;
}

std::size_t monophone(const GeneratedData& d, std::uint32_t label) {
  return d.senone_map.monophone_of(label);
}

}  // namespace

TEST(DatagenTest, SameSeedSameCorpus) {
  const GeneratedData a = generate_corpus(small_config());
  const GeneratedData b = generate_corpus(small_config());
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.dev, b.dev);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.senone_map, b.senone_map);
  GenConfig other = small_config();
  other.seed = 2;
  EXPECT_NE(generate_corpus(other).train, a.train);
}

TEST(DatagenTest, ShapesAndLabels) {
  const GeneratedData d = generate_corpus(small_config());
  EXPECT_EQ(d.senone_map.num_senones(), 32u);
  EXPECT_EQ(d.senone_map.num_monophones(), 8u);
  for (std::size_t s = 0; s < 32; ++s) EXPECT_EQ(d.senone_map.monophone_of(s), s / 4);
  for (const Corpus* c : {&d.train, &d.dev, &d.test}) {
    EXPECT_NO_THROW(c->validate());
    EXPECT_EQ(c->num_senones, 32u);
    EXPECT_EQ(c->feature_dim, 10u);
    for (const auto& u : c->utterances) {
      EXPECT_GE(u.num_frames(), 10u);
      EXPECT_LE(u.num_frames(), 30u);
    }
  }
  EXPECT_EQ(d.train.utterances.size(), 20u);
  EXPECT_EQ(d.dev.utterances.size(), 5u);
  EXPECT_EQ(d.train.split, Split::kTrain);
  EXPECT_EQ(d.test.split, Split::kTest);
  for (double v : d.senone_means.data) {
    EXPECT_GE(v, -2.0);
    EXPECT_LE(v, 2.0);
  }
}

TEST(DatagenTest, SplitsDrawFromDistinctStreams) {
  const GeneratedData d = generate_corpus(small_config());
  EXPECT_NE(d.train.utterances[0].frames, d.dev.utterances[0].frames);
  EXPECT_NE(d.dev.utterances[0].frames, d.test.utterances[0].frames);
  // More training utterances do not disturb the dev split.
  GenConfig more = small_config();
  more.train_utterances = 40;
  EXPECT_EQ(generate_corpus(more).dev, d.dev);
}

TEST(DatagenTest, NoiselessFramesAreNearestMeanSeparable) {
  GenConfig cfg = small_config();
  cfg.noise_sigma = 0.0;
  const GeneratedData d = generate_corpus(cfg);
  std::size_t correct = 0, total = 0;
  for (const auto& u : d.train.utterances) {
    for (std::size_t t = 0; t < u.num_frames(); ++t) {
      std::size_t best = 0;
      double best_dist = std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < d.senone_means.rows; ++s) {
        double dist = 0.0;
        for (std::size_t k = 0; k < cfg.feature_dim; ++k) {
          const double diff = u.frames(t, k) - d.senone_means(s, k);
          dist += diff * diff;
        }
        if (dist < best_dist) best_dist = dist, best = s;
      }
      correct += best == u.labels[t];
      ++total;
    }
  }
  EXPECT_EQ(correct, total);
}

TEST(DatagenTest, AbsorbingChainKeepsOneMonophone) {
  GenConfig cfg = small_config();
  cfg.self_transition_prob = 1.0;
  const GeneratedData d = generate_corpus(cfg);
  for (const auto& u : d.train.utterances)
    for (auto l : u.labels) EXPECT_EQ(monophone(d, l), monophone(d, u.labels[0]));
}

TEST(DatagenTest, SelfTransitionFrequencyAndMutualInformation) {
  GenConfig cfg;
  cfg.train_utterances = 800;
  const GeneratedData d = generate_corpus(cfg);
  const std::size_t m = cfg.num_monophones;
  std::vector<double> joint(m * m, 0.0);
  std::size_t stays = 0, pairs = 0;
  for (const auto& u : d.train.utterances) {
    for (std::size_t t = 1; t < u.num_frames(); ++t) {
      const std::size_t a = monophone(d, u.labels[t - 1]), b = monophone(d, u.labels[t]);
      stays += a == b;
      ++pairs;
      joint[a * m + b] += 1.0;
    }
  }
  ASSERT_GE(pairs, 100000u);
  EXPECT_NEAR(static_cast<double>(stays) / static_cast<double>(pairs), 0.85, 0.01);

  std::vector<double> pa(m, 0.0), pb(m, 0.0);
  for (double& v : joint) v /= static_cast<double>(pairs);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) pa[a] += joint[a * m + b], pb[b] += joint[a * m + b];
  double mi = 0.0;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      if (joint[a * m + b] > 0) mi += joint[a * m + b] * std::log(joint[a * m + b] / (pa[a] * pb[b]));
  // A 0.85-sticky chain over 8 states carries about 1.3 nats between neighbours.
  EXPECT_GT(mi, 1.0);
}

TEST(DatagenTest, ValidationNamesField) {
  auto message = [](GenConfig cfg) {
    try {
      cfg.validate();
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  GenConfig cfg;
  cfg.self_transition_prob = 1.5;
  EXPECT_NE(message(cfg).find("self_transition_prob"), std::string::npos);
  cfg = {};
  cfg.self_transition_prob = 0.0;
  EXPECT_NE(message(cfg).find("self_transition_prob"), std::string::npos);
  cfg = {};
  cfg.noise_sigma = -1.0;
  EXPECT_NE(message(cfg).find("noise_sigma"), std::string::npos);
  cfg = {};
  cfg.max_frames = 5;
  EXPECT_NE(message(cfg).find("max_frames"), std::string::npos);
  cfg = {};
  cfg.num_monophones = 0;
  EXPECT_NE(message(cfg).find("num_monophones"), std::string::npos);
  EXPECT_TRUE(message(GenConfig{}).empty());
}
