#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "retrosearch/errors.hpp"
#include "retrosearch/policy.hpp"
#include "retrosearch/rng.hpp"
#include "retrosearch/training.hpp"
#include "test_util.hpp"

using retro::Dataset;
using retro::FeatureVector;
using retro::LabeledExample;
using retro::LearnerConfig;
using retro::PruneExample;
using retro::PrunerParams;
using retro::RankerParams;

namespace {

constexpr const char* kSchema = "test-v1";

FeatureVector fv(std::vector<double> values) { return {std::move(values), kSchema}; }

std::vector<double> random_vec(retro::Rng& rng, std::size_t n, double sd = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal(0.0, sd);
  return v;
}

// Forward pass written independently of the library (index arithmetic spelled
// out) so agreement is meaningful.
double forward_oracle(const RankerParams& p, const std::vector<double>& x) {
  double out = p.b2;
  for (int h = 0; h < p.hidden_dim; ++h) {
    double pre = p.b1[static_cast<std::size_t>(h)];
    for (int i = 0; i < p.input_dim; ++i) {
      pre += p.w1[static_cast<std::size_t>(h) * static_cast<std::size_t>(p.input_dim) +
                  static_cast<std::size_t>(i)] *
             x[static_cast<std::size_t>(i)];
    }
    out += p.w2[static_cast<std::size_t>(h)] * (pre > 0.0 ? pre : 0.01 * pre);
  }
  return out;
}

std::vector<double> flatten(const RankerParams& p) {
  std::vector<double> flat;
  flat.insert(flat.end(), p.w1.begin(), p.w1.end());
  flat.insert(flat.end(), p.b1.begin(), p.b1.end());
  flat.insert(flat.end(), p.w2.begin(), p.w2.end());
  flat.push_back(p.b2);
  return flat;
}

RankerParams unflatten(const RankerParams& shape, const std::vector<double>& flat) {
  RankerParams p = shape;
  std::size_t k = 0;
  for (auto& v : p.w1) v = flat[k++];
  for (auto& v : p.b1) v = flat[k++];
  for (auto& v : p.w2) v = flat[k++];
  p.b2 = flat[k++];
  return p;
}

/// Smallest |pre-activation| across both inputs; finite differences are only
/// trustworthy away from the LeakyReLU kink.
double kink_distance(const RankerParams& p, const std::vector<double>& a,
                     const std::vector<double>& b) {
  double nearest = std::numeric_limits<double>::infinity();
  for (const auto* x : {&a, &b}) {
    for (int h = 0; h < p.hidden_dim; ++h) {
      double pre = p.b1[static_cast<std::size_t>(h)];
      for (int i = 0; i < p.input_dim; ++i) {
        pre += p.w1[static_cast<std::size_t>(h) * static_cast<std::size_t>(p.input_dim) +
                    static_cast<std::size_t>(i)] *
               (*x)[static_cast<std::size_t>(i)];
      }
      nearest = std::min(nearest, std::fabs(pre));
    }
  }
  return nearest;
}

}  // namespace

TEST_CASE("ranker forward pass on hand-built parameters") {
  RankerParams p;
  p.input_dim = 3;
  p.hidden_dim = 3;
  p.w1 = {1, 0, 0, 0, 1, 0, 0, 0, 1};  // identity
  p.b1 = {0, 0, 0};
  p.w2 = {1, 1, 1};
  p.b2 = 0.0;
  p.schema_id = kSchema;
  // leaky(1) + leaky(-2) + leaky(3) = 1 - 0.02 + 3
  CHECK(retro::ranker_score(p, {1, -2, 3}) == doctest::Approx(3.98).epsilon(1e-15));

  p.b2 = 0.5;
  p.w2 = {2, 0, -1};
  // 2*leaky(1) - leaky(3) + 0.5 = 2 - 3 + 0.5
  CHECK(retro::ranker_score(p, {1, -2, 3}) == doctest::Approx(-0.5).epsilon(1e-15));

  RankerParams zero = retro::init_ranker(3, 4, kSchema, 1);
  std::fill(zero.w1.begin(), zero.w1.end(), 0.0);
  std::fill(zero.b1.begin(), zero.b1.end(), 0.0);
  std::fill(zero.w2.begin(), zero.w2.end(), 0.0);
  zero.b2 = 0.0;
  CHECK(retro::ranker_score(zero, {5, -7, 11}) == 0.0);
}

TEST_CASE("ranker forward pass agrees with an independent implementation") {
  retro::Rng rng(2023);
  for (int round = 0; round < 200; ++round) {
    const int in = 1 + static_cast<int>(rng.uniform_index(6));
    const int hid = 1 + static_cast<int>(rng.uniform_index(8));
    RankerParams p = retro::init_ranker(in, hid, kSchema, rng.next_u64());
    const auto x = random_vec(rng, static_cast<std::size_t>(in), 2.0);
    CHECK(retro::ranker_score(p, x) ==
          doctest::Approx(forward_oracle(p, x)).epsilon(1e-12));
  }
}

TEST_CASE("ranker rejects inputs of the wrong dimension") {
  const RankerParams p = retro::init_ranker(4, 3, kSchema, 9);
  CHECK_THROWS_AS(retro::ranker_score(p, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("pairwise loss: pinned values, monotonicity, stability") {
  CHECK(retro::pairwise_loss(0.0, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(retro::pairwise_loss(5.0, 0.0) ==
        doctest::Approx(std::log1p(std::exp(-5.0))).epsilon(1e-12));
  // Strictly decreasing in the margin.
  double prev = retro::pairwise_loss(-3.0, 0.0);
  for (double m = -2.5; m <= 3.0; m += 0.5) {
    const double cur = retro::pairwise_loss(m, 0.0);
    CHECK(cur < prev);
    prev = cur;
  }
  // No overflow at extreme margins; asymptotics pinned.
  CHECK(std::isfinite(retro::pairwise_loss(1000.0, 0.0)));
  CHECK(retro::pairwise_loss(1000.0, 0.0) >= 0.0);
  CHECK(retro::pairwise_loss(0.0, 1000.0) == doctest::Approx(1000.0).epsilon(1e-12));
}

TEST_CASE("pairwise gradient matches central finite differences") {
  retro::Rng rng(77);
  int checked = 0;
  while (checked < 100) {
    const int in = 2 + static_cast<int>(rng.uniform_index(4));
    const int hid = 1 + static_cast<int>(rng.uniform_index(5));
    const RankerParams p = retro::init_ranker(in, hid, kSchema, rng.next_u64());
    const auto xp = random_vec(rng, static_cast<std::size_t>(in));
    const auto xn = random_vec(rng, static_cast<std::size_t>(in));
    if (kink_distance(p, xp, xn) < 1e-3) continue;  // kinked point: FD invalid

    std::vector<double> grad(p.parameter_count(), 0.0);
    const double loss = retro::pairwise_loss_grad(p, xp, xn, grad);
    CHECK(loss == doctest::Approx(retro::pairwise_loss(retro::ranker_score(p, xp),
                                                       retro::ranker_score(p, xn)))
                      .epsilon(1e-12));

    const auto numeric = testutil::finite_difference(
        [&](const std::vector<double>& flat) {
          const RankerParams q = unflatten(p, flat);
          return retro::pairwise_loss(retro::ranker_score(q, xp), retro::ranker_score(q, xn));
        },
        flatten(p));
    CHECK(testutil::max_rel_err(grad, numeric) <= 1e-4);
    ++checked;
  }
}

TEST_CASE("gradient accumulates instead of overwriting") {
  retro::Rng rng(5);
  const RankerParams p = retro::init_ranker(3, 2, kSchema, 8);
  const auto xp = random_vec(rng, 3);
  const auto xn = random_vec(rng, 3);
  std::vector<double> once(p.parameter_count(), 0.0);
  retro::pairwise_loss_grad(p, xp, xn, once);
  std::vector<double> twice(p.parameter_count(), 0.0);
  retro::pairwise_loss_grad(p, xp, xn, twice);
  retro::pairwise_loss_grad(p, xp, xn, twice);
  for (std::size_t i = 0; i < once.size(); ++i) {
    CHECK(twice[i] == doctest::Approx(2.0 * once[i]).epsilon(1e-12));
  }
}

TEST_CASE("pruner probability and gradient") {
  PrunerParams p = retro::init_pruner(2, kSchema, 5.0);
  CHECK(p.w == std::vector<double>{0.0, 0.0});
  CHECK(retro::pruner_keep_probability(p, {3.0, -4.0}) == 0.5);

  p.w = {1.0, -2.0};
  p.b = 0.5;
  // sigma(1*1 - 2*0.25 + 0.5) = sigma(1)
  CHECK(retro::pruner_keep_probability(p, {1.0, 0.25}) ==
        doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-15));

  retro::Rng rng(13);
  for (const double keep_weight : {1.0, 5.0}) {
    for (int round = 0; round < 50; ++round) {
      PrunerParams q = retro::init_pruner(3, kSchema, keep_weight);
      q.w = random_vec(rng, 3);
      q.b = rng.normal(0.0, 1.0);
      const auto x = random_vec(rng, 3);
      const bool keep = rng.uniform01() < 0.5;

      std::vector<double> grad(4, 0.0);
      const double loss = retro::pruner_loss_grad(q, x, keep, grad);
      const double prob = retro::pruner_keep_probability(q, x);
      CHECK(loss == doctest::Approx(keep ? -keep_weight * std::log(prob) : -std::log(1.0 - prob))
                        .epsilon(1e-12));
      const auto numeric = testutil::finite_difference(
          [&](const std::vector<double>& flat) {
            PrunerParams r = q;
            r.w = {flat[0], flat[1], flat[2]};
            r.b = flat[3];
            const double prob = retro::pruner_keep_probability(r, x);
            return keep ? -r.keep_weight * std::log(prob) : -std::log(1.0 - prob);
          },
          {q.w[0], q.w[1], q.w[2], q.b});
      CHECK(testutil::max_rel_err(grad, numeric) <= 1e-4);
    }
  }
}

TEST_CASE("init_pruner rejects keep_weight below 1") {
  CHECK_THROWS_AS(retro::init_pruner(3, kSchema, 0.5), std::invalid_argument);
}

TEST_CASE("training drives a separable pair to near-zero loss, deterministically") {
  Dataset ds;
  ds.schema_id = kSchema;
  LabeledExample ex;
  ex.context = fv({1.0, 0.5});
  ex.negatives = {fv({-1.0, -0.5})};
  ds.examples.push_back(ex);

  const RankerParams init = retro::init_ranker(2, 4, kSchema, 3);
  LearnerConfig cfg{0.5, 500, 8, 17};
  retro::TrainReport report;
  const RankerParams trained = retro::train_ranker(init, ds, cfg, &report);
  CHECK(report.pair_count == 1);
  CHECK(report.final_loss <= report.initial_loss);
  CHECK(report.final_loss < 0.1);
  CHECK(retro::ranker_score(trained, {1.0, 0.5}) > retro::ranker_score(trained, {-1.0, -0.5}));

  const RankerParams again = retro::train_ranker(init, ds, cfg);
  CHECK(again.w1 == trained.w1);
  CHECK(again.b1 == trained.b1);
  CHECK(again.w2 == trained.w2);
  CHECK(again.b2 == trained.b2);
}

TEST_CASE("train_ranker generalizes on a linearly rankable task") {
  // Preference direction u: contexts sit 0.5 * u above their negatives.
  const std::vector<double> u = {0.6, -0.3, 0.9, 0.0};
  retro::Rng rng(41);
  const auto make_pair = [&](LabeledExample& ex) {
    const auto z = random_vec(rng, 4);
    std::vector<double> ctx = z;
    for (std::size_t i = 0; i < 4; ++i) ctx[i] += u[i];
    ex.context = fv(ctx);
    ex.negatives = {fv(z)};
  };

  Dataset train;
  train.schema_id = kSchema;
  train.examples.resize(100);
  for (auto& ex : train.examples) make_pair(ex);

  retro::TrainReport report;
  const RankerParams trained =
      retro::train_ranker(retro::init_ranker(4, 16, kSchema, 11), train,
                          LearnerConfig{0.05, 60, 16, 29}, &report);
  CHECK(report.final_loss < report.initial_loss);

  int correct = 0;
  for (int i = 0; i < 200; ++i) {
    LabeledExample ex;
    make_pair(ex);
    if (retro::ranker_score(trained, ex.context.values) >
        retro::ranker_score(trained, ex.negatives[0].values)) {
      ++correct;
    }
  }
  CHECK(correct >= 190);  // 95% held-out pair accuracy
}

TEST_CASE("train_ranker rejects an example-free dataset") {
  Dataset empty;
  empty.schema_id = kSchema;
  CHECK_THROWS_AS(retro::train_ranker(retro::init_ranker(2, 2, kSchema, 1), empty, {}),
                  std::invalid_argument);
}

TEST_CASE("train_pruner reaches the weighted optimum on conflicting labels") {
  // One x labeled both keep and prune: the optimum of
  // w*(-log s) + (-log(1-s)) sits at s = w / (w+1).
  for (const double keep_weight : {1.0, 5.0}) {
    Dataset ds;
    ds.schema_id = kSchema;
    PruneExample keep;
    keep.features = fv({1.0});
    keep.keep = true;
    PruneExample prune = keep;
    prune.keep = false;
    ds.prune_examples = {keep, prune};

    const PrunerParams trained = retro::train_pruner(retro::init_pruner(1, kSchema, keep_weight),
                                                     ds, LearnerConfig{0.5, 400, 8, 19});
    CHECK(retro::pruner_keep_probability(trained, {1.0}) ==
          doctest::Approx(keep_weight / (keep_weight + 1.0)).epsilon(0.02));
  }
}

TEST_CASE("train_pruner separates a separable keep/prune task") {
  Dataset ds;
  ds.schema_id = kSchema;
  retro::Rng rng(23);
  for (int i = 0; i < 60; ++i) {
    PruneExample pe;
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    pe.features = fv({sign * (0.5 + rng.uniform01()), rng.normal(0.0, 0.3)});
    pe.keep = sign > 0.0;
    ds.prune_examples.push_back(pe);
  }
  const PrunerParams trained =
      retro::train_pruner(retro::init_pruner(2, kSchema, 2.0), ds, LearnerConfig{0.3, 200, 16, 7});
  for (const auto& pe : ds.prune_examples) {
    const double prob = retro::pruner_keep_probability(trained, pe.features.values);
    CHECK((prob > 0.5) == pe.keep);
  }
}

TEST_CASE("normalization: pinned mappings") {
  const FeatureVector a = fv({2.0, 1.0, 7.0});
  const FeatureVector b = fv({4.0, 2.0, 7.0});
  const FeatureVector c = fv({3.0, 3.0, 7.0});
  const auto ctx = retro::make_normalization_context({&a, &b, &c});

  const FeatureVector na = retro::normalize(a, ctx);
  CHECK(na.values == std::vector<double>{-1.0, -1.0, 0.0});  // min, min, zero-range
  const FeatureVector nb = retro::normalize(b, ctx);
  CHECK(nb.values == std::vector<double>{1.0, 0.0, 0.0});
  const FeatureVector nc = retro::normalize(c, ctx);
  CHECK(nc.values == std::vector<double>{0.0, 1.0, 0.0});

  // Singleton batches have no spread at all.
  const auto solo_ctx = retro::make_normalization_context({&a});
  CHECK(retro::normalize(a, solo_ctx).values == std::vector<double>{0.0, 0.0, 0.0});

  CHECK_THROWS_AS(retro::make_normalization_context({}), std::invalid_argument);
  const FeatureVector wrong = fv({1.0});
  CHECK_THROWS_AS(retro::make_normalization_context({&a, &wrong}), std::invalid_argument);
}

TEST_CASE("normalize_query absorbs a common shift exactly") {
  // Integer-valued features keep the affine map exact in floating point, so
  // shifting every batch member by the same constant must reproduce
  // bit-identical normalized vectors (and therefore identical argmax).
  retro::Rng rng(61);
  std::vector<FeatureVector> batch;
  for (int i = 0; i < 6; ++i) {
    batch.push_back(fv({static_cast<double>(rng.uniform_index(20)),
                        static_cast<double>(rng.uniform_index(20)),
                        static_cast<double>(rng.uniform_index(20))}));
  }
  std::vector<FeatureVector> shifted = batch;
  for (auto& f : shifted) {
    f.values[0] += 13.0;
    f.values[2] -= 5.0;
  }
  const auto [norm_a, ctx_a] = retro::normalize_query(batch);
  const auto [norm_b, ctx_b] = retro::normalize_query(shifted);
  CHECK(ctx_b.min[0] == ctx_a.min[0] + 13.0);
  CHECK(ctx_b.max[2] == ctx_a.max[2] - 5.0);
  REQUIRE(norm_a.size() == norm_b.size());
  for (std::size_t i = 0; i < norm_a.size(); ++i) {
    CHECK(norm_a[i].values == norm_b[i].values);
  }
}

TEST_CASE("RankerPolicy checks schemas and answers prune queries") {
  retro::LearnedPolicy lp;
  lp.ranker = retro::init_ranker(2, 3, kSchema, 31);
  SUBCASE("schema mismatch throws") {
    const retro::RankerPolicy pol(lp);
    FeatureVector alien = fv({1.0, 2.0});
    alien.schema_id = "other-v1";
    const auto ctx = retro::make_normalization_context({&alien});
    CHECK_THROWS_AS(pol.score(alien, ctx), std::invalid_argument);
  }
  SUBCASE("no pruner: never prunes, has_pruner false") {
    const retro::RankerPolicy pol(lp);
    CHECK_FALSE(pol.has_pruner());
    const FeatureVector x = fv({0.0, 0.0});
    CHECK_FALSE(pol.prune(x, retro::make_normalization_context({&x})));
  }
  SUBCASE("zero pruner sits on the tie and keeps") {
    lp.pruner = retro::init_pruner(2, kSchema, 5.0);  // w = 0, b = 0: prob exactly 0.5
    const retro::RankerPolicy pol(lp);
    CHECK(pol.has_pruner());
    const FeatureVector x = fv({3.0, -1.0});
    CHECK_FALSE(pol.prune(x, retro::make_normalization_context({&x})));
  }
}

TEST_CASE("model file round-trip preserves scores bit for bit") {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "retrosearch-policy-test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "model.txt").string();

  retro::PolicyArtifact art;
  art.kind = retro::PolicyKind::ranker;
  art.learned.ranker = retro::init_ranker(5, 7, kSchema, 12345);
  art.learned.pruner = retro::init_pruner(5, kSchema, 5.0);
  {
    retro::Rng rng(1);
    for (auto& w : art.learned.pruner->w) w = rng.normal(0.0, 1.0);
    art.learned.pruner->b = rng.normal(0.0, 1.0);
  }
  retro::save_policy(path, art);
  const retro::PolicyArtifact back = retro::load_policy(path);

  REQUIRE(back.kind == retro::PolicyKind::ranker);
  retro::Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    const auto x = random_vec(rng, 5, 3.0);
    CHECK(retro::ranker_score(back.learned.ranker, x) ==
          retro::ranker_score(art.learned.ranker, x));
    CHECK(retro::pruner_keep_probability(*back.learned.pruner, x) ==
          retro::pruner_keep_probability(*art.learned.pruner, x));
  }
  // Canonical writer: a second save of the loaded artifact is byte-identical.
  CHECK(retro::write_policy_text(back) == retro::write_policy_text(art));
}

TEST_CASE("model files cover every policy kind") {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "retrosearch-policy-test";
  std::filesystem::create_directories(dir);

  retro::PolicyArtifact mix;
  mix.kind = retro::PolicyKind::mixture;
  mix.mixture.components.push_back({retro::init_ranker(3, 2, kSchema, 1), std::nullopt});
  mix.mixture.components.push_back({retro::init_ranker(3, 2, kSchema, 2), std::nullopt});
  mix.mixture.weights = {0.343, 0.657};
  const std::string mix_path = (dir / "mixture.txt").string();
  retro::save_policy(mix_path, mix);
  const auto mix_back = retro::load_policy(mix_path);
  REQUIRE(mix_back.kind == retro::PolicyKind::mixture);
  REQUIRE(mix_back.mixture.components.size() == 2);
  CHECK(mix_back.mixture.weights == mix.mixture.weights);

  for (const auto kind : {retro::PolicyKind::maze_expert, retro::PolicyKind::bnb_best_bound}) {
    retro::PolicyArtifact art;
    art.kind = kind;
    const std::string path = (dir / "expert.txt").string();
    retro::save_policy(path, art);
    CHECK(retro::load_policy(path).kind == kind);
  }

  CHECK_THROWS_AS(retro::parse_policy_text("not a model file\n"), retro::IoError);
  CHECK_THROWS_AS(retro::load_policy((dir / "missing.txt").string()), retro::IoError);
}
