// Copyright 2026 The planret Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "planret/binary_io.hpp"
#include "planret/error.hpp"
#include "planret/models/checkpoint.hpp"
#include "planret/models/loss_check.hpp"
#include "planret/models/losses.hpp"
#include "planret/models/objective.hpp"
#include "planret/rng.hpp"

namespace planret::models {
namespace {

using ad::Graph;
using ad::Shape;
using ad::Tensor;
using ad::Var;

Tensor<double> randn(const Shape& shape, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Tensor<double> t(shape);
  for (auto& v : t.data()) v = d(rng);
  return t;
}

template <typename T>
Tensor<T> volume_batch(const EncoderConfig& c, std::int64_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  Tensor<T> t(Shape{n, c.in_channels, c.input.nz, c.input.ny, c.input.nx});
  for (auto& v : t.data()) v = static_cast<T>(d(rng));
  return t;
}

double scalar(Graph<double>& g, Var v) { return g.value(v).item(); }

Var row(Graph<double>& g, std::vector<double> values) {
  const auto n = static_cast<std::int64_t>(values.size());
  return g.constant(Tensor<double>(Shape{1, n}, std::move(values)));
}

TEST(ModelKindTest, NamesRoundTrip) {
  for (ModelKind k : kAllModelKinds) EXPECT_EQ(parse_model_kind(to_string(k)), k);
  EXPECT_THROW(parse_model_kind("resnet"), ConfigError);
}

TEST(EncoderConfigTest, Validation) {
  EncoderConfig c;
  EXPECT_NO_THROW(c.validate());
  c.input = {24, 16, 16};
  EXPECT_THROW(c.validate(), ConfigError);
  c = EncoderConfig{};
  c.groups = 3;
  EXPECT_THROW(c.validate(), ConfigError);
  c = EncoderConfig{};
  c.embedding_dim = 1;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(EncodeTest, DeskConfigShape) {
  Model<float> m(ModelKind::kMultitask, EncoderConfig{}, 1);
  const auto z = m.embed(volume_batch<float>(m.config(), 3, 2));
  EXPECT_EQ(z.shape(), (Shape{3, 32}));
  EXPECT_TRUE(z.all_finite());
}

TEST(EncodeTest, ZeroFinalLayerYieldsBias) {
  Model<float> m(ModelKind::kVanillaAutoencoder, EncoderConfig{}, 1);
  m.parameter("enc.fc.weight").value.fill(0.0f);
  auto& b = m.parameter("enc.fc.bias").value;
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = 0.25f * static_cast<float>(i);
  const auto z = m.embed(volume_batch<float>(m.config(), 2, 3));
  for (std::int64_t n = 0; n < 2; ++n)
    for (std::size_t i = 0; i < b.size(); ++i) EXPECT_EQ(z[n * b.size() + i], b[i]);
}

TEST(EncodeTest, IdenticalInputsIdenticalEmbeddings) {
  Model<float> m(ModelKind::kSiameseTriplet, EncoderConfig{}, 4);
  const auto one = volume_batch<float>(m.config(), 1, 9);
  Tensor<float> two(Shape{2, 2, 16, 16, 16});
  std::copy(one.data().begin(), one.data().end(), two.data().begin());
  std::copy(one.data().begin(), one.data().end(), two.data().begin() + one.size());
  const auto z = m.embed(two);
  for (int i = 0; i < 32; ++i) EXPECT_EQ(z[i], z[32 + i]);
  EXPECT_EQ(m.embed(one), m.embed(one));
}

TEST(EncodeTest, WrongInputShapeIsRejected) {
  Model<float> m(ModelKind::kSimSiam, EncoderConfig{}, 1);
  EXPECT_THROW(m.embed(Tensor<float>(Shape{1, 2, 8, 16, 16})), ShapeError);
  EXPECT_THROW(m.embed(Tensor<float>(Shape{1, 3, 16, 16, 16})), ShapeError);
}

TEST(DecodeTest, RestoresInputShape) {
  Model<float> m(ModelKind::kVanillaAutoencoder, EncoderConfig{}, 5);
  Graph<float> g(false);
  const Var x = g.constant(volume_batch<float>(m.config(), 2, 1));
  EXPECT_EQ(g.value(m.decode(g, m.encode(g, x))).shape(), g.value(x).shape());
}

TEST(DecodeTest, ZeroWeightsGiveBiasField) {
  Model<float> m(ModelKind::kVanillaAutoencoder, EncoderConfig{}, 5);
  for (auto& p : m.parameters())
    if (p.name.rfind("dec.", 0) == 0 && p.name.find("scale") == std::string::npos) p.value.fill(0.0f);
  auto& b = m.parameter("dec.deconv3.bias").value;
  b[0] = 0.5f;
  b[1] = -2.0f;
  Graph<float> g(false);
  const auto x = g.value(m.decode(g, g.constant(Tensor<float>(Shape{1, 32}, 1.0f))));
  const std::size_t n = 16 * 16 * 16;
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_EQ(x[i], 0.5f);
    EXPECT_EQ(x[n + i], -2.0f);
  }
}

TEST(DecodeTest, OnlyDecoderKindsOwnADecoder) {
  Model<float> m(ModelKind::kSiameseTriplet, EncoderConfig{}, 1);
  Graph<float> g(false);
  EXPECT_THROW(m.decode(g, g.constant(Tensor<float>(Shape{1, 32}))), ConfigError);
}

TEST(ReconLossTest, Values) {
  Graph<double> g;
  const Var x = g.constant(Tensor<double>(Shape{2}, {1.0, 0.0}));
  EXPECT_EQ(scalar(g, recon_loss(g, x, x)), 0.0);
  EXPECT_DOUBLE_EQ(scalar(g, recon_loss(g, g.add_scalar(x, 1.0), x)), 1.0);
  EXPECT_DOUBLE_EQ(scalar(g, recon_loss(g, g.constant(Tensor<double>(Shape{2}, {0.0, 2.0})), x)),
                   2.5);
  EXPECT_THROW(recon_loss(g, x, g.constant(Tensor<double>(Shape{3}))), ShapeError);
}

TEST(KlTest, ClosedForm) {
  Graph<double> g;
  EXPECT_EQ(scalar(g, kl_gauss(g, row(g, {0, 0, 0}), row(g, {0, 0, 0}))), 0.0);
  EXPECT_DOUBLE_EQ(scalar(g, kl_gauss(g, row(g, {1}), row(g, {0}))), 0.5);
}

TEST(KlTest, NonnegativeAndMatchesDirectSum) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    Graph<double> g;
    const auto mu = randn({3, 4}, rng, 2.0);
    const auto lv = randn({3, 4}, rng, 2.0);
    const double got = scalar(g, kl_gauss(g, g.constant(mu), g.constant(lv)));
    double want = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i)
      want += 0.5 * (mu[i] * mu[i] + std::exp(lv[i]) - 1.0 - lv[i]);
    want /= 3.0;
    EXPECT_GE(got, 0.0);
    EXPECT_NEAR(got, want, 1e-12 * std::max(1.0, want));
  }
}

TEST(ReparameterizeTest, Identities) {
  Graph<double> g;
  const Var mu = row(g, {0.5, -1.0});
  const Var zero = row(g, {0, 0});
  const Var one = row(g, {1, 1});
  EXPECT_EQ(g.value(reparameterize(g, mu, zero, zero)), g.value(mu));
  const auto shifted = g.value(reparameterize(g, mu, zero, one));
  EXPECT_DOUBLE_EQ(shifted[0], 1.5);
  EXPECT_DOUBLE_EQ(shifted[1], 0.0);
}

TEST(ReparameterizeTest, MonteCarloVariance) {
  const std::int64_t n = 100000;
  Rng rng(21);
  Tensor<double> eps(Shape{n, 1});
  for (auto& v : eps.data()) v = rng.normal();
  Graph<double> g(false);
  const auto z = g.value(reparameterize(g, g.constant(Tensor<double>(Shape{n, 1})),
                                        g.constant(Tensor<double>(Shape{n, 1})),
                                        g.constant(eps)));
  double mean = 0.0, sq = 0.0;
  for (double v : z.data()) mean += v;
  mean /= n;
  for (double v : z.data()) sq += (v - mean) * (v - mean);
  EXPECT_NEAR(sq / (n - 1), 1.0, 0.02);
}

TEST(MmdTest, IdenticalSetsVanish) {
  std::mt19937_64 rng(3);
  Graph<double> g;
  const Var x = g.constant(randn({16, 4}, rng));
  const double v = scalar(g, mmd_rbf(g, x, x));
  EXPECT_LE(std::abs(v), 1e-7);
}

TEST(MmdTest, DistantSingletonsApproachTwo) {
  Graph<double> g;
  const double v = scalar(g, mmd_rbf(g, row(g, {0, 0}), row(g, {1e3, 0}), 1.0));
  EXPECT_DOUBLE_EQ(v, 2.0);
  const double d = 1.5, s = 2.0;
  EXPECT_NEAR(scalar(g, mmd_rbf(g, row(g, {0, 0}), row(g, {d, 0}), s)),
              2.0 - 2.0 * std::exp(-d * d / (2 * s * s)), 1e-15);
}

TEST(MmdTest, MatchesDoubleLoopOracle) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = randn({64, 4}, rng);
    const auto y = randn({64, 4}, rng);
    auto dist2 = [](const double* a, const double* b) {
      double s = 0;
      for (int k = 0; k < 4; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
      return s;
    };
    // median over every distinct pair of the pooled sample
    std::vector<const double*> pts;
    for (int i = 0; i < 64; ++i) pts.push_back(&x[i * 4]);
    for (int i = 0; i < 64; ++i) pts.push_back(&y[i * 4]);
    std::vector<double> d;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) d.push_back(std::sqrt(dist2(pts[i], pts[j])));
    std::sort(d.begin(), d.end());
    const double sigma = 0.5 * (d[d.size() / 2 - 1] + d[d.size() / 2]);
    auto mean_k = [&](const Tensor<double>& a, const Tensor<double>& b) {
      double s = 0;
      for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j) s += std::exp(-dist2(&a[i * 4], &b[j * 4]) / (2 * sigma * sigma));
      return s / (64.0 * 64.0);
    };
    const double want = mean_k(x, x) + mean_k(y, y) - 2 * mean_k(x, y);
    Graph<double> g;
    EXPECT_NEAR(scalar(g, mmd_rbf(g, g.constant(x), g.constant(y))), want, 1e-10);
  }
}

TEST(MmdTest, ShapeErrors) {
  Graph<double> g;
  EXPECT_THROW(mmd_rbf(g, row(g, {0, 0}), row(g, {0, 0, 0})), ShapeError);
}

TEST(InfoVaeTest, CoefficientArithmetic) {
  Graph<double> g;
  const Var recon = g.constant(Tensor<double>::scalar(2.0));
  const Var kl = g.constant(Tensor<double>::scalar(0.5));
  const Var mmd = g.constant(Tensor<double>::scalar(0.1));
  LossWeights w;
  EXPECT_NEAR(scalar(g, infovae_loss(g, recon, kl, mmd, w)), 3.4, 1e-12);
  w.lambda = 1.0;
  EXPECT_DOUBLE_EQ(scalar(g, infovae_loss(g, recon, kl, mmd, w)), 2.5);
  w.alpha = 1.0;
  w.lambda = 3.0;
  EXPECT_NEAR(scalar(g, infovae_loss(g, recon, kl, mmd, w)), 2.0 + 3.0 * 0.1, 1e-12);
}

TEST(TripletTest, Values) {
  Graph<double> g;
  EXPECT_EQ(scalar(g, triplet_loss(g, row(g, {0, 0}), row(g, {0, 0}), row(g, {2, 0}), 1.0)), 0.0);
  EXPECT_EQ(scalar(g, triplet_loss(g, row(g, {1, 1}), row(g, {1, 1}), row(g, {1, 1}), 0.7)), 0.7);
  EXPECT_DOUBLE_EQ(
      scalar(g, triplet_loss(g, row(g, {0, 0}), row(g, {3, 0}), row(g, {0, 1}), 0.5)), 2.5);
}

TEST(TripletTest, RotationInvariant) {
  std::mt19937_64 rng(8);
  const int d = 5;
  for (int trial = 0; trial < 20; ++trial) {
    // orthonormal basis by Gram-Schmidt
    auto q = randn({d, d}, rng);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < i; ++j) {
        double dot = 0;
        for (int k = 0; k < d; ++k) dot += q[i * d + k] * q[j * d + k];
        for (int k = 0; k < d; ++k) q[i * d + k] -= dot * q[j * d + k];
      }
      double nrm = 0;
      for (int k = 0; k < d; ++k) nrm += q[i * d + k] * q[i * d + k];
      for (int k = 0; k < d; ++k) q[i * d + k] /= std::sqrt(nrm);
    }
    Graph<double> g;
    const Var a = g.constant(randn({4, d}, rng));
    const Var p = g.constant(randn({4, d}, rng));
    const Var n = g.constant(randn({4, d}, rng));
    const Var r = g.constant(q);
    const double plain = scalar(g, triplet_loss(g, a, p, n, 1.0));
    const double rotated = scalar(
        g, triplet_loss(g, g.linear(a, r, std::nullopt), g.linear(p, r, std::nullopt),
                        g.linear(n, r, std::nullopt), 1.0));
    EXPECT_NEAR(plain, rotated, 1e-12);
  }
}

TEST(SimSiamTest, Values) {
  Graph<double> g;
  EXPECT_DOUBLE_EQ(scalar(g, simsiam_loss(g, row(g, {1, 2, 3}), row(g, {2, 4, 6}))), -1.0);
  EXPECT_EQ(scalar(g, simsiam_loss(g, row(g, {1, 0}), row(g, {0, 3}))), 0.0);
  EXPECT_THROW(simsiam_loss(g, row(g, {0, 0}), row(g, {1, 0})), NumericError);
}

TEST(SimSiamTest, StopGradientBranchReceivesExactlyZero) {
  std::mt19937_64 rng(4);
  Graph<double> g;
  const Var p = g.leaf(randn({3, 4}, rng));
  const Var z = g.leaf(randn({3, 4}, rng));
  g.backward(simsiam_loss(g, p, z));
  const Tensor<double> gz = g.grad(z);
  const Tensor<double> gp = g.grad(p);
  for (double v : gz.data()) EXPECT_EQ(v, 0.0);
  double norm = 0;
  for (double v : gp.data()) norm += v * v;
  EXPECT_GT(norm, 0.0);
}

TEST(SimSiamTest, BoundedAndScaleInvariant) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(0.1, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    Graph<double> g;
    const Var p = g.constant(randn({4, 6}, rng));
    const Var z = g.constant(randn({4, 6}, rng));
    const double v = scalar(g, simsiam_loss(g, p, z));
    EXPECT_GE(v, -1.0 - 1e-12);
    EXPECT_LE(v, 1.0 + 1e-12);
    const double scaled = scalar(g, simsiam_loss(g, g.scale(p, pos(rng)), g.scale(z, pos(rng))));
    EXPECT_NEAR(v, scaled, 1e-12);
  }
}

TEST(MultitaskTest, WeightedSum) {
  Graph<double> g;
  const Var a = g.constant(Tensor<double>::scalar(1.0));
  const Var b = g.constant(Tensor<double>::scalar(2.0));
  const Var c = g.constant(Tensor<double>::scalar(3.0));
  const LossWeights w;
  EXPECT_NEAR(scalar(g, multitask_loss(g, a, b, c, w.beta, w.gamma)), 1.32, 1e-12);
  EXPECT_EQ(scalar(g, multitask_loss(g, a, b, c, 0.0, 0.0)), 1.0);
  const double once = scalar(g, multitask_loss(g, a, b, c, w.beta, w.gamma));
  const double twice = scalar(g, multitask_loss(g, g.scale(a, 2), g.scale(b, 2), g.scale(c, 2),
                                                w.beta, w.gamma));
  EXPECT_NEAR(twice, 2 * once, 1e-12);
}

TEST(LossGradCheckTest, EveryLossOverTwentySeeds) {
  for (LossKind k : loss_catalog()) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto r = loss_grad_check(k, seed);
      EXPECT_GT(r.elements_checked, 0u);
      EXPECT_LE(r.max_relative_error, 1e-4) << to_string(k) << " seed " << seed;
    }
  }
}

TEST(ModelGradCheckTest, DecoderReconstructionGradient) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto r = model_grad_check(ModelKind::kVanillaAutoencoder, seed, 24);
    EXPECT_LE(r.max_relative_error, 1e-4) << "seed " << seed;
  }
}

TEST(ModelGradCheckTest, EveryKindThroughItsParameters) {
  for (ModelKind k : kAllModelKinds) {
    const auto r = model_grad_check(k, 7, 8);
    EXPECT_GT(r.elements_checked, 0u);
    EXPECT_LE(r.max_relative_error, 1e-4) << to_string(k);
    EXPECT_LT(r.kinks_skipped * 10, r.elements_checked) << to_string(k);
  }
}

TEST(InfoVaeTest, EmbeddingIsTheMuHead) {
  Model<float> m(ModelKind::kInfoVae, EncoderConfig{}, 3);
  const auto x = volume_batch<float>(m.config(), 2, 4);
  Graph<float> g(false);
  const auto vae = m.encode_vae(g, g.constant(x));
  EXPECT_EQ(m.embed(x), g.value(vae.mu));
  EXPECT_NE(g.value(vae.mu), g.value(vae.logvar));
}

TEST(WeightSharingTest, BranchesShareOneEncoder) {
  const EncoderConfig c = tiny_encoder_config();
  LossWeights w;
  w.symmetric_simsiam = true;
  ObjectiveInputs<double> in;
  in.anchor = volume_batch<double>(c, 2, 1);
  in.transformed = volume_batch<double>(c, 2, 2);

  Model<double> shared(ModelKind::kSimSiam, c, 9);
  Graph<double> g;
  const auto t = build_objective(g, shared, in, w);
  shared.zero_grad();
  g.backward(t.total);
  const double shared_loss = g.value(t.total).item();

  // Two copies, one per branch: equal weights reproduce the loss, and the
  // shared gradient is the sum of the per-branch gradients.
  Model<double> a(ModelKind::kSimSiam, c, 0), b(ModelKind::kSimSiam, c, 0);
  copy_parameters(shared, a);
  copy_parameters(shared, b);
  auto split_loss = [&](bool with_grad) {
    Graph<double> h(with_grad);
    const Var z1 = a.encode(h, h.constant(in.anchor));
    const Var z2 = b.encode(h, h.constant(in.transformed));
    const Var e1 = a.project(h, z1);
    const Var e2 = b.project(h, z2);
    const Var loss = symmetric_simsiam_loss(h, a.predict(h, e1), e1, b.predict(h, e2), e2);
    if (with_grad) {
      a.zero_grad();
      b.zero_grad();
      h.backward(loss);
    }
    return h.value(loss).item();
  };
  EXPECT_EQ(split_loss(true), shared_loss);
  const auto& gs = shared.parameter("enc.conv0.weight").grad;
  const auto& ga = a.parameter("enc.conv0.weight").grad;
  const auto& gb = b.parameter("enc.conv0.weight").grad;
  for (std::size_t i = 0; i < gs.size(); ++i) EXPECT_NEAR(gs[i], ga[i] + gb[i], 1e-12);

  for (auto& v : b.parameter("enc.conv1.weight").value.data()) v *= 1.5;
  EXPECT_NE(split_loss(false), shared_loss);
}

TEST(CheckpointTest, BitExactRoundTrip) {
  for (ModelKind k : kAllModelKinds) {
    Model<float> m(k, EncoderConfig{}, 42);
    const auto bytes = encode_checkpoint(m);
    const Model<float> back = decode_checkpoint(bytes, "mem");
    EXPECT_EQ(back.kind(), k);
    EXPECT_EQ(back.config(), m.config());
    ASSERT_EQ(back.parameters().size(), m.parameters().size());
    for (std::size_t i = 0; i < m.parameters().size(); ++i) {
      EXPECT_EQ(back.parameters()[i].name, m.parameters()[i].name);
      EXPECT_EQ(back.parameters()[i].value, m.parameters()[i].value);
    }
    EXPECT_EQ(parameter_checksum(back), parameter_checksum(m));
    EXPECT_EQ(encode_checkpoint(back), bytes);
  }
}

TEST(CheckpointTest, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "planret_models_test.ckpt";
  Model<float> m(ModelKind::kMultitask, EncoderConfig{}, 3);
  save_checkpoint(m, path);
  EXPECT_EQ(parameter_checksum(load_checkpoint(path)), parameter_checksum(m));
  std::filesystem::remove(path);
}

TEST(CheckpointTest, CorruptionIsDetected) {
  Model<float> m(ModelKind::kSiameseTriplet, EncoderConfig{}, 3);
  const std::string bytes = encode_checkpoint(m);

  std::string wrong_shape = bytes;
  const std::string from = "param.enc.fc.weight = 32 64";
  const auto at = wrong_shape.find(from);
  ASSERT_NE(at, std::string::npos);
  wrong_shape.replace(at, from.size(), "param.enc.fc.weight = 32 63");
  EXPECT_THROW(decode_checkpoint(wrong_shape, "shape"), DataError);

  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 4), "short"), DataError);
  EXPECT_THROW(decode_checkpoint(bytes + "x", "long"), DataError);
  EXPECT_THROW(decode_checkpoint("garbage", "junk"), DataError);

  std::string flipped = bytes;
  flipped[flipped.size() - 1] ^= 0x40;
  EXPECT_THROW(decode_checkpoint(flipped, "flip"), DataError);
}

}  // namespace
}  // namespace planret::models
