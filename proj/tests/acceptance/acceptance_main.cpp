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

// Acceptance suite. Prints one PASS or FAIL line per criterion and exits
// nonzero when any criterion fails. Usage:
//   acceptance [--epochs N] [criterion numbers...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "planret/autodiff/grad_check.hpp"
#include "planret/error.hpp"
#include "planret/eval/report.hpp"
#include "planret/index/plan_index.hpp"
#include "planret/kv_text.hpp"
#include "planret/models/checkpoint.hpp"
#include "planret/models/loss_check.hpp"
#include "planret/models/losses.hpp"
#include "planret/rng.hpp"
#include "planret/training/trainer.hpp"
#include "planret/volumes/case_io.hpp"
#include "planret/volumes/dataset.hpp"
#include "planret/volumes/preprocess.hpp"

namespace {

using namespace planret;
using ad::Graph;
using ad::Shape;
using ad::Tensor;
using ad::Var;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += "failed: " + what;
    }
  }
  void note(const std::string& s) {
    if (!detail.empty()) detail += "; ";
    detail += s;
  }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

double cpu_seconds() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

Tensor<double> randn(const Shape& shape, Rng& rng) {
  Tensor<double> t(shape);
  for (auto& v : t.data()) v = rng.normal();
  return t;
}

double value(Graph<double>& g, Var v) { return g.value(v).item(); }

Var row(Graph<double>& g, std::vector<double> values) {
  const auto n = static_cast<std::int64_t>(values.size());
  return g.constant(Tensor<double>(Shape{1, n}, std::move(values)));
}

// ---- 1. gradient fidelity --------------------------------------------------

Outcome gradient_fidelity() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  double worst_layer = 0, worst_loss = 0, worst_model = 0;
  std::size_t kinks = 0, checked = 0;
  for (const ad::OpKind kind : ad::layer_catalog()) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto r = ad::grad_check(kind, seed);
      if (kind == ad::OpKind::kStopGradient) {
        o.require(r.max_relative_error == 0.0, "stop_gradient passes a nonzero gradient");
      } else {
        worst_layer = std::max(worst_layer, r.max_relative_error);
        o.require(r.elements_checked > 0, std::string(ad::op_name(kind)) + " checked nothing");
      }
    }
  }
  for (const auto kind : models::loss_catalog()) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      worst_loss = std::max(worst_loss, models::loss_grad_check(kind, seed).max_relative_error);
    }
  }
  for (const auto kind : models::kAllModelKinds) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto r = models::model_grad_check(kind, seed, 4);
      worst_model = std::max(worst_model, r.max_relative_error);
      kinks += r.kinks_skipped;
      checked += r.elements_checked;
    }
  }
  const double elapsed = seconds_since(start);
  o.require(worst_layer <= 1e-4, "layer error " + fmt(worst_layer));
  o.require(worst_loss <= 1e-4, "loss error " + fmt(worst_loss));
  o.require(worst_model <= 1e-4, "model objective error " + fmt(worst_model));
  o.require(elapsed < 120, "took " + fmt(elapsed) + " s");
  o.note("max rel err layers " + fmt(worst_layer, 3) + ", losses " + fmt(worst_loss, 3) +
         ", model objectives " + fmt(worst_model, 3) + " (" + std::to_string(kinks) + "/" +
         std::to_string(checked + kinks) + " kink elements skipped), 20 seeds, " + fmt(elapsed, 3) + " s");
  return o;
}

// ---- 2. loss identities ----------------------------------------------------

Outcome loss_identities() {
  Outcome o;
  Rng rng(2);
  {
    Graph<double> g;
    // |a - p| + margin <= |a - n| gives zero; coincident embeddings give the margin.
    o.require(value(g, models::triplet_loss(g, row(g, {0, 0}), row(g, {1, 0}), row(g, {3, 0}), 2.0)) == 0,
              "triplet zero region");
    o.require(value(g, models::triplet_loss(g, row(g, {0, 0}), row(g, {1, 0}), row(g, {2, 0}), 1.0)) == 0,
              "triplet zero at the boundary");
    const Var z = g.constant(randn({3, 5}, rng));
    o.require(std::abs(value(g, models::triplet_loss(g, z, z, z, 0.7)) - 0.7) < 1e-15,
              "triplet equals margin for coincident embeddings");
  }
  {
    Graph<double> g;
    const Var p = g.leaf(randn({4, 6}, rng));
    const Var z = g.leaf(Tensor<double>(g.value(p)));
    const Var zs = g.leaf(Tensor<double>(g.value(p)));
    const Var scaled = g.scale(zs, 3.0);
    const Var loss = g.add(models::simsiam_loss(g, p, z), models::simsiam_loss(g, p, scaled));
    o.require(std::abs(value(g, models::simsiam_loss(g, p, z)) + 1.0) < 1e-12, "simsiam = -1 when parallel");
    g.backward(loss);
    const Tensor<double> gz = g.grad(z);
    const Tensor<double> gzs = g.grad(zs);
    bool zero = true;
    for (double v : gz.data()) zero = zero && v == 0.0;
    for (double v : gzs.data()) zero = zero && v == 0.0;
    o.require(zero, "stop-gradient branch receives exactly zero");
  }
  {
    Graph<double> g;
    o.require(value(g, models::kl_gauss(g, row(g, {0, 0, 0, 0}), row(g, {0, 0, 0, 0}))) == 0, "kl(0, 0) = 0");
    const Var x = g.constant(randn({16, 8}, rng));
    const double mmd = value(g, models::mmd_rbf(g, x, x));
    o.require(std::abs(mmd) <= 1e-7, "mmd(X, X) = " + fmt(mmd));
  }
  {
    Graph<double> g;
    const Var r = g.constant(Tensor<double>::scalar(1.7));
    const Var kl = g.constant(Tensor<double>::scalar(0.3));
    const Var mmd = g.constant(Tensor<double>::scalar(0.05));
    models::LossWeights w;
    w.alpha = 0;
    w.lambda = 1;
    o.require(value(g, models::infovae_loss(g, r, kl, mmd, w)) == 1.7 + 0.3, "alpha=0 lambda=1 drops mmd");
    w.alpha = 1;
    w.lambda = 4;
    o.require(std::abs(value(g, models::infovae_loss(g, r, kl, mmd, w)) - (1.7 + 4 * 0.05)) < 1e-15,
              "alpha=1 drops kl");
    const double recon = 0.8125, sim = -0.9375, tri = 0.34375;
    const double hand = recon + 1e-2 * sim + 1e-1 * tri;
    const double got = value(g, models::multitask_loss(g, g.constant(Tensor<double>::scalar(recon)),
                                                       g.constant(Tensor<double>::scalar(sim)),
                                                       g.constant(Tensor<double>::scalar(tri)), 1e-2, 1e-1));
    o.require(std::abs(got - hand) <= 1e-12, "multitask weighted sum");
  }
  o.note("triplet, simsiam, stop-gradient, kl, mmd and loss coefficient checks");
  return o;
}

// ---- 3. metric oracle ------------------------------------------------------

eval::MetricsAtK pair_count_oracle(const eval::LabeledRanking& r, std::size_t k) {
  std::set<int> present;
  for (const auto& q : r.queries) present.insert(q.true_class);
  long double acc = 0, prec = 0, rec = 0, total = 0;
  for (const auto& q : r.queries) total += k;
  for (int c : present) {
    long double tp = 0, fp = 0, fn = 0;
    for (const auto& q : r.queries) {
      for (std::size_t i = 0; i < k; ++i) {
        const bool t = q.true_class == c, p = q.retrieved[i] == c;
        tp += t && p;
        fp += !t && p;
        fn += t && !p;
      }
    }
    acc += (total - fp - fn) / total;
    prec += tp + fp > 0 ? tp / (tp + fp) : 0;
    rec += tp / (tp + fn);
  }
  eval::MetricsAtK m;
  m.accuracy = static_cast<double>(acc / present.size());
  m.precision = static_cast<double>(prec / present.size());
  m.recall = static_cast<double>(rec / present.size());
  m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0;
  return m;
}

Outcome metric_oracle() {
  Outcome o;
  Rng rng(3);
  double worst = 0;
  for (int inst = 0; inst < 1000; ++inst) {
    eval::LabeledRanking r;
    const auto classes = 1 + rng.below(10);
    const auto queries = 1 + rng.below(50);
    for (std::uint64_t q = 0; q < queries; ++q) {
      eval::LabeledQuery lq;
      lq.true_class = static_cast<int>(rng.below(classes));
      for (int i = 0; i < 5; ++i) lq.retrieved.push_back(static_cast<int>(rng.below(classes)));
      r.queries.push_back(lq);
    }
    for (std::size_t k = 1; k <= 5; ++k) {
      const auto a = eval::metrics_at_k(r, k);
      const auto b = pair_count_oracle(r, k);
      worst = std::max({worst, std::abs(a.accuracy - b.accuracy), std::abs(a.precision - b.precision),
                        std::abs(a.recall - b.recall), std::abs(a.f1 - b.f1)});
    }
  }
  o.require(worst <= 1e-12, "oracle deviation " + fmt(worst));
  const std::vector<double> ones(5, 1.0);
  const double s = eval::retrieval_score(ones);
  o.require(s == 0.96875, "retrieval score of ones = " + fmt(s, 17));
  o.note("1000 instances, max deviation " + fmt(worst, 3) + ", score(1) = " + fmt(s, 17));
  return o;
}

// ---- 4. clustering metrics -------------------------------------------------

double pair_ari(const std::vector<int>& a, const std::vector<int>& b) {
  double n11 = 0, n00 = 0, n10 = 0, n01 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const bool sa = a[i] == a[j], sb = b[i] == b[j];
      n11 += sa && sb;
      n00 += !sa && !sb;
      n10 += sa && !sb;
      n01 += !sa && sb;
    }
  }
  return 2 * (n00 * n11 - n01 * n10) / ((n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11));
}

Outcome clustering_correctness() {
  Outcome o;
  const std::vector<int> truth{0, 0, 0, 1, 1, 1, 2, 2, 2};
  const std::vector<int> relabeled{7, 7, 7, 3, 3, 3, 5, 5, 5};
  const auto same = eval::clustering_scores(truth, relabeled);
  o.require(std::abs(same.homogeneity - 1) < 1e-12 && std::abs(same.completeness - 1) < 1e-12 &&
                std::abs(same.v_measure - 1) < 1e-12 && std::abs(same.adjusted_rand - 1) < 1e-12 &&
                std::abs(same.adjusted_mutual_info - 1) < 1e-12,
            "identical partitions");
  const std::vector<int> constant(9, 4);
  const auto flat = eval::clustering_scores(truth, constant);
  o.require(flat.homogeneity == 0 && flat.completeness == 1 && flat.adjusted_rand == 0 &&
                flat.adjusted_mutual_info == 0,
            "constant prediction");

  Rng rng(4);
  double worst_ari = 0;
  double worst_z = 0;
  int partitions = 0;
  while (partitions < 20) {
    std::vector<int> a(8), b(8);
    for (auto& v : a) v = static_cast<int>(rng.below(3));
    for (auto& v : b) v = static_cast<int>(rng.below(3));
    const auto t = eval::ContingencyTable::from_labels(a, b);
    if (t.rows() < 2 || t.cols() < 2) continue;
    worst_ari = std::max(worst_ari, std::abs(eval::adjusted_rand(t) - pair_ari(a, b)));
    const double emi = eval::expected_mutual_information(t);
    const int trials = 100000;
    double sum = 0, sum_sq = 0;
    auto shuffled = b;
    for (int i = 0; i < trials; ++i) {
      rng.shuffle(std::span<int>(shuffled));
      const double mi = eval::mutual_information(eval::ContingencyTable::from_labels(a, shuffled));
      sum += mi;
      sum_sq += mi * mi;
    }
    const double mean = sum / trials;
    const double se = std::sqrt(std::max(0.0, sum_sq / trials - mean * mean) / (trials - 1));
    const double z = se > 0 ? std::abs(emi - mean) / se : (std::abs(emi - mean) < 1e-12 ? 0 : 1e9);
    worst_z = std::max(worst_z, z);
    ++partitions;
  }
  o.require(worst_ari <= 1e-12, "ARI vs pair enumeration " + fmt(worst_ari));
  o.require(worst_z <= 3, "E[MI] vs permutations " + fmt(worst_z) + " standard errors");
  o.note("20 partitions, ARI deviation " + fmt(worst_ari, 3) + ", worst E[MI] gap " +
         fmt(worst_z, 3) + " standard errors");
  return o;
}

// ---- 5. index exactness ----------------------------------------------------

Outcome index_exactness() {
  Outcome o;
  Rng rng(5);
  const std::size_t dim = 8;
  index::PlanIndex idx(dim);
  std::vector<std::vector<float>> vecs;
  for (int i = 0; i < 200; ++i) {
    std::vector<float> v(dim);
    // Coarse integer grid so exact distance ties occur.
    for (auto& x : v) x = static_cast<float>(static_cast<int>(rng.below(4)) - 2);
    volumes::CaseMeta m;
    char id[16];
    std::snprintf(id, sizeof id, "r%03d", i);
    m.case_id = id;
    m.class_id = static_cast<int>(rng.below(volumes::kNumClasses));
    m.criteria = volumes::criteria_from_class(m.class_id);
    m.protocol = volumes::default_protocol(m.criteria);
    idx.insert({id, v, m, ""});
    vecs.push_back(v);
  }
  int mismatches = 0;
  for (int qi = 0; qi < 50; ++qi) {
    std::vector<float> q(dim);
    for (auto& x : q) x = static_cast<float>(static_cast<int>(rng.below(4)) - 2);
    std::vector<std::pair<double, std::string>> all;
    for (int i = 0; i < 200; ++i) {
      long double s = 0;
      for (std::size_t j = 0; j < dim; ++j) s += std::pow(static_cast<long double>(q[j]) - vecs[i][j], 2);
      char id[16];
      std::snprintf(id, sizeof id, "r%03d", i);
      all.emplace_back(static_cast<double>(std::sqrt(s)), id);
    }
    std::sort(all.begin(), all.end());
    for (std::size_t k : {1, 3, 5, 200}) {
      const auto r = idx.query(q, k);
      for (std::size_t i = 0; i < k; ++i) {
        mismatches += r.hits[i].case_id != all[i].second || r.hits[i].distance != all[i].first;
      }
    }
    index::MetaFilter f;
    f.site = volumes::BodySite::kHeadAndNeck;
    const auto direct = idx.query(q, 5, f);
    std::vector<std::string> kept;
    for (const auto& h : idx.query(q, 200).hits) {
      if (f.matches(idx.find(h.case_id)->meta)) kept.push_back(h.case_id);
      if (kept.size() == 5) break;
    }
    for (std::size_t i = 0; i < kept.size(); ++i) mismatches += direct.hits[i].case_id != kept[i];
  }
  o.require(mismatches == 0, std::to_string(mismatches) + " ranking mismatches");
  const std::string bytes = idx.encode();
  const auto back = index::PlanIndex::decode(bytes, "round trip");
  o.require(back == idx && back.encode() == bytes, "save/load is not bitwise");
  o.note("50 queries x k in {1,3,5,200}, filter commutation, bitwise round trip of " +
         std::to_string(bytes.size()) + " bytes");
  return o;
}

// ---- 6. end-to-end retrieval -------------------------------------------------

struct Trained {
  double top1 = 0;
  double accuracy_score = 0;
  double cpu = 0;
  int epochs = 0;
};

Trained train_and_score(models::ModelKind kind, const std::vector<volumes::Case>& cases,
                        int epochs) {
  std::vector<volumes::Case> database, queries;
  for (const auto& c : cases) {
    if (c.meta.split == volumes::Split::kTrain) database.push_back(c);
    if (c.meta.split == volumes::Split::kTest) queries.push_back(c);
  }
  training::SplitView view(cases, volumes::Split::kTrain);
  training::TrainConfig tc;
  tc.kind = kind;
  tc.epochs = epochs;
  const double cpu0 = cpu_seconds();
  auto result = training::train(view, tc);
  Trained t;
  t.cpu = cpu_seconds() - cpu0;
  t.epochs = epochs;

  const auto db = training::embed_cases(result.model, database, tc.input);
  const auto qe = training::embed_cases(result.model, queries, tc.input);
  index::PlanIndex idx(db.dim);
  for (std::size_t i = 0; i < db.rows(); ++i) {
    const auto r = db.row(i);
    idx.insert({database[i].meta.case_id, {r.begin(), r.end()}, database[i].meta, ""});
  }
  eval::LabeledRanking ranking;
  for (std::size_t i = 0; i < qe.rows(); ++i) {
    eval::LabeledQuery lq;
    lq.true_class = queries[i].meta.class_id;
    for (const auto& h : idx.query(qe.row(i), 5).hits) lq.retrieved.push_back(h.class_id);
    ranking.queries.push_back(lq);
  }
  int hits = 0;
  for (const auto& q : ranking.queries) hits += q.retrieved.front() == q.true_class;
  t.top1 = static_cast<double>(hits) / ranking.queries.size();
  t.accuracy_score = eval::build_report(std::string(models::to_string(kind)), ranking, 5).scores.accuracy;
  return t;
}

Outcome end_to_end(int epochs) {
  Outcome o;
  volumes::DatasetConfig dc;
  dc.per_class = 10;
  dc.seed = 1;
  const auto cases = volumes::make_dataset(dc);
  o.require(cases.size() == 320, "dataset size " + std::to_string(cases.size()));
  std::map<std::string, Trained> r;
  for (const auto kind : {models::ModelKind::kMultitask, models::ModelKind::kSiameseTriplet,
                          models::ModelKind::kVanillaAutoencoder}) {
    const auto t = train_and_score(kind, cases, epochs);
    r[std::string(models::to_string(kind))] = t;
    std::printf("  [6] %-20s epochs %d cpu %6.1f s top-1 %.3f accuracy score %.6f\n",
                std::string(models::to_string(kind)).c_str(), epochs, t.cpu, t.top1, t.accuracy_score);
    std::fflush(stdout);
  }
  const auto& mt = r["multitask"];
  const auto& tri = r["siamese_triplet"];
  const auto& va = r["vanilla_autoencoder"];
  o.require(mt.cpu <= 900 && tri.cpu <= 900, "training exceeded 15 CPU minutes");
  o.require(mt.top1 >= 0.8, "multitask top-1 " + fmt(mt.top1, 3) + " < 0.8");
  o.require(tri.top1 >= 0.8, "siamese_triplet top-1 " + fmt(tri.top1, 3) + " < 0.8");
  o.require(mt.accuracy_score >= tri.accuracy_score,
            "multitask accuracy score " + fmt(mt.accuracy_score, 6) + " < siamese_triplet " +
                fmt(tri.accuracy_score, 6));
  o.require(tri.accuracy_score > va.accuracy_score,
            "siamese_triplet accuracy score " + fmt(tri.accuracy_score, 6) +
                " <= vanilla_autoencoder " + fmt(va.accuracy_score, 6));
  o.note("top-1 multitask " + fmt(mt.top1, 3) + ", triplet " + fmt(tri.top1, 3) + ", vanilla " +
         fmt(va.top1, 3) + "; accuracy score " + fmt(mt.accuracy_score, 5) + " / " +
         fmt(tri.accuracy_score, 5) + " / " + fmt(va.accuracy_score, 5));
  return o;
}

// ---- 7. determinism --------------------------------------------------------

std::string dataset_bytes(const std::vector<volumes::Case>& cases) {
  std::string s;
  for (const auto& c : cases) {
    s += volumes::serialize_meta(c.meta);
    auto raw = [&](const auto& v) {
      s.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(v[0]));
    };
    raw(c.volume.ct.data);
    raw(c.volume.mask.data);
    raw(c.volume.dose.data);
  }
  return s;
}

Outcome determinism() {
  Outcome o;
  volumes::DatasetConfig dc;
  dc.per_class = 4;
  dc.seed = 7;
  dc.threads = 1;
  const auto a = volumes::make_dataset(dc);
  dc.threads = 3;
  const auto b = volumes::make_dataset(dc);
  o.require(dataset_bytes(a) == dataset_bytes(b), "datasets differ");

  training::TrainConfig tc;
  tc.kind = models::ModelKind::kMultitask;
  tc.epochs = 2;
  tc.seed = 7;
  tc.encoder.widths = {4, 8};
  tc.encoder.groups = 2;
  training::SplitView va(a, volumes::Split::kTrain), vb(b, volumes::Split::kTrain);
  auto ra = training::train(va, tc);
  auto rb = training::train(vb, tc);
  o.require(models::encode_checkpoint(ra.model) == models::encode_checkpoint(rb.model),
            "checkpoints differ");

  const auto e1 = training::embed_cases(ra.model, a, tc.input, 1);
  const auto e4 = training::embed_cases(ra.model, a, tc.input, 4);
  double worst = 0;
  for (std::size_t i = 0; i < e1.values.size(); ++i)
    worst = std::max(worst, std::abs(double(e1.values[i]) - e4.values[i]));
  o.require(worst <= 1e-12, "threaded embedding deviates by " + fmt(worst));

  auto build = [&](const training::EmbeddingMatrix& e) {
    index::PlanIndex idx(e.dim);
    for (std::size_t i = 0; i < e.rows(); ++i) {
      const auto r = e.row(i);
      idx.insert({a[i].meta.case_id, {r.begin(), r.end()}, a[i].meta, ""});
    }
    return idx.encode();
  };
  o.require(build(e1) == build(e4), "indexes differ");

  auto csvs = [&](const training::EmbeddingMatrix& e) {
    index::PlanIndex idx = index::PlanIndex::decode(build(e), "eval");
    eval::LabeledRanking ranking;
    std::vector<int> classes;
    for (std::size_t i = 0; i < e.rows(); ++i) {
      eval::LabeledQuery lq;
      lq.true_class = a[i].meta.class_id;
      for (const auto& h : idx.query(e.row(i), 5).hits) lq.retrieved.push_back(h.class_id);
      ranking.queries.push_back(lq);
      classes.push_back(a[i].meta.class_id);
    }
    const std::vector<eval::MetricsReport> reports{eval::build_report("m", ranking, 5)};
    return eval::metrics_csv(reports) + eval::comparison_csv(reports) +
           eval::projection_csv(e.ids, classes, eval::pca_project_2d(e.values, e.rows(), e.dim));
  };
  o.require(csvs(e1) == csvs(e4), "evaluation CSVs differ");
  o.note("dataset, checkpoint, index and CSVs bitwise equal; threaded embedding max deviation " +
         fmt(worst, 3));
  return o;
}

// ---- 8. preprocessing ------------------------------------------------------

Outcome preprocessing() {
  Outcome o;
  o.require(volumes::window_normalize(-200.0f) == 0.0f && volumes::window_normalize(0.0f) == 0.5f &&
                volumes::window_normalize(200.0f) == 1.0f,
            "window values");
  const volumes::Dims src{7, 6, 5};
  volumes::Grid<float> g(src, {1, 1, 1});
  for (int z = 0; z < src.nz; ++z)
    for (int y = 0; y < src.ny; ++y)
      for (int x = 0; x < src.nx; ++x) g.at(x, y, z) = static_cast<float>(0.5 + x - 2.0 * y + 0.25 * z);
  double worst = 0;
  for (const volumes::Dims dst : {volumes::Dims{13, 11, 9}, volumes::Dims{4, 4, 4}, volumes::Dims{16, 16, 16}}) {
    const auto r = volumes::resample(g, dst, volumes::Interpolation::kTrilinear);
    for (int z = 0; z < dst.nz; ++z)
      for (int y = 0; y < dst.ny; ++y)
        for (int x = 0; x < dst.nx; ++x) {
          const double sx = x * (src.nx - 1.0) / (dst.nx - 1), sy = y * (src.ny - 1.0) / (dst.ny - 1),
                       sz = z * (src.nz - 1.0) / (dst.nz - 1);
          worst = std::max(worst, std::abs(r.at(x, y, z) - (0.5 + sx - 2.0 * sy + 0.25 * sz)));
        }
  }
  o.require(worst <= 1e-5, "affine field error " + fmt(worst));
  volumes::PhantomSpec spec;
  spec.criteria = volumes::criteria_from_class(31);
  spec.seed = 3;
  const auto c = volumes::generate_phantom(spec, "p");
  const std::set<int> alphabet(c.volume.mask.data.begin(), c.volume.mask.data.end());
  bool kept = true;
  for (const volumes::Dims dst : {volumes::Dims{9, 11, 7}, volumes::Dims{32, 32, 32}}) {
    for (auto v : volumes::resample(c.volume.mask, dst, volumes::Interpolation::kNearest).data)
      kept = kept && alphabet.count(v);
  }
  o.require(kept, "nearest resample introduced a new label");
  o.note("window exact, affine error " + fmt(worst, 3) + ", label alphabet preserved");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  int epochs = 30;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--epochs" && i + 1 < argc) {
      epochs = std::atoi(argv[++i]);
    } else {
      only.insert(std::atoi(a.c_str()));
    }
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient fidelity", gradient_fidelity},
      {"loss identities", loss_identities},
      {"metric oracle equivalence", metric_oracle},
      {"clustering metric correctness", clustering_correctness},
      {"index exactness", index_exactness},
      {"end-to-end retrieval", [epochs] { return end_to_end(epochs); }},
      {"determinism", determinism},
      {"preprocessing exactness", preprocessing},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(number)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.pass;
    std::printf("%s criterion %d: %s (%s)\n", o.pass ? "PASS" : "FAIL", number,
                criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
