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

#include "planret/eval/report.hpp"

#include <cmath>
#include <json.hpp>

#include "planret/error.hpp"
#include "planret/kv_text.hpp"

namespace planret::eval {
namespace {

void check(const std::string& model, const std::string& name, double v, double lo, double hi) {
  if (!std::isfinite(v) || v < lo - 1e-12 || v > hi + 1e-12) {
    throw NumericError("report " + model + ": " + name + " = " + format_double(v) +
                       " outside [" + format_double(lo) + ", " + format_double(hi) + "]");
  }
}

struct Named {
  const char* name;
  double value;
};

std::vector<Named> at_k_fields(const MetricsAtK& m) {
  return {{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

std::vector<Named> summary_fields(const MetricsReport& r) {
  return {{"accuracy_score", r.scores.accuracy},
          {"precision_score", r.scores.precision},
          {"recall_score", r.scores.recall},
          {"f1_score", r.scores.f1},
          {"homogeneity", r.clustering.homogeneity},
          {"completeness", r.clustering.completeness},
          {"v_measure", r.clustering.v_measure},
          {"adjusted_rand", r.clustering.adjusted_rand},
          {"adjusted_mutual_info", r.clustering.adjusted_mutual_info}};
}

}  // namespace

void MetricsReport::validate() const {
  for (std::size_t k = 0; k < at_k.size(); ++k) {
    for (const auto& f : at_k_fields(at_k[k])) {
      check(model, std::string(f.name) + "@" + std::to_string(k + 1), f.value, 0, 1);
    }
  }
  for (const auto& f : summary_fields(*this)) {
    if (!std::isfinite(f.value)) check(model, f.name, f.value, 0, 0);
  }
  check(model, "homogeneity", clustering.homogeneity, 0, 1);
  check(model, "completeness", clustering.completeness, 0, 1);
  check(model, "v_measure", clustering.v_measure, 0, 1);
  check(model, "adjusted_rand", clustering.adjusted_rand, -1, 1);
  // Worse-than-chance agreement gives a small negative AMI.
  check(model, "adjusted_mutual_info", clustering.adjusted_mutual_info, -1, 1);
}

MetricsReport build_report(const std::string& model, const LabeledRanking& ranking,
                           std::size_t max_k, const ScoreWeighting& weighting) {
  MetricsReport r;
  r.model = model;
  r.queries = ranking.queries.size();
  r.weighting = weighting;
  std::vector<double> acc, prec, rec, f1;
  for (std::size_t k = 1; k <= max_k; ++k) {
    const MetricsAtK m = metrics_at_k(ranking, k);
    r.at_k.push_back(m);
    acc.push_back(m.accuracy);
    prec.push_back(m.precision);
    rec.push_back(m.recall);
    f1.push_back(m.f1);
  }
  r.scores = {retrieval_score(acc, weighting), retrieval_score(prec, weighting),
              retrieval_score(rec, weighting), retrieval_score(f1, weighting)};
  std::vector<int> truth;
  for (const auto& q : ranking.queries) truth.push_back(q.true_class);
  r.clustering = clustering_scores(truth, predicted_labels_top1(ranking));
  r.validate();
  return r;
}

std::string report_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["model"] = r.model;
  j["queries"] = r.queries;
  j["score_weighting"] = {{"base", r.weighting.base},
                          {"exponent_offset", r.weighting.exponent_offset}};
  auto& at_k = j["metrics_at_k"] = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < r.at_k.size(); ++k) {
    nlohmann::ordered_json row;
    row["k"] = k + 1;
    for (const auto& f : at_k_fields(r.at_k[k])) row[f.name] = f.value;
    at_k.push_back(row);
  }
  j["retrieval_scores"] = {{"accuracy", r.scores.accuracy},
                           {"precision", r.scores.precision},
                           {"recall", r.scores.recall},
                           {"f1", r.scores.f1}};
  j["clustering"] = {{"homogeneity", r.clustering.homogeneity},
                     {"completeness", r.clustering.completeness},
                     {"v_measure", r.clustering.v_measure},
                     {"adjusted_rand", r.clustering.adjusted_rand},
                     {"adjusted_mutual_info", r.clustering.adjusted_mutual_info}};
  return j.dump(2) + "\n";
}

std::string metrics_csv(std::span<const MetricsReport> reports) {
  std::string out = "model,metric,k,value\n";
  for (const auto& r : reports) {
    for (std::size_t k = 0; k < r.at_k.size(); ++k) {
      for (const auto& f : at_k_fields(r.at_k[k])) {
        out += r.model + "," + f.name + "," + std::to_string(k + 1) + "," +
               format_double(f.value) + "\n";
      }
    }
    for (const auto& f : summary_fields(r)) {
      out += r.model + "," + f.name + ",," + format_double(f.value) + "\n";
    }
  }
  return out;
}

std::string comparison_csv(std::span<const MetricsReport> reports) {
  std::string out = "model";
  if (!reports.empty()) {
    for (const auto& f : summary_fields(reports.front())) out += std::string(",") + f.name;
  }
  out += "\n";
  for (const auto& r : reports) {
    out += r.model;
    for (const auto& f : summary_fields(r)) out += "," + format_double(f.value);
    out += "\n";
  }
  return out;
}

std::string projection_csv(std::span<const std::string> case_ids, std::span<const int> class_ids,
                           const Projection2d& projection) {
  if (case_ids.size() != projection.coords.size() || class_ids.size() != case_ids.size()) {
    throw DataError("projection_csv: id, class and coordinate counts differ");
  }
  std::string out = "case_id,x,y,class_id\n";
  for (std::size_t i = 0; i < case_ids.size(); ++i) {
    out += case_ids[i] + "," + format_double(projection.coords[i][0]) + "," +
           format_double(projection.coords[i][1]) + "," + std::to_string(class_ids[i]) + "\n";
  }
  return out;
}

}  // namespace planret::eval
