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

#include "planret/cli/commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <json.hpp>
#include <thread>

#include "planret/binary_io.hpp"
#include "planret/cli/config.hpp"
#include "planret/error.hpp"
#include "planret/eval/report.hpp"
#include "planret/index/plan_index.hpp"
#include "planret/kv_text.hpp"
#include "planret/models/checkpoint.hpp"
#include "planret/training/trainer.hpp"
#include "planret/volumes/case_io.hpp"
#include "planret/volumes/dataset.hpp"
#include "planret/volumes/preprocess.hpp"

namespace planret::cli {
namespace {

namespace fs = std::filesystem;
using volumes::Case;
using volumes::Split;

std::string json_quote(const std::string& s) { return nlohmann::json(s).dump(); }

fs::path prepare_out(const RunConfig& c) {
  const fs::path out(c.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out.string() + ": " + ec.message());
  write_file(out / "config.resolved.json", to_json(c));
  return out;
}

std::vector<Case> load_split(const fs::path& dir, std::optional<Split> split) {
  std::vector<Case> cases;
  for (const auto& e : volumes::read_manifest(dir)) {
    if (split && e.split != *split) continue;
    Case c = volumes::read_case(dir, e.case_id);
    if (c.meta.class_id != e.class_id || c.meta.split != e.split) {
      throw DataError("case " + e.case_id + " disagrees with the manifest on class or split");
    }
    cases.push_back(std::move(c));
  }
  return cases;
}

void require_labels(const std::vector<Case>& cases, const std::string& what) {
  if (cases.empty()) throw DataError("no labeled cases in the " + what);
  for (const auto& c : cases) {
    if (c.meta.class_id < 0 || c.meta.class_id >= volumes::kNumClasses ||
        volumes::classify_case(c.meta.criteria) != c.meta.class_id) {
      throw DataError("case " + c.meta.case_id + " has a missing or inconsistent class label");
    }
  }
}

models::Model<float> load_model(const RunConfig& c) {
  if (c.checkpoint.empty()) throw ConfigError("no checkpoint given (--checkpoint)");
  return models::load_checkpoint(c.checkpoint);
}

index::PlanIndex build_index(models::Model<float>& model, const std::vector<Case>& cases,
                             const RunConfig& c) {
  const training::EmbeddingMatrix e = training::embed_cases(model, cases, c.input, c.threads);
  index::PlanIndex idx(e.dim);
  for (std::size_t i = 0; i < e.rows(); ++i) {
    const auto row = e.row(i);
    idx.insert({cases[i].meta.case_id, {row.begin(), row.end()}, cases[i].meta,
                volumes::dose_path(c.data.dir, cases[i].meta.case_id).generic_string()});
  }
  return idx;
}

// ---- gen -------------------------------------------------------------------

int cmd_gen(const RunConfig& c, std::ostream& out) {
  if (c.data.per_class < 2) {
    throw ConfigError("data.per_class must be at least 2: triplet sampling needs a positive "
                      "from the same class");
  }
  volumes::DatasetConfig dc;
  dc.per_class = c.data.per_class;
  dc.seed = c.seed;
  dc.split_fractions = c.data.split_fractions;
  dc.phantom.dims = c.data.dims;
  dc.threads = c.threads;
  const auto cases = volumes::make_dataset(dc);
  std::array<int, volumes::kNumClasses> train_members{};
  for (const auto& cs : cases) train_members[cs.meta.class_id] += cs.meta.split == Split::kTrain;
  for (int k = 0; k < volumes::kNumClasses; ++k) {
    if (train_members[k] < 2) {
      throw ConfigError("class " + std::to_string(k) + " gets " + std::to_string(train_members[k]) +
                        " train cases at per_class " + std::to_string(c.data.per_class) +
                        "; triplet sampling needs at least 2");
    }
  }
  const fs::path dir = prepare_out(c);
  std::vector<volumes::ManifestEntry> manifest;
  for (const auto& cs : cases) {
    volumes::write_case(dir, cs);
    manifest.push_back({cs.meta.case_id, cs.meta.class_id, cs.meta.split});
  }
  volumes::write_manifest(dir, manifest);
  const std::string bytes = read_file(dir / "manifest.tsv");
  const auto checksum = fnv1a64({reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()});
  std::array<int, 3> per_split{};
  for (const auto& m : manifest) ++per_split[static_cast<int>(m.split)];
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(checksum));
  out << "cases " << manifest.size() << " classes " << volumes::kNumClasses << " train "
      << per_split[0] << " validation " << per_split[1] << " test " << per_split[2]
      << " manifest_fnv1a " << hex << "\n";
  return 0;
}

// ---- train -----------------------------------------------------------------

int cmd_train(const RunConfig& c, std::ostream& out) {
  const auto cases = load_split(c.data.dir, Split::kTrain);
  training::SplitView view(cases, Split::kTrain);
  training::TrainConfig tc;
  tc.kind = c.kind;
  tc.epochs = c.train.epochs;
  tc.batch_size = c.train.batch_size;
  tc.optimizer = c.train.optimizer;
  tc.weights = c.loss;
  tc.seed = c.seed;
  tc.encoder = c.encoder;
  tc.input = c.input;
  const fs::path dir = prepare_out(c);
  const auto result = training::train(view, tc, [&](int epoch, const training::EpochRecord& r) {
    out << "epoch " << epoch << " loss " << format_double(r.loss);
    for (const auto& [name, v] : r.terms) out << " " << name << " " << format_double(v);
    out << "\n" << std::flush;
  });
  models::save_checkpoint(result.model, dir / "model.ckpt");
  training::write_train_report(dir / "train_report.txt", result.report);
  out << "checkpoint " << (dir / "model.ckpt").generic_string() << " dose_branch "
      << (models::uses_dose_branch(c.kind) ? "true" : "false") << "\n";
  return 0;
}

// ---- index -----------------------------------------------------------------

int cmd_index(const RunConfig& c, std::ostream& out) {
  auto model = load_model(c);
  const auto cases = load_split(c.data.dir, c.database_split);
  if (cases.empty()) throw DataError("split " + volumes::to_string(c.database_split) + " is empty");
  const auto idx = build_index(model, cases, c);
  const fs::path dir = prepare_out(c);
  const fs::path path = c.index.empty() ? dir / "index.plix" : fs::path(c.index);
  idx.save(path);
  out << "index " << path.generic_string() << " count " << idx.size() << " dim " << idx.dim()
      << " split " << volumes::to_string(c.database_split) << "\n";
  return 0;
}

// ---- query -----------------------------------------------------------------

// Mid-plane (z = nz / 2) as an ASCII graymap, values clipped to [0, 1].
void write_slice(const fs::path& path, const volumes::Grid<float>& g,
                 const std::function<double(float)>& scale) {
  const int z = g.dims.nz / 2;
  std::string s = "P2\n" + std::to_string(g.dims.nx) + " " + std::to_string(g.dims.ny) + "\n255\n";
  for (int y = 0; y < g.dims.ny; ++y) {
    for (int x = 0; x < g.dims.nx; ++x) {
      const double v = std::clamp(scale(g.at(x, y, z)), 0.0, 1.0);
      s += std::to_string(static_cast<int>(std::lround(v * 255))) + (x + 1 < g.dims.nx ? " " : "\n");
    }
  }
  write_file(path, s);
}

void write_slices(const fs::path& dir, const std::string& stem, const Case& cs, const RunConfig& c) {
  const double rx = cs.meta.prescription_gy > 0 ? cs.meta.prescription_gy : 1.0;
  write_slice(dir / (stem + ".ct.pgm"), cs.volume.ct,
              [&](float hu) { return volumes::window_normalize(hu, c.input.window); });
  write_slice(dir / (stem + ".dose.pgm"), cs.volume.dose, [&](float d) { return d / rx; });
}

Case load_query_case(const RunConfig& c) {
  if (!c.query.case_id.empty() && !c.query.volume.empty()) {
    throw ConfigError("give either --case or --volume, not both");
  }
  if (!c.query.case_id.empty()) return volumes::read_case(c.data.dir, c.query.case_id);
  if (c.query.volume.empty()) throw ConfigError("query needs --case or --volume");
  fs::path p(c.query.volume);
  std::string stem = p.filename().string();
  for (const char* suffix : {".meta", ".ct.vol", ".mask.vol", ".dose.vol"}) {
    const std::string sfx(suffix);
    if (stem.size() > sfx.size() && stem.ends_with(sfx)) {
      stem.resize(stem.size() - sfx.size());
      break;
    }
  }
  const fs::path parent = p.has_parent_path() ? p.parent_path() : fs::path(".");
  return volumes::read_case(parent, stem);
}

int cmd_query(const RunConfig& c, std::ostream& out) {
  if (c.index.empty()) throw ConfigError("no index given (--index)");
  const auto filter = index::MetaFilter::parse(c.query.filter);
  const Case q = load_query_case(c);
  auto model = load_model(c);
  const auto idx = index::PlanIndex::load(c.index);
  if (static_cast<int>(idx.dim()) != model.config().embedding_dim) {
    throw DataError("index dim " + std::to_string(idx.dim()) + " does not match checkpoint " +
                    "embedding dim " + std::to_string(model.config().embedding_dim));
  }
  const std::vector<Case> one{q};
  const auto e = training::embed_cases(model, one, c.input, 1);
  const auto result = idx.query(e.row(0), static_cast<std::size_t>(c.query.k), filter);

  const fs::path dir = prepare_out(c);
  std::string table = "rank\tcase_id\tdistance\tclass_id\tdose_ref\n";
  for (std::size_t i = 0; i < result.hits.size(); ++i) {
    const auto& h = result.hits[i];
    table += std::to_string(i + 1) + "\t" + h.case_id + "\t" + format_double(h.distance) + "\t" +
             std::to_string(h.class_id) + "\t" + h.dose_ref + "\n";
  }
  write_file(dir / "query.tsv", table);
  out << "query " << q.meta.case_id << " filter " << result.filter << "\n" << table;
  if (result.truncated) {
    out << "note: requested k=" << c.query.k << " but the filtered database holds "
        << result.hits.size() << " records\n";
  }
  if (c.query.slices) {
    const fs::path sdir = dir / "slices";
    fs::create_directories(sdir);
    write_slices(sdir, "query_" + q.meta.case_id, q, c);
    for (std::size_t i = 0; i < result.hits.size(); ++i) {
      const fs::path dose(result.hits[i].dose_ref);
      const Case hit = volumes::read_case(dose.parent_path(), result.hits[i].case_id);
      write_slices(sdir, "rank" + std::to_string(i + 1) + "_" + hit.meta.case_id, hit, c);
    }
    out << "slices " << sdir.generic_string() << "\n";
  }
  return 0;
}

// ---- eval ------------------------------------------------------------------

struct ModelOutputs {
  eval::MetricsReport report;
  std::string pca_csv;
};

ModelOutputs evaluate_model(const EvalModel& m, const std::vector<Case>& database,
                            const std::vector<Case>& queries, const RunConfig& c, int threads) {
  RunConfig local = c;
  local.threads = threads;
  local.checkpoint = m.checkpoint;
  auto model = load_model(local);
  const auto idx = build_index(model, database, local);
  const auto q = training::embed_cases(model, queries, c.input, threads);
  const auto k = static_cast<std::size_t>(c.eval.max_k);
  if (idx.size() < k) {
    throw ConfigError("eval.max_k " + std::to_string(k) + " exceeds the database size " +
                      std::to_string(idx.size()));
  }
  eval::LabeledRanking ranking;
  for (std::size_t i = 0; i < q.rows(); ++i) {
    const auto r = idx.query(q.row(i), k);
    eval::LabeledQuery lq;
    lq.true_class = queries[i].meta.class_id;
    for (const auto& h : r.hits) lq.retrieved.push_back(h.class_id);
    ranking.queries.push_back(std::move(lq));
  }
  ModelOutputs o;
  o.report = eval::build_report(m.name, ranking, k, c.eval.weighting);
  std::vector<int> classes;
  for (const auto& cs : queries) classes.push_back(cs.meta.class_id);
  const auto projection = eval::pca_project_2d(q.values, q.rows(), q.dim);
  o.pca_csv = eval::projection_csv(q.ids, classes, projection);
  return o;
}

int cmd_eval(const RunConfig& c, std::ostream& out) {
  if (c.eval.models.empty()) throw ConfigError("eval needs at least one --model name=checkpoint");
  const auto database = load_split(c.data.dir, c.database_split);
  const auto queries = load_split(c.data.dir, c.eval.query_split);
  require_labels(database, volumes::to_string(c.database_split) + " split");
  require_labels(queries, volumes::to_string(c.eval.query_split) + " split");

  const std::size_t n = c.eval.models.size();
  const int workers = std::min<int>(c.threads, static_cast<int>(n));
  const int inner = std::max(1, c.threads / workers);
  std::vector<ModelOutputs> results(n);
  std::vector<std::exception_ptr> errors(n);
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = static_cast<std::size_t>(w); i < n; i += static_cast<std::size_t>(workers)) {
          try {
            results[i] = evaluate_model(c.eval.models[i], database, queries, c, inner);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  const fs::path dir = prepare_out(c);
  std::vector<eval::MetricsReport> reports;
  for (const auto& r : results) {
    write_file(dir / ("report_" + r.report.model + ".json"), eval::report_json(r.report));
    write_file(dir / ("pca_" + r.report.model + ".csv"), r.pca_csv);
    reports.push_back(r.report);
  }
  write_file(dir / "metrics.csv", eval::metrics_csv(reports));
  const std::string comparison = eval::comparison_csv(reports);
  write_file(dir / "comparison.csv", comparison);
  out << comparison;
  return 0;
}

// ---- dispatch --------------------------------------------------------------

struct Binding {
  CLI::Option* option;
  std::string path;
  std::shared_ptr<std::string> text;
  bool is_string = false;

  std::string json_value() const { return is_string ? json_quote(*text) : *text; }
};

int threads_from_env() {
  const char* env = std::getenv("PLANRET_THREADS");
  if (!env || !*env) return 0;
  try {
    std::size_t used = 0;
    const int n = std::stoi(env, &used);
    if (used != std::string(env).size() || n < 1) throw std::invalid_argument(env);
    return n;
  } catch (const std::exception&) {
    throw ConfigError(std::string("PLANRET_THREADS must be a positive integer, got '") + env + "'");
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"planret: anatomy-based retrieval of radiotherapy plans", "planret"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> sets;
  std::vector<Binding> bindings;
  auto bind_string = [&](CLI::App* a, const std::string& flag, const std::string& path,
                         const std::string& help) {
    auto value = std::make_shared<std::string>();
    CLI::Option* opt = a->add_option(flag, *value, help);
    bindings.push_back(Binding{opt, path, value, true});
  };
  auto bind_number = [&](CLI::App* a, const std::string& flag, const std::string& path,
                         const std::string& help) {
    auto value = std::make_shared<std::string>();
    CLI::Option* opt = a->add_option(flag, *value, help);
    bindings.push_back(Binding{opt, path, value, false});
  };

  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--set", sets, "Override a config key, e.g. --set train.epochs=5");
  bind_number(&app, "--seed", "seed", "Master seed");
  bind_string(&app, "--out", "out", "Output directory");
  bind_number(&app, "--threads", "threads", "Worker threads (fallback: PLANRET_THREADS)");

  auto* gen = app.add_subcommand("gen", "Generate a synthetic phantom dataset");
  bind_number(gen, "--per-class", "data.per_class", "Cases per class");

  auto* train = app.add_subcommand("train", "Train one model on the train split");
  bind_string(train, "--model", "model.kind", "Model kind");
  bind_string(train, "--data", "data.dir", "Dataset directory");
  bind_number(train, "--epochs", "train.epochs", "Training epochs");
  bind_number(train, "--batch-size", "train.batch_size", "Anchors per batch");
  bind_number(train, "--lr", "train.optimizer.lr", "Learning rate");

  auto* idx = app.add_subcommand("index", "Embed a split into a plan index");
  bind_string(idx, "--data", "data.dir", "Dataset directory");
  bind_string(idx, "--checkpoint", "paths.checkpoint", "Model checkpoint");
  bind_string(idx, "--split", "index.split", "Split to index");
  bind_string(idx, "--index", "paths.index", "Index file to write (default <out>/index.plix)");

  auto* query = app.add_subcommand("query", "Retrieve the nearest plans for one case");
  bind_string(query, "--data", "data.dir", "Dataset directory");
  bind_string(query, "--checkpoint", "paths.checkpoint", "Model checkpoint");
  bind_string(query, "--index", "paths.index", "Index file");
  bind_string(query, "--case", "query.case_id", "Case id in the dataset directory");
  bind_string(query, "--volume", "query.volume", "Path stem of a case outside the dataset");
  bind_number(query, "-k", "query.k", "Number of results");
  std::vector<std::string> filters;
  auto* filter_opt = query->add_option("--filter", filters, "Metadata filter key=value");
  auto* slices_flag = query->add_flag("--slices", "Write mid-plane CT and dose extracts");

  auto* ev = app.add_subcommand("eval", "Evaluate checkpoints against a labeled split");
  bind_string(ev, "--data", "data.dir", "Dataset directory");
  bind_string(ev, "--split", "eval.split", "Query split");
  bind_string(ev, "--database-split", "index.split", "Database split");
  bind_number(ev, "--max-k", "eval.max_k", "Deepest cutoff");
  std::vector<std::string> eval_models;
  auto* models_opt = ev->add_option("--model", eval_models, "Model as name=checkpoint");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "usage error: " << e.what() << "\nrun 'planret --help' for usage\n";
    return static_cast<int>(ErrorKind::kConfig);
  }

  try {
    std::vector<Override> overrides;
    CLI::App* sub = app.get_subcommands().front();
    overrides.push_back({"command", json_quote(sub->get_name())});
    if (const int env = threads_from_env(); env > 0) overrides.push_back({"threads", std::to_string(env)});
    for (const auto& b : bindings) {
      if (b.option->count() > 0) overrides.push_back({b.path, b.json_value()});
    }
    if (filter_opt->count() > 0) overrides.push_back({"query.filter", nlohmann::json(filters).dump()});
    if (slices_flag->count() > 0) overrides.push_back({"query.slices", "true"});
    if (models_opt->count() > 0) {
      nlohmann::json list = nlohmann::json::array();
      for (const auto& m : eval_models) {
        const auto eq = m.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == m.size())
          throw ConfigError("--model '" + m + "' is not name=checkpoint");
        list.push_back({{"name", m.substr(0, eq)}, {"checkpoint", m.substr(eq + 1)}});
      }
      overrides.push_back({"eval.models", list.dump()});
    }
    for (const auto& s : sets) overrides.push_back(parse_override(s));
    const RunConfig config = resolve_config(config_path, overrides);

    const std::string& name = sub->get_name();
    if (name == "gen") return cmd_gen(config, out);
    if (name == "train") return cmd_train(config, out);
    if (name == "index") return cmd_index(config, out);
    if (name == "query") return cmd_query(config, out);
    return cmd_eval(config, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kIo);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace planret::cli
