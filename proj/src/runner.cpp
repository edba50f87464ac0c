#include "tabbench/runner.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "tabbench/csv.hpp"
#include "tabbench/error.hpp"
#include "tabbench/random.hpp"

namespace tabbench {

namespace {

using nlohmann::json;

// Seed streams below the per-run base seed.
enum RunStream : std::uint64_t {
  kSplit = 101,
  kHoldout = 102,
  kGenerator = 103,
  kScoringSample = 104,
  kEvaluationSample = 105,
  kLearners = 106,
};

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string run_id_for(const RunRecord& r) {
  if (r.model == GeneratorKind::independent)
    return r.dataset + "__independent__s" + std::to_string(r.seed);
  return r.dataset + "__" + to_string(r.model) + "__" + loss_label(r.alpha, r.beta) + "__s" + std::to_string(r.seed);
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) fail(ErrorCode::Config, where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      fail(ErrorCode::Config, "unknown key '" + key + "' in " + where);
  }
}

void read_optimizer(const json& doc, AdamOptions& opt) {
  if (doc.contains("learning_rate")) opt.lr = doc.at("learning_rate").get<double>();
  if (doc.contains("weight_decay")) opt.weight_decay = doc.at("weight_decay").get<double>();
}

GanConfig gan_from_json(const json& doc) {
  check_keys(doc,
             {"preset", "latent_dim", "generator_hidden", "discriminator_hidden", "batch_size", "epochs",
              "d_steps_per_g_step", "checkpoint_every", "adversarial", "learning_rate", "weight_decay"},
             "gan");
  GanConfig cfg;
  if (doc.contains("preset")) {
    if (doc.at("preset").get<std::string>() != "full-scale") fail(ErrorCode::Config, "unknown gan preset");
    cfg = GanConfig::full_scale();
  }
  if (doc.contains("latent_dim")) cfg.latent_dim = doc.at("latent_dim").get<std::size_t>();
  if (doc.contains("generator_hidden")) cfg.generator_hidden = doc.at("generator_hidden").get<std::vector<std::size_t>>();
  if (doc.contains("discriminator_hidden"))
    cfg.discriminator_hidden = doc.at("discriminator_hidden").get<std::vector<std::size_t>>();
  if (doc.contains("batch_size")) cfg.batch_size = doc.at("batch_size").get<std::size_t>();
  if (doc.contains("epochs")) cfg.epochs = doc.at("epochs").get<std::size_t>();
  if (doc.contains("d_steps_per_g_step")) cfg.d_steps_per_g_step = doc.at("d_steps_per_g_step").get<std::size_t>();
  if (doc.contains("checkpoint_every")) cfg.checkpoint_every = doc.at("checkpoint_every").get<std::size_t>();
  if (doc.contains("adversarial"))
    cfg.loss.adversarial = adversarial_form_from_string(doc.at("adversarial").get<std::string>());
  read_optimizer(doc, cfg.optimizer);
  return cfg;
}

VaeConfig vae_from_json(const json& doc) {
  check_keys(doc,
             {"preset", "latent_dim", "encoder_hidden", "decoder_hidden", "batch_size", "epochs", "checkpoint_every",
              "learning_rate", "weight_decay"},
             "vae");
  VaeConfig cfg;
  if (doc.contains("preset")) {
    if (doc.at("preset").get<std::string>() != "full-scale") fail(ErrorCode::Config, "unknown vae preset");
    cfg = VaeConfig::full_scale();
  }
  if (doc.contains("latent_dim")) cfg.latent_dim = doc.at("latent_dim").get<std::size_t>();
  if (doc.contains("encoder_hidden")) cfg.encoder_hidden = doc.at("encoder_hidden").get<std::vector<std::size_t>>();
  if (doc.contains("decoder_hidden")) cfg.decoder_hidden = doc.at("decoder_hidden").get<std::vector<std::size_t>>();
  if (doc.contains("batch_size")) cfg.batch_size = doc.at("batch_size").get<std::size_t>();
  if (doc.contains("epochs")) cfg.epochs = doc.at("epochs").get<std::size_t>();
  if (doc.contains("checkpoint_every")) cfg.checkpoint_every = doc.at("checkpoint_every").get<std::size_t>();
  read_optimizer(doc, cfg.optimizer);
  return cfg;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

// ---- per-run work -----------------------------------------------------------

struct Dataset {
  Table table;
};

struct RunOutput {
  RunRecord record;
  std::vector<ResultRow> rows;
};

Dataset load_dataset(const DatasetSpec& spec) {
  TableSchema schema;
  if (spec.schema) {
    schema = load_schema(*spec.schema);
  } else {
    schema = infer_schema(spec.csv, spec.categorical_threshold);
    if (spec.target) {
      schema.target_index = schema.find(*spec.target);
      if (!schema.target_index) fail(ErrorCode::Config, "target column '" + *spec.target + "' not found");
    }
    schema.task = spec.task;
  }
  if (spec.target && schema.target_index && schema[*schema.target_index].name != *spec.target)
    fail(ErrorCode::Config, "dataset '" + spec.name + "' target disagrees with its schema");
  if (spec.task != Task::none) schema.task = spec.task;
  schema.validate();
  return {load_csv(spec.csv, schema)};
}

std::vector<std::size_t> map_ids(const std::vector<std::size_t>& base, const std::vector<std::size_t>& local) {
  std::vector<std::size_t> out;
  out.reserve(local.size());
  for (std::size_t i : local) out.push_back(base[i]);
  return out;
}

void append_rows(RunOutput& out, const std::string& checkpoint, const std::vector<MetricValue>& stats,
                 const EfficacySuite& suite) {
  const auto& rec = out.record;
  ResultRow base;
  base.run_id = rec.run_id;
  base.dataset = rec.dataset;
  base.model = to_string(rec.model);
  base.loss_config = rec.model == GeneratorKind::independent ? "none" : loss_label(rec.alpha, rec.beta);
  base.alpha = rec.alpha;
  base.beta = rec.beta;
  base.seed = rec.seed;
  base.checkpoint = checkpoint;

  for (const auto& m : stats) {
    ResultRow row = base;
    row.evaluation = "stat";
    row.metric = m.metric;
    row.column_or_pair = m.column_or_pair;
    row.value = m.value;
    row.orientation = m.informational ? "info" : (m.lower_better ? "lower_better" : "higher_better");
    out.rows.push_back(std::move(row));
  }
  auto efficacy = [&](const std::vector<EfficacyReport>& reports, const char* evaluation) {
    for (const auto& rep : reports) {
      for (const auto& [metric, value] : rep.scores) {
        ResultRow row = base;
        row.evaluation = evaluation;
        row.protocol = to_string(rep.protocol);
        row.learner = to_string(rep.learner);
        row.metric = metric;
        row.value = value;
        row.orientation = metric_lower_better(metric) ? "lower_better" : "higher_better";
        out.rows.push_back(std::move(row));
      }
    }
  };
  efficacy(suite.trtr, "tstr");
  efficacy(suite.tstr, "tstr");
  efficacy(suite.augmentation, "aug");
}

RunOutput execute_run(const BenchConfig& cfg, const Table& data, RunRecord record) {
  const auto started = std::chrono::steady_clock::now();
  RunOutput out{std::move(record), {}};
  auto& rec = out.record;
  try {
    // The split depends on (dataset, seed) only, so every model and loss
    // configuration sees the same rows.
    const std::uint64_t base = derive_seed(rec.seed, stable_hash(rec.dataset));
    const SplitIndices outer = split_indices(data, cfg.train_fraction, derive_seed(base, kSplit));
    const Table real_train = data.subset(outer.train);
    const Table real_test = data.subset(outer.test);
    const SplitIndices inner = split_indices(real_train, 1.0 - cfg.holdout_fraction, derive_seed(base, kHoldout));
    const Table gen_train = real_train.subset(inner.train);
    const Table holdout = real_train.subset(inner.test);

    const LeakageAudit audit = audit_leakage(outer.test, {map_ids(outer.train, inner.train), outer.train});
    rec.audit_passed = audit.passed;
    if (!audit.passed) fail(ErrorCode::InvalidArgument, kLeakageFailure);

    const std::uint64_t gen_seed = derive_seed(base, kGenerator);
    TrainedGenerator generator;
    switch (rec.model) {
      case GeneratorKind::gan: {
        GanConfig g = cfg.gan;
        g.loss.alpha = rec.alpha;
        g.loss.beta = rec.beta;
        g.seed = gen_seed;
        generator = train_gan(encode(gen_train), g);
        break;
      }
      case GeneratorKind::vae: {
        VaeConfig v = cfg.vae;
        v.loss.alpha = rec.alpha;
        v.loss.beta = rec.beta;
        v.seed = gen_seed;
        generator = train_vae(encode(gen_train), v);
        break;
      }
      case GeneratorKind::independent: generator = fit_independent(gen_train, gen_seed); break;
    }

    // Candidate networks: one per checkpoint, or the fitted marginals.
    std::vector<std::size_t> candidates;
    std::size_t last = 0;
    std::size_t optimal = 0;
    if (!generator.checkpoints.empty()) {
      std::vector<double> scores;
      for (std::size_t i = 0; i < generator.checkpoints.size(); ++i) {
        const Table s = sample(generator.at_checkpoint(i), holdout.row_count(), derive_seed(base, kScoringSample));
        scores.push_back(selection_score(holdout, s, cfg.dwp_mode));
      }
      last = select_checkpoint(generator.checkpoints, scores, CheckpointPolicy::last);
      optimal = select_checkpoint(generator.checkpoints, scores, CheckpointPolicy::best_statistical);
      rec.last_epoch = generator.checkpoints[last].epoch;
      rec.optimal_epoch = generator.checkpoints[optimal].epoch;
    }

    const std::size_t n_synth = cfg.synth_rows.value_or(real_train.row_count());
    std::vector<Learner> learners;
    if (cfg.learners.empty()) {
      learners = default_learners(data.schema.task);
    } else {
      for (auto k : cfg.learners) learners.push_back(Learner{k});
    }

    std::map<std::size_t, std::pair<std::vector<MetricValue>, EfficacySuite>> cache;
    for (const auto policy : cfg.checkpoints) {
      const std::size_t index = policy == CheckpointPolicy::last ? last : optimal;
      auto it = cache.find(index);
      if (it == cache.end()) {
        const TrainedGenerator g = generator.checkpoints.empty() ? generator : generator.at_checkpoint(index);
        const Table synth = sample(g, n_synth, derive_seed(base, kEvaluationSample));
        auto stats = evaluate_similarity(real_train, synth, cfg.dwp_mode);
        auto suite = data.schema.task == Task::none
                         ? EfficacySuite{}
                         : run_efficacy(real_train, synth, real_test, learners, derive_seed(base, kLearners));
        it = cache.emplace(index, std::make_pair(std::move(stats), std::move(suite))).first;
      }
      append_rows(out, checkpoint_label(policy), it->second.first, it->second.second);
    }
    rec.status = RunStatus::done;
    rec.reason.clear();
  } catch (const std::exception& e) {
    rec.status = RunStatus::failed;
    rec.reason = e.what();
    out.rows.clear();
  }
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

void write_text_atomically(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot write '" + tmp.string() + "'");
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

std::string checkpoint_label(CheckpointPolicy p) { return p == CheckpointPolicy::last ? "last" : "optimal"; }

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::pending: return "pending";
    case RunStatus::done: return "done";
    case RunStatus::failed: return "failed";
  }
  return "pending";
}

void BenchConfig::validate() const {
  if (datasets.empty()) fail(ErrorCode::Config, "config lists no datasets");
  if (models.empty()) fail(ErrorCode::Config, "config lists no models");
  if (seeds.empty()) fail(ErrorCode::Config, "config lists no seeds");
  if (checkpoints.empty()) fail(ErrorCode::Config, "config lists no checkpoint policies");
  std::set<std::string> names;
  for (const auto& d : datasets) {
    if (d.name.empty()) fail(ErrorCode::Config, "dataset without a name");
    if (d.name.find("__") != std::string::npos || d.name.find(',') != std::string::npos)
      fail(ErrorCode::Config, "dataset name '" + d.name + "' may not contain '__' or ','");
    if (!names.insert(d.name).second) fail(ErrorCode::Config, "duplicate dataset '" + d.name + "'");
  }
  std::set<std::uint64_t> seen_seeds(seeds.begin(), seeds.end());
  if (seen_seeds.size() != seeds.size()) fail(ErrorCode::Config, "duplicate seeds");
  std::set<GeneratorKind> seen_models(models.begin(), models.end());
  if (seen_models.size() != models.size()) fail(ErrorCode::Config, "duplicate models");
  for (std::size_t i = 0; i < loss_grid.size(); ++i) {
    const auto& l = loss_grid[i];
    if ((l.alpha != 0 && l.alpha != 1) || (l.beta != 0 && l.beta != 1))
      fail(ErrorCode::Config, "loss grid entries must be in {0,1}^2");
    for (std::size_t j = 0; j < i; ++j)
      if (loss_grid[j] == l) fail(ErrorCode::Config, "duplicate loss grid entry " + loss_label(l.alpha, l.beta));
  }
  const bool trainable = std::any_of(models.begin(), models.end(), [](auto m) { return m != GeneratorKind::independent; });
  if (trainable && loss_grid.empty()) fail(ErrorCode::Config, "trainable models need a non-empty loss grid");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) fail(ErrorCode::Config, "train_fraction must be in (0, 1)");
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
    fail(ErrorCode::Config, "holdout_fraction must be in (0, 1)");
  if (synth_rows && *synth_rows == 0) fail(ErrorCode::Config, "synth_rows must be positive");
  if (output_dir.empty()) fail(ErrorCode::Config, "output_dir is required");
  try {
    gan.validate();
    vae.validate();
  } catch (const Error& e) {
    fail(ErrorCode::Config, e.what());
  }
}

BenchConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  BenchConfig cfg;
  try {
    check_keys(doc,
               {"datasets", "models", "loss_grid", "seeds", "train_fraction", "holdout_fraction", "synth_rows",
                "learners", "output_dir", "checkpoints", "dwp_distance", "gan", "vae"},
               "config");
    for (const auto& d : doc.at("datasets")) {
      check_keys(d, {"name", "csv", "schema", "categorical_threshold", "target", "task"}, "dataset");
      DatasetSpec spec;
      spec.name = d.at("name").get<std::string>();
      spec.csv = resolve(base_dir, d.at("csv").get<std::string>());
      if (d.contains("schema")) spec.schema = resolve(base_dir, d.at("schema").get<std::string>());
      if (d.contains("categorical_threshold")) spec.categorical_threshold = d.at("categorical_threshold").get<std::size_t>();
      if (d.contains("target")) spec.target = d.at("target").get<std::string>();
      if (d.contains("task")) spec.task = task_from_string(d.at("task").get<std::string>());
      cfg.datasets.push_back(std::move(spec));
    }
    for (const auto& m : doc.at("models")) cfg.models.push_back(generator_kind_from_string(m.get<std::string>()));
    if (doc.contains("loss_grid")) {
      cfg.loss_grid.clear();
      for (const auto& l : doc.at("loss_grid")) {
        const auto pair = l.get<std::vector<int>>();
        if (pair.size() != 2) fail(ErrorCode::Config, "loss grid entries are [alpha, beta] pairs");
        cfg.loss_grid.push_back({pair[0], pair[1]});
      }
    }
    cfg.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
    if (doc.contains("train_fraction")) cfg.train_fraction = doc.at("train_fraction").get<double>();
    if (doc.contains("holdout_fraction")) cfg.holdout_fraction = doc.at("holdout_fraction").get<double>();
    if (doc.contains("synth_rows") && !doc.at("synth_rows").is_null())
      cfg.synth_rows = doc.at("synth_rows").get<std::size_t>();
    if (doc.contains("learners"))
      for (const auto& l : doc.at("learners")) cfg.learners.push_back(learner_kind_from_string(l.get<std::string>()));
    cfg.output_dir = resolve(base_dir, doc.at("output_dir").get<std::string>());
    if (doc.contains("checkpoints")) {
      cfg.checkpoints.clear();
      for (const auto& c : doc.at("checkpoints")) {
        const auto s = c.get<std::string>();
        if (s == "last") cfg.checkpoints.push_back(CheckpointPolicy::last);
        else if (s == "best_statistical" || s == "optimal") cfg.checkpoints.push_back(CheckpointPolicy::best_statistical);
        else fail(ErrorCode::Config, "unknown checkpoint policy '" + s + "'");
      }
    }
    if (doc.contains("dwp_distance")) {
      const auto s = doc.at("dwp_distance").get<std::string>();
      if (s == "perpendicular") cfg.dwp_mode = DiagonalDistance::perpendicular;
      else if (s == "vertical") cfg.dwp_mode = DiagonalDistance::vertical;
      else fail(ErrorCode::Config, "dwp_distance must be perpendicular or vertical");
    }
    if (doc.contains("gan")) cfg.gan = gan_from_json(doc.at("gan"));
    if (doc.contains("vae")) cfg.vae = vae_from_json(doc.at("vae"));
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, std::string("invalid config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) throw;
    fail(ErrorCode::Config, e.what());
  }
  cfg.validate();
  return cfg;
}

BenchConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open config '" + path.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(doc, path.parent_path());
}

// ---- results store ----------------------------------------------------------

std::string format_result_row(const ResultRow& r) {
  std::ostringstream out;
  csv::write_record(out, {r.run_id, r.dataset, r.model, r.loss_config, std::to_string(r.alpha), std::to_string(r.beta),
                          std::to_string(r.seed), r.checkpoint, r.evaluation, r.protocol, r.learner, r.metric,
                          r.column_or_pair, format_double(r.value), r.orientation});
  return out.str();
}

std::vector<ResultRow> read_results(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
  csv::Reader reader(in);
  csv::Record rec;
  if (!reader.next(rec)) fail(ErrorCode::Parse, "results file is empty");
  std::ostringstream header;
  csv::write_record(header, rec);
  if (header.str() != std::string(kResultsHeader) + "\n" && header.str() != std::string(kResultsHeader) + "\r\n")
    fail(ErrorCode::Parse, "unexpected results header");
  std::vector<ResultRow> rows;
  auto to_int = [&](const std::string& s, auto& out) {
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || p != s.data() + s.size())
      fail(ErrorCode::Parse, "bad number '" + s + "' on line " + std::to_string(reader.line()));
  };
  while (reader.next(rec)) {
    if (rec.size() == 1 && rec[0].empty()) continue;
    if (rec.size() != 15) fail(ErrorCode::Parse, "results line " + std::to_string(reader.line()) + " has wrong width");
    ResultRow r;
    r.run_id = rec[0];
    r.dataset = rec[1];
    r.model = rec[2];
    r.loss_config = rec[3];
    to_int(rec[4], r.alpha);
    to_int(rec[5], r.beta);
    to_int(rec[6], r.seed);
    r.checkpoint = rec[7];
    r.evaluation = rec[8];
    r.protocol = rec[9];
    r.learner = rec[10];
    r.metric = rec[11];
    r.column_or_pair = rec[12];
    to_int(rec[13], r.value);
    r.orientation = rec[14];
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_results(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
  std::string text = std::string(kResultsHeader) + "\n";
  for (const auto& r : rows) text += format_result_row(r);
  write_text_atomically(path, text);
}

std::vector<RunRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::vector<RunRecord> runs;
  try {
    json doc;
    in >> doc;
    for (const auto& r : doc.at("runs")) {
      RunRecord rec;
      rec.run_id = r.at("run_id").get<std::string>();
      rec.dataset = r.at("dataset").get<std::string>();
      rec.model = generator_kind_from_string(r.at("model").get<std::string>());
      rec.alpha = r.at("alpha").get<int>();
      rec.beta = r.at("beta").get<int>();
      rec.seed = r.at("seed").get<std::uint64_t>();
      const auto status = r.at("status").get<std::string>();
      rec.status = status == "done" ? RunStatus::done : status == "failed" ? RunStatus::failed : RunStatus::pending;
      rec.reason = r.value("reason", "");
      rec.wall_seconds = r.value("wall_seconds", 0.0);
      rec.audit_passed = r.value("audit_passed", false);
      rec.last_epoch = r.value("last_epoch", std::size_t{0});
      rec.optimal_epoch = r.value("optimal_epoch", std::size_t{0});
      runs.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("invalid manifest: ") + e.what());
  }
  return runs;
}

void write_manifest(const std::vector<RunRecord>& runs, const std::filesystem::path& path) {
  json list = json::array();
  for (const auto& r : runs) {
    list.push_back({{"run_id", r.run_id},
                    {"dataset", r.dataset},
                    {"model", to_string(r.model)},
                    {"alpha", r.alpha},
                    {"beta", r.beta},
                    {"seed", r.seed},
                    {"status", to_string(r.status)},
                    {"reason", r.reason},
                    {"wall_seconds", r.wall_seconds},
                    {"audit_passed", r.audit_passed},
                    {"last_epoch", r.last_epoch},
                    {"optimal_epoch", r.optimal_epoch}});
  }
  write_text_atomically(path, json{{"runs", std::move(list)}}.dump(2) + "\n");
}

// ---- planning and selection -------------------------------------------------

std::vector<RunRecord> plan_runs(const BenchConfig& cfg) {
  std::vector<RunRecord> runs;
  for (const auto& d : cfg.datasets) {
    for (const auto model : cfg.models) {
      const auto grid = model == GeneratorKind::independent ? std::vector<LossSetting>{{0, 0}} : cfg.loss_grid;
      for (const auto& loss : grid) {
        for (const auto seed : cfg.seeds) {
          RunRecord r;
          r.dataset = d.name;
          r.model = model;
          r.alpha = loss.alpha;
          r.beta = loss.beta;
          r.seed = seed;
          r.run_id = run_id_for(r);
          runs.push_back(std::move(r));
        }
      }
    }
  }
  return runs;
}

LeakageAudit audit_leakage(const std::vector<std::size_t>& test_ids,
                           const std::vector<std::vector<std::size_t>>& training_ids) {
  const std::set<std::size_t> test(test_ids.begin(), test_ids.end());
  std::set<std::size_t> overlap;
  for (const auto& ids : training_ids)
    for (std::size_t id : ids)
      if (test.count(id)) overlap.insert(id);
  return {overlap.empty(), {overlap.begin(), overlap.end()}};
}

std::size_t select_checkpoint(const std::vector<Checkpoint>& checkpoints, const std::vector<double>& scores,
                              CheckpointPolicy policy) {
  if (checkpoints.empty()) fail(ErrorCode::NoCheckpoints, "training produced no checkpoints");
  if (policy == CheckpointPolicy::last) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < checkpoints.size(); ++i)
      if (checkpoints[i].epoch > checkpoints[best].epoch) best = i;
    return best;
  }
  if (scores.size() != checkpoints.size()) fail(ErrorCode::DimensionMismatch, "one score per checkpoint is required");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] < scores[best] || (scores[i] == scores[best] && checkpoints[i].epoch < checkpoints[best].epoch))
      best = i;
  return best;
}

double selection_score(const Table& reference, const Table& synth, DiagonalDistance mode) {
  double sum = 0.0;
  double count = 0.0;
  for (std::size_t c = 0; c < reference.column_count(); ++c) {
    if (reference.schema[c].is_categorical()) {
      sum += chi_square(reference, synth, c).statistic / static_cast<double>(synth.row_count());
    } else {
      sum += ks_test(reference, synth, c).statistic;
    }
    count += 1.0;
  }
  sum += dwp(reference, synth, mode);
  sum += correlation_diff_score(reference, synth);
  return sum / (count + 2.0);
}

// ---- orchestration ----------------------------------------------------------

BenchSummary run_benchmark(const BenchConfig& cfg, const BenchOptions& options) {
  cfg.validate();
  std::filesystem::create_directories(cfg.output_dir);
  const auto results_path = cfg.output_dir / "results.csv";
  const auto manifest_path = cfg.output_dir / "manifest.json";

  BenchSummary summary;
  summary.runs = plan_runs(cfg);
  summary.planned = summary.runs.size();

  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < summary.runs.size(); ++i) position[summary.runs[i].run_id] = i;

  // Rows of completed runs, by plan position.
  std::vector<std::vector<ResultRow>> rows_by_run(summary.runs.size());
  if (options.resume && std::filesystem::exists(manifest_path)) {
    for (const auto& old : read_manifest(manifest_path)) {
      auto it = position.find(old.run_id);
      if (it != position.end() && old.status == RunStatus::done) summary.runs[it->second] = old;
    }
    if (std::filesystem::exists(results_path)) {
      for (auto& row : read_results(results_path)) {
        auto it = position.find(row.run_id);
        if (it != position.end() && summary.runs[it->second].status == RunStatus::done)
          rows_by_run[it->second].push_back(std::move(row));
      }
    }
  }

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < summary.runs.size(); ++i) {
    if (summary.runs[i].status == RunStatus::done) {
      ++summary.skipped;
    } else {
      summary.runs[i].status = RunStatus::pending;
      pending.push_back(i);
    }
  }

  std::map<std::string, Table> data;
  for (const auto& spec : cfg.datasets) {
    const bool needed = std::any_of(pending.begin(), pending.end(),
                                    [&](std::size_t i) { return summary.runs[i].dataset == spec.name; });
    if (needed) data.emplace(spec.name, load_dataset(spec).table);
  }

  auto flush_all = [&] {
    std::vector<ResultRow> all;
    for (const auto& rows : rows_by_run) all.insert(all.end(), rows.begin(), rows.end());
    write_results(all, results_path);
    write_manifest(summary.runs, manifest_path);
  };
  flush_all();

  // Workers finish in any order; outputs are flushed strictly in plan order so
  // the store does not depend on scheduling.
  std::mutex mutex;
  std::vector<std::optional<RunOutput>> finished(pending.size());
  std::size_t next_flush = 0;
  std::atomic<std::size_t> next_job{0};
  std::ofstream append(results_path, std::ios::binary | std::ios::app);
  if (!append) fail(ErrorCode::Io, "cannot append to '" + results_path.string() + "'");

  auto worker = [&] {
    for (;;) {
      const std::size_t j = next_job.fetch_add(1);
      if (j >= pending.size()) return;
      const std::size_t i = pending[j];
      RunOutput out = execute_run(cfg, data.at(summary.runs[i].dataset), summary.runs[i]);
      std::lock_guard lock(mutex);
      if (out.record.status == RunStatus::failed)
        warn("run " + out.record.run_id + " failed: " + out.record.reason);
      finished[j] = std::move(out);
      bool advanced = false;
      while (next_flush < pending.size() && finished[next_flush]) {
        auto& done = *finished[next_flush];
        const std::size_t slot = pending[next_flush];
        for (const auto& row : done.rows) append << format_result_row(row);
        summary.runs[slot] = done.record;
        rows_by_run[slot] = std::move(done.rows);
        ++summary.executed;
        if (done.record.status == RunStatus::failed) ++summary.failed;
        if (options.on_run_finished) options.on_run_finished(done.record);
        finished[next_flush].reset();
        ++next_flush;
        advanced = true;
      }
      if (advanced) {
        append.flush();
        write_manifest(summary.runs, manifest_path);
      }
    }
  };

  const std::size_t n_workers = std::clamp<std::size_t>(options.workers, 1, std::max<std::size_t>(1, pending.size()));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  append.close();
  // Canonical order after a resume: rows grouped by plan position.
  flush_all();
  return summary;
}

}  // namespace tabbench
