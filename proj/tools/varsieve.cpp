#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "varsieve/evaluation.hpp"
#include "varsieve/run_table.hpp"
#include "varsieve/screening.hpp"
#include "varsieve/synthbench.hpp"
#include "varsieve/trees.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace varsieve;

namespace {

struct PipelineConfig {
  std::string input;
  std::vector<std::string> objectives;
  std::map<std::string, DiscretizationSpec> discretize;
  LearnerSpec learner;
  Protocol protocol = Protocol::LeaveOneOut;
  double mae = 0.4;
  double rmse = 0.5;
  int max_rounds = 20;
  bool compare = false;
  std::string out = "varsieve-out";
};

void reject_unknown(const ordered_json& doc, const std::vector<std::string>& keys,
                    const std::string& where) {
  for (const auto& item : doc.items()) {
    if (std::find(keys.begin(), keys.end(), item.key()) == keys.end())
      throw Error("config: unknown key '" + item.key() + "' in " + where);
  }
}

DiscretizationSpec parse_discretize_spec(const ordered_json& doc,
                                         const std::string& objective) {
  reject_unknown(doc, {"method", "k", "thresholds", "labels"},
                 "discretize." + objective);
  DiscretizationSpec spec;
  if (doc.contains("method"))
    spec.method = parse_discretization_method(doc.at("method").get<std::string>());
  if (doc.contains("k")) spec.k = doc.at("k").get<int>();
  if (doc.contains("thresholds"))
    spec.thresholds = doc.at("thresholds").get<std::vector<double>>();
  if (doc.contains("labels"))
    spec.labels = doc.at("labels").get<std::vector<std::string>>();
  return spec;
}

LearnerSpec parse_learner_spec(const ordered_json& doc) {
  reject_unknown(doc,
                 {"kind", "sd_fraction", "min_instances", "min_leaf",
                  "max_expansions", "iterations", "z_clip", "weight_floor",
                  "max_splits"},
                 "learner");
  LearnerSpec spec;
  if (doc.contains("kind"))
    spec.kind = parse_learner_kind(doc.at("kind").get<std::string>());
  if (doc.contains("sd_fraction")) spec.sd_fraction = doc.at("sd_fraction").get<double>();
  if (doc.contains("min_instances")) spec.min_instances = doc.at("min_instances").get<int>();
  if (doc.contains("min_leaf")) spec.min_leaf = doc.at("min_leaf").get<int>();
  if (doc.contains("max_expansions")) spec.max_expansions = doc.at("max_expansions").get<int>();
  if (doc.contains("iterations")) spec.lad.iterations = doc.at("iterations").get<int>();
  if (doc.contains("z_clip")) spec.lad.z_clip = doc.at("z_clip").get<double>();
  if (doc.contains("weight_floor")) spec.lad.weight_floor = doc.at("weight_floor").get<double>();
  if (doc.contains("max_splits")) spec.max_splits = doc.at("max_splits").get<int>();
  return spec;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open '" + path + "'");
  ordered_json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw Error("config: invalid JSON in '" + path + "': " + e.what());
  }
  reject_unknown(doc,
                 {"input", "objectives", "discretize", "learner", "protocol",
                  "mae", "rmse", "max_rounds", "compare", "out"},
                 "config root");
  PipelineConfig config;
  if (doc.contains("input")) config.input = doc.at("input").get<std::string>();
  if (doc.contains("objectives"))
    config.objectives = doc.at("objectives").get<std::vector<std::string>>();
  if (doc.contains("discretize"))
    for (const auto& item : doc.at("discretize").items())
      config.discretize[item.key()] = parse_discretize_spec(item.value(), item.key());
  if (doc.contains("learner")) config.learner = parse_learner_spec(doc.at("learner"));
  if (doc.contains("protocol"))
    config.protocol = parse_protocol(doc.at("protocol").get<std::string>());
  if (doc.contains("mae")) config.mae = doc.at("mae").get<double>();
  if (doc.contains("rmse")) config.rmse = doc.at("rmse").get<double>();
  if (doc.contains("max_rounds")) config.max_rounds = doc.at("max_rounds").get<int>();
  if (doc.contains("compare")) config.compare = doc.at("compare").get<bool>();
  if (doc.contains("out")) config.out = doc.at("out").get<std::string>();
  return config;
}

// Flags shared by every data-driven subcommand. Presence is checked through
// the subcommand's count() so flags override the config only when given.
struct CommonFlags {
  std::string config_path;
  std::string input;
  std::string objectives;
  std::string learner;
  int iterations = 0;
  double mae = 0.0;
  double rmse = 0.0;
  std::string protocol;
  std::string out;
  bool canonical = false;
};

void add_common(CLI::App* sub, CommonFlags& flags) {
  sub->add_option("--config", flags.config_path, "JSON config file");
  sub->add_option("--input", flags.input, "run table (CSV or ARFF)");
  sub->add_option("--objectives", flags.objectives, "comma-separated objective columns");
  sub->add_option("--learner", flags.learner, "sdr | info-gain | best-first | ladtree");
  sub->add_option("--iterations", flags.iterations, "boosting iterations");
  sub->add_option("--mae", flags.mae, "MAE threshold");
  sub->add_option("--rmse", flags.rmse, "RMSE threshold");
  sub->add_option("--protocol", flags.protocol, "loo | training");
  sub->add_option("--out", flags.out, "output file or directory");
  sub->add_flag("--canonical", flags.canonical, "omit volatile fields from report JSON");
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream stream(text);
  std::string token;
  while (std::getline(stream, token, ','))
    if (!token.empty()) parts.push_back(token);
  return parts;
}

PipelineConfig resolve_config(const CLI::App* sub, const CommonFlags& flags) {
  PipelineConfig config;
  if (sub->count("--config")) config = load_config(flags.config_path);
  if (sub->count("--input")) config.input = flags.input;
  if (sub->count("--objectives")) config.objectives = split_commas(flags.objectives);
  if (sub->count("--learner"))
    config.learner.kind = parse_learner_kind(flags.learner);
  if (sub->count("--iterations")) config.learner.lad.iterations = flags.iterations;
  if (sub->count("--mae")) config.mae = flags.mae;
  if (sub->count("--rmse")) config.rmse = flags.rmse;
  if (sub->count("--protocol")) config.protocol = parse_protocol(flags.protocol);
  if (sub->count("--out")) config.out = flags.out;
  if (config.input.empty()) throw Error("config: no input file given");
  return config;
}

bool is_arff(const std::string& path) {
  return fs::path(path).extension() == ".arff";
}

RunTable load_input(const PipelineConfig& config) {
  RunTable table = is_arff(config.input)
                       ? load_arff(config.input)
                       : load_csv(config.input, config.objectives);
  for (const auto& [objective, spec] : config.discretize)
    table = discretize_objective(table, objective, spec);
  for (const std::string& warning : table.warnings())
    std::cerr << "warning: " << warning << "\n";
  return table;
}

std::vector<std::string> categorical_objectives(const RunTable& table,
                                                const PipelineConfig& config) {
  std::vector<std::string> names =
      config.objectives.empty() ? table.objective_names() : config.objectives;
  for (const std::string& name : names)
    if (!table.column(name).is_categorical())
      throw Error("objective '" + name +
                  "' is continuous; add a discretize spec for it");
  return names;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error("stage " + name + ": " + e.what());
  }
}

// The capacity knob for the round chosen by select_variables, mirrored here
// so the serialized model matches the ranking that was reported.
LearnerSpec capacity_spec(LearnerSpec spec, int round) {
  switch (spec.kind) {
    case LearnerKind::LadTree:
      spec.lad.iterations = round;
      break;
    case LearnerKind::BestFirst:
      spec.max_expansions = round;
      break;
    default:
      spec.max_splits = round;
      break;
  }
  return spec;
}

int run_ingest(const CLI::App* sub, const CommonFlags& flags) {
  PipelineConfig config = resolve_config(sub, flags);
  RunTable table = stage("ingest", [&] { return load_input(config); });
  std::cout << config.input << ": " << table.n_runs() << " runs, "
            << table.variable_count() << " variables, "
            << table.objective_count() << " objectives\n";
  if (sub->count("--out")) {
    if (is_arff(config.out))
      save_arff(table, config.out);
    else
      save_csv(table, config.out);
    std::cout << "wrote " << config.out << "\n";
  }
  return 0;
}

int run_discretize(const CLI::App* sub, const CommonFlags& flags) {
  PipelineConfig config = resolve_config(sub, flags);
  if (config.discretize.empty())
    throw Error("stage discretize: no discretize specs in config");
  RunTable table = stage("discretize", [&] { return load_input(config); });
  if (!sub->count("--out")) throw Error("stage discretize: --out required");
  if (is_arff(config.out))
    save_arff(table, config.out);
  else
    save_csv(table, config.out);
  std::cout << "wrote " << config.out << "\n";
  return 0;
}

int run_train(const CLI::App* sub, const CommonFlags& flags) {
  PipelineConfig config = resolve_config(sub, flags);
  RunTable table = stage("load", [&] { return load_input(config); });
  std::vector<std::string> names = categorical_objectives(table, config);
  if (names.size() != 1) throw Error("stage train: exactly one objective required");
  TreeModel model =
      stage("train", [&] { return train(table, names[0], config.learner); });
  std::cout << to_string(model.kind) << " on " << names[0] << ": "
            << model.nodes.size() << " nodes, " << model.gain_log.size()
            << " splits\n";
  if (sub->count("--out")) write_text(config.out, model_to_json(model).dump(2) + "\n");
  return 0;
}

int run_evaluate(const CLI::App* sub, const CommonFlags& flags) {
  PipelineConfig config = resolve_config(sub, flags);
  RunTable table = stage("load", [&] { return load_input(config); });
  std::vector<std::string> names = categorical_objectives(table, config);
  for (const std::string& objective : names) {
    EvaluationResult result = stage("evaluate", [&] {
      return evaluate(config.learner, table, objective, config.protocol);
    });
    std::cout << objective << " " << to_string(config.learner.kind) << " ("
              << to_string(result.protocol) << "): MAE " << result.mae
              << ", RMSE " << result.rmse << "\n";
    if (sub->count("--out"))
      write_text(config.out, evaluation_to_json(result).dump(2) + "\n");
  }
  return 0;
}

int run_rank(const CLI::App* sub, const CommonFlags& flags) {
  PipelineConfig config = resolve_config(sub, flags);
  RunTable table = stage("load", [&] { return load_input(config); });
  std::vector<std::string> names = categorical_objectives(table, config);
  if (names.size() != 1) throw Error("stage rank: exactly one objective required");
  ImportanceRanking ranking = stage("rank", [&] {
    return rank_variables(train(table, names[0], config.learner));
  });
  for (const ImportanceEntry& entry : ranking.entries)
    std::cout << entry.variable << "  score=" << entry.score
              << "  first_use=" << entry.first_use << "\n";
  if (sub->count("--out"))
    write_text(config.out, ranking_to_json(ranking).dump(2) + "\n");
  return 0;
}

int run_select(const CLI::App* sub, const CommonFlags& flags) {
  PipelineConfig config = resolve_config(sub, flags);
  RunTable table = stage("load", [&] { return load_input(config); });
  std::vector<std::string> names = categorical_objectives(table, config);
  if (names.size() != 1) throw Error("stage select: exactly one objective required");
  ImportanceRanking ranking = stage("select", [&] {
    return select_variables(table, names[0], config.learner, config.mae,
                            config.rmse, config.max_rounds);
  });
  std::cout << names[0] << ": " << ranking.entries.size() << " variables in "
            << ranking.rounds_used << " rounds (MAE " << ranking.mae << ", RMSE "
            << ranking.rmse << ", threshold "
            << (ranking.threshold_met ? "met" : "not met") << ")\n";
  if (sub->count("--out"))
    write_text(config.out, ranking_to_json(ranking).dump(2) + "\n");
  return 0;
}

std::vector<ImportanceRanking> load_rankings(const std::vector<std::string>& paths) {
  if (paths.empty()) throw Error("no ranking files given");
  std::vector<ImportanceRanking> rankings;
  for (const std::string& path : paths) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open ranking '" + path + "'");
    ordered_json doc;
    in >> doc;
    rankings.push_back(ranking_from_json(doc));
  }
  return rankings;
}

int run_reduce(const CLI::App* sub, const CommonFlags& flags,
               const std::vector<std::string>& ranking_paths) {
  PipelineConfig config = resolve_config(sub, flags);
  RunTable table = stage("load", [&] { return load_input(config); });
  RunTable reduced = stage("reduce", [&] {
    return reduce_dataset(table, load_rankings(ranking_paths));
  });
  if (!sub->count("--out")) throw Error("stage reduce: --out required");
  save_csv(reduced, config.out);
  std::cout << "wrote " << config.out << " (" << reduced.variable_count()
            << " of " << table.variable_count() << " variables)\n";
  return 0;
}

int run_report(const CLI::App* sub, const CommonFlags& flags,
               const std::vector<std::string>& ranking_paths) {
  PipelineConfig config = resolve_config(sub, flags);
  RunTable table = stage("load", [&] { return load_input(config); });
  ScreeningReport report = stage("report", [&] {
    return build_report(table, load_rankings(ranking_paths), 0.0);
  });
  std::cout << report_to_text(report);
  if (sub->count("--out"))
    write_text(config.out,
               report_to_json(report, flags.canonical).dump(2) + "\n");
  return 0;
}

struct SynthFlags {
  PlantedSpec spec;
  std::string family = "linear-threshold";
  std::string effective = "1";
  std::string out = "synth.csv";
  std::string truth_out;
  int n_runs = 12;
};

void add_synth(CLI::App* sub, SynthFlags& flags) {
  sub->add_option("--n-vars", flags.spec.n_vars, "variable count");
  sub->add_option("--effective", flags.effective, "comma-separated 1-based indices");
  sub->add_option("--family", flags.family,
                  "linear-threshold | interaction-xor | quadratic-radial");
  sub->add_option("--noise", flags.spec.noise_rate, "label flip fraction");
  sub->add_option("--k", flags.spec.k, "class count");
  sub->add_option("--runs", flags.n_runs, "run count");
  sub->add_option("--seed", flags.spec.seed, "RNG seed");
  sub->add_option("--out", flags.out, "output CSV/ARFF path");
  sub->add_option("--truth", flags.truth_out, "write ground-truth JSON here");
}

int run_synth(SynthFlags& flags) {
  PlantedSpec spec = flags.spec;
  spec.family = parse_planted_family(flags.family);
  for (const std::string& token : split_commas(flags.effective))
    spec.effective.push_back(std::stoi(token));
  if (const char* env = std::getenv("VARSIEVE_SEED"))
    spec.seed = std::strtoull(env, nullptr, 10);
  PlantedTable planted =
      stage("synth", [&] { return generate(spec, static_cast<std::size_t>(flags.n_runs)); });
  if (is_arff(flags.out))
    save_arff(planted.table, flags.out);
  else
    save_csv(planted.table, flags.out);
  if (!flags.truth_out.empty()) {
    ordered_json truth;
    truth["effective"] = planted.effective;
    truth["seed"] = spec.seed;
    write_text(flags.truth_out, truth.dump(2) + "\n");
  }
  std::cout << "wrote " << flags.out << " (" << flags.n_runs << " runs, "
            << spec.n_vars << " variables, truth " << planted.effective.size()
            << " effective)\n";
  return 0;
}

int run_pipeline(const CLI::App* sub, const CommonFlags& flags) {
  auto started = std::chrono::steady_clock::now();
  PipelineConfig config = resolve_config(sub, flags);
  RunTable table = stage("load", [&] { return load_input(config); });
  std::vector<std::string> names = categorical_objectives(table, config);
  if (names.empty()) throw Error("stage load: no objectives found");

  if (config.compare) {
    std::vector<LearnerSpec> contenders(4, config.learner);
    contenders[0].kind = LearnerKind::Sdr;
    contenders[1].kind = LearnerKind::InfoGain;
    contenders[2].kind = LearnerKind::BestFirst;
    contenders[3].kind = LearnerKind::LadTree;
    for (const std::string& objective : names) {
      auto scores = stage("compare", [&] {
        return compare_learners(table, objective, contenders, config.protocol);
      });
      for (const LearnerScore& score : scores) {
        std::cout << objective << "  " << to_string(score.kind) << "  ";
        if (score.failed)
          std::cout << "failed: " << score.error << "\n";
        else
          std::cout << "MAE " << score.result.mae << "  RMSE "
                    << score.result.rmse << (score.winner ? "  *" : "") << "\n";
      }
    }
  }

  std::vector<ImportanceRanking> rankings;
  std::vector<TreeModel> models;
  for (const std::string& objective : names) {
    ImportanceRanking ranking = stage("select", [&] {
      return select_variables(table, objective, config.learner, config.mae,
                              config.rmse, config.max_rounds);
    });
    models.push_back(stage("select", [&] {
      return train(table, objective,
                   capacity_spec(config.learner, ranking.rounds_used));
    }));
    rankings.push_back(std::move(ranking));
  }

  RunTable reduced = stage("reduce", [&] { return reduce_dataset(table, rankings); });
  double seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - started)
                       .count();
  ScreeningReport report =
      stage("report", [&] { return build_report(table, rankings, seconds); });

  fs::create_directories(config.out);
  std::vector<std::string> written;
  try {
    std::string report_path = (fs::path(config.out) / "report.json").string();
    written.push_back(report_path);
    write_text(report_path,
               report_to_json(report, flags.canonical).dump(2) + "\n");
    std::string reduced_path = (fs::path(config.out) / "reduced.csv").string();
    written.push_back(reduced_path);
    save_csv(reduced, reduced_path);
    for (std::size_t i = 0; i < names.size(); ++i) {
      std::string model_path =
          (fs::path(config.out) / ("model_" + names[i] + ".json")).string();
      written.push_back(model_path);
      write_text(model_path, model_to_json(models[i]).dump(2) + "\n");
    }
  } catch (const Error& e) {
    for (const std::string& path : written) {
      std::error_code ec;
      fs::remove(path, ec);
    }
    throw Error("stage write: " + std::string(e.what()));
  }

  std::cout << report_to_text(report);
  std::cout << "artifacts in " << config.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"variable screening for simulation run tables"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::vector<std::string> ranking_paths;

  CLI::App* ingest = app.add_subcommand("ingest", "load a run table and summarize it");
  CLI::App* discretize = app.add_subcommand("discretize", "bin continuous objectives");
  CLI::App* train_cmd = app.add_subcommand("train", "train one classifier");
  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "score a learner");
  CLI::App* rank = app.add_subcommand("rank", "variable importance of one model");
  CLI::App* select = app.add_subcommand("select", "threshold-driven variable selection");
  CLI::App* reduce = app.add_subcommand("reduce", "project onto effective variables");
  CLI::App* report = app.add_subcommand("report", "build a screening report from rankings");
  CLI::App* synth = app.add_subcommand("synth", "generate a planted benchmark table");
  CLI::App* pipeline = app.add_subcommand("pipeline", "full screening pipeline");

  for (CLI::App* sub : {ingest, discretize, train_cmd, evaluate_cmd, rank, select,
                        reduce, report, pipeline})
    add_common(sub, flags);
  reduce->add_option("rankings", ranking_paths, "ranking JSON files");
  report->add_option("rankings", ranking_paths, "ranking JSON files");
  SynthFlags synth_flags;
  add_synth(synth, synth_flags);

  try {
    app.parse(argc, argv);
    if (synth->parsed()) return run_synth(synth_flags);
    if (ingest->parsed()) return run_ingest(ingest, flags);
    if (discretize->parsed()) return run_discretize(discretize, flags);
    if (train_cmd->parsed()) return run_train(train_cmd, flags);
    if (evaluate_cmd->parsed()) return run_evaluate(evaluate_cmd, flags);
    if (rank->parsed()) return run_rank(rank, flags);
    if (select->parsed()) return run_select(select, flags);
    if (reduce->parsed()) return run_reduce(reduce, flags, ranking_paths);
    if (report->parsed()) return run_report(report, flags, ranking_paths);
    if (pipeline->parsed()) return run_pipeline(pipeline, flags);
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
