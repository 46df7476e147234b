// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: dataset generation, training, evaluation, sweeps,
// beampatterns, pruning studies, and overhead reports.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "isac/baselines.hpp"
#include "isac/channel.hpp"
#include "isac/federate.hpp"
#include "isac/harness.hpp"
#include "isac/io.hpp"
#include "isac/metrics.hpp"
#include "isac/mlp.hpp"

namespace {

using namespace isac;

std::string read_text(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

ExperimentSpec load_spec(const std::string& config_path, const std::string& profile) {
  ExperimentSpec spec =
      config_path.empty() ? profile_by_name(profile.empty() ? "desk" : profile)
                          : spec_from_json_text(read_text(config_path));
  if (!profile.empty() && !config_path.empty()) {
    // profile flag overrides the budget/scale fields of the config
    ExperimentSpec base = profile_by_name(profile);
    spec.budget = base.budget;
    spec.n_train = base.n_train;
    spec.n_test = base.n_test;
  }
  return spec;
}

std::vector<MlpModel> load_models(const std::vector<std::string>& paths, int cells) {
  if (paths.empty()) throw std::runtime_error("no model files given");
  std::vector<MlpModel> models;
  for (const auto& p : paths) models.push_back(MlpModel::load(p));
  if (static_cast<int>(models.size()) == 1 && cells > 1)
    models.assign(cells, models[0]);  // shared global model
  if (static_cast<int>(models.size()) != cells)
    throw std::runtime_error("need 1 or M model files, got " + std::to_string(paths.size()));
  return models;
}

int cmd_gen_data(const std::string& config, const std::string& profile, const std::string& out,
                 int samples, std::uint64_t seed, double snr_db) {
  ExperimentSpec spec = load_spec(config, profile);
  NetworkConfig cfg = spec.scenario;
  if (snr_db != -1e9) cfg.set_snr_db(snr_db);
  const Dataset ds = generate_dataset(cfg, samples, seed);
  save_dataset(ds, out);
  const Dataset echo = load_dataset(out);
  std::cout << "dataset: M=" << echo.cfg.cells << " K=" << echo.cfg.users_per_cell
            << " N_T=" << echo.cfg.tx_antennas << " N_R=" << echo.cfg.rx_antennas
            << " samples=" << echo.samples.size() << " seed=" << echo.seed
            << " snr_db=" << echo.cfg.snr_db() << " file=" << out << "\n";
  return 0;
}

int cmd_train(const std::string& config, const std::string& profile, const std::string& protocol,
              const std::string& data_path, const std::string& out_dir) {
  ExperimentSpec spec = load_spec(config, profile);
  Dataset train;
  if (!data_path.empty()) {
    train = load_dataset(data_path);
    spec.scenario = train.cfg;
    spec.hp.rho = train.cfg.rho;
  } else {
    Rng seeds = Rng(spec.hp.seed).fork2(0xDA7A, 0);
    train = generate_dataset(spec.scenario, spec.n_train, seeds.fork(1).key());
  }
  ensure_dir(out_dir);

  std::ofstream log(out_dir + "/train_log.csv", std::ios::trunc);
  log << "round,loss,r_comm,r_sense,complex_up,bits_up,wall_seconds\n";
  TrainLogSink sink = [&log](const TrainLogRow& r) {
    char b[256];
    std::snprintf(b, sizeof b, "%llu,%.10g,%.10g,%.10g,%llu,%llu,%.3f\n",
                  static_cast<unsigned long long>(r.round), r.loss, r.r_comm, r.r_sense,
                  static_cast<unsigned long long>(r.complex_up),
                  static_cast<unsigned long long>(r.bits_up), r.wall_seconds);
    log << b;
  };

  TrainedMethod tm;
  if (protocol == "vfl") {
    tm = train_vfl(spec.scenario, train, spec.hp, spec.budget.vfl_steps, spec.hidden_dim,
                   spec.n_hidden, sink);
    for (std::size_t m = 0; m < tm.models.size(); ++m)
      tm.models[m].save(out_dir + "/model_bs" + std::to_string(m) + ".bin");
  } else if (protocol == "hfl") {
    tm = train_hfl(spec.scenario, train, spec.hp, spec.budget.hfl_rounds,
                   spec.budget.hfl_local_epochs, spec.hidden_dim, spec.n_hidden, sink);
    tm.models[0].save(out_dir + "/model_global.bin");
  } else if (protocol == "percell") {
    tm = train_percell(spec.scenario, train, spec.hp, spec.budget.percell_steps, spec.hidden_dim,
                       spec.n_hidden);
    for (std::size_t m = 0; m < tm.models.size(); ++m)
      tm.models[m].save(out_dir + "/model_bs" + std::to_string(m) + ".bin");
  } else {
    throw std::runtime_error("unknown protocol: " + protocol + " (vfl|hfl|percell)");
  }
  write_text_file(out_dir + "/overhead.txt",
                  tm.ledger.report(spec.scenario,
                                   static_cast<std::uint64_t>(tm.models[0].parameter_bits())));
  std::cout << "trained " << protocol << ": models and train_log.csv in " << out_dir << "\n";
  return 0;
}

int cmd_eval(const std::vector<std::string>& model_paths, const std::string& data_path,
             bool serving_only, const std::string& out_csv) {
  const Dataset test = load_dataset(data_path);
  const auto models = load_models(model_paths, test.cfg.cells);
  const EvalStats ev = evaluate_models(test.cfg, test, models, serving_only);
  std::ostringstream os;
  os << "r_comm=" << ev.r_comm << " r_sense=" << ev.r_sense << " cil=" << ev.cil_mean
     << " sil=" << ev.sil_mean << " n_test=" << test.samples.size() << "\n";
  std::cout << os.str();
  if (!out_csv.empty()) {
    std::ostringstream csv;
    csv << "r_comm,r_sense,cil_mean,sil_mean,n_test\n"
        << ev.r_comm << ',' << ev.r_sense << ',' << ev.cil_mean << ',' << ev.sil_mean << ','
        << test.samples.size() << "\n";
    write_text_file(out_csv, csv.str());
  }
  return 0;
}

int cmd_sweep(const std::string& config, const std::string& profile, const std::string& out_dir) {
  ExperimentSpec spec = load_spec(config, profile);
  if (!out_dir.empty()) spec.output_dir = out_dir;
  if (spec.output_dir.empty()) throw std::runtime_error("sweep: output_dir required");
  const ExperimentResult res = run_experiment(spec);
  std::cout << "sweep: " << res.rows.size() << " rows, " << res.written_files.size()
            << " files under " << spec.output_dir << "\n";
  return 0;
}

int cmd_beampattern(const std::vector<std::string>& model_paths, const std::string& baseline,
                    const std::string& data_path, int bs, double step_deg,
                    const std::string& out) {
  const Dataset test = load_dataset(data_path);
  const NetworkConfig& cfg = test.cfg;
  BeamformerFn fn;
  std::vector<MlpModel> models;
  if (!model_paths.empty()) {
    models = load_models(model_paths, cfg.cells);
    fn = [&cfg, &models](const ChannelSample& s) { return models_beamform(cfg, models, s); };
  } else if (baseline == "mrt") {
    fn = [&cfg](const ChannelSample& s) { return mrt(s, cfg); };
  } else if (baseline == "imt") {
    fn = [&cfg](const ChannelSample& s) { return imt(s, cfg).beams; };
  } else if (baseline == "cbf") {
    fn = [&cfg](const ChannelSample& s) { return cbf(s, cfg); };
  } else if (baseline == "wmmse") {
    fn = [&cfg](const ChannelSample& s) { return wmmse(s, cfg).beams; };
  } else {
    throw std::runtime_error("beampattern: give --model or a known --baseline");
  }
  write_text_file(out, beampattern_csv(cfg, test, fn, bs, step_deg));
  std::cout << "beampattern written to " << out << "\n";
  return 0;
}

int cmd_prune_study(const std::vector<std::string>& model_paths, const std::string& data_path,
                    const std::vector<double>& factors, const std::string& out) {
  const Dataset test = load_dataset(data_path);
  const auto base = load_models(model_paths, test.cfg.cells);
  std::ostringstream csv;
  csv << "factor,r_comm,r_sense,parameter_count\n";
  for (double f : factors) {
    auto pruned = base;
    for (auto& m : pruned) m.prune(f);
    const EvalStats ev = evaluate_models(test.cfg, test, pruned);
    csv << f << ',' << ev.r_comm << ',' << ev.r_sense << ',' << pruned[0].parameter_count()
        << "\n";
  }
  write_text_file(out, csv.str());
  std::cout << "prune study written to " << out << "\n";
  return 0;
}

int cmd_overhead_report(const std::string& config, const std::string& profile,
                        std::uint64_t rounds) {
  ExperimentSpec spec = load_spec(config, profile);
  const NetworkConfig& c = spec.scenario;
  const MlpConfig arch = mlp_config_for(c, spec.hidden_dim, spec.n_hidden);
  const MlpModel model = MlpModel::init(arch, 1);
  const auto bits = static_cast<std::uint64_t>(model.parameter_bits());
  const std::uint64_t m = c.cells, k = c.users_per_cell, nt = c.tx_antennas;
  std::cout << "scenario: M=" << m << " K=" << k << " N_T=" << nt << " T=" << rounds
            << " B=" << bits << " (64-bit parameters: " << model.parameter_count() << ")\n";
  std::cout << "vfl training complex values  = (M^2+M)*T*K*N_T = "
            << vfl_training_complex_values(m, k, nt, rounds) << "\n";
  std::cout << "hfl training bits            = 2*M*B*T         = "
            << hfl_training_bits(m, bits, rounds) << "\n";
  std::cout << "wmmse deployment complex     = M^2*K*N_T       = "
            << wmmse_deployment_complex_values(m, k, nt) << "\n";
  std::cout << "forward flops                = "
            << estimate_complexity(c, spec.hidden_dim, spec.n_hidden, ComplexityPhase::Forward)
            << "\n";
  std::cout << "training flops (per sample)  = "
            << estimate_complexity(c, spec.hidden_dim, spec.n_hidden, ComplexityPhase::Training)
            << "\n";
  std::cout << "wmmse flops (100 iters)      = "
            << estimate_complexity(c, spec.hidden_dim, spec.n_hidden,
                                   ComplexityPhase::WmmseDeployment)
            << "\n";
  std::cout << "note: model-averaging rounds to accuracy eps scale as "
               "O[(1/eps)((1+1/K)EG^2 + (Gamma+G^2)/E + G^2)] (documented constant only)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"isac: multi-cell ISAC coordinated beamforming simulator"};
  app.require_subcommand(1);

  std::string config, profile, out, out_dir, data_path, protocol, baseline;
  std::vector<std::string> model_paths;
  std::vector<double> factors{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  int samples = 2000, bs = 0;
  std::uint64_t seed = 1, rounds = 1000;
  double snr_db = -1e9, step_deg = 0.1;
  bool serving_only = false;

  auto* gen = app.add_subcommand("gen-data", "generate a channel dataset file");
  gen->add_option("--config", config, "JSON experiment config");
  gen->add_option("--profile", profile, "profile: desk|smoke|paper");
  gen->add_option("--out", out, "output dataset file")->required();
  gen->add_option("--samples", samples, "number of channel samples");
  gen->add_option("--seed", seed, "dataset seed");
  gen->add_option("--snr-db", snr_db, "override SNR in dB");

  auto* tr = app.add_subcommand("train", "train one protocol and save checkpoints");
  tr->add_option("--config", config, "JSON experiment config");
  tr->add_option("--profile", profile, "profile: desk|smoke|paper");
  tr->add_option("--protocol", protocol, "vfl|hfl|percell")->required();
  tr->add_option("--data", data_path, "training dataset file (generated if omitted)");
  tr->add_option("--out-dir", out_dir, "output directory")->required();

  auto* ev = app.add_subcommand("eval", "evaluate model checkpoints on a dataset");
  ev->add_option("--model", model_paths, "model checkpoint(s): one shared or M per-BS")
      ->required();
  ev->add_option("--data", data_path, "test dataset file")->required();
  ev->add_flag("--serving-only", serving_only, "per-cell input encoding");
  ev->add_option("--out", out, "optional output CSV");

  auto* sw = app.add_subcommand("sweep", "run a full experiment sweep");
  sw->add_option("--config", config, "JSON experiment config")->required();
  sw->add_option("--profile", profile, "override profile budgets");
  sw->add_option("--out-dir", out_dir, "override output directory");

  auto* bp = app.add_subcommand("beampattern", "emit a peak-normalized beampattern CSV");
  bp->add_option("--model", model_paths, "model checkpoint(s)");
  bp->add_option("--baseline", baseline, "mrt|imt|cbf|wmmse");
  bp->add_option("--data", data_path, "dataset file")->required();
  bp->add_option("--bs", bs, "BS index");
  bp->add_option("--step-deg", step_deg, "grid step in degrees");
  bp->add_option("--out", out, "output CSV")->required();

  auto* pr = app.add_subcommand("prune-study", "evaluate magnitude-pruned model copies");
  pr->add_option("--model", model_paths, "model checkpoint(s)")->required();
  pr->add_option("--data", data_path, "test dataset file")->required();
  pr->add_option("--factors", factors, "pruning factors");
  pr->add_option("--out", out, "output CSV")->required();

  auto* oh = app.add_subcommand("overhead-report", "print exchange/complexity figures");
  oh->add_option("--config", config, "JSON experiment config");
  oh->add_option("--profile", profile, "profile: desk|smoke|paper");
  oh->add_option("--rounds", rounds, "training rounds T");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_data(config, profile, out, samples, seed, snr_db);
    if (tr->parsed()) return cmd_train(config, profile, protocol, data_path, out_dir);
    if (ev->parsed()) return cmd_eval(model_paths, data_path, serving_only, out);
    if (sw->parsed()) return cmd_sweep(config, profile, out_dir);
    if (bp->parsed()) return cmd_beampattern(model_paths, baseline, data_path, bs, step_deg, out);
    if (pr->parsed()) return cmd_prune_study(model_paths, data_path, factors, out);
    if (oh->parsed()) return cmd_overhead_report(config, profile, rounds);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
