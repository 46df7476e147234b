// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#include "isac/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "isac/io.hpp"

namespace isac {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt_g(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.10g", v);
  return b;
}

}  // namespace

void ExperimentSpec::validate() const {
  scenario.validate();
  if (sweep_values.empty()) throw std::invalid_argument("spec: sweep values must be nonempty");
  if (methods.empty()) throw std::invalid_argument("spec: method list must be nonempty");
  static const std::vector<std::string> axes = {"snr_db", "n_t", "rho", "prune_factor", "none"};
  if (std::find(axes.begin(), axes.end(), sweep_axis) == axes.end())
    throw std::invalid_argument("spec: unknown sweep axis '" + sweep_axis + "'");
  static const std::vector<std::string> known = {"vfl", "hfl", "percell", "wmmse",
                                                 "mrt", "imt", "cbf"};
  for (const auto& m : methods)
    if (std::find(known.begin(), known.end(), m) == known.end())
      throw std::invalid_argument("spec: unknown method '" + m + "'");
  if (sweep_axis == "prune_factor")
    for (double v : sweep_values)
      if (v < 0.0 || v > 1.0)
        throw std::invalid_argument("spec: prune factors must lie in [0, 1]");
  if (n_train < 1 || n_test < 1) throw std::invalid_argument("spec: dataset sizes must be >= 1");
}

std::vector<CMat> models_beamform(const NetworkConfig& cfg, const std::vector<MlpModel>& models,
                                  const ChannelSample& sample, bool serving_only) {
  std::vector<CMat> beams(cfg.cells);
  for (int m = 0; m < cfg.cells; ++m) {
    const auto x = encode_for_bs(cfg, sample, m, serving_only);
    beams[m] = models[m].forward_eval(x, cfg.tx_power, cfg.tx_antennas, cfg.users_per_cell);
  }
  return beams;
}

namespace {

EvalStats reduce_eval(const NetworkConfig& cfg, const Dataset& test,
                      const std::vector<std::vector<CMat>>& beams_per_sample) {
  const int n = static_cast<int>(test.samples.size());
  std::vector<double> rc(n), rs(n), ci(n), si(n);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < n; ++r) {
    const NetworkState st{cfg, test.samples[r], beams_per_sample[r]};
    rc[r] = sum_comm_rate(st);
    rs[r] = sum_radar_rate(st);
    double c = 0.0, s = 0.0;
    for (int m = 0; m < cfg.cells; ++m) {
      c += cil(st, m);
      s += sil(st, m);
    }
    ci[r] = c;
    si[r] = s;
  }
  EvalStats out;
  for (int r = 0; r < n; ++r) {
    out.r_comm += rc[r];
    out.r_sense += rs[r];
    out.cil_mean += ci[r];
    out.sil_mean += si[r];
  }
  out.r_comm /= n;
  out.r_sense /= n;
  out.cil_mean /= n;
  out.sil_mean /= n;
  return out;
}

}  // namespace

EvalStats evaluate_fn(const NetworkConfig& cfg, const Dataset& test, const BeamformerFn& fn) {
  const int n = static_cast<int>(test.samples.size());
  std::vector<std::vector<CMat>> beams(n);
#pragma omp parallel for schedule(dynamic, 4)
  for (int r = 0; r < n; ++r) beams[r] = fn(test.samples[r]);
  return reduce_eval(cfg, test, beams);
}

EvalStats evaluate_models(const NetworkConfig& cfg, const Dataset& test,
                          const std::vector<MlpModel>& models, bool serving_only) {
  if (static_cast<int>(models.size()) != cfg.cells)
    throw std::invalid_argument("evaluate_models: need one model per BS");
  const int n = static_cast<int>(test.samples.size());
  const int in_dim = models[0].config().input_dim;
  std::vector<std::vector<CMat>> beams(n, std::vector<CMat>(cfg.cells));
  std::vector<double> x(static_cast<std::size_t>(n) * in_dim);
  for (int m = 0; m < cfg.cells; ++m) {
    for (int r = 0; r < n; ++r) {
      const auto enc = encode_for_bs(cfg, test.samples[r], m, serving_only);
      std::copy(enc.begin(), enc.end(), x.begin() + static_cast<std::size_t>(r) * in_dim);
    }
    ForwardBatch rec;
    models[m].forward_batch(x.data(), n, cfg.tx_power, cfg.tx_antennas, cfg.users_per_cell,
                            RunMode::Eval, nullptr, rec);
    for (int r = 0; r < n; ++r) beams[r][m] = std::move(rec.w_out[r]);
  }
  return reduce_eval(cfg, test, beams);
}

TrainedMethod train_vfl(const NetworkConfig& cfg, const Dataset& train, const TrainHyper& hp,
                        int steps, int hidden_dim, int n_hidden, const TrainLogSink& log) {
  const auto t0 = Clock::now();
  const MlpConfig arch = mlp_config_for(cfg, hidden_dim, n_hidden);
  VflSession sess(cfg, arch, hp, steps);
  const int n = static_cast<int>(train.samples.size());
  const int batch = std::min(hp.batch, n);
  const int steps_per_epoch = std::max(1, n / batch);
  Rng base(hp.seed);
  std::vector<int> order;
  int in_epoch = 0, epoch = 0;
  for (int s = 0; s < steps; ++s) {
    if (in_epoch == 0) {
      Rng order_rng = base.fork2(0x0E, static_cast<std::uint64_t>(epoch));
      order = shuffled_indices(n, order_rng);
    }
    const std::span<const int> idx(order.data() + static_cast<std::size_t>(in_epoch) * batch,
                                   batch);
    const RoundStats st = sess.round(train, idx);
    if (log)
      log({sess.rounds_done(), st.loss, st.r_comm, st.r_sense, sess.ledger().complex_up,
           sess.ledger().bits_up, seconds_since(t0)});
    if (++in_epoch >= steps_per_epoch) {
      in_epoch = 0;
      ++epoch;
    }
  }
  return {sess.models(), sess.ledger()};
}

TrainedMethod train_hfl(const NetworkConfig& cfg, const Dataset& train, const TrainHyper& hp,
                        int rounds, int local_epochs, int hidden_dim, int n_hidden,
                        const TrainLogSink& log) {
  const auto t0 = Clock::now();
  const MlpConfig arch = mlp_config_for(cfg, hidden_dim, n_hidden);
  HflSession sess(cfg, arch, hp, rounds, local_epochs);
  for (int r = 0; r < rounds; ++r) {
    const RoundStats st = sess.round(train);
    if (log)
      log({sess.rounds_done(), st.loss, st.r_comm, st.r_sense, sess.ledger().complex_up,
           sess.ledger().bits_up, seconds_since(t0)});
  }
  TrainedMethod out;
  out.models.assign(cfg.cells, sess.global_model());
  out.ledger = sess.ledger();
  return out;
}

TrainedMethod train_percell(const NetworkConfig& cfg, const Dataset& train, const TrainHyper& hp,
                            int steps, int hidden_dim, int n_hidden) {
  PerCellTrainOptions opts;
  opts.hp = hp;
  opts.steps = steps;
  opts.hidden_dim = hidden_dim;
  opts.n_hidden = n_hidden;
  TrainedMethod out;
  out.models = per_cell_dl_train(train, cfg, hp.rho, opts);
  out.ledger.flops_forward =
      estimate_complexity(cfg, hidden_dim, n_hidden, ComplexityPhase::Forward);
  out.ledger.flops_training =
      estimate_complexity(cfg, hidden_dim, n_hidden, ComplexityPhase::Training);
  return out;
}

namespace {

struct PointFile {
  std::string name;
  std::string text;                 // one of text/bytes is used
  std::vector<std::uint8_t> bytes;
  bool binary = false;
};

struct PointOutcome {
  std::vector<ResultRow> rows;
  std::vector<PointFile> files;
};

NetworkConfig scenario_for(const ExperimentSpec& spec, double value) {
  NetworkConfig cfg = spec.scenario;
  if (spec.sweep_axis == "snr_db") cfg.set_snr_db(value);
  if (spec.sweep_axis == "n_t") cfg.tx_antennas = static_cast<int>(std::lround(value));
  return cfg;
}

double rho_for(const ExperimentSpec& spec, double value) {
  return spec.sweep_axis == "rho" ? value : spec.hp.rho;
}

std::string value_tag(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%g", v);
  std::string s = b;
  for (auto& c : s)
    if (c == '.') c = 'p';
  return s;
}

BeamformerFn baseline_fn(const std::string& method, const NetworkConfig& cfg) {
  if (method == "mrt") return [&cfg](const ChannelSample& s) { return mrt(s, cfg); };
  if (method == "imt") return [&cfg](const ChannelSample& s) { return imt(s, cfg).beams; };
  if (method == "cbf") return [&cfg](const ChannelSample& s) { return cbf(s, cfg); };
  if (method == "wmmse")
    return [&cfg](const ChannelSample& s) { return wmmse(s, cfg, 100, 1e-8).beams; };
  throw std::invalid_argument("no baseline named " + method);
}

PointOutcome run_point(const ExperimentSpec& spec, std::size_t point_idx) {
  const double value = spec.sweep_values[point_idx];
  NetworkConfig cfg = scenario_for(spec, value);
  cfg.rho = rho_for(spec, value);
  TrainHyper hp = spec.hp;
  hp.rho = cfg.rho;

  // Points of a rho sweep share channel realizations; other axes change the
  // physics, so each point draws its own.
  const std::uint64_t data_tag =
      spec.sweep_axis == "rho" || spec.sweep_axis == "none" ? 0 : point_idx;
  Rng seeds = Rng(spec.hp.seed).fork2(0xDA7A, data_tag);
  const Dataset train = generate_dataset(cfg, spec.n_train, seeds.fork(1).key());
  const Dataset test = generate_dataset(cfg, spec.n_test, seeds.fork(2).key());
  hp.seed = Rng(spec.hp.seed).fork2(0x7141, point_idx).key();

  PointOutcome out;
  const bool save_models = !spec.save_models_dir.empty();
  for (const auto& method : spec.methods) {
    const auto t0 = Clock::now();
    EvalStats ev;
    OverheadLedger ledger;
    std::vector<MlpModel> models;
    if (method == "vfl") {
      auto tm = train_vfl(cfg, train, hp, spec.budget.vfl_steps, spec.hidden_dim, spec.n_hidden);
      ev = evaluate_models(cfg, test, tm.models);
      ledger = tm.ledger;
      models = std::move(tm.models);
    } else if (method == "hfl") {
      auto tm = train_hfl(cfg, train, hp, spec.budget.hfl_rounds, spec.budget.hfl_local_epochs,
                          spec.hidden_dim, spec.n_hidden);
      ev = evaluate_models(cfg, test, tm.models);
      ledger = tm.ledger;
      models.push_back(std::move(tm.models[0]));  // replicas identical post-averaging
    } else if (method == "percell") {
      auto tm = train_percell(cfg, train, hp, spec.budget.percell_steps, spec.hidden_dim,
                              spec.n_hidden);
      ev = evaluate_models(cfg, test, tm.models, true);
      ledger = tm.ledger;
      models = std::move(tm.models);
    } else {
      ev = evaluate_fn(cfg, test, baseline_fn(method, cfg));
      if (method == "wmmse")
        ledger.flops_wmmse =
            estimate_complexity(cfg, spec.hidden_dim, spec.n_hidden,
                                ComplexityPhase::WmmseDeployment);
    }

    ResultRow row;
    row.axis = spec.sweep_axis;
    row.sweep_value = value;
    row.method = method;
    row.rho = cfg.rho;
    row.snr_db = cfg.snr_db();
    row.n_t = cfg.tx_antennas;
    row.r_comm = ev.r_comm;
    row.r_sense = ev.r_sense;
    row.cil_mean = ev.cil_mean;
    row.sil_mean = ev.sil_mean;
    row.n_test = spec.n_test;
    row.ledger_complex_up = ledger.complex_up;
    row.ledger_bits_up = ledger.bits_up;
    row.ledger_rounds = ledger.rounds;
    row.wall_seconds = seconds_since(t0);
    out.rows.push_back(row);

    if (spec.emit_beampatterns) {
      BeamformerFn fn;
      const bool serving_only = method == "percell";
      if (!models.empty()) {
        const auto all = models.size() == 1
                             ? std::vector<MlpModel>(cfg.cells, models[0])
                             : models;
        fn = [&cfg, all, serving_only](const ChannelSample& s) {
          return models_beamform(cfg, all, s, serving_only);
        };
      } else {
        fn = baseline_fn(method, cfg);
      }
      PointFile f;
      f.name = "beampattern_" + value_tag(value) + "_" + method + ".csv";
      f.text = beampattern_csv(cfg, test, fn, 0, spec.beampattern_step_deg);
      out.files.push_back(std::move(f));
    }

    if (save_models && !models.empty()) {
      for (std::size_t m = 0; m < models.size(); ++m) {
        PointFile f;
        f.binary = true;
        f.name = "model_" + value_tag(value) + "_" + method +
                 (models.size() == 1 ? std::string("_global") : "_bs" + std::to_string(m)) +
                 ".bin";
        f.bytes = models[m].serialize();
        out.files.push_back(std::move(f));
      }
    }
  }
  return out;
}

PointOutcome run_prune_point(const ExperimentSpec& spec) {
  // All factors share one trained model pair; factor 0 must reproduce the
  // unpruned model bit-exactly.
  NetworkConfig cfg = spec.scenario;
  TrainHyper hp = spec.hp;
  Rng seeds = Rng(spec.hp.seed).fork2(0xDA7A, 0);
  const Dataset train = generate_dataset(cfg, spec.n_train, seeds.fork(1).key());
  const Dataset test = generate_dataset(cfg, spec.n_test, seeds.fork(2).key());
  hp.seed = Rng(spec.hp.seed).fork2(0x7141, 0).key();

  PointOutcome out;
  for (const auto& method : spec.methods) {
    if (method != "vfl" && method != "hfl") continue;
    std::vector<MlpModel> base_models;
    OverheadLedger ledger;
    if (method == "vfl") {
      auto tm = train_vfl(cfg, train, hp, spec.budget.vfl_steps, spec.hidden_dim, spec.n_hidden);
      base_models = std::move(tm.models);
      ledger = tm.ledger;
    } else {
      auto tm = train_hfl(cfg, train, hp, spec.budget.hfl_rounds, spec.budget.hfl_local_epochs,
                          spec.hidden_dim, spec.n_hidden);
      base_models = std::move(tm.models);
      ledger = tm.ledger;
    }
    for (double factor : spec.sweep_values) {
      const auto t0 = Clock::now();
      std::vector<MlpModel> pruned = base_models;
      for (auto& m : pruned) m.prune(factor);
      const EvalStats ev = evaluate_models(cfg, test, pruned);
      ResultRow row;
      row.axis = spec.sweep_axis;
      row.sweep_value = factor;
      row.method = method;
      row.rho = cfg.rho;
      row.snr_db = cfg.snr_db();
      row.n_t = cfg.tx_antennas;
      row.r_comm = ev.r_comm;
      row.r_sense = ev.r_sense;
      row.cil_mean = ev.cil_mean;
      row.sil_mean = ev.sil_mean;
      row.n_test = spec.n_test;
      row.ledger_complex_up = ledger.complex_up;
      row.ledger_bits_up =
          static_cast<std::uint64_t>(pruned[0].parameter_bits());  // bits after pruning
      row.ledger_rounds = ledger.rounds;
      row.wall_seconds = seconds_since(t0);
      out.rows.push_back(row);
    }
  }
  return out;
}

}  // namespace

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << "# isac-results v1\n";
  os << "axis,sweep_value,method,rho,snr_db,n_t,r_comm,r_sense,cil_mean,sil_mean,n_test,"
        "ledger_complex_up,ledger_bits_up,ledger_rounds\n";
  for (const auto& r : rows)
    os << r.axis << ',' << fmt_g(r.sweep_value) << ',' << r.method << ',' << fmt_g(r.rho) << ','
       << fmt_g(r.snr_db) << ',' << r.n_t << ',' << fmt_g(r.r_comm) << ',' << fmt_g(r.r_sense)
       << ',' << fmt_g(r.cil_mean) << ',' << fmt_g(r.sil_mean) << ',' << r.n_test << ','
       << r.ledger_complex_up << ',' << r.ledger_bits_up << ',' << r.ledger_rounds << '\n';
  return os.str();
}

std::string timings_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << "# isac-timings v1\n";
  os << "axis,sweep_value,method,wall_seconds\n";
  for (const auto& r : rows) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3f", r.wall_seconds);
    os << r.axis << ',' << fmt_g(r.sweep_value) << ',' << r.method << ',' << b << '\n';
  }
  return os.str();
}

std::string beampattern_csv([[maybe_unused]] const NetworkConfig& cfg, const Dataset& test,
                            const BeamformerFn& fn, int bs, double step_deg) {
  const auto grid = angle_grid_deg(-90.0, 90.0, step_deg);
  const int n = static_cast<int>(test.samples.size());
  std::vector<std::vector<double>> pat(n);
#pragma omp parallel for schedule(dynamic, 4)
  for (int r = 0; r < n; ++r) {
    const auto beams = fn(test.samples[r]);
    pat[r] = beampattern(beams[bs], grid);
  }
  std::vector<double> mean(grid.size(), 0.0);
  for (int r = 0; r < n; ++r)
    for (std::size_t g = 0; g < grid.size(); ++g) mean[g] += pat[r][g];
  for (auto& v : mean) v /= n;
  const auto db = to_db_normalized(mean);
  std::ostringstream os;
  os << "angle_deg,power_db\n";
  for (std::size_t g = 0; g < grid.size(); ++g) {
    char b[64];
    std::snprintf(b, sizeof b, "%.1f,%.6f\n", grid[g] * 180.0 / M_PI, db[g]);
    os << b;
  }
  return os.str();
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const std::size_t n_pts = spec.sweep_values.size();
  std::vector<PointOutcome> outs;

  if (spec.sweep_axis == "prune_factor") {
    outs.push_back(run_prune_point(spec));
  } else {
    outs.resize(n_pts);
    const int workers = std::min<int>(worker_count(), static_cast<int>(n_pts));
    if (workers <= 1) {
      for (std::size_t i = 0; i < n_pts; ++i) outs[i] = run_point(spec, i);
    } else {
      const int base_threads = omp_get_max_threads();
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
          omp_set_num_threads(std::max(1, base_threads / workers));
          for (std::size_t i = next.fetch_add(1); i < n_pts; i = next.fetch_add(1))
            outs[i] = run_point(spec, i);
        });
      for (auto& t : pool) t.join();
    }
  }

  ExperimentResult res;
  for (auto& o : outs)
    for (auto& r : o.rows) res.rows.push_back(r);

  if (!spec.output_dir.empty()) {
    ensure_dir(spec.output_dir);
    write_text_file(spec.output_dir + "/results.csv", results_csv(res.rows));
    res.written_files.push_back(spec.output_dir + "/results.csv");
    write_text_file(spec.output_dir + "/timings.csv", timings_csv(res.rows));
    res.written_files.push_back(spec.output_dir + "/timings.csv");
    for (const auto& o : outs)
      for (const auto& f : o.files) {
        const bool is_model = f.binary;
        const std::string dir = is_model ? spec.save_models_dir : spec.output_dir;
        if (dir.empty()) continue;
        ensure_dir(dir);
        const std::string path = dir + "/" + f.name;
        if (is_model)
          io::write_file(path, f.bytes);
        else
          write_text_file(path, f.text);
        res.written_files.push_back(path);
      }
  }
  return res;
}

ExperimentSpec desk_profile() {
  ExperimentSpec s;
  s.scenario = NetworkConfig{};
  s.scenario.set_snr_db(20.0);
  s.hp = TrainHyper{};
  s.hp.opt.kind = OptKind::Adam;
  s.hp.opt.learning_rate = 1e-3;
  s.hp.opt.weight_decay = 1e-6;
  s.hp.batch = 64;
  s.budget.vfl_steps = 4650;       // 150 epochs of 31 minibatches
  s.budget.hfl_rounds = 200;       // one local epoch per round
  s.budget.hfl_local_epochs = 1;
  s.budget.percell_steps = 2480;   // 80 epochs
  s.n_train = 2000;
  s.n_test = 500;
  return s;
}

ExperimentSpec smoke_profile() {
  ExperimentSpec s = desk_profile();
  s.n_train = 192;
  s.n_test = 64;
  s.budget.vfl_steps = 60;
  s.budget.hfl_rounds = 20;
  s.budget.hfl_local_epochs = 1;
  s.budget.percell_steps = 60;
  return s;
}

ExperimentSpec paper_profile() {
  ExperimentSpec s = desk_profile();
  s.n_train = 20000;
  s.n_test = 2000;
  s.budget.vfl_steps = 62000;
  s.budget.hfl_rounds = 200;
  s.budget.hfl_local_epochs = 1;
  s.budget.percell_steps = 37200;
  return s;
}

ExperimentSpec profile_by_name(const std::string& name) {
  if (name == "desk") return desk_profile();
  if (name == "smoke") return smoke_profile();
  if (name == "paper") return paper_profile();
  throw std::invalid_argument("unknown profile: " + name);
}

namespace {

void apply_scenario_json(NetworkConfig& c, const nlohmann::json& j) {
  if (j.contains("cells")) c.cells = j["cells"].get<int>();
  if (j.contains("users_per_cell")) c.users_per_cell = j["users_per_cell"].get<int>();
  if (j.contains("tx_antennas")) c.tx_antennas = j["tx_antennas"].get<int>();
  if (j.contains("rx_antennas")) c.rx_antennas = j["rx_antennas"].get<int>();
  if (j.contains("tx_power")) c.tx_power = j["tx_power"].get<double>();
  if (j.contains("cell_radius")) c.cell_radius = j["cell_radius"].get<double>();
  if (j.contains("guard_radius")) c.guard_radius = j["guard_radius"].get<double>();
  if (j.contains("pl_comm_exp")) c.pl_comm_exp = j["pl_comm_exp"].get<double>();
  if (j.contains("pl_sense_exp")) c.pl_sense_exp = j["pl_sense_exp"].get<double>();
  if (j.contains("rician_factor")) c.rician_factor = j["rician_factor"].get<double>();
  if (j.contains("rcs")) c.rcs = j["rcs"].get<double>();
  if (j.contains("noise_comm")) c.noise_comm = j["noise_comm"].get<double>();
  if (j.contains("noise_sense")) c.noise_sense = j["noise_sense"].get<double>();
  if (j.contains("snr_db")) c.set_snr_db(j["snr_db"].get<double>());
  if (j.contains("rho")) c.rho = j["rho"].get<double>();
  if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
  if (j.contains("beta")) c.beta = j["beta"].get<double>();
  if (j.contains("bs_positions")) {
    c.bs_positions_override.clear();
    for (const auto& p : j["bs_positions"])
      c.bs_positions_override.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  if (j.contains("target_angles_deg")) {
    c.target_angle_override.clear();
    for (const auto& a : j["target_angles_deg"]) {
      if (a.is_null())
        c.target_angle_override.push_back(std::nan(""));
      else
        c.target_angle_override.push_back(a.get<double>() * M_PI / 180.0);
    }
  }
}

}  // namespace

ExperimentSpec spec_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  ExperimentSpec s = profile_by_name(j.value("profile", std::string("desk")));
  if (j.contains("scenario")) apply_scenario_json(s.scenario, j["scenario"]);
  s.hp.rho = s.scenario.rho;
  s.hp.alpha = s.scenario.alpha;
  s.hp.beta = s.scenario.beta;
  if (j.contains("train")) {
    const auto& t = j["train"];
    if (t.contains("rho")) s.scenario.rho = t["rho"].get<double>();
    if (t.contains("optimizer")) s.hp.opt.kind = opt_kind_from_string(t["optimizer"].get<std::string>());
    if (t.contains("learning_rate")) s.hp.opt.learning_rate = t["learning_rate"].get<double>();
    if (t.contains("weight_decay")) s.hp.opt.weight_decay = t["weight_decay"].get<double>();
    if (t.contains("batch")) s.hp.batch = t["batch"].get<int>();
    if (t.contains("rho")) s.hp.rho = t["rho"].get<double>();
    if (t.contains("alpha")) s.hp.alpha = t["alpha"].get<double>();
    if (t.contains("beta")) s.hp.beta = t["beta"].get<double>();
    if (t.contains("anneal_frac")) s.hp.anneal_frac = t["anneal_frac"].get<double>();
    if (t.contains("seed")) s.hp.seed = t["seed"].get<std::uint64_t>();
    if (t.contains("vfl_steps")) s.budget.vfl_steps = t["vfl_steps"].get<int>();
    if (t.contains("hfl_rounds")) s.budget.hfl_rounds = t["hfl_rounds"].get<int>();
    if (t.contains("hfl_local_epochs")) s.budget.hfl_local_epochs = t["hfl_local_epochs"].get<int>();
    if (t.contains("percell_steps")) s.budget.percell_steps = t["percell_steps"].get<int>();
    if (t.contains("hidden_dim")) s.hidden_dim = t["hidden_dim"].get<int>();
    if (t.contains("n_hidden")) s.n_hidden = t["n_hidden"].get<int>();
  }
  if (j.contains("data")) {
    if (j["data"].contains("n_train")) s.n_train = j["data"]["n_train"].get<int>();
    if (j["data"].contains("n_test")) s.n_test = j["data"]["n_test"].get<int>();
  }
  if (j.contains("sweep")) {
    if (j["sweep"].contains("axis")) s.sweep_axis = j["sweep"]["axis"].get<std::string>();
    if (j["sweep"].contains("values"))
      s.sweep_values = j["sweep"]["values"].get<std::vector<double>>();
  }
  if (j.contains("methods")) s.methods = j["methods"].get<std::vector<std::string>>();
  if (j.contains("output_dir")) s.output_dir = j["output_dir"].get<std::string>();
  if (j.contains("save_models_dir")) s.save_models_dir = j["save_models_dir"].get<std::string>();
  if (j.contains("emit_beampatterns")) s.emit_beampatterns = j["emit_beampatterns"].get<bool>();
  if (j.contains("beampattern_step_deg"))
    s.beampattern_step_deg = j["beampattern_step_deg"].get<double>();
  return s;
}

std::string spec_to_json_text(const ExperimentSpec& s) {
  nlohmann::json j;
  j["scenario"] = {{"cells", s.scenario.cells},
                   {"users_per_cell", s.scenario.users_per_cell},
                   {"tx_antennas", s.scenario.tx_antennas},
                   {"rx_antennas", s.scenario.rx_antennas},
                   {"tx_power", s.scenario.tx_power},
                   {"noise_comm", s.scenario.noise_comm},
                   {"noise_sense", s.scenario.noise_sense},
                   {"cell_radius", s.scenario.cell_radius},
                   {"guard_radius", s.scenario.guard_radius},
                   {"pl_comm_exp", s.scenario.pl_comm_exp},
                   {"pl_sense_exp", s.scenario.pl_sense_exp},
                   {"rician_factor", s.scenario.rician_factor},
                   {"rcs", s.scenario.rcs},
                   {"rho", s.scenario.rho},
                   {"alpha", s.scenario.alpha},
                   {"beta", s.scenario.beta}};
  j["train"] = {{"optimizer", s.hp.opt.kind == OptKind::Adam ? "adam" : "sgd"},
                {"learning_rate", s.hp.opt.learning_rate},
                {"weight_decay", s.hp.opt.weight_decay},
                {"batch", s.hp.batch},
                {"rho", s.hp.rho},
                {"alpha", s.hp.alpha},
                {"beta", s.hp.beta},
                {"anneal_frac", s.hp.anneal_frac},
                {"seed", s.hp.seed},
                {"vfl_steps", s.budget.vfl_steps},
                {"hfl_rounds", s.budget.hfl_rounds},
                {"hfl_local_epochs", s.budget.hfl_local_epochs},
                {"percell_steps", s.budget.percell_steps},
                {"hidden_dim", s.hidden_dim},
                {"n_hidden", s.n_hidden}};
  j["data"] = {{"n_train", s.n_train}, {"n_test", s.n_test}};
  j["sweep"] = {{"axis", s.sweep_axis}, {"values", s.sweep_values}};
  j["methods"] = s.methods;
  j["output_dir"] = s.output_dir;
  j["save_models_dir"] = s.save_models_dir;
  j["emit_beampatterns"] = s.emit_beampatterns;
  j["beampattern_step_deg"] = s.beampattern_step_deg;
  return j.dump(2);
}

int worker_count() {
  const char* env = std::getenv("ISAC_WORKERS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n < 1 ? 1 : n;
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw std::runtime_error("cannot create directory " + path + ": " + ec.message());
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::trunc | std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace isac
