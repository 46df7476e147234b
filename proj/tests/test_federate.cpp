// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "isac/federate.hpp"
#include "isac/metrics_graph.hpp"
#include "isac/tape.hpp"
#include "pipeline_check.hpp"

using namespace isac;

TEST_CASE("fedavg: identical replicas, sign cancellation, mean oracle") {
  MlpConfig arch;
  arch.input_dim = 4;
  arch.hidden_dim = 3;
  arch.n_hidden = 1;
  arch.output_dim = 2;
  MlpModel a = MlpModel::init(arch, 1);

  SUBCASE("identical replicas average to themselves") {
    const MlpModel avg = fedavg({&a, &a, &a});
    CHECK(avg.params() == a.params());
  }
  SUBCASE("p and -p cancel to the zero model") {
    MlpModel b = a;
    for (auto& v : b.params()) v = -v;
    const MlpModel avg = fedavg({&a, &b});
    for (double v : avg.params()) CHECK(v == 0.0);
  }
  SUBCASE("random triple equals the elementwise mean") {
    MlpModel b = MlpModel::init(arch, 2);
    MlpModel c = MlpModel::init(arch, 3);
    const MlpModel avg = fedavg({&a, &b, &c});
    for (std::size_t i = 0; i < a.params().size(); ++i)
      CHECK(avg.params()[i] ==
            doctest::Approx((a.params()[i] + b.params()[i] + c.params()[i]) / 3.0)
                .epsilon(1e-15));
  }
  SUBCASE("architecture mismatch throws") {
    MlpConfig other = arch;
    other.hidden_dim = 5;
    MlpModel b = MlpModel::init(other, 2);
    CHECK_THROWS_AS(fedavg({&a, &b}), std::invalid_argument);
  }
  SUBCASE("masks: pruned everywhere stays pruned, alive anywhere survives") {
    MlpModel b = a;
    a.prune(1.0);  // all weights masked in a
    const MlpModel avg = fedavg({&a, &b});
    // b keeps every weight alive, so no weight may stay masked
    for (std::size_t i = 0; i < avg.mask().size(); ++i) CHECK(avg.mask()[i] == 1);
    MlpModel c = a;  // both fully pruned now
    const MlpModel both = fedavg({&a, &c});
    CHECK(both.parameter_count() == a.parameter_count());
  }
  SUBCASE("idempotence: averaging M copies of the average is a fixed point") {
    MlpModel b = MlpModel::init(arch, 2);
    const MlpModel avg = fedavg({&a, &b});
    const MlpModel again = fedavg({&avg, &avg});
    CHECK(again.params() == avg.params());
  }
}

TEST_CASE("wire messages round-trip exactly") {
  Rng rng(91);
  wire::VflUpload up;
  up.bs = 2;
  up.round = 77;
  up.nt = 3;
  up.k = 2;
  up.h_cols = 4;
  up.g_cols = 2;
  up.sample_idx = {5, 9};
  for (std::size_t i = 0; i < 2 * 3 * 2; ++i) up.w.push_back(rng.cnormal());
  for (std::size_t i = 0; i < 2 * 3 * 4; ++i) up.h.push_back(rng.cnormal());
  for (std::size_t i = 0; i < 2 * 3 * 2; ++i) up.g.push_back(rng.cnormal());
  const auto round_tripped = wire::VflUpload::parse(up.serialize());
  CHECK(round_tripped.bs == up.bs);
  CHECK(round_tripped.round == up.round);
  CHECK(round_tripped.sample_idx == up.sample_idx);
  CHECK(round_tripped.w == up.w);
  CHECK(round_tripped.h == up.h);
  CHECK(round_tripped.g == up.g);

  wire::VflGrads g;
  g.bs = 1;
  g.round = 3;
  g.nt = 2;
  g.k = 1;
  g.mean_loss = -1.25;
  g.sample_idx = {0};
  g.dw = {{0.5, -0.5}, {1.0, 2.0}};
  const auto g2 = wire::VflGrads::parse(g.serialize());
  CHECK(g2.dw == g.dw);
  CHECK(g2.mean_loss == g.mean_loss);

  wire::ModelParams mp;
  mp.round = 9;
  mp.params = {1.0, -2.5, 3.25};
  CHECK(wire::ModelParams::parse(mp.serialize()).params == mp.params);

  // type confusion is rejected
  CHECK_THROWS_AS(wire::VflGrads::parse(up.serialize()), std::runtime_error);
}

namespace {

NetworkConfig tiny_cfg() {
  NetworkConfig cfg;
  cfg.cells = 2;
  cfg.users_per_cell = 1;
  cfg.tx_antennas = 2;
  cfg.rx_antennas = 2;
  cfg.set_snr_db(12.0);
  return cfg;
}

MlpConfig tiny_arch(const NetworkConfig& cfg) {
  MlpConfig arch = mlp_config_for(cfg, 8, 2);
  return arch;
}

}  // namespace

TEST_CASE("vfl round: zero learning rate leaves models fixed, ledger still counts") {
  NetworkConfig cfg = tiny_cfg();
  const Dataset ds = generate_dataset(cfg, 8, 92);
  TrainHyper hp;
  hp.seed = 4;
  hp.batch = 4;
  hp.opt.learning_rate = 0.0;
  hp.opt.weight_decay = 0.0;
  VflSession sess(cfg, tiny_arch(cfg), hp, 4);
  std::vector<std::vector<double>> before;
  for (const auto& m : sess.models()) before.push_back(m.params());
  const std::vector<int> idx = {0, 1, 2, 3};
  sess.round(ds, idx);
  for (int m = 0; m < cfg.cells; ++m) CHECK(sess.models()[m].params() == before[m]);
  // per-round per-BS basis: (M+1)*K*N_T complex values each
  CHECK(sess.ledger().complex_up ==
        static_cast<std::uint64_t>(cfg.cells) * (cfg.cells + 1) * cfg.users_per_cell *
            cfg.tx_antennas);
  CHECK(sess.ledger().rounds == 1);
  CHECK(sess.ledger().wire_bytes_up > 0);
}

TEST_CASE("vfl ledger after T rounds instantiates the training formula") {
  NetworkConfig cfg;  // M=3, K=2, N_T=6
  const Dataset ds = generate_dataset(cfg, 8, 93);
  TrainHyper hp;
  hp.seed = 6;
  hp.batch = 4;
  VflSession sess(cfg, mlp_config_for(cfg, 16, 1), hp, 5);
  const std::vector<int> idx = {0, 1, 2, 3};
  const int rounds = 5;
  for (int t = 0; t < rounds; ++t) sess.round(ds, idx);
  // per BS per round (M+1)KN_T = 48; all BSs, T rounds: (M^2+M)TKN_T = 144 T
  CHECK(sess.ledger().complex_up == 48u * 3u * rounds);
  CHECK(sess.ledger().complex_up == vfl_training_complex_values(3, 2, 6, rounds));
  // literal serialized values per BS-round: batch * (MK + M + K) * N_T
  CHECK(sess.ledger().literal_complex_up ==
        static_cast<std::uint64_t>(rounds) * 3u * 4u * (6u + 3u + 2u) * 6u);
}

TEST_CASE("vfl with one cell reproduces centralized training bit for bit") {
  NetworkConfig cfg = tiny_cfg();
  cfg.cells = 1;
  const Dataset ds = generate_dataset(cfg, 8, 94);
  TrainHyper hp;
  hp.seed = 8;
  hp.batch = 4;
  const MlpConfig arch = tiny_arch(cfg);
  VflSession sess(cfg, arch, hp, 3);

  // Centralized twin: same init, same dropout stream, same loss and update.
  MlpModel model = MlpModel::init(arch, Rng(hp.seed).fork2(0x11, 0).key());
  Optimizer opt(hp.opt);
  const int nt = cfg.tx_antennas, kk = cfg.users_per_cell, nk = nt * kk;
  const int out_dim = arch.output_dim;
  for (std::uint64_t round = 0; round < 3; ++round) {
    const std::vector<int> idx = {static_cast<int>(round), 1, 2, 3};
    sess.round(ds, idx);

    const int batch = static_cast<int>(idx.size());
    std::vector<double> x(static_cast<std::size_t>(batch) * arch.input_dim);
    for (int r = 0; r < batch; ++r) {
      const auto enc = encode_for_bs(cfg, ds.samples[idx[r]], 0, false);
      std::copy(enc.begin(), enc.end(), x.begin() + static_cast<std::size_t>(r) * arch.input_dim);
    }
    Rng drop = Rng(hp.seed).fork2(0xDA, round).fork(0);
    ForwardBatch rec;
    model.forward_batch(x.data(), batch, cfg.tx_power, nt, kk, RunMode::Train, &drop, rec);
    std::vector<double> dldw(static_cast<std::size_t>(batch) * out_dim);
    for (int r = 0; r < batch; ++r) {
      ad::Tape tape;
      std::vector<VarCMat> wv{leaf_cmat(tape, rec.w_out[r])};
      const auto loss = vfl_global_loss(tape, cfg, ds.samples[idx[r]], wv, hp.rho);
      const auto leaf = tape.backward(loss);
      for (int e = 0; e < nk; ++e) {
        dldw[static_cast<std::size_t>(r) * out_dim + e] = leaf[2 * e];
        dldw[static_cast<std::size_t>(r) * out_dim + nk + e] = leaf[2 * e + 1];
      }
    }
    std::vector<double> grads(model.params().size(), 0.0);
    model.backward_batch(rec, dldw.data(), 1.0 / batch, grads);
    opt.step(model.params(), grads);
    model.apply_mask();
  }
  CHECK(sess.models()[0].params() == model.params());
}

TEST_CASE("vfl branch gradients match a monolithic tape on toy dims") {
  NetworkConfig cfg = tiny_cfg();
  const Dataset ds = generate_dataset(cfg, 2, 95);
  const MlpConfig arch = tiny_arch(cfg);
  std::vector<MlpModel> models{MlpModel::init(arch, 21), MlpModel::init(arch, 22)};
  const double rho = 0.4;

  for (const auto& smp : ds.samples) {
    // production path: per-branch tape loss + closed-form network backward
    auto prod = testutil::eval_vfl_pipeline(cfg, smp, models, rho);

    // monolithic reference: both branches and the loss on a single tape
    ad::Tape tape;
    std::vector<VarCMat> wv;
    for (int m = 0; m < cfg.cells; ++m) {
      const auto x = encode_for_bs(cfg, smp, m, false);
      wv.push_back(models[m].forward_on_tape(tape, x, cfg.tx_power, cfg.tx_antennas,
                                             cfg.users_per_cell));
    }
    const auto loss = vfl_global_loss(tape, cfg, smp, wv, rho);
    CHECK(tape.value(loss) == doctest::Approx(prod.loss).epsilon(1e-12));
    const auto mono = tape.backward(loss);
    REQUIRE(mono.size() == prod.grad.size());
    double scale = 0.0;
    for (double g : mono) scale = std::max(scale, std::abs(g));
    for (std::size_t i = 0; i < mono.size(); ++i)
      CHECK(std::abs(mono[i] - prod.grad[i]) <= 1e-10 * std::max(scale, 1.0));
  }
}

TEST_CASE("hfl: zero local epochs keep the global model, ledger still counts") {
  NetworkConfig cfg = tiny_cfg();
  const Dataset ds = generate_dataset(cfg, 8, 96);
  TrainHyper hp;
  hp.seed = 10;
  hp.batch = 4;
  HflSession sess(cfg, tiny_arch(cfg), hp, 4, 0);
  const auto before = sess.global_model().params();
  sess.round(ds);
  CHECK(sess.global_model().params() == before);
  const auto bits = static_cast<std::uint64_t>(sess.global_model().parameter_bits());
  CHECK(sess.ledger().bits_up + sess.ledger().bits_down == hfl_training_bits(cfg.cells, bits, 1));
}

TEST_CASE("hfl ledger over T rounds equals 2MBT; no channel data crosses the wire") {
  NetworkConfig cfg = tiny_cfg();
  const Dataset ds = generate_dataset(cfg, 12, 97);
  TrainHyper hp;
  hp.seed = 11;
  hp.batch = 4;
  HflSession sess(cfg, tiny_arch(cfg), hp, 3, 1);
  for (int t = 0; t < 3; ++t) sess.round(ds);
  const auto bits = static_cast<std::uint64_t>(sess.global_model().parameter_bits());
  CHECK(sess.ledger().bits_up + sess.ledger().bits_down ==
        hfl_training_bits(cfg.cells, bits, 3));
  CHECK(sess.ledger().channel_complex_up == 0);
  CHECK(sess.ledger().rounds == 3);
  // replicas equal the global model after aggregation
  for (const auto& r : sess.replicas()) CHECK(r.params() == sess.global_model().params());
}

TEST_CASE("hfl local step equals a hand-traced gradient step on one sample") {
  NetworkConfig cfg = tiny_cfg();
  Dataset ds = generate_dataset(cfg, 1, 98);
  TrainHyper hp;
  hp.seed = 12;
  hp.batch = 1;
  hp.alpha = 0.2;
  hp.beta = 0.1;
  const MlpConfig arch = tiny_arch(cfg);
  const int m = 1;

  MlpModel via_helper = MlpModel::init(arch, 31);
  MlpModel manual = via_helper;
  Optimizer opt_a(hp.opt), opt_b(hp.opt);
  LocalWorkspace ws;
  const double anneal = 1.0;
  hfl_local_train(via_helper, opt_a, cfg, ds, m, hp, 1, anneal, 7, ws);

  // hand trace with the same derived streams
  Rng base = Rng(hp.seed).fork2(0xB5, 7).fork(m);
  Rng drop = base.fork2(0xD0, 0);
  const auto x = encode_for_bs(cfg, ds.samples[0], m, false);
  ForwardBatch rec;
  manual.forward_batch(x.data(), 1, cfg.tx_power, cfg.tx_antennas, cfg.users_per_cell,
                       RunMode::Train, &drop, rec);
  ad::Tape tape;
  const VarCMat wv = leaf_cmat(tape, rec.w_out[0]);
  const auto loss =
      hfl_local_loss(tape, cfg, ds.samples[0].H[m], ds.samples[0].G[m], m, wv, hp.rho,
                     hp.alpha / cfg.noise_comm, hp.beta / cfg.noise_sense);
  const auto leaf = tape.backward(loss);
  const int nk = cfg.tx_antennas * cfg.users_per_cell;
  std::vector<double> dldw(2 * nk);
  for (int e = 0; e < nk; ++e) {
    dldw[e] = leaf[2 * e];
    dldw[nk + e] = leaf[2 * e + 1];
  }
  std::vector<double> grads(manual.params().size(), 0.0);
  manual.backward_batch(rec, dldw.data(), 1.0, grads);
  opt_b.step(manual.params(), grads);
  manual.apply_mask();
  CHECK(via_helper.params() == manual.params());
}

TEST_CASE("hfl local training on a fixed batch decreases the loss with small steps") {
  NetworkConfig cfg = tiny_cfg();
  const Dataset ds = generate_dataset(cfg, 4, 99);
  TrainHyper hp;
  hp.seed = 13;
  hp.batch = 4;
  hp.opt.kind = OptKind::Sgd;
  hp.opt.learning_rate = 2e-3;
  MlpConfig arch = tiny_arch(cfg);
  arch.dropout_p = 0.0;  // expectation argument without dropout noise
  double improved = 0;
  const int trials = 5;
  for (int trial = 0; trial < trials; ++trial) {
    MlpModel model = MlpModel::init(arch, 200 + trial);
    Optimizer opt(hp.opt);
    LocalWorkspace ws;
    Rng drop(1);
    const std::vector<int> idx = {0, 1, 2, 3};
    const auto first = local_minibatch_step(model, opt, cfg, ds, 0, idx, 0.5, 0.0, 0.0, false,
                                            drop, ws);
    RoundStats last{};
    for (int s = 0; s < 30; ++s)
      last = local_minibatch_step(model, opt, cfg, ds, 0, idx, 0.5, 0.0, 0.0, false, drop, ws);
    improved += last.loss < first.loss ? 1 : 0;
  }
  CHECK(improved >= trials - 1);  // decreases in expectation
}

TEST_CASE("empty dataset is rejected") {
  NetworkConfig cfg = tiny_cfg();
  Dataset empty;
  empty.cfg = cfg;
  TrainHyper hp;
  MlpModel model = MlpModel::init(tiny_arch(cfg), 1);
  Optimizer opt(hp.opt);
  LocalWorkspace ws;
  CHECK_THROWS_AS(hfl_local_train(model, opt, cfg, empty, 0, hp, 1, 1.0, 0, ws),
                  std::invalid_argument);
}

TEST_CASE("complexity estimates instantiate the closed forms") {
  NetworkConfig cfg;  // M=3, K=2, N_T=6
  const double fwd = estimate_complexity(cfg, 512, 4, ComplexityPhase::Forward);
  // dominant hidden-stack term
  CHECK(2.0 * 4 * 512 * 512 == 2097152.0);
  const double expect = 2.0 * (6 + 3 + 2) * 6 * 512 + 2097152.0 + 5.0 * 512 + 4.0 * 2 * 6;
  CHECK(fwd == doctest::Approx(expect));
  CHECK(estimate_complexity(cfg, 512, 4, ComplexityPhase::Training) ==
        doctest::Approx(3.0 * fwd));
  // doubling d_H quadruples the quadratic term
  const double fwd2 = estimate_complexity(cfg, 1024, 4, ComplexityPhase::Forward);
  CHECK(fwd2 - 2.0 * (6 + 3 + 2) * 6 * 1024 - 5.0 * 1024 - 48.0 ==
        doctest::Approx(4.0 * 2097152.0));
  // single cell, single user
  NetworkConfig one;
  one.cells = 1;
  one.users_per_cell = 1;
  const double f1 = estimate_complexity(one, 8, 2, ComplexityPhase::Forward);
  CHECK(f1 == doctest::Approx(2.0 * 3 * one.tx_antennas * 8 + 2.0 * 2 * 64 + 3.0 * 8 +
                              2.0 * one.tx_antennas));
  // WMMSE with the documented complex-op multiplier
  CHECK(estimate_complexity(cfg, 512, 4, ComplexityPhase::WmmseDeployment, 10) ==
        doctest::Approx(8.0 * 10 * (4.0 * 36 + 2.0 * 216)));
}

TEST_CASE("overhead formulas match hand arithmetic") {
  CHECK(vfl_training_complex_values(3, 2, 6, 100) == 14400u);  // 12 * 100 * 12
  CHECK(hfl_training_bits(3, 1000, 7) == 42000u);
  CHECK(wmmse_deployment_complex_values(3, 2, 6) == 108u);
  NetworkConfig cfg;
  OverheadLedger led;
  led.rounds = 5;
  const auto text = led.report(cfg, 640);
  CHECK(text.find("(M^2+M)*T*K*N_T") != std::string::npos);
  CHECK(text.find("2*M*B*T") != std::string::npos);
  CHECK(text.find("M^2*K*N_T") != std::string::npos);
}
