// Copyright 2026 the isacbeam authors
// SPDX-License-Identifier: Apache-2.0
#include "isac/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "isac/io.hpp"

namespace isac {

namespace {
constexpr char kMagic[8] = {'I', 'S', 'A', 'C', 'D', 'S', 'T', '1'};
constexpr std::uint8_t kVersion = 1;
}  // namespace

void NetworkConfig::validate() const {
  if (cells < 1 || users_per_cell < 1 || tx_antennas < 1 || rx_antennas < 1)
    throw std::invalid_argument("config: M, K, N_T, N_R must all be >= 1");
  if (tx_power <= 0.0) throw std::invalid_argument("config: tx_power must be positive");
  if (noise_comm <= 0.0 || noise_sense <= 0.0)
    throw std::invalid_argument("config: noise variances must be positive");
  if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("config: rho must lie in [0, 1]");
  if (alpha < 0.0 || beta < 0.0)
    throw std::invalid_argument("config: leakage weights must be >= 0");
  if (cell_radius <= guard_radius)
    throw std::invalid_argument("config: cell_radius must exceed guard_radius");
  if (!bs_positions_override.empty() &&
      static_cast<int>(bs_positions_override.size()) != cells)
    throw std::invalid_argument("config: bs position override must list every BS");
  if (!target_angle_override.empty() && static_cast<int>(target_angle_override.size()) != cells)
    throw std::invalid_argument("config: target angle override must list every cell");
}

double NetworkConfig::comm_ref_distance() const {
  // Median of r with density ~ r on [guard, R].
  return std::sqrt(0.5 * (cell_radius * cell_radius + guard_radius * guard_radius));
}

double NetworkConfig::sense_ref_distance() const { return 0.5 * (guard_radius + cell_radius); }

double NetworkConfig::path_loss_comm(double distance) const {
  return std::pow(distance / comm_ref_distance(), -pl_comm_exp);
}

double NetworkConfig::path_loss_sense_one_way(double distance) const {
  return std::pow(distance / sense_ref_distance(), -pl_sense_exp);
}

double NetworkConfig::path_loss_sense_round_trip(double distance) const {
  return std::pow(distance / sense_ref_distance(), -2.0 * pl_sense_exp);
}

void NetworkConfig::set_snr_db(double snr_db) {
  const double sigma2 = tx_power * std::pow(10.0, -snr_db / 10.0);
  noise_comm = sigma2;
  noise_sense = sigma2;
}

double NetworkConfig::snr_db() const { return 10.0 * std::log10(tx_power / noise_comm); }

std::vector<std::array<double, 2>> bs_positions(const NetworkConfig& cfg) {
  if (!cfg.bs_positions_override.empty()) return cfg.bs_positions_override;
  std::vector<std::array<double, 2>> pos(cfg.cells);
  if (cfg.cells == 1) {
    pos[0] = {0.0, 0.0};
    return pos;
  }
  const double isd = 2.0 * cfg.cell_radius;
  const double circum = isd / (2.0 * std::sin(M_PI / cfg.cells));
  for (int m = 0; m < cfg.cells; ++m) {
    const double ang = 2.0 * M_PI * m / cfg.cells;
    pos[m] = {circum * std::cos(ang), circum * std::sin(ang)};
  }
  return pos;
}

CMat steering_vector(double theta, int n) {
  if (n < 1) throw std::invalid_argument("steering_vector: n must be >= 1");
  CMat a(n, 1);
  const double s = std::sin(theta);
  for (int i = 0; i < n; ++i) a(i, 0) = std::exp(cdouble(0.0, M_PI * i * s));
  return a;
}

DrawnPositions draw_positions(const NetworkConfig& cfg, Rng& rng) {
  const auto bs = bs_positions(cfg);
  DrawnPositions out;
  out.users.resize(cfg.total_users());
  out.target_angle.resize(cfg.cells);
  out.target_range.resize(cfg.cells);
  const double g2 = cfg.guard_radius * cfg.guard_radius;
  const double r2 = cfg.cell_radius * cfg.cell_radius;
  for (int n = 0; n < cfg.cells; ++n) {
    for (int k = 0; k < cfg.users_per_cell; ++k) {
      const double r = std::sqrt(g2 + rng.uniform() * (r2 - g2));
      const double phi = rng.uniform(-M_PI, M_PI);
      out.users[n * cfg.users_per_cell + k] = {bs[n][0] + r * std::cos(phi),
                                               bs[n][1] + r * std::sin(phi)};
    }
    const double drawn = rng.uniform(-M_PI / 2.0, M_PI / 2.0);
    const double range = rng.uniform(cfg.guard_radius, cfg.cell_radius);
    out.target_angle[n] = drawn;
    out.target_range[n] = range;
    if (!cfg.target_angle_override.empty() && std::isfinite(cfg.target_angle_override[n]))
      out.target_angle[n] = cfg.target_angle_override[n];
  }
  return out;
}

namespace {

std::vector<cdouble> rician_vector(int n, double gain, double los_angle, double kappa, Rng& rng) {
  const CMat a = steering_vector(los_angle, n);
  const double c_los = std::sqrt(gain * kappa / (1.0 + kappa));
  const double c_nlos = std::sqrt(gain / (1.0 + kappa));
  std::vector<cdouble> h(n);
  for (int i = 0; i < n; ++i) h[i] = c_los * a(i, 0) + c_nlos * rng.cnormal();
  return h;
}

}  // namespace

std::vector<cdouble> gen_comm_channel(const NetworkConfig& cfg, double distance, double los_angle,
                                      Rng& rng) {
  if (distance <= 0.0) throw std::invalid_argument("gen_comm_channel: distance must be positive");
  return rician_vector(cfg.tx_antennas, cfg.path_loss_comm(distance), los_angle,
                       cfg.rician_factor, rng);
}

ChannelSample generate_sample(const NetworkConfig& cfg, Rng sample_rng) {
  const auto bs = bs_positions(cfg);
  const int m_cells = cfg.cells, k_users = cfg.users_per_cell, nt = cfg.tx_antennas;

  Rng pos_rng = sample_rng.fork(0);
  const DrawnPositions pos = draw_positions(cfg, pos_rng);

  ChannelSample s;
  s.H.resize(m_cells);
  s.G.resize(m_cells);
  s.target_angle = pos.target_angle;

  for (int m = 0; m < m_cells; ++m) {
    Rng ch = sample_rng.fork(1 + static_cast<std::uint64_t>(m));
    CMat h(nt, m_cells * k_users);
    for (int n = 0; n < m_cells; ++n)
      for (int k = 0; k < k_users; ++k) {
        const auto& u = pos.users[n * k_users + k];
        const double dx = u[0] - bs[m][0], dy = u[1] - bs[m][1];
        const double d = std::hypot(dx, dy);
        const double phi = std::atan2(dy, dx);
        h.set_col(n * k_users + k, gen_comm_channel(cfg, d, phi, ch));
      }
    s.H[m] = std::move(h);

    CMat g(nt, m_cells);
    for (int n = 0; n < m_cells; ++n) {
      if (n == m) {
        const double amp =
            std::sqrt(cfg.rcs * cfg.path_loss_sense_round_trip(pos.target_range[m]));
        const CMat a = steering_vector(pos.target_angle[m], nt);
        for (int i = 0; i < nt; ++i) g(i, m) = amp * a(i, 0);
      } else {
        const double dx = bs[n][0] - bs[m][0], dy = bs[n][1] - bs[m][1];
        const double d = std::hypot(dx, dy);
        const double phi = std::atan2(dy, dx);
        g.set_col(n, rician_vector(nt, cfg.path_loss_sense_one_way(d), phi, cfg.rician_factor, ch));
      }
    }
    s.G[m] = std::move(g);
  }
  return s;
}

Dataset generate_dataset(const NetworkConfig& cfg, int n_samples, std::uint64_t seed,
                         bool parallel) {
  cfg.validate();
  if (n_samples < 1) throw std::invalid_argument("generate_dataset: n_samples must be >= 1");
  Dataset ds;
  ds.cfg = cfg;
  ds.seed = seed;
  ds.samples.resize(n_samples);
  const Rng root(seed);
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (int i = 0; i < n_samples; ++i)
      ds.samples[i] = generate_sample(cfg, root.fork(static_cast<std::uint64_t>(i)));
  } else {
    for (int i = 0; i < n_samples; ++i)
      ds.samples[i] = generate_sample(cfg, root.fork(static_cast<std::uint64_t>(i)));
  }
  return ds;
}

namespace {

void put_cfg(std::vector<std::uint8_t>& buf, const NetworkConfig& c) {
  io::put_u32(buf, static_cast<std::uint32_t>(c.cells));
  io::put_u32(buf, static_cast<std::uint32_t>(c.users_per_cell));
  io::put_u32(buf, static_cast<std::uint32_t>(c.tx_antennas));
  io::put_u32(buf, static_cast<std::uint32_t>(c.rx_antennas));
  io::put_f64(buf, c.tx_power);
  io::put_f64(buf, c.noise_comm);
  io::put_f64(buf, c.noise_sense);
  io::put_f64(buf, c.cell_radius);
  io::put_f64(buf, c.guard_radius);
  io::put_f64(buf, c.pl_comm_exp);
  io::put_f64(buf, c.pl_sense_exp);
  io::put_f64(buf, c.rician_factor);
  io::put_f64(buf, c.rcs);
  io::put_f64(buf, c.rho);
  io::put_f64(buf, c.alpha);
  io::put_f64(buf, c.beta);
  io::put_u32(buf, static_cast<std::uint32_t>(c.bs_positions_override.size()));
  for (const auto& p : c.bs_positions_override) {
    io::put_f64(buf, p[0]);
    io::put_f64(buf, p[1]);
  }
  io::put_u32(buf, static_cast<std::uint32_t>(c.target_angle_override.size()));
  for (double a : c.target_angle_override) io::put_f64(buf, a);
}

NetworkConfig get_cfg(io::Reader& r) {
  NetworkConfig c;
  c.cells = static_cast<int>(r.u32());
  c.users_per_cell = static_cast<int>(r.u32());
  c.tx_antennas = static_cast<int>(r.u32());
  c.rx_antennas = static_cast<int>(r.u32());
  c.tx_power = r.f64();
  c.noise_comm = r.f64();
  c.noise_sense = r.f64();
  c.cell_radius = r.f64();
  c.guard_radius = r.f64();
  c.pl_comm_exp = r.f64();
  c.pl_sense_exp = r.f64();
  c.rician_factor = r.f64();
  c.rcs = r.f64();
  c.rho = r.f64();
  c.alpha = r.f64();
  c.beta = r.f64();
  const std::uint32_t nbs = r.u32();
  c.bs_positions_override.resize(nbs);
  for (auto& p : c.bs_positions_override) {
    p[0] = r.f64();
    p[1] = r.f64();
  }
  const std::uint32_t nta = r.u32();
  c.target_angle_override.resize(nta);
  for (auto& a : c.target_angle_override) a = r.f64();
  return c;
}

void put_cmat(std::vector<std::uint8_t>& buf, const CMat& m) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) {
      io::put_f64(buf, m(i, j).real());
      io::put_f64(buf, m(i, j).imag());
    }
}

CMat get_cmat(io::Reader& r, int rows, int cols) {
  CMat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const double re = r.f64();
      const double im = r.f64();
      m(i, j) = {re, im};
    }
  return m;
}

}  // namespace

std::vector<std::uint8_t> serialize_dataset(const Dataset& ds) {
  std::vector<std::uint8_t> buf;
  buf.insert(buf.end(), kMagic, kMagic + 8);
  io::put_u8(buf, kVersion);
  put_cfg(buf, ds.cfg);
  io::put_u64(buf, ds.seed);
  io::put_u64(buf, ds.samples.size());
  for (const auto& s : ds.samples) {
    for (double a : s.target_angle) io::put_f64(buf, a);
    for (const auto& h : s.H) put_cmat(buf, h);
    for (const auto& g : s.G) put_cmat(buf, g);
  }
  return buf;
}

Dataset deserialize_dataset(const std::vector<std::uint8_t>& buf) {
  io::Reader r(buf);
  char magic[8];
  r.bytes(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) throw std::runtime_error("dataset: bad magic");
  if (r.u8() != kVersion) throw std::runtime_error("dataset: unsupported version");
  Dataset ds;
  ds.cfg = get_cfg(r);
  ds.cfg.validate();
  ds.seed = r.u64();
  const std::uint64_t n = r.u64();
  ds.samples.resize(n);
  const int m_cells = ds.cfg.cells;
  const int nt = ds.cfg.tx_antennas;
  const int mk = ds.cfg.total_users();
  for (auto& s : ds.samples) {
    s.target_angle.resize(m_cells);
    for (auto& a : s.target_angle) a = r.f64();
    s.H.resize(m_cells);
    for (auto& h : s.H) h = get_cmat(r, nt, mk);
    s.G.resize(m_cells);
    for (auto& g : s.G) g = get_cmat(r, nt, m_cells);
  }
  if (!r.at_end()) throw std::runtime_error("dataset: trailing bytes");
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  io::write_file(path, serialize_dataset(ds));
}

Dataset load_dataset(const std::string& path) { return deserialize_dataset(io::read_file(path)); }

}  // namespace isac
