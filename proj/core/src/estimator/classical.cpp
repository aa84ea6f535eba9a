#include "ctcd/estimator/classical.hpp"

#include <Eigen/Dense>

#include "ctcd/common/error.hpp"

namespace ctcd::estimator {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::LS: return "LS";
    case Method::LMMSE: return "LMMSE";
    case Method::DENOISER: return "DENOISER";
    case Method::CDIFFUSION: return "CDIFFUSION";
    case Method::PERFECT: return "PERFECT";
  }
  return "LS";
}

Method method_from_string(std::string_view s) {
  std::string up(s);
  for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (Method m : {Method::LS, Method::LMMSE, Method::DENOISER, Method::CDIFFUSION, Method::PERFECT})
    if (to_string(m) == up) return m;
  throw ConfigError("unknown estimation method '" + std::string(s) + "'");
}

ChannelEstimate perfect_estimate(const channel::ChannelRealization& h) {
  ChannelEstimate e;
  e.gains_hat = h.gains;
  e.method = Method::PERFECT;
  return e;
}

namespace {

void check_observation(const channel::PilotObservation& obs, int num_subcarriers) {
  const auto n = obs.pilot_positions.size();
  if (n == 0) throw ConfigError("pilot observation has no pilots");
  if (obs.pilot_symbols.size() != n || obs.received.size() != n)
    throw InputError("pilot observation arrays differ in length");
  for (std::size_t i = 0; i < n; ++i) {
    const int p = obs.pilot_positions[i];
    if (p < 0 || p >= num_subcarriers || (i > 0 && p <= obs.pilot_positions[i - 1]))
      throw ConfigError("pilot positions must be strictly increasing within [0, K)");
  }
}

}  // namespace

ChannelEstimate ls_estimate(const channel::PilotObservation& obs, int num_subcarriers) {
  check_observation(obs, num_subcarriers);
  const auto& pos = obs.pilot_positions;
  CVector at_pilots(pos.size());
  for (std::size_t i = 0; i < pos.size(); ++i) at_pilots[i] = obs.received[i] / obs.pilot_symbols[i];

  ChannelEstimate e;
  e.method = Method::LS;
  e.pilot_positions = pos;
  e.noise_variance = obs.noise_variance;
  e.gains_hat.resize(static_cast<std::size_t>(num_subcarriers));
  std::size_t seg = 0;
  for (int k = 0; k < num_subcarriers; ++k) {
    if (k <= pos.front()) {
      e.gains_hat[k] = at_pilots.front();
    } else if (k >= pos.back()) {
      e.gains_hat[k] = at_pilots.back();
    } else {
      while (pos[seg + 1] < k) ++seg;
      const double w = static_cast<double>(k - pos[seg]) / (pos[seg + 1] - pos[seg]);
      e.gains_hat[k] = (1.0 - w) * at_pilots[seg] + w * at_pilots[seg + 1];
    }
  }
  return e;
}

ChannelStatistics ChannelStatistics::estimate(std::span<const channel::ChannelRealization> realizations,
                                              std::size_t min_count) {
  if (realizations.size() < min_count)
    throw ConfigError("channel statistics need at least " + std::to_string(min_count) + " realizations, got " +
                      std::to_string(realizations.size()));
  if (realizations.empty()) throw ConfigError("channel statistics need at least one realization");
  const auto K = static_cast<Eigen::Index>(realizations.front().gains.size());
  Eigen::MatrixXcd H(K, static_cast<Eigen::Index>(realizations.size()));
  for (std::size_t n = 0; n < realizations.size(); ++n) {
    if (static_cast<Eigen::Index>(realizations[n].gains.size()) != K)
      throw InputError("channel statistics: realizations differ in length");
    for (Eigen::Index k = 0; k < K; ++k) H(k, static_cast<Eigen::Index>(n)) = realizations[n].gains[k];
  }
  ChannelStatistics s;
  s.scene_id = realizations.front().scene_id;
  s.count = realizations.size();
  s.covariance = (H * H.adjoint()) / static_cast<double>(realizations.size());
  return s;
}

ChannelEstimate lmmse_estimate(const channel::PilotObservation& obs, const ChannelStatistics& stats,
                               int num_subcarriers) {
  check_observation(obs, num_subcarriers);
  if (stats.covariance.rows() != num_subcarriers)
    throw InputError("channel statistics were estimated for a different K");
  const auto n = static_cast<Eigen::Index>(obs.pilot_positions.size());
  Eigen::MatrixXcd Rpp(n, n), Rhp(num_subcarriers, n);
  Eigen::VectorXcd yp(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int pi = obs.pilot_positions[i];
    yp(i) = obs.received[i] / obs.pilot_symbols[i];
    for (Eigen::Index j = 0; j < n; ++j) Rpp(i, j) = stats.covariance(pi, obs.pilot_positions[j]);
    for (int k = 0; k < num_subcarriers; ++k) Rhp(k, i) = stats.covariance(k, pi);
  }
  Rpp.diagonal().array() += obs.noise_variance;
  Eigen::LDLT<Eigen::MatrixXcd> ldlt(Rpp);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().real().minCoeff() <= 0.0)
    throw NumericalError("LMMSE pilot system is singular");
  const Eigen::VectorXcd h = Rhp * ldlt.solve(yp);

  ChannelEstimate e;
  e.method = Method::LMMSE;
  e.pilot_positions = obs.pilot_positions;
  e.noise_variance = obs.noise_variance;
  e.gains_hat.assign(h.data(), h.data() + h.size());
  return e;
}

CVector compensate(std::span<const cplx> y, const ChannelEstimate& est, double noise_variance) {
  if (y.size() != est.gains_hat.size()) throw InputError("compensate: payload and estimate lengths differ");
  CVector x(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) {
    const cplx h = est.gains_hat[k];
    const double den = std::norm(h) + noise_variance;
    x[k] = den < kCompensationGuard ? cplx{} : y[k] * std::conj(h) / den;
  }
  return x;
}

}  // namespace ctcd::estimator
