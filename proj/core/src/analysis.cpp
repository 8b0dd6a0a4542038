#include "tbsim/analysis.hpp"

#include "tbsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tbsim {

namespace {

constexpr double kRad2Deg = 180.0 / M_PI;

double effective_kt(const RobotParams& p) {
  return p.torque_constant_includes_gearbox ? p.K_t : p.K_t * p.gear_ratio;
}

std::vector<double> cumtrapz(const std::vector<double>& t, const std::vector<double>& y) {
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i)
    out[i] = out[i - 1] + 0.5 * (y[i] + y[i - 1]) * (t[i] - t[i - 1]);
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

/// Row-indexed state that tolerates arbitrary column order.
GeneralizedState state_from_row_by_name(const TrajectoryLog& log, std::size_t i,
                                        const std::vector<int>& qcols,
                                        const std::vector<int>& qdcols, int tcol) {
  GeneralizedState s;
  s.t = log.rows[i][static_cast<std::size_t>(tcol)];
  for (int k = 0; k < 12; ++k) {
    s.q[k] = log.rows[i][static_cast<std::size_t>(qcols[static_cast<std::size_t>(k)])];
    s.qd[k] = log.rows[i][static_cast<std::size_t>(qdcols[static_cast<std::size_t>(k)])];
  }
  return s;
}

std::vector<int> q_columns(const TrajectoryLog& log) {
  static const char* names[12] = {"pb_x[m]",    "pb_y[m]",    "pb_z[m]",    "eul_x[rad]",
                                  "eul_y[rad]", "eul_z[rad]", "gam_L[rad]", "gam_R[rad]",
                                  "phih_L[rad]", "phih_R[rad]", "phik_L[rad]", "phik_R[rad]"};
  std::vector<int> c;
  for (auto* n : names) c.push_back(log.col(n));
  return c;
}

std::vector<int> qd_columns(const TrajectoryLog& log) {
  static const char* names[12] = {"d_pb_x[m/s]",    "d_pb_y[m/s]",    "d_pb_z[m/s]",
                                  "d_eul_x[rad/s]", "d_eul_y[rad/s]", "d_eul_z[rad/s]",
                                  "d_gam_L[rad/s]", "d_gam_R[rad/s]", "d_phih_L[rad/s]",
                                  "d_phih_R[rad/s]", "d_phik_L[rad/s]", "d_phik_R[rad/s]"};
  std::vector<int> c;
  for (auto* n : names) c.push_back(log.col(n));
  return c;
}

std::vector<PhaseInterval> intervals_from_series(const std::vector<double>& t,
                                                 const std::vector<int>& phase) {
  std::vector<PhaseInterval> out;
  if (phase.empty()) return out;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= phase.size(); ++i) {
    if (i == phase.size() || phase[i] != phase[begin]) {
      PhaseInterval pi;
      pi.phase = static_cast<JumpPhase>(phase[begin]);
      pi.row_begin = begin;
      pi.row_end = i;
      pi.t_begin = t[begin];
      pi.t_end = (i < t.size()) ? t[i] : t.back();
      out.push_back(pi);
      begin = i;
    }
  }
  return out;
}

}  // namespace

void AnalysisConfig::validate(const std::string& where) const {
  if (!(window > 0)) throw ConfigError(where, "analysis.window", "must be > 0");
  if (!(cycle_hysteresis >= 0 && cycle_hysteresis < 1))
    throw ConfigError(where, "analysis.cycle_hysteresis", "must be in [0, 1)");
  if (!(envelope_rel > 0)) throw ConfigError(where, "analysis.envelope_rel", "must be > 0");
  if (!std::isfinite(K_i)) throw ConfigError(where, "analysis.K_i", "must be finite");
  if (!std::isfinite(thrust_pitch_offset))
    throw ConfigError(where, "analysis.thrust_pitch_offset", "must be finite");
}

FootVectors foot_displacement(const TrajectoryLog& log, const RobotParams& params,
                              const GaitConfig& gait, Side side) {
  FootVectors fv;
  fv.P_NB = nominal_foot_point(gait, side);
  const auto qc = q_columns(log);
  const int tcol = log.col("t[s]");
  fv.t.reserve(log.size());
  fv.P_BF.reserve(log.size());
  fv.P_FN.reserve(log.size());
  for (std::size_t i = 0; i < log.size(); ++i) {
    Vec6 joints;
    for (int k = 0; k < 6; ++k)
      joints[k] = log.rows[i][static_cast<std::size_t>(qc[static_cast<std::size_t>(6 + k)])];
    const Vec3 p_bf = body_frame_foot(joints, params, side);
    fv.t.push_back(log.rows[i][static_cast<std::size_t>(tcol)]);
    fv.P_BF.push_back(p_bf);
    fv.P_FN.push_back(p_bf - fv.P_NB);
  }
  return fv;
}

std::vector<StepParamsEstimate> extract_step_params(const FootVectors& fv,
                                                    const std::vector<std::size_t>& boundaries) {
  if (boundaries.size() < 2)
    throw InsufficientData("extract_step_params: need at least one complete cycle");
  std::vector<StepParamsEstimate> out;
  for (std::size_t c = 0; c + 1 < boundaries.size(); ++c) {
    const std::size_t a = boundaries[c], b = boundaries[c + 1];
    if (b <= a || b > fv.P_FN.size())
      throw InsufficientData("extract_step_params: bad cycle boundaries");
    StepParamsEstimate e;
    e.z_top = -std::numeric_limits<double>::infinity();
    e.z_bottom = std::numeric_limits<double>::infinity();
    e.x_fore = -std::numeric_limits<double>::infinity();
    e.x_hind = std::numeric_limits<double>::infinity();
    for (std::size_t i = a; i < b; ++i) {
      e.z_top = std::max(e.z_top, fv.P_FN[i].z());
      e.z_bottom = std::min(e.z_bottom, fv.P_FN[i].z());
      e.x_fore = std::max(e.x_fore, fv.P_FN[i].x());
      e.x_hind = std::min(e.x_hind, fv.P_FN[i].x());
    }
    e.t_begin = fv.t[a];
    e.t_end = fv.t[b - 1];
    out.push_back(e);
  }
  return out;
}

TrackingStats joint_tracking_stats(const TrajectoryLog& log, const AnalysisConfig& cfg) {
  TrackingStats ts;
  const char* group_names[3] = {"frontal", "sagittal", "knee"};
  const char* act[3][2] = {{"gam_L[rad]", "gam_R[rad]"},
                           {"phih_L[rad]", "phih_R[rad]"},
                           {"phik_L[rad]", "phik_R[rad]"}};
  const char* des[3][2] = {{"des_gam_L[rad]", "des_gam_R[rad]"},
                           {"des_phih_L[rad]", "des_phih_R[rad]"},
                           {"des_phik_L[rad]", "des_phik_R[rad]"}};
  const auto t = log.series("t[s]");
  for (int g = 0; g < 3; ++g) {
    const auto aL = log.series(act[g][0]);
    const auto aR = log.series(act[g][1]);
    const auto dL = log.series(des[g][0]);
    const auto dR = log.series(des[g][1]);
    std::vector<double> err(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
      err[i] = 0.5 * ((dL[i] - aL[i]) + (dR[i] - aR[i])) * kRad2Deg;

    auto& grp = ts.groups[static_cast<std::size_t>(g)];
    grp.name = group_names[g];
    grp.mean_deg = mean_of(err);
    grp.std_deg = std_of(err);

    // Rolling stats via cumulative sums.
    const double dt = t.size() > 1 ? (t.back() - t.front()) / double(t.size() - 1) : 1.0;
    const auto w = static_cast<std::size_t>(std::max(1.0, std::round(cfg.window / dt)));
    std::vector<double> cs(t.size() + 1, 0.0), cs2(t.size() + 1, 0.0);
    for (std::size_t i = 0; i < t.size(); ++i) {
      cs[i + 1] = cs[i] + err[i];
      cs2[i + 1] = cs2[i] + err[i] * err[i];
    }
    for (std::size_t i = 0; i + w <= t.size(); i += std::max<std::size_t>(1, w / 4)) {
      const double n = static_cast<double>(w);
      const double m = (cs[i + w] - cs[i]) / n;
      const double v = std::max(0.0, (cs2[i + w] - cs2[i]) / n - m * m);
      grp.window_t.push_back(t[i + w / 2]);
      grp.window_mean_deg.push_back(m);
      grp.window_std_deg.push_back(std::sqrt(v));
    }
  }
  return ts;
}

double torque_from_current(double current, const RobotParams& params) {
  return effective_kt(params) * current;
}

EnergyBreakdown leg_energy(const TrajectoryLog& log, const RobotParams& params,
                           const AnalysisConfig& cfg) {
  EnergyBreakdown eb;
  eb.t = log.series("t[s]");
  static const char* tau_cols[6] = {"tau_gam_L[Nm]", "tau_gam_R[Nm]", "tau_phih_L[Nm]",
                                    "tau_phih_R[Nm]", "tau_phik_L[Nm]", "tau_phik_R[Nm]"};
  static const char* cur_cols[6] = {"i_gam_L[A]", "i_gam_R[A]", "i_phih_L[A]",
                                    "i_phih_R[A]", "i_phik_L[A]", "i_phik_R[A]"};
  static const char* qd_cols[6] = {"d_gam_L[rad/s]", "d_gam_R[rad/s]", "d_phih_L[rad/s]",
                                   "d_phih_R[rad/s]", "d_phik_L[rad/s]", "d_phik_R[rad/s]"};
  std::vector<double> power(eb.t.size(), 0.0);
  for (int j = 0; j < 6; ++j) {
    const auto tau = cfg.torque_from_current ? log.series(cur_cols[j]) : log.series(tau_cols[j]);
    const auto qd = log.series(qd_cols[j]);
    const double scale = cfg.torque_from_current ? effective_kt(params) : 1.0;
    for (std::size_t i = 0; i < power.size(); ++i) power[i] += scale * tau[i] * qd[i];
  }
  const double sign = cfg.paper_sign ? -1.0 : 1.0;
  eb.E_leg = cumtrapz(eb.t, power);
  for (double& e : eb.E_leg) e *= cfg.K_i * sign;
  eb.E_thruster.assign(eb.t.size(), 0.0);
  eb.E_thruster_kgfm.assign(eb.t.size(), 0.0);

  for (const auto& pi : phase_segmentation(log)) {
    EnergyBreakdown::PhaseTotal pt;
    pt.phase = pi.phase;
    pt.t_begin = pi.t_begin;
    pt.t_end = pi.t_end;
    const std::size_t last = std::min(pi.row_end, eb.E_leg.size()) - 1;
    pt.leg_J = eb.E_leg[last] - eb.E_leg[pi.row_begin];
    pt.thruster_J = 0.0;
    eb.per_phase.push_back(pt);
  }
  return eb;
}

EnergyBreakdown thruster_energy(const TrajectoryLog& log, const AnalysisConfig& cfg) {
  EnergyBreakdown eb;
  eb.t = log.series("t[s]");
  const auto mag_l = log.series("ut_mag_L[N]");
  const auto mag_r = log.series("ut_mag_R[N]");
  const auto theta = log.series("theta_p[rad]");
  const auto vz = log.series("d_pb_z[m/s]");
  std::vector<double> power(eb.t.size());
  for (std::size_t i = 0; i < power.size(); ++i) {
    const double fz =
        (mag_l[i] + mag_r[i]) * std::sin(theta[i] + cfg.thrust_pitch_offset);
    power[i] = fz * vz[i];
  }
  const double sign = cfg.paper_sign ? -1.0 : 1.0;
  eb.E_thruster = cumtrapz(eb.t, power);
  for (double& e : eb.E_thruster) e *= sign;
  eb.E_thruster_kgfm.resize(eb.t.size());
  for (std::size_t i = 0; i < eb.t.size(); ++i)
    eb.E_thruster_kgfm[i] = eb.E_thruster[i] / kJoulePerKgfM;
  eb.E_leg.assign(eb.t.size(), 0.0);

  for (const auto& pi : phase_segmentation(log)) {
    EnergyBreakdown::PhaseTotal pt;
    pt.phase = pi.phase;
    pt.t_begin = pi.t_begin;
    pt.t_end = pi.t_end;
    const std::size_t last = std::min(pi.row_end, eb.E_thruster.size()) - 1;
    pt.thruster_J = eb.E_thruster[last] - eb.E_thruster[pi.row_begin];
    pt.leg_J = 0.0;
    eb.per_phase.push_back(pt);
  }
  return eb;
}

EnergyBreakdown energy_breakdown(const TrajectoryLog& log, const RobotParams& params,
                                 const AnalysisConfig& cfg) {
  EnergyBreakdown leg = leg_energy(log, params, cfg);
  const EnergyBreakdown thr = thruster_energy(log, cfg);
  leg.E_thruster = thr.E_thruster;
  leg.E_thruster_kgfm = thr.E_thruster_kgfm;
  for (std::size_t i = 0; i < leg.per_phase.size() && i < thr.per_phase.size(); ++i)
    leg.per_phase[i].thruster_J = thr.per_phase[i].thruster_J;
  return leg;
}

AccelDecomposition acceleration_decomposition(const TrajectoryLog& log, const RobotParams& params,
                                              const AnalysisConfig& cfg) {
  AccelDecomposition ad;
  ad.t = log.series("t[s]");
  const auto a_tot = log.series("a_tot[m/s2]");
  const auto mag_l = log.series("ut_mag_L[N]");
  const auto mag_r = log.series("ut_mag_R[N]");
  const auto theta = log.series("theta_p[rad]");
  const double sign = cfg.paper_sign ? -1.0 : 1.0;
  ad.a_tot.resize(ad.t.size());
  ad.a_uth.resize(ad.t.size());
  ad.a_l.resize(ad.t.size());
  ad.a_g.resize(ad.t.size());
  for (std::size_t i = 0; i < ad.t.size(); ++i) {
    const double uth = (mag_l[i] + mag_r[i]) * std::sin(theta[i] + cfg.thrust_pitch_offset) /
                       params.total_mass;
    const double ag = -params.g;
    ad.a_tot[i] = sign * a_tot[i];
    ad.a_uth[i] = sign * uth;
    ad.a_g[i] = sign * ag;
    // Leg contribution defined by closure: exact by construction.
    ad.a_l[i] = ad.a_tot[i] - ad.a_uth[i] - ad.a_g[i];
  }
  return ad;
}

std::vector<std::size_t> detect_cycles(const std::vector<double>& pos,
                                       const std::vector<double>& vel, double hysteresis) {
  std::vector<std::size_t> out;
  if (pos.size() < 3 || vel.size() != pos.size()) return out;
  const double span = *std::max_element(pos.begin(), pos.end()) -
                      *std::min_element(pos.begin(), pos.end());
  const double min_swing = hysteresis * span;
  std::size_t last = 0;
  bool have_last = false;
  for (std::size_t i = 1; i < vel.size(); ++i) {
    if (!(vel[i - 1] < 0.0 && vel[i] >= 0.0)) continue;
    if (have_last) {
      double lo = pos[i], hi = pos[i];
      for (std::size_t k = last; k <= i; ++k) {
        lo = std::min(lo, pos[k]);
        hi = std::max(hi, pos[k]);
      }
      if (hi - lo < min_swing) continue;  // noise crossing, merge
    }
    out.push_back(i);
    last = i;
    have_last = true;
  }
  return out;
}

LimitCycleReport limit_cycle_metrics(const std::vector<double>& t, const std::vector<double>& pos,
                                     const std::vector<double>& vel,
                                     const std::vector<std::size_t>& boundaries,
                                     const AnalysisConfig& cfg, const std::string& name) {
  (void)t;
  if (boundaries.size() < 4)
    throw InsufficientData("limit_cycle_metrics: need at least 3 complete cycles");
  LimitCycleReport rep;
  rep.coordinate = name;
  rep.cycles = static_cast<int>(boundaries.size()) - 1;

  rep.pos_min = *std::min_element(pos.begin() + long(boundaries.front()),
                                  pos.begin() + long(boundaries.back()));
  rep.pos_max = *std::max_element(pos.begin() + long(boundaries.front()),
                                  pos.begin() + long(boundaries.back()));
  rep.vel_min = *std::min_element(vel.begin() + long(boundaries.front()),
                                  vel.begin() + long(boundaries.back()));
  rep.vel_max = *std::max_element(vel.begin() + long(boundaries.front()),
                                  vel.begin() + long(boundaries.back()));

  for (std::size_t c = 0; c + 1 < boundaries.size(); ++c) {
    double mx = -std::numeric_limits<double>::infinity();
    double mn = std::numeric_limits<double>::infinity();
    for (std::size_t i = boundaries[c]; i < boundaries[c + 1]; ++i) {
      mx = std::max(mx, pos[i]);
      mn = std::min(mn, pos[i]);
    }
    rep.cycle_max.push_back(mx);
    rep.cycle_min.push_back(mn);
  }
  rep.extrema_std = std_of(rep.cycle_max);

  // Closure score: mean pointwise distance between phase-normalized
  // consecutive loops, in range-normalized (pos, vel) coordinates, divided
  // by the loop diameter.
  const double pos_range = std::max(rep.pos_max - rep.pos_min, 1e-12);
  const double vel_range = std::max(rep.vel_max - rep.vel_min, 1e-12);
  constexpr int kSamples = 64;
  auto resample = [&](std::size_t a, std::size_t b, int k) -> Vec2 {
    const double u = static_cast<double>(k) / (kSamples - 1);
    const double idx = static_cast<double>(a) + u * (static_cast<double>(b - a) - 1.0);
    const auto i0 = static_cast<std::size_t>(idx);
    const std::size_t i1 = std::min(i0 + 1, b - 1);
    const double w = idx - static_cast<double>(i0);
    return Vec2(((1 - w) * pos[i0] + w * pos[i1]) / pos_range,
                ((1 - w) * vel[i0] + w * vel[i1]) / vel_range);
  };
  std::vector<double> pair_scores;
  for (std::size_t c = 0; c + 2 < boundaries.size(); ++c) {
    double dist = 0.0;
    Vec2 lo(1e300, 1e300), hi(-1e300, -1e300);
    for (int k = 0; k < kSamples; ++k) {
      const Vec2 p0 = resample(boundaries[c], boundaries[c + 1], k);
      const Vec2 p1 = resample(boundaries[c + 1], boundaries[c + 2], k);
      dist += (p1 - p0).norm();
      lo = lo.cwiseMin(p0.cwiseMin(p1));
      hi = hi.cwiseMax(p0.cwiseMax(p1));
    }
    dist /= kSamples;
    const double diam = std::max((hi - lo).norm(), 1e-12);
    pair_scores.push_back(dist / diam);
  }
  rep.closure_score = mean_of(pair_scores);

  const double med_max = median(rep.cycle_max);
  const double med_min = median(rep.cycle_min);
  const double amp = std::max(med_max - med_min, 1e-9);
  rep.bounded = true;
  for (std::size_t c = 0; c < rep.cycle_max.size(); ++c) {
    if (std::abs(rep.cycle_max[c] - med_max) > cfg.envelope_rel * amp ||
        std::abs(rep.cycle_min[c] - med_min) > cfg.envelope_rel * amp)
      rep.bounded = false;
  }
  return rep;
}

LimitCycleReport limit_cycle_metrics(const TrajectoryLog& log, const std::string& pos_col,
                                     const std::string& vel_col, const AnalysisConfig& cfg) {
  const auto t = log.series("t[s]");
  const auto pos = log.series(pos_col);
  const auto vel = log.series(vel_col);
  const auto b = detect_cycles(pos, vel, cfg.cycle_hysteresis);
  return limit_cycle_metrics(t, pos, vel, b, cfg, pos_col);
}

std::vector<PhaseInterval> phase_segmentation(const TrajectoryLog& log) {
  const auto t = log.series("t[s]");
  if (log.has_col("jump_phase[-]")) {
    const auto ph = log.series("jump_phase[-]");
    std::vector<int> phase(ph.size());
    for (std::size_t i = 0; i < ph.size(); ++i) phase[i] = static_cast<int>(std::lround(ph[i]));
    return intervals_from_series(t, phase);
  }

  // Fallback: re-derive the phases from contact transitions. Ballistic is a
  // both-feet-off run; TouchDown follows for a settle window; any contact
  // interval directly preceding a Ballistic run is TakeOff.
  const auto cl = log.series("contact_L[-]");
  const auto cr = log.series("contact_R[-]");
  const double dt = t.size() > 1 ? (t.back() - t.front()) / double(t.size() - 1) : 1.0;
  const auto settle_rows = static_cast<std::size_t>(std::round(0.4 / dt));
  const auto takeoff_rows = static_cast<std::size_t>(std::round(0.8 / dt));

  std::vector<int> phase(t.size(), static_cast<int>(JumpPhase::Idle));
  std::size_t i = 0;
  while (i < t.size()) {
    if (cl[i] < 0.5 && cr[i] < 0.5) {
      std::size_t j = i;
      while (j < t.size() && cl[j] < 0.5 && cr[j] < 0.5) ++j;
      for (std::size_t k = i; k < j; ++k) phase[k] = static_cast<int>(JumpPhase::Ballistic);
      const std::size_t take_begin = i > takeoff_rows ? i - takeoff_rows : 0;
      for (std::size_t k = take_begin; k < i; ++k)
        phase[k] = static_cast<int>(JumpPhase::TakeOff);
      const std::size_t touch_end = std::min(t.size(), j + settle_rows);
      for (std::size_t k = j; k < touch_end; ++k)
        phase[k] = static_cast<int>(JumpPhase::TouchDown);
      i = touch_end;
    } else {
      ++i;
    }
  }
  return intervals_from_series(t, phase);
}

std::vector<std::size_t> step_cycle_boundaries(const TrajectoryLog& log, Side side,
                                               double hysteresis) {
  const std::string phase_col =
      side == Side::Left ? "leg_phase_L[-]" : "leg_phase_R[-]";
  if (log.has_col(phase_col)) {
    const auto ph = log.series(phase_col);
    std::vector<std::size_t> b;
    for (std::size_t i = 1; i < ph.size(); ++i)
      if (ph[i - 1] > 0.5 && ph[i] < 0.5) b.push_back(i);  // touch-down events
    if (b.size() >= 2) return b;
  }
  const std::string zcol =
      side == Side::Left ? "pf_b_L_z[m]" : "pf_b_R_z[m]";
  const auto z = log.series(zcol);
  const auto t = log.series("t[s]");
  std::vector<double> vz(z.size(), 0.0);
  for (std::size_t i = 1; i + 1 < z.size(); ++i) vz[i] = (z[i + 1] - z[i - 1]) / (t[i + 1] - t[i - 1]);
  return detect_cycles(z, vz, hysteresis);
}

EnergyAudit energy_audit(const TrajectoryLog& log, const RobotParams& params) {
  if (log.size() < 2) throw InsufficientData("energy_audit: need at least two rows");
  const auto qc = q_columns(log);
  const auto qdc = qd_columns(log);
  const int tcol = log.col("t[s]");

  const auto t = log.series("t[s]");
  std::vector<double> p_leg(t.size()), p_thr(t.size()), p_con(t.size());

  static const char* tau_cols[6] = {"tau_gam_L[Nm]", "tau_gam_R[Nm]", "tau_phih_L[Nm]",
                                    "tau_phih_R[Nm]", "tau_phik_L[Nm]", "tau_phik_R[Nm]"};
  std::vector<std::vector<double>> tau;
  for (auto* c : tau_cols) tau.push_back(log.series(c));
  const auto mag_l = log.series("ut_mag_L[N]");
  const auto mag_r = log.series("ut_mag_R[N]");
  std::vector<std::vector<double>> fg;
  for (const char* s : {"L", "R"})
    for (const char* a : {"x", "y", "z"})
      fg.push_back(log.series("fg_" + std::string(s) + "_" + a + "[N]"));

  GeneralizedState s0 = state_from_row_by_name(log, 0, qc, qdc, tcol);
  GeneralizedState s1 = state_from_row_by_name(log, log.size() - 1, qc, qdc, tcol);

  for (std::size_t i = 0; i < t.size(); ++i) {
    const GeneralizedState s = state_from_row_by_name(log, i, qc, qdc, tcol);
    double pl = 0.0;
    for (int j = 0; j < 6; ++j) pl += tau[static_cast<std::size_t>(j)][i] * s.qd[coord::kJointBase + j];
    p_leg[i] = pl;

    const Mat3 R_B = body_rotation(s.body_euler());
    const Vec3 dir = params.thrust_frame == ThrustFrame::Body ? Vec3(R_B.col(2)) : Vec3(0, 0, 1);
    const double mags[2] = {mag_l[i], mag_r[i]};
    double pt = 0.0, pc = 0.0;
    for (int side = 0; side < 2; ++side) {
      const LegKinematics k = leg_kinematics(s, params, static_cast<Side>(side));
      const Vec3 v_T = k.Jv_T * s.qd;
      pt += (mags[side] * dir).dot(v_T);
      const Vec3 f(fg[static_cast<std::size_t>(3 * side)][i],
                   fg[static_cast<std::size_t>(3 * side + 1)][i],
                   fg[static_cast<std::size_t>(3 * side + 2)][i]);
      const Vec3 v_F = k.Jv_F * s.qd;
      pc += f.dot(v_F);
    }
    p_thr[i] = pt;
    p_con[i] = pc;
  }

  EnergyAudit ea;
  ea.dE_mech = (kinetic_energy(s1, params) + potential_energy(s1, params)) -
               (kinetic_energy(s0, params) + potential_energy(s0, params));
  ea.E_leg_work = cumtrapz(t, p_leg).back();
  ea.E_thruster_work = cumtrapz(t, p_thr).back();
  ea.E_contact_work = cumtrapz(t, p_con).back();
  ea.residual = ea.dE_mech - (ea.E_leg_work + ea.E_thruster_work + ea.E_contact_work);
  ea.residual_rel = std::abs(ea.residual) / std::max(1.0, std::abs(ea.dE_mech));
  return ea;
}

}  // namespace tbsim
