#pragma once

#include "tbsim/constraints.hpp"
#include "tbsim/contact.hpp"
#include "tbsim/gait.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tbsim {

enum class IntegratorKind { RK4, SemiImplicitEuler };

struct SimConfig {
  double dt_physics = 1e-4;    // s
  double control_rate = 500.0; // Hz, zero-order-held controller
  double log_rate = 500.0;     // Hz, trajectory sampling
  double duration = 3.5;       // s
  IntegratorKind integrator = IntegratorKind::RK4;
  bool gantry_enabled = true;
  bool contact_enabled = true;
  bool lock_joints = false;  // hold all joint coordinates at zero (passive drop rig)
  double baumgarte_alpha = 20.0;
  double baumgarte_beta = 100.0;
  std::uint64_t seed = 0;      // reserved for randomized initial perturbations
  double initial_perturbation = 0.0;  // uniform joint-angle perturbation bound, rad
  GeneralizedState initial_state;

  void validate(const std::string& where = "<sim>") const;
};

/// Log metadata carried in the CSV comment block.
struct LogMeta {
  int schema_version = 1;
  std::string tool_version;
  std::string scenario;
  std::string config_hash;
  double sample_rate = 0.0;
  std::string failure;      // empty when the run completed normally
  std::string config_json;  // canonical config, one line
};

/// Uniformly sampled trajectory. Column names carry units as name[unit];
/// the schema (names and order) is fixed per schema_version.
struct TrajectoryLog {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  LogMeta meta;

  int col(const std::string& name) const;  // throws SchemaError when missing
  bool has_col(const std::string& name) const;
  double at(std::size_t row, const std::string& name) const;
  std::vector<double> series(const std::string& name) const;
  std::size_t size() const { return rows.size(); }

  static std::vector<std::string> schema_v1();
};

/// One integration step of the closed-loop system, exposed for tests.
/// Contact forces are evaluated inside each integrator stage; controller
/// torques and thrust are zero-order-held between control ticks.
class SimEngine {
 public:
  SimEngine(const SimConfig& sim, const RobotParams& robot, const ContactParams& contact,
            const GaitConfig& gait, const ControllerGains& gains, Scenario scenario);

  /// Advances one physics step (running the controller first when due).
  void step();

  /// Runs to sim.duration, logging at log_rate. Terminates early on
  /// |pitch| > 80 deg or solver failure, recording the failure marker.
  TrajectoryLog run();

  const GeneralizedState& state() const { return state_; }
  const GaitController& controller() const { return controller_; }

  /// Ground force at the current state for one foot (zero when contact is
  /// disabled).
  ContactState foot_contact(Side side) const;

 private:
  Vec12 accel(const GeneralizedState& s, const ControlInput& u, Vec6* ground_forces) const;
  ControlInput assemble_input(const GeneralizedState& s) const;
  void control_tick();
  void integrate();
  void log_row(TrajectoryLog& log);

  SimConfig sim_;
  RobotParams robot_;
  ContactParams contact_;
  ConstraintSet constraints_;
  GaitController controller_;
  Scenario scenario_;
  GeneralizedState state_;
  GaitController::Output ctrl_out_;  // zero-order-held
  std::int64_t step_index_ = 0;
  int steps_per_control_ = 1;
  int steps_per_log_ = 1;
  std::string failure_;
};

/// Convenience wrapper: build the engine, run, stamp metadata.
TrajectoryLog simulate(const SimConfig& sim, const RobotParams& robot,
                       const ContactParams& contact, const GaitConfig& gait,
                       const ControllerGains& gains, Scenario scenario);

}  // namespace tbsim
