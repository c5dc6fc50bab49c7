#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "phsim/integrator.hpp"

namespace phsim::cli {

/// t, q (3N), v (3N), C (n_el), H, T_kin, V_int, V_ext, L1, L2, L3,
/// g_inf_norm, newton_iters, power_supplied
std::vector<std::string> trajectory_columns(const MechanicalSystem& sys);

/// One header line plus one row per state, 17 significant digits.
void write_trajectory_csv(std::ostream& os, const MechanicalSystem& sys,
                          const Trajectory& trajectory);

/// Inverse of write_trajectory_csv; the header must match the system.
Trajectory read_trajectory_csv(std::istream& is, const MechanicalSystem& sys);

} // namespace phsim::cli
