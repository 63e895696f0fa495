#pragma once

#include "dnf/rom/rom.hpp"
#include "dnf/solvers/harmonic_balance.hpp"

#include <vector>

namespace dnf::solvers {

/**
 * Physical response of a reduced periodic solution.
 *
 * The reduced Fourier coefficients `x` are synthesized at `samples` equally
 * spaced phases, mapped through the nonlinear reconstruction, and the largest
 * |U_j| of every free DOF is returned. Each sampled maximum is refined by a
 * parabola through its periodic neighbours.
 */
Vec physical_amplitude(const HarmonicBalance& hb, const rom::RomEvaluator& rom, const Vec& x, double omega,
                       int samples = 64);

/// Per-point physical amplitude of a branch: one DOF when `dof >= 0`, the max over all DOFs otherwise.
std::vector<double> branch_physical_amplitude(const HarmonicBalance& hb, const rom::RomEvaluator& rom,
                                              const Branch& branch, Index dof = -1, int samples = 64);

}  // namespace dnf::solvers
