#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "quadsafe/barriers.hpp"
#include "quadsafe/dynamics.hpp"

// Numerical ground truth for the barrier chains. Nothing here calls into the
// chain code or the simulator's integrator: the flow has its own right-hand
// side and h is re-evaluated from the raw state.
namespace quadsafe::verify {

struct OracleSettings {
    double integration_step = 1e-4;  // RK4 step of the frozen-input flow [s]
    // Difference step per derivative order 1..4. Each estimate is Richardson
    // extrapolated from steps s, 2s and 4s.
    std::array<double, 4> difference_step{1e-3, 2e-3, 4e-3, 8e-3};
    double relative_floor = 1e-3;  // denominator floor for relative errors
};

// d^k/dt^k h(x(t)) at t = 0 for k = 0..order, with u held constant.
Eigen::VectorXd flow_derivatives(const QuadState& state, const ControlInput& u, const BarrierSpec& spec,
                                 const QuadParams& params, int order, const OracleSettings& settings = {});

double relative_error(double numeric, double analytic, double floor);

struct ChainSample {
    QuadState state;
    ControlInput input;
};

// State strictly inside the barrier's safe set, moderate tilt so the lateral
// chain is defined, and a frozen input with thrust above the chain floor.
ChainSample random_sample(const BarrierSpec& spec, const QuadParams& params, std::mt19937_64& rng);

struct ChainReport {
    BarrierDomain domain;
    int samples = 0;
    double max_rel_lower = 0.0;  // over H entries 1..delta-1
    double max_rel_top = 0.0;    // delta-th derivative vs L_f^d h + L_g L_f^{d-1} h u
};

// Checks one chain at `samples` random in-set states.
ChainReport check_chain(BarrierDomain domain, int samples, std::uint64_t seed, const QuadParams& params = {},
                        const OracleSettings& settings = {});

std::vector<ChainReport> check_all_chains(int samples, std::uint64_t seed, const QuadParams& params = {},
                                          const OracleSettings& settings = {});

// Spec and gains used by check_chain for each domain.
BarrierSpec oracle_spec(BarrierDomain domain);

}  // namespace quadsafe::verify
