// Synthetic tag streams: a continuous-pump entangled-pair source and
// trial-based local-hidden-variable models, including a coincidence-time
// exploit.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "tagbell/lhv_model.hpp"
#include "tagbell/timetag.hpp"

namespace tagbell {

struct JointProbabilities {
  double p_a = 0.0;   // P(A = 1)
  double p_b = 0.0;   // P(B = 1)
  double p_ab = 0.0;  // P(A = 1, B = 1)
};

// Indexed [a][b].
using ProbabilityTable = std::array<std::array<JointProbabilities, 2>, 2>;

// Polarizer angles in radians.
struct Angles {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
};

// Born-rule probabilities for (|HV> + r|VH>)/sqrt(1 + r^2) with each side
// transmitting cos(angle)|H> + sin(angle)|V>. Ideal detectors.
JointProbabilities born_probabilities(double state_r, double alpha, double beta);
ProbabilityTable quantum_probabilities(double state_r, const Angles& angles);

enum class JitterModel { gaussian, two_sided_exponential };

struct SpdcConfig {
  double pair_rate_hz = 20'000.0;
  double eta_a = 0.85;
  double eta_b = 0.85;
  double jitter_sigma_ps = 50'000.0;  // per detector, standard deviation
  JitterModel jitter = JitterModel::gaussian;
  double dark_rate_a_hz = 100.0;
  double dark_rate_b_hz = 100.0;
  double state_r = 0.6074;
  Angles angles{1.408648, -1.008037, 2.979445, 0.562761};
  TimePs setting_block_ps = 10'000'000'000;  // 10 ms per combination block
  TimePs duration_ps = 120'000'000'000'000;  // 120 s
  std::uint64_t seed = 20130412;

  // Throws ValidationError for out-of-range parameters.
  void validate() const;
};

// Equal-length blocks; every run of four blocks visits each setting
// combination once, in a seeded random order.
SettingSchedule balanced_block_schedule(TimePs duration_ps, TimePs block_ps, std::uint64_t seed);

// Poisson pair emission, Born-rule outcomes, efficiency thinning, timing
// jitter and Poisson dark counts. Deterministic given config.seed.
Run simulate_spdc(const SpdcConfig& config);

// Trial k is centred at k * spacing + spacing / 2.
constexpr TimePs trial_origin(std::size_t k, TimePs spacing_ps) {
  return static_cast<TimePs>(k) * spacing_ps + spacing_ps / 2;
}

// Independent uniformly random settings per block of trials and per side.
SettingSchedule random_trial_schedule(std::size_t n_trials, TimePs spacing_ps, std::size_t trials_per_block,
                                      std::uint64_t seed);

// One hidden-variable draw per trial, independent of the settings. A tag is
// emitted at trial_origin + T when the local outcome is 1 and T exists.
// guard_ps is the largest analysis window the caller intends to use; trials
// must be separated by more than 2 * max|T| + guard_ps.
Run simulate_lhv(const LhvModel& model, std::size_t n_trials, TimePs spacing_ps, const SettingSchedule& schedule,
                 std::uint64_t seed, TimePs guard_ps = 0);

inline constexpr TimePs kExploitDeltaPs = 35'000;
inline constexpr TimePs kExploitTauPs = 100'000;
inline constexpr TimePs kExploitSpacingPs = 1'000'000;

// Setting-dependent delays of +-delta on the second setting of each side:
// every pair but (a2, b2) stays inside tau/2 while (a2, b2) drifts 2*delta
// apart. Requires tau/4 <= delta < tau/2; delta = 0 gives the delay-free
// counterpart.
LhvModel build_exploit_model(TimePs delta_ps = kExploitDeltaPs, TimePs tau_design_ps = kExploitTauPs);

// Models shipped with the toolkit, each usable with kExploitTauPs windows and
// kExploitSpacingPs trial spacing.
std::vector<LhvModel> shipped_models();

}  // namespace tagbell
