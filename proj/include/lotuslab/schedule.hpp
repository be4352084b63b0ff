#pragma once

#include <string>
#include <vector>

namespace lotuslab {

enum class ScheduleKind { Linear, ScaledLinear };

ScheduleKind schedule_kind_from_string(const std::string& s);
std::string to_string(ScheduleKind k);

/// Beta sequence and exact running products alpha_bar over T steps.
/// Index convention: betas[t-1] and alpha_bars[t-1] hold step t.
struct NoiseSchedule {
    int T = 0;
    double beta_start = 0.0;
    double beta_end = 0.0;
    ScheduleKind kind = ScheduleKind::ScaledLinear;
    std::vector<double> betas;
    std::vector<double> alpha_bars;

    double alpha_bar(int t) const;  // alpha_bar(0) == 1 by convention
};

// Defaults follow the base-model convention; the experiment file records them.
inline constexpr int kDefaultT = 1000;
inline constexpr double kDefaultBetaStart = 8.5e-4;
inline constexpr double kDefaultBetaEnd = 1.2e-2;

NoiseSchedule make_schedule(int T, double beta_start, double beta_end, ScheduleKind kind);

inline NoiseSchedule default_schedule() {
    return make_schedule(kDefaultT, kDefaultBetaStart, kDefaultBetaEnd, ScheduleKind::ScaledLinear);
}

/// Evenly spaced training subsequence {k, 2k, ..., T} with k = T / T'.
struct StepSubsequence {
    int T_prime = 0;
    int k = 0;
    std::vector<int> steps;  // ascending, last element is T
};

StepSubsequence subsequence(int T, int T_prime);

/// Steps actually used at inference: the training subsequence when
/// T' <= 50, otherwise a 50-step subsequence.
StepSubsequence inference_subsequence(int T, int T_prime);

struct DdimCoeffs {
    double sqrt_abar_prev = 0.0;  // sqrt(alpha_bar at tau_prev), 1 at tau_prev = 0
    double w_tau = 0.0;           // direction weight sqrt(1 - abar_prev - sigma^2)
    double sigma_tau = 0.0;       // 0 when deterministic
};

/// Coefficients for one denoising step tau -> tau_prev. The stochastic
/// sigma uses the standard eta=1 variance-preserving form; it is an
/// extension and stays off unless deterministic=false.
DdimCoeffs ddim_coeffs(const NoiseSchedule& s, int tau, int tau_prev, bool deterministic);

}  // namespace lotuslab
