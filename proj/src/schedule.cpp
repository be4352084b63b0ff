#include "lotuslab/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace lotuslab {

ScheduleKind schedule_kind_from_string(const std::string& s) {
    if (s == "linear") return ScheduleKind::Linear;
    if (s == "scaled_linear") return ScheduleKind::ScaledLinear;
    throw std::invalid_argument("unknown schedule kind: " + s);
}

std::string to_string(ScheduleKind k) {
    return k == ScheduleKind::Linear ? "linear" : "scaled_linear";
}

double NoiseSchedule::alpha_bar(int t) const {
    if (t == 0) return 1.0;
    if (t < 1 || t > T) throw std::out_of_range("NoiseSchedule::alpha_bar: t out of range");
    return alpha_bars[t - 1];
}

NoiseSchedule make_schedule(int T, double beta_start, double beta_end, ScheduleKind kind) {
    if (T < 1) throw std::invalid_argument("make_schedule: T must be >= 1");
    if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0))
        throw std::invalid_argument("make_schedule: need 0 < beta_start <= beta_end < 1");
    NoiseSchedule s;
    s.T = T;
    s.beta_start = beta_start;
    s.beta_end = beta_end;
    s.kind = kind;
    s.betas.resize(T);
    s.alpha_bars.resize(T);
    for (int t = 1; t <= T; ++t) {
        const double u = T == 1 ? 0.0 : double(t - 1) / double(T - 1);
        double beta;
        if (kind == ScheduleKind::Linear) {
            beta = beta_start + (beta_end - beta_start) * u;
        } else {
            const double r = std::sqrt(beta_start) + (std::sqrt(beta_end) - std::sqrt(beta_start)) * u;
            beta = r * r;
        }
        s.betas[t - 1] = beta;
        s.alpha_bars[t - 1] = (t == 1 ? 1.0 : s.alpha_bars[t - 2]) * (1.0 - beta);
    }
    return s;
}

StepSubsequence subsequence(int T, int T_prime) {
    if (T_prime < 1) throw std::invalid_argument("subsequence: T_prime must be >= 1");
    if (T % T_prime != 0)
        throw std::invalid_argument("subsequence: T must be divisible by T_prime");
    StepSubsequence sub;
    sub.T_prime = T_prime;
    sub.k = T / T_prime;
    sub.steps.resize(T_prime);
    for (int i = 1; i <= T_prime; ++i) sub.steps[i - 1] = i * sub.k;
    return sub;
}

StepSubsequence inference_subsequence(int T, int T_prime) {
    if (T_prime <= 50) return subsequence(T, T_prime);
    if (T % 50 != 0)
        throw std::invalid_argument("inference_subsequence: T must be divisible by 50");
    return subsequence(T, 50);
}

DdimCoeffs ddim_coeffs(const NoiseSchedule& s, int tau, int tau_prev, bool deterministic) {
    if (tau < 1 || tau > s.T) throw std::out_of_range("ddim_coeffs: tau out of range");
    if (tau_prev < 0 || tau_prev >= tau) throw std::out_of_range("ddim_coeffs: tau_prev out of range");
    const double abar = s.alpha_bar(tau);
    const double abar_prev = s.alpha_bar(tau_prev);
    DdimCoeffs c;
    c.sqrt_abar_prev = std::sqrt(abar_prev);
    if (deterministic) {
        c.sigma_tau = 0.0;
    } else {
        // eta = 1 variance-preserving choice
        const double v = (1.0 - abar_prev) / (1.0 - abar) * (1.0 - abar / abar_prev);
        c.sigma_tau = std::sqrt(std::max(0.0, v));
    }
    c.w_tau = std::sqrt(std::max(0.0, 1.0 - abar_prev - c.sigma_tau * c.sigma_tau));
    return c;
}

}  // namespace lotuslab
