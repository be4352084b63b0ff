#include "lotuslab/diffusion.hpp"

#include <cmath>
#include <fstream>

#include "lotuslab/pfm.hpp"

namespace lotuslab {

Parameterization parameterization_from_string(const std::string& s) {
    if (s == "epsilon") return Parameterization::Epsilon;
    if (s == "x0") return Parameterization::X0;
    if (s == "v") return Parameterization::V;
    throw std::invalid_argument("unknown parameterization: " + s);
}

std::string to_string(Parameterization p) {
    switch (p) {
        case Parameterization::Epsilon: return "epsilon";
        case Parameterization::X0: return "x0";
        case Parameterization::V: return "v";
    }
    return "";
}

Variant variant_from_string(const std::string& s) {
    if (s == "generative") return Variant::Generative;
    if (s == "discriminative") return Variant::Discriminative;
    throw std::invalid_argument("unknown variant: " + s);
}

std::string to_string(Variant v) {
    return v == Variant::Generative ? "generative" : "discriminative";
}

Grid forward_noise(const Grid& z, const Grid& eps, double abar_t) {
    require_same_shape(z, eps, "forward_noise");
    if (!(abar_t > 0.0 && abar_t <= 1.0))
        throw std::invalid_argument("forward_noise: abar_t must be in (0, 1]");
    return lincomb(std::sqrt(abar_t), z, std::sqrt(1.0 - abar_t), eps);
}

Grid target_for(Parameterization p, const Grid& z, const Grid& eps, double abar_t) {
    require_same_shape(z, eps, "target_for");
    switch (p) {
        case Parameterization::Epsilon: return eps;
        case Parameterization::X0: return z;
        case Parameterization::V:
            return lincomb(std::sqrt(abar_t), eps, -std::sqrt(1.0 - abar_t), z);
    }
    throw std::logic_error("target_for: unreachable");
}

Grid predict_clean(Parameterization p, const Grid& model_out, const Grid& z_t, double abar_tau) {
    require_same_shape(model_out, z_t, "predict_clean");
    switch (p) {
        case Parameterization::Epsilon: {
            if (abar_tau <= 0.0)
                throw std::invalid_argument("predict_clean: abar = 0 is singular under epsilon");
            const double inv = 1.0 / std::sqrt(abar_tau);
            return lincomb(inv, z_t, -inv * std::sqrt(1.0 - abar_tau), model_out);
        }
        case Parameterization::X0: return model_out;
        case Parameterization::V:
            return lincomb(std::sqrt(abar_tau), z_t, -std::sqrt(1.0 - abar_tau), model_out);
    }
    throw std::logic_error("predict_clean: unreachable");
}

Grid direction_term(Parameterization p, const Grid& model_out, const Grid& z_tau,
                    const Grid& z_hat, double abar_tau, const DdimCoeffs& coeffs) {
    require_same_shape(model_out, z_tau, "direction_term");
    switch (p) {
        case Parameterization::Epsilon: return scale(model_out, coeffs.w_tau);
        case Parameterization::X0: {
            if (abar_tau >= 1.0)
                throw std::invalid_argument("direction_term: abar = 1 is singular under x0");
            const double inv = 1.0 / std::sqrt(1.0 - abar_tau);
            // implied noise (z_tau - sqrt(abar)*z_hat) / sqrt(1-abar)
            return lincomb(coeffs.w_tau * inv, z_tau, -coeffs.w_tau * inv * std::sqrt(abar_tau),
                           z_hat);
        }
        case Parameterization::V:
            // implied noise sqrt(abar)*f_v + sqrt(1-abar)*z_tau
            return lincomb(coeffs.w_tau * std::sqrt(abar_tau), model_out,
                           coeffs.w_tau * std::sqrt(1.0 - abar_tau), z_tau);
    }
    throw std::logic_error("direction_term: unreachable");
}

Grid ddim_step(const Grid& z_hat, const Grid& dir, const DdimCoeffs& coeffs, const Grid* noise) {
    require_same_shape(z_hat, dir, "ddim_step");
    if (coeffs.sigma_tau > 0.0 && noise == nullptr)
        throw std::invalid_argument("ddim_step: sigma > 0 requires a noise grid");
    Grid out = lincomb(coeffs.sqrt_abar_prev, z_hat, 1.0, dir);
    if (coeffs.sigma_tau > 0.0) {
        require_same_shape(z_hat, *noise, "ddim_step");
        for (size_t i = 0; i < out.size(); ++i) out[i] += coeffs.sigma_tau * (*noise)[i];
    }
    return out;
}

void TrajectoryRecord::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    std::ofstream index(dir / "index.csv");
    if (!index) throw std::runtime_error("TrajectoryRecord::save: cannot open index");
    index << "step_tau,zhat_path,ztau_path\n";
    for (size_t i = 0; i < taus.size(); ++i) {
        const std::string zh = "zhat_" + std::to_string(taus[i]) + ".pfm";
        const std::string zt = "ztau_" + std::to_string(taus[i]) + ".pfm";
        write_pfm(dir / zh, zhat[i]);
        write_pfm(dir / zt, ztau[i]);
        index << taus[i] << "," << zh << "," << zt << "\n";
    }
}

namespace {

Grid maybe_clamp(Grid g, const SampleOptions& opts) {
    return opts.clamp_zhat ? clamp(std::move(g), opts.clamp_lo, opts.clamp_hi) : g;
}

}  // namespace

SampleResult sample(const DenoiseFn& net, const Grid& z_x, int anno_channels,
                    const NoiseSchedule& sched, const StepSubsequence& subseq, Parameterization p,
                    RandomSource& rng, bool record, const SampleOptions& opts) {
    if (subseq.steps.empty() || subseq.steps.back() != sched.T)
        throw std::invalid_argument("sample: subsequence does not match the schedule");
    SampleResult res;
    if (record) res.trajectory.emplace();

    Grid z = gaussian_grid(rng, z_x.height(), z_x.width(), anno_channels);
    for (int i = static_cast<int>(subseq.steps.size()) - 1; i >= 0; --i) {
        const int tau = subseq.steps[i];
        const int tau_prev = i > 0 ? subseq.steps[i - 1] : 0;
        const double abar = sched.alpha_bar(tau);

        const Grid model_out = net(&z, z_x, tau);
        const Grid z_hat = maybe_clamp(predict_clean(p, model_out, z, abar), opts);
        const DdimCoeffs coeffs = ddim_coeffs(sched, tau, tau_prev, opts.deterministic);
        const Grid dir = direction_term(p, model_out, z, z_hat, abar, coeffs);

        if (record) {
            res.trajectory->taus.push_back(tau);
            res.trajectory->zhat.push_back(z_hat);
            res.trajectory->ztau.push_back(z);
        }

        if (coeffs.sigma_tau > 0.0) {
            Grid noise = gaussian_grid(rng, z.height(), z.width(), z.channels());
            z = ddim_step(z_hat, dir, coeffs, &noise);
        } else {
            z = ddim_step(z_hat, dir, coeffs, nullptr);
        }
    }
    res.output = std::move(z);
    return res;
}

Grid single_step_infer(const DenoiseFn& net, const Grid& z_x, int anno_channels,
                       const NoiseSchedule& sched, RandomSource* rng, Variant variant,
                       Parameterization p, int t, const SampleOptions& opts) {
    if (t == 0) t = sched.T;
    if (t < 1 || t > sched.T) throw std::out_of_range("single_step_infer: t out of range");
    if (variant == Variant::Generative) {
        if (rng == nullptr)
            throw std::invalid_argument("single_step_infer: generative variant requires an rng");
        Grid z_t = gaussian_grid(*rng, z_x.height(), z_x.width(), anno_channels);
        const Grid model_out = net(&z_t, z_x, t);
        return maybe_clamp(predict_clean(p, model_out, z_t, sched.alpha_bar(t)), opts);
    }
    if (p != Parameterization::X0)
        throw std::invalid_argument("single_step_infer: discriminative nets require x0");
    const Grid model_out = net(nullptr, z_x, t);
    return maybe_clamp(model_out, opts);
}

}  // namespace lotuslab
