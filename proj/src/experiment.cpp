#include "lotuslab/experiment.hpp"

#include <fstream>
#include <set>

namespace lotuslab {

namespace {

void require_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                  const std::string& where) {
    if (!j.is_object()) throw UserError(where + ": expected a JSON object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw UserError(where + ": unknown key '" + key + "'");
}

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

ProtocolConfig protocol_overrides(const nlohmann::json& j) {
    static const std::set<std::string> allowed = {
        "preset",        "name",        "parameterization", "T_prime",     "preserver",
        "variant",       "annotation_task", "space",        "mixture_probs", "per_sample_mixture",
        "steps",         "batch_size",  "lr",               "seed",        "init",
        "fixed_t",       "image_channels", "schedule",      "clamp_zhat",  "val_every",
        "threads"};
    require_keys(j, allowed, "protocol");
    ProtocolConfig cfg;
    if (j.contains("preset")) cfg = protocol_preset(j.at("preset").get<std::string>());
    maybe(j, "name", cfg.name);
    if (j.contains("parameterization"))
        cfg.param = parameterization_from_string(j.at("parameterization").get<std::string>());
    maybe(j, "T_prime", cfg.T_prime);
    maybe(j, "preserver", cfg.preserver);
    if (j.contains("variant")) cfg.variant = variant_from_string(j.at("variant").get<std::string>());
    maybe(j, "annotation_task", cfg.annotation_task);
    maybe(j, "space", cfg.space);
    maybe(j, "mixture_probs", cfg.mixture_probs);
    maybe(j, "per_sample_mixture", cfg.per_sample_mixture);
    maybe(j, "steps", cfg.steps);
    maybe(j, "batch_size", cfg.batch_size);
    maybe(j, "lr", cfg.lr);
    maybe(j, "seed", cfg.seed);
    if (j.contains("init")) {
        const std::string init = j.at("init").get<std::string>();
        if (init != "fresh" && init != "duplicated_input")
            throw UserError("protocol.init: expected 'fresh' or 'duplicated_input'");
        cfg.init = init == "fresh" ? InitMode::Fresh : InitMode::DuplicatedInput;
    }
    maybe(j, "fixed_t", cfg.fixed_t);
    maybe(j, "image_channels", cfg.image_channels);
    if (j.contains("schedule")) {
        const auto& s = j.at("schedule");
        require_keys(s, {"T", "beta_start", "beta_end", "kind"}, "protocol.schedule");
        maybe(s, "T", cfg.schedule_T);
        maybe(s, "beta_start", cfg.beta_start);
        maybe(s, "beta_end", cfg.beta_end);
        if (s.contains("kind"))
            cfg.schedule_kind = schedule_kind_from_string(s.at("kind").get<std::string>());
    }
    maybe(j, "clamp_zhat", cfg.clamp_zhat);
    maybe(j, "val_every", cfg.val_every);
    maybe(j, "threads", cfg.threads);
    return cfg;
}

}  // namespace

ExperimentFile experiment_from_json(const nlohmann::json& j) {
    require_keys(j, {"schema_version", "output_dir", "dataset", "protocol", "eval"}, "experiment");
    ExperimentFile exp;
    exp.schema_version = j.at("schema_version").get<int>();
    if (exp.schema_version != 1) throw UserError("experiment: unsupported schema_version");
    exp.output_dir = j.at("output_dir").get<std::string>();
    const auto& ds = j.at("dataset");
    require_keys(ds, {"pools"}, "experiment.dataset");
    exp.dataset_pools = ds.at("pools").get<std::vector<std::string>>();
    exp.protocol = protocol_overrides(j.at("protocol"));
    if (j.contains("eval")) {
        const auto& ev = j.at("eval");
        require_keys(ev, {"n_seeds", "seed_base"}, "experiment.eval");
        maybe(ev, "n_seeds", exp.eval_n_seeds);
        maybe(ev, "seed_base", exp.eval_seed_base);
    }
    return exp;
}

nlohmann::json experiment_to_json(const ExperimentFile& exp) {
    return nlohmann::json{{"schema_version", exp.schema_version},
                          {"output_dir", exp.output_dir},
                          {"dataset", {{"pools", exp.dataset_pools}}},
                          {"protocol", protocol_to_json(exp.protocol)},
                          {"eval", {{"n_seeds", exp.eval_n_seeds}, {"seed_base", exp.eval_seed_base}}}};
}

ExperimentFile load_experiment(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UserError("cannot open experiment file " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw UserError("experiment file " + path.string() + ": " + e.what());
    }
    try {
        return experiment_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw UserError("experiment file " + path.string() + ": " + e.what());
    }
}

void save_experiment(const std::filesystem::path& path, const ExperimentFile& exp) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_experiment: cannot open " + path.string());
    out << experiment_to_json(exp).dump(2) << "\n";
}

DataSpecFile load_data_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UserError("cannot open data spec file " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw UserError("data spec file " + path.string() + ": " + e.what());
    }
    require_keys(j, {"schema_version", "output_dir", "spec"}, "data spec");
    DataSpecFile f;
    try {
        f.schema_version = j.at("schema_version").get<int>();
        if (f.schema_version != 1) throw UserError("data spec: unsupported schema_version");
        f.output_dir = j.at("output_dir").get<std::string>();
        const auto& s = j.at("spec");
        require_keys(s,
                     {"domain_probs", "count", "height", "width", "image_channels",
                      "detail_rich_fraction", "seed"},
                     "data spec.spec");
        maybe(s, "domain_probs", f.spec.domain_probs);
        maybe(s, "count", f.spec.count);
        maybe(s, "height", f.spec.height);
        maybe(s, "width", f.spec.width);
        maybe(s, "image_channels", f.spec.image_channels);
        maybe(s, "detail_rich_fraction", f.spec.detail_rich_fraction);
        maybe(s, "seed", f.spec.seed);
    } catch (const nlohmann::json::exception& e) {
        throw UserError(std::string("data spec file: ") + e.what());
    }
    double sum = 0.0;
    for (double p : f.spec.domain_probs) sum += p;
    if (std::abs(sum - 1.0) > 1e-9)
        throw UserError("data spec: field 'domain_probs' must sum to 1");
    return f;
}

nlohmann::json data_spec_to_json(const DataSpecFile& f) {
    return nlohmann::json{{"schema_version", f.schema_version},
                          {"output_dir", f.output_dir},
                          {"spec",
                           {{"domain_probs", f.spec.domain_probs},
                            {"count", f.spec.count},
                            {"height", f.spec.height},
                            {"width", f.spec.width},
                            {"image_channels", f.spec.image_channels},
                            {"detail_rich_fraction", f.spec.detail_rich_fraction},
                            {"seed", f.spec.seed}}}};
}

}  // namespace lotuslab
