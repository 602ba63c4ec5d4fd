#include "hybridfpca/config.hpp"

#include "hybridfpca/error.hpp"

#include <set>
#include <string>

namespace hybridfpca {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) fail(ErrorKind::InvalidConfig, where + ": expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.contains(key)) fail(ErrorKind::InvalidConfig, where + ": unknown key '" + key + "'");
    }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        fail(ErrorKind::InvalidConfig, where + ": key '" + key + "' has the wrong type");
    }
}

std::vector<double> penalty_grid_from_json(const json& v, const std::string& where) {
    if (v.is_array()) {
        std::vector<double> grid;
        read(json{{"g", v}}, "g", grid, where);
        return grid;
    }
    check_keys(v, {"lo_exponent", "hi_exponent", "steps"}, where + ".penalty_grid");
    double lo = -6.0, hi = 2.0;
    int steps = 17;
    read(v, "lo_exponent", lo, where);
    read(v, "hi_exponent", hi, where);
    read(v, "steps", steps, where);
    return log_penalty_grid(lo, hi, steps);
}

}  // namespace

OmegaSampling omega_sampling_from_string(const std::string& s) {
    if (s == "complete") return OmegaSampling::Complete;
    if (s == "sparse") return OmegaSampling::Sparse;
    fail(ErrorKind::InvalidConfig, "omega sampling must be 'complete' or 'sparse', got '" + s + "'");
}

CoefficientMode coefficient_mode_from_string(const std::string& s) {
    if (s == "complete") return CoefficientMode::Complete;
    if (s == "half_sparse") return CoefficientMode::HalfSparse;
    fail(ErrorKind::InvalidConfig, "coefficient mode must be 'complete' or 'half_sparse', got '" + s + "'");
}

RankingOrder ranking_order_from_string(const std::string& s) {
    if (s == "variance") return RankingOrder::Variance;
    if (s == "lexicographic") return RankingOrder::Lexicographic;
    fail(ErrorKind::InvalidConfig, "ranking must be 'variance' or 'lexicographic', got '" + s + "'");
}

const char* to_string(RankingOrder r) { return r == RankingOrder::Variance ? "variance" : "lexicographic"; }

FofConfig fof_config_from_json(const json& j, FofConfig c) {
    const std::string where = "fit";
    check_keys(j, {"n_basis_g", "n_basis_s", "predictor_fve", "penalty_grid", "train_fraction", "seed", "max_components"},
               where);
    read(j, "n_basis_g", c.n_basis_g, where);
    read(j, "n_basis_s", c.n_basis_s, where);
    read(j, "predictor_fve", c.predictor_fve, where);
    read(j, "train_fraction", c.train_fraction, where);
    read(j, "seed", c.seed, where);
    read(j, "max_components", c.max_components, where);
    if (j.contains("penalty_grid")) c.penalty_grid = penalty_grid_from_json(j.at("penalty_grid"), where);
    c.validate();
    return c;
}

json to_json(const FofConfig& c) {
    return {{"n_basis_g", c.n_basis_g},         {"n_basis_s", c.n_basis_s},
            {"predictor_fve", c.predictor_fve}, {"penalty_grid", c.penalty_grid},
            {"train_fraction", c.train_fraction}, {"seed", c.seed},
            {"max_components", c.max_components}};
}

HybridGenConfig hybrid_config_from_json(const json& j, HybridGenConfig c) {
    const std::string where = "hybrid";
    check_keys(j, {"n", "R", "omega_points", "s_points", "K_true", "L_true", "M_true", "score_sd", "noise_sd",
                   "omega_sampling", "observed_fraction", "seed", "stream"},
               where);
    read(j, "n", c.n, where);
    read(j, "R", c.R, where);
    read(j, "omega_points", c.omega_points, where);
    read(j, "s_points", c.s_points, where);
    read(j, "K_true", c.K_true, where);
    read(j, "L_true", c.L_true, where);
    read(j, "M_true", c.M_true, where);
    read(j, "score_sd", c.score_sd, where);
    read(j, "noise_sd", c.noise_sd, where);
    read(j, "observed_fraction", c.observed_fraction, where);
    read(j, "seed", c.seed, where);
    read(j, "stream", c.stream, where);
    if (j.contains("omega_sampling")) {
        std::string s;
        read(j, "omega_sampling", s, where);
        c.omega_sampling = omega_sampling_from_string(s);
    }
    return c;
}

json to_json(const HybridGenConfig& c) {
    return {{"n", c.n},
            {"R", c.R},
            {"omega_points", c.omega_points},
            {"s_points", c.s_points},
            {"K_true", c.K_true},
            {"L_true", c.L_true},
            {"M_true", c.M_true},
            {"score_sd", c.resolved_score_sd()},
            {"noise_sd", c.noise_sd},
            {"omega_sampling", to_string(c.omega_sampling)},
            {"observed_fraction", c.observed_fraction},
            {"seed", c.seed},
            {"stream", c.stream}};
}

FofGenConfig fof_gen_config_from_json(const json& j, FofGenConfig c) {
    const std::string where = "fof_generator";
    check_keys(j, {"n", "p", "g_points", "s_points", "coefficient_mode", "noise_sd", "predictor_terms", "surface_scale",
                   "seed", "stream"},
               where);
    read(j, "n", c.n, where);
    read(j, "p", c.p, where);
    read(j, "g_points", c.g_points, where);
    read(j, "s_points", c.s_points, where);
    read(j, "noise_sd", c.noise_sd, where);
    read(j, "predictor_terms", c.predictor_terms, where);
    read(j, "surface_scale", c.surface_scale, where);
    read(j, "seed", c.seed, where);
    read(j, "stream", c.stream, where);
    if (j.contains("coefficient_mode")) {
        std::string s;
        read(j, "coefficient_mode", s, where);
        c.coefficient_mode = coefficient_mode_from_string(s);
    }
    return c;
}

json to_json(const FofGenConfig& c) {
    return {{"n", c.n},
            {"p", c.p},
            {"g_points", c.g_points},
            {"s_points", c.s_points},
            {"coefficient_mode", to_string(c.coefficient_mode)},
            {"noise_sd", c.noise_sd},
            {"predictor_terms", c.predictor_terms},
            {"surface_scale", c.surface_scale},
            {"seed", c.seed},
            {"stream", c.stream}};
}

ScenarioConfig scenario_config_from_json(const json& j, ScenarioConfig c) {
    const std::string where = "scenario";
    check_keys(j, {"replicates", "seed", "fve_target", "sample_sizes", "omega_modes", "beta_modes", "auto_component_cap",
                   "hybrid", "fof_generator", "fit"},
               where);
    read(j, "replicates", c.replicates, where);
    read(j, "seed", c.seed, where);
    read(j, "fve_target", c.fve_target, where);
    read(j, "sample_sizes", c.sample_sizes, where);
    read(j, "auto_component_cap", c.auto_component_cap, where);
    if (j.contains("omega_modes")) {
        std::vector<std::string> v;
        read(j, "omega_modes", v, where);
        c.omega_modes.clear();
        for (const auto& s : v) c.omega_modes.push_back(omega_sampling_from_string(s));
    }
    if (j.contains("beta_modes")) {
        std::vector<std::string> v;
        read(j, "beta_modes", v, where);
        c.beta_modes.clear();
        for (const auto& s : v) c.beta_modes.push_back(coefficient_mode_from_string(s));
    }
    if (j.contains("hybrid")) c.hybrid = hybrid_config_from_json(j.at("hybrid"), c.hybrid);
    if (j.contains("fof_generator")) c.fof = fof_gen_config_from_json(j.at("fof_generator"), c.fof);
    if (j.contains("fit")) c.fit = fof_config_from_json(j.at("fit"), c.fit);
    c.validate();
    return c;
}

json to_json(const ScenarioConfig& c) {
    json omega = json::array(), beta = json::array();
    for (auto m : c.omega_modes) omega.push_back(to_string(m));
    for (auto m : c.beta_modes) beta.push_back(to_string(m));
    return {{"replicates", c.replicates},
            {"seed", c.seed},
            {"fve_target", c.fve_target},
            {"sample_sizes", c.sample_sizes},
            {"omega_modes", omega},
            {"beta_modes", beta},
            {"auto_component_cap", c.auto_component_cap},
            {"hybrid", to_json(c.hybrid)},
            {"fof_generator", to_json(c.fof)},
            {"fit", to_json(c.fit)}};
}

SelectionConfig selection_config_from_json(const json& j, SelectionConfig c) {
    const std::string where = "selection";
    check_keys(j, {"fve_target", "ranking", "resplits", "fit"}, where);
    read(j, "fve_target", c.hpca.fve_target, where);
    read(j, "resplits", c.resplits, where);
    if (j.contains("ranking")) {
        std::string s;
        read(j, "ranking", s, where);
        c.hpca.ranking = ranking_order_from_string(s);
    }
    if (j.contains("fit")) c.fit = fof_config_from_json(j.at("fit"), c.fit);
    if (!(c.hpca.fve_target > 0.0 && c.hpca.fve_target <= 1.0)) fail(ErrorKind::InvalidConfig, "fve_target must be in (0, 1]");
    if (c.resplits < 1) fail(ErrorKind::InvalidConfig, "resplits must be >= 1");
    return c;
}

json to_json(const SelectionConfig& c) {
    return {{"fve_target", c.hpca.fve_target},
            {"ranking", to_string(c.hpca.ranking)},
            {"resplits", c.resplits},
            {"fit", to_json(c.fit)}};
}

}  // namespace hybridfpca
