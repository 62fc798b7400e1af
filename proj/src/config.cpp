#include "medint/config.hpp"

#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <utility>

#include <yaml-cpp/yaml.h>

namespace medint {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

std::string index_path(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void require_map(const YAML::Node& node, const std::string& path) {
    if (!node.IsMap()) {
        throw ConfigError(path.empty() ? "<root>" : path, "expected a mapping");
    }
}

void reject_unknown(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) {
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) {
            throw ConfigError(join(path, key), "unknown field");
        }
    }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& path, const char* what) {
    if (!node.IsScalar()) {
        throw ConfigError(path, std::string("expected ") + what);
    }
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(path, std::string("expected ") + what + ", got '" + node.Scalar() + "'");
    }
}

double number(const YAML::Node& node, const std::string& path) { return scalar<double>(node, path, "a number"); }

std::uint64_t unsigned_integer(const YAML::Node& node, const std::string& path) {
    const auto text = scalar<std::string>(node, path, "a non-negative integer");
    if (text.empty() || text[0] == '-') {
        throw ConfigError(path, "expected a non-negative integer, got '" + text + "'");
    }
    return scalar<std::uint64_t>(node, path, "a non-negative integer");
}

double required_number(const YAML::Node& map, const std::string& path, const std::string& key) {
    const auto node = map[key];
    if (!node) {
        throw ConfigError(join(path, key), "required field missing");
    }
    return number(node, join(path, key));
}

template <class F>
void each(const YAML::Node& node, const std::string& path, F&& f) {
    if (node.IsScalar()) {
        f(node, index_path(path, 0));
        return;
    }
    if (!node.IsSequence()) {
        throw ConfigError(path, "expected a list");
    }
    for (std::size_t i = 0; i < node.size(); ++i) {
        f(node[i], index_path(path, i));
    }
}

struct ParsedModel {
    ModelConfig model;
    std::optional<double> reference_intensity;
};

ParsedModel parse_model(const YAML::Node& node, const std::string& path) {
    require_map(node, path);
    if (!node["type"]) {
        throw ConfigError(join(path, "type"), "required field missing");
    }
    const auto type = scalar<std::string>(node["type"], join(path, "type"), "a model name");
    ModelConfig model;
    if (type == "poisson") {
        reject_unknown(node, path, {"type", "intensity", "reference_intensity"});
        model = PoissonModel{required_number(node, path, "intensity")};
    } else if (type == "lgcp") {
        reject_unknown(node, path, {"type", "intensity", "variance", "scale", "spacing", "reference_intensity"});
        const double spacing = node["spacing"] ? number(node["spacing"], join(path, "spacing")) : 0.0;
        model = LgcpModel::from_intensity(required_number(node, path, "intensity"),
                                          required_number(node, path, "variance"),
                                          required_number(node, path, "scale"), spacing);
    } else if (type == "thomas" || type == "matern") {
        reject_unknown(node, path, {"type", "kappa", "alpha", "sigma", "reference_intensity"});
        const double kappa = required_number(node, path, "kappa");
        const double alpha = required_number(node, path, "alpha");
        const double sigma = required_number(node, path, "sigma");
        if (type == "thomas") {
            model = ThomasModel{kappa, alpha, sigma};
        } else {
            model = MaternClusterModel{kappa, alpha, sigma};
        }
    } else if (type == "phc") {
        reject_unknown(node, path, {"type", "beta", "radius", "mh_steps", "margin", "reference_intensity"});
        HardCoreModel m;
        m.beta = required_number(node, path, "beta");
        m.radius = required_number(node, path, "radius");
        if (node["mh_steps"]) {
            m.mh_steps = unsigned_integer(node["mh_steps"], join(path, "mh_steps"));
        }
        if (node["margin"]) {
            m.margin = number(node["margin"], join(path, "margin"));
        }
        model = m;
    } else {
        throw ConfigError(join(path, "type"), "unknown model '" + type + "' (poisson, lgcp, thomas, matern, phc)");
    }
    try {
        validate(model);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
    ParsedModel parsed{model, std::nullopt};
    if (node["reference_intensity"]) {
        const auto p = join(path, "reference_intensity");
        const double v = number(node["reference_intensity"], p);
        if (!(v > 0.0)) {
            throw ConfigError(p, "must be positive");
        }
        parsed.reference_intensity = v;
    }
    return parsed;
}

ContaminationConfig parse_setting(const YAML::Node& node, const std::string& path) {
    std::string type;
    double rho = 0.0;
    if (node.IsScalar()) {
        type = node.as<std::string>();
    } else {
        require_map(node, path);
        reject_unknown(node, path, {"type", "rho"});
        if (!node["type"]) {
            throw ConfigError(join(path, "type"), "required field missing");
        }
        type = scalar<std::string>(node["type"], join(path, "type"), "A, B or C");
        if (node["rho"]) {
            rho = number(node["rho"], join(path, "rho"));
        }
    }
    ContaminationConfig setting;
    if (type == "A") {
        if (rho != 0.0) {
            throw ConfigError(join(path, "rho"), "setting A takes no rho");
        }
        setting = PureSetting{};
    } else if (type == "B") {
        setting = AddSetting{rho};
    } else if (type == "C") {
        setting = DeleteSetting{rho};
    } else {
        throw ConfigError(join(path, "type"), "unknown setting '" + type + "' (A, B, C)");
    }
    try {
        validate(setting);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(join(path, "rho"), e.what());
    }
    return setting;
}

std::vector<ExperimentConfig> parse_root(const YAML::Node& root) {
    require_map(root, "");
    reject_unknown(root, "", {"model", "models", "windows", "replications", "seed", "settings", "median", "voronoi",
                              "calibration", "max_failure_fraction", "timing"});
    std::vector<std::pair<YAML::Node, std::string>> model_nodes;
    if (root["model"] && root["models"]) {
        throw ConfigError("models", "give either 'model' or 'models', not both");
    }
    if (root["model"]) {
        model_nodes.emplace_back(root["model"], "model");
    } else if (root["models"]) {
        if (!root["models"].IsSequence() || root["models"].size() == 0) {
            throw ConfigError("models", "expected a non-empty list");
        }
        for (std::size_t i = 0; i < root["models"].size(); ++i) {
            model_nodes.emplace_back(root["models"][i], index_path("models", i));
        }
    } else {
        throw ConfigError("model", "required field missing");
    }
    std::vector<ParsedModel> models;
    std::set<std::string> names;
    for (const auto& [node, path] : model_nodes) {
        models.push_back(parse_model(node, path));
        if (!names.insert(model_name(models.back().model)).second) {
            throw ConfigError(path, "model '" + model_name(models.back().model) + "' listed twice");
        }
    }
    ExperimentConfig c;

    if (root["windows"]) {
        c.half_sides.clear();
        each(root["windows"], "windows", [&](const YAML::Node& n, const std::string& p) {
            const double v = number(n, p);
            if (!(v > 0.0)) {
                throw ConfigError(p, "window half-side must be positive");
            }
            c.half_sides.push_back(v);
        });
        if (c.half_sides.empty()) {
            throw ConfigError("windows", "at least one window is required");
        }
    }
    if (root["replications"]) {
        c.replications = unsigned_integer(root["replications"], "replications");
        if (c.replications == 0) {
            throw ConfigError("replications", "must be at least 1");
        }
    }
    if (root["seed"]) {
        c.master_seed = unsigned_integer(root["seed"], "seed");
    }
    if (root["settings"] && !root["settings"].IsNull()) {
        each(root["settings"], "settings", [&](const YAML::Node& n, const std::string& p) {
            c.settings.push_back(parse_setting(n, p));
        });
    }
    if (const auto median = root["median"]; median && !median.IsNull()) {
        require_map(median, "median");
        reject_unknown(median, "median", {"cells_per_side", "jitter", "rule_of_thumb"});
        if (median["cells_per_side"]) {
            each(median["cells_per_side"], "median.cells_per_side", [&](const YAML::Node& n, const std::string& p) {
                const auto s = unsigned_integer(n, p);
                if (s < 2 || s > 10000) {
                    throw ConfigError(p, "cells per side must lie in [2, 10000]");
                }
                c.median_cells_per_side.push_back(static_cast<int>(s));
            });
        }
        if (median["jitter"]) {
            const auto text = scalar<std::string>(median["jitter"], "median.jitter", "a jitter function");
            try {
                c.jitter = JitterFunction::parse(text);
            } catch (const std::invalid_argument& e) {
                throw ConfigError("median.jitter", e.what());
            }
        }
        if (median["rule_of_thumb"]) {
            c.rule_of_thumb = scalar<bool>(median["rule_of_thumb"], "median.rule_of_thumb", "true or false");
        }
    }
    if (const auto vor = root["voronoi"]; vor && !vor.IsNull()) {
        require_map(vor, "voronoi");
        reject_unknown(vor, "voronoi", {"grid_per_side", "trim"});
        VoronoiOptions v;
        if (vor["grid_per_side"]) {
            const auto g = unsigned_integer(vor["grid_per_side"], "voronoi.grid_per_side");
            if (g < 1 || g > 100000) {
                throw ConfigError("voronoi.grid_per_side", "must lie in [1, 100000]");
            }
            v.grid_per_side = static_cast<int>(g);
        }
        if (vor["trim"]) {
            v.trim_fs.clear();
            each(vor["trim"], "voronoi.trim", [&](const YAML::Node& n, const std::string& p) {
                const double f = number(n, p);
                if (!(f >= 0.0 && f < 0.5)) {
                    throw ConfigError(p, "trim fraction must lie in [0, 0.5)");
                }
                v.trim_fs.push_back(f);
            });
        }
        c.voronoi = v;
    }
    if (const auto cal = root["calibration"]; cal && !cal.IsNull()) {
        require_map(cal, "calibration");
        reject_unknown(cal, "calibration", {"replications", "window"});
        if (cal["replications"]) {
            c.calibration.replications = unsigned_integer(cal["replications"], "calibration.replications");
            if (c.calibration.replications == 0) {
                throw ConfigError("calibration.replications", "must be at least 1");
            }
        }
        if (cal["window"]) {
            c.calibration.half_side = number(cal["window"], "calibration.window");
            if (!(c.calibration.half_side > 0.0)) {
                throw ConfigError("calibration.window", "must be positive");
            }
        }
    }
    if (root["max_failure_fraction"]) {
        c.max_failure_fraction = number(root["max_failure_fraction"], "max_failure_fraction");
        if (!(c.max_failure_fraction >= 0.0 && c.max_failure_fraction <= 1.0)) {
            throw ConfigError("max_failure_fraction", "must lie in [0, 1]");
        }
    }
    if (root["timing"]) {
        c.record_timing = scalar<bool>(root["timing"], "timing", "true or false");
    }
    std::vector<ExperimentConfig> suite;
    for (std::size_t i = 0; i < models.size(); ++i) {
        auto mc = c;
        mc.model = models[i].model;
        mc.reference_intensity = models[i].reference_intensity;
        try {
            validate(mc);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(model_nodes[i].second, e.what());
        }
        suite.push_back(std::move(mc));
    }
    return suite;
}

}  // namespace

std::vector<ExperimentConfig> parse_experiment_suite(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("<root>", std::string("YAML syntax error: ") + e.what());
    }
    return parse_root(root);
}

std::vector<ExperimentConfig> load_experiment_suite(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config '" + path + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_experiment_suite(text.str());
}

ExperimentConfig parse_experiment_config(const std::string& yaml_text) {
    auto suite = parse_experiment_suite(yaml_text);
    if (suite.size() != 1) {
        throw ConfigError("models", "expected exactly one model");
    }
    return std::move(suite.front());
}

nlohmann::json model_json(const ModelConfig& model) {
    nlohmann::json j;
    j["type"] = model_name(model);
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, PoissonModel>) {
                j["intensity"] = m.intensity;
            } else if constexpr (std::is_same_v<T, LgcpModel>) {
                j["intensity"] = m.intensity;
                j["variance"] = m.variance;
                j["scale"] = m.scale;
                j["spacing"] = m.effective_spacing();
            } else if constexpr (std::is_same_v<T, HardCoreModel>) {
                j["beta"] = m.beta;
                j["radius"] = m.radius;
                j["mh_steps"] = m.mh_steps;
                j["margin"] = m.effective_margin();
            } else {
                j["kappa"] = m.kappa;
                j["alpha"] = m.alpha;
                j["sigma"] = m.sigma;
            }
        },
        model);
    return j;
}

nlohmann::json canonical_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["model"] = model_json(c.model);
    j["model"]["reference_intensity"] =
        c.reference_intensity ? nlohmann::json(*c.reference_intensity) : nlohmann::json();
    j["windows"] = c.half_sides;
    j["replications"] = c.replications;
    j["seed"] = c.master_seed;
    auto settings = nlohmann::json::array();
    if (c.settings.empty()) {
        settings.push_back({{"type", "A"}, {"rho", 0.0}});
    }
    for (const auto& s : c.settings) {
        settings.push_back({{"type", setting_label(s)}, {"rho", setting_rho(s)}});
    }
    j["settings"] = settings;
    j["median"] = {{"cells_per_side", c.median_cells_per_side},
                   {"jitter", c.jitter.name()},
                   {"rule_of_thumb", c.rule_of_thumb}};
    if (c.voronoi) {
        j["voronoi"] = {{"grid_per_side", c.voronoi->grid_per_side}, {"trim", c.voronoi->trim_fs}};
    } else {
        j["voronoi"] = nullptr;
    }
    j["calibration"] = {{"replications", c.calibration.replications}, {"window", c.calibration.half_side}};
    j["max_failure_fraction"] = c.max_failure_fraction;
    j["timing"] = c.record_timing;
    return j;
}

std::string config_digest(const ExperimentConfig& config) {
    const auto text = canonical_json(config).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace medint
