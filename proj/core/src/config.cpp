#include "pooledloss/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pooledloss {

namespace {

using nlohmann::json;

double require_number(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number())
        throw ConfigError(std::string("config: missing or non-numeric key '") + key + "'");
    return j[key].get<double>();
}

double number_or(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ConfigError(std::string("config: non-numeric key '") + key + "'");
    return j[key].get<double>();
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }

    RunConfig cfg;

    if (!j.contains("portfolio") || !j["portfolio"].is_object())
        throw ConfigError("config: missing 'portfolio' object");
    const json& pj = j["portfolio"];
    if (!pj.contains("names") || !pj["names"].is_number_integer())
        throw ConfigError("config: portfolio.names must be an integer");
    const auto names = pj["names"].get<long long>();
    if (names < 0) throw ConfigError("config: portfolio.names must be >= 0");
    cfg.portfolio.names = static_cast<std::size_t>(names);
    if (!pj.contains("types") || !pj["types"].is_array())
        throw ConfigError("config: portfolio.types must be an array");
    for (const json& tj : pj["types"]) {
        PortfolioSpec::Type t;
        t.params.alpha = require_number(tj, "alpha");
        t.params.lambda_bar = require_number(tj, "lambda_bar");
        t.params.sigma = require_number(tj, "sigma");
        t.params.beta_c = require_number(tj, "beta_c");
        t.params.beta_s = require_number(tj, "beta_s");
        t.params.lambda0 = require_number(tj, "lambda0");
        t.weight = number_or(tj, "weight", 1.0);
        cfg.portfolio.types.push_back(t);
    }

    if (!j.contains("systematic") || !j["systematic"].is_object())
        throw ConfigError("config: missing 'systematic' object");
    const json& sj = j["systematic"];
    const std::string kind = sj.value("kind", "constant");
    if (kind == "ou") {
        cfg.systematic = SystematicRiskSpec::ou(require_number(sj, "mean"), require_number(sj, "speed"),
                                                require_number(sj, "vol"), require_number(sj, "x0"));
    } else if (kind == "constant") {
        cfg.systematic = SystematicRiskSpec::constant(number_or(sj, "x0", number_or(sj, "level", 0.0)));
    } else {
        throw ConfigError("config: systematic.kind must be 'ou' or 'constant'");
    }

    if (!j.contains("grid") || !j["grid"].is_object())
        throw ConfigError("config: missing 'grid' object");
    cfg.horizon = require_number(j["grid"], "horizon");
    cfg.dt = require_number(j["grid"], "dt");
    cfg.grid();  // validate now so bad grids fail at load time

    return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("config: cannot open " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_to_json(const RunConfig& cfg) {
    json j;
    j["portfolio"]["names"] = cfg.portfolio.names;
    j["portfolio"]["types"] = json::array();
    for (const auto& t : cfg.portfolio.types) {
        json tj;
        tj["alpha"] = t.params.alpha;
        tj["lambda_bar"] = t.params.lambda_bar;
        tj["sigma"] = t.params.sigma;
        tj["beta_c"] = t.params.beta_c;
        tj["beta_s"] = t.params.beta_s;
        tj["lambda0"] = t.params.lambda0;
        tj["weight"] = t.weight;
        j["portfolio"]["types"].push_back(tj);
    }
    switch (cfg.systematic.kind) {
        case SystematicRiskSpec::Kind::OU:
            j["systematic"] = {{"kind", "ou"},
                               {"mean", cfg.systematic.mean},
                               {"speed", cfg.systematic.speed},
                               {"vol", cfg.systematic.vol},
                               {"x0", cfg.systematic.x0}};
            break;
        case SystematicRiskSpec::Kind::Constant:
            j["systematic"] = {{"kind", "constant"}, {"x0", cfg.systematic.x0}};
            break;
        case SystematicRiskSpec::Kind::Custom:
            throw ConfigError("config: custom systematic dynamics cannot be serialized");
    }
    j["grid"] = {{"horizon", cfg.horizon}, {"dt", cfg.dt}};
    return j.dump(2);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace pooledloss
