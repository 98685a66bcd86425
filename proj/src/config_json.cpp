#include "skipgan/config_json.hpp"

#include <algorithm>

#include "skipgan/errors.hpp"

namespace skipgan {

void to_json(nlohmann::json& j, const GeneratorConfig& c) {
    j = nlohmann::json{{"input_size", c.input_size},
                       {"in_channels", c.in_channels},
                       {"nz", c.nz},
                       {"base_filters", c.base_filters},
                       {"n_blocks", c.n_blocks}};
}

void from_json(const nlohmann::json& j, GeneratorConfig& c) {
    c = GeneratorConfig{};
    if (j.contains("input_size")) j.at("input_size").get_to(c.input_size);
    if (j.contains("in_channels")) j.at("in_channels").get_to(c.in_channels);
    if (j.contains("nz")) j.at("nz").get_to(c.nz);
    if (j.contains("base_filters")) j.at("base_filters").get_to(c.base_filters);
    if (j.contains("n_blocks")) j.at("n_blocks").get_to(c.n_blocks);
}

void to_json(nlohmann::json& j, const LossWeights& w) {
    j = nlohmann::json{{"lambda_adv", w.lambda_adv},
                       {"lambda_con", w.lambda_con},
                       {"lambda_lat", w.lambda_lat}};
}

void from_json(const nlohmann::json& j, LossWeights& w) {
    w = LossWeights{};
    if (j.contains("lambda_adv")) j.at("lambda_adv").get_to(w.lambda_adv);
    if (j.contains("lambda_con")) j.at("lambda_con").get_to(w.lambda_con);
    if (j.contains("lambda_lat")) j.at("lambda_lat").get_to(w.lambda_lat);
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
    j = nlohmann::json{{"learning_rate", c.learning_rate},
                       {"beta1", c.beta1},
                       {"beta2", c.beta2},
                       {"max_epochs", c.max_epochs},
                       {"batch_size", c.batch_size},
                       {"weights", c.weights},
                       {"seed", c.seed},
                       {"lr_decay", c.lr_decay},
                       {"eval_every", c.eval_every},
                       {"patience", c.patience},
                       {"latent_norm", to_string(c.latent_norm)}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
    c = TrainConfig{};
    if (j.contains("learning_rate")) j.at("learning_rate").get_to(c.learning_rate);
    if (j.contains("beta1")) j.at("beta1").get_to(c.beta1);
    if (j.contains("beta2")) j.at("beta2").get_to(c.beta2);
    if (j.contains("max_epochs")) j.at("max_epochs").get_to(c.max_epochs);
    if (j.contains("batch_size")) j.at("batch_size").get_to(c.batch_size);
    if (j.contains("weights")) j.at("weights").get_to(c.weights);
    if (j.contains("seed")) j.at("seed").get_to(c.seed);
    if (j.contains("lr_decay")) j.at("lr_decay").get_to(c.lr_decay);
    if (j.contains("eval_every")) j.at("eval_every").get_to(c.eval_every);
    if (j.contains("patience")) j.at("patience").get_to(c.patience);
    if (j.contains("latent_norm"))
        c.latent_norm = latent_norm_from_string(j.at("latent_norm").get<std::string>());
}

void require_known_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                        const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& item : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
            throw ConfigError(where + ": unknown key '" + item.key() + "'");
    }
}

}  // namespace skipgan
