#include "editodds/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace editodds {

namespace {

using nlohmann::json;

json vocab_to_json(const Vocabulary& vocab) {
    return json(vocab.ids());
}

Vocabulary vocab_from_json(const json& arr) {
    Vocabulary vocab;
    for (const auto& id : arr) {
        vocab.add(id.get<std::string>());
    }
    return vocab;
}

std::vector<double> doubles_from_json(const json& arr) {
    return arr.get<std::vector<double>>();
}

}  // namespace

void save_checkpoint(const Predictor& pred, const std::string& path) {
    json doc;
    doc["format_version"] = kCheckpointFormatVersion;
    doc["variant"] = std::string(variant_name(pred.variant()));
    doc["n_users"] = pred.n_users();
    doc["n_items"] = pred.n_items();
    doc["dim"] = pred.dim();
    doc["fallback_p"] = pred.fallback();
    doc["users"] = vocab_to_json(pred.users());
    doc["items"] = vocab_to_json(pred.items());

    json params;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, AverageParams>) {
                params["p"] = p.p;
            } else if constexpr (std::is_same_v<T, UserOnlyParams>) {
                params["b"] = p.b;
                params["s"] = p.s;
            } else if constexpr (std::is_same_v<T, BasicParams>) {
                params["b"] = p.b;
                params["s"] = p.s;
                params["d"] = p.d;
            } else if constexpr (std::is_same_v<T, FullParams>) {
                params["b"] = p.base.b;
                params["s"] = p.base.s;
                params["d"] = p.base.d;
                params["x"] = p.x;
                params["y"] = p.y;
            } else {
                params["b"] = p.b;
                params["s"] = p.s;
                params["beta"] = p.beta;
            }
        },
        pred.params());
    doc["params"] = std::move(params);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

Predictor load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw std::runtime_error("checkpoint " + path + " is not valid JSON: " + e.what());
    }

    if (!doc.contains("format_version") || !doc["format_version"].is_number_integer()) {
        throw std::runtime_error("checkpoint " + path + " has no format_version field");
    }
    const int version = doc["format_version"].get<int>();
    if (version != kCheckpointFormatVersion) {
        throw std::runtime_error("checkpoint " + path + " has format_version " +
                                 std::to_string(version) + "; this build reads version " +
                                 std::to_string(kCheckpointFormatVersion));
    }

    const Variant variant = variant_from_name(doc.at("variant").get<std::string>());
    Vocabulary users = vocab_from_json(doc.at("users"));
    Vocabulary items = vocab_from_json(doc.at("items"));
    if (users.size() != doc.at("n_users").get<int>() ||
        items.size() != doc.at("n_items").get<int>()) {
        throw std::runtime_error("checkpoint " + path + ": vocabulary sizes disagree with header");
    }
    const double fallback_p = doc.at("fallback_p").get<double>();
    const json& params = doc.at("params");

    Params payload;
    switch (variant) {
        case Variant::average:
            payload = AverageParams{params.at("p").get<double>()};
            break;
        case Variant::user_only:
            payload = UserOnlyParams{params.at("b").get<double>(),
                                     doubles_from_json(params.at("s"))};
            break;
        case Variant::basic:
            payload = BasicParams{params.at("b").get<double>(), doubles_from_json(params.at("s")),
                                  doubles_from_json(params.at("d"))};
            break;
        case Variant::full: {
            FullParams full;
            full.base.b = params.at("b").get<double>();
            full.base.s = doubles_from_json(params.at("s"));
            full.base.d = doubles_from_json(params.at("d"));
            full.dim = doc.at("dim").get<int>();
            full.x = doubles_from_json(params.at("x"));
            full.y = doubles_from_json(params.at("y"));
            payload = std::move(full);
            break;
        }
        case Variant::glad:
            payload = GladParams{params.at("b").get<double>(), doubles_from_json(params.at("s")),
                                 doubles_from_json(params.at("beta"))};
            break;
    }
    return Predictor(std::move(payload), std::move(users), std::move(items), fallback_p);
}

}  // namespace editodds
