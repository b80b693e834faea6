#pragma once

#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "lagrangia/dynamics.hpp"
#include "lagrangia/library.hpp"

namespace lagrangia {

// A Lagrangian as a coefficient vector over a candidate library. For models
// anchored by a known prior term (case III) prior_index names the term whose
// coefficient is fixed at 1 and excluded from learning.
struct LagrangianModel {
    std::shared_ptr<const CandidateLibrary> library;
    Eigen::VectorXd coefficients;
    int prior_index = -1;

    int size() const { return library ? library->size() : 0; }

    // Indices with |c_k| above the reporting threshold.
    std::vector<int> support(double threshold = 1e-3) const {
        std::vector<int> out;
        for (int k = 0; k < size(); ++k)
            if (std::abs(coefficients[k]) > threshold) out.push_back(k);
        return out;
    }
};

inline LagrangianModel make_model(std::shared_ptr<const CandidateLibrary> lib,
                                  Eigen::VectorXd coefficients, int prior_index = -1) {
    LagrangianModel m;
    m.library = std::move(lib);
    m.coefficients = std::move(coefficients);
    m.prior_index = prior_index;
    if (m.coefficients.size() != m.library->size())
        throw ConfigError("coefficient vector length does not match library size");
    return m;
}

// Model with the true coefficients of a benchmark system over a library.
inline LagrangianModel true_model(const SystemSpec& sys, std::shared_ptr<const CandidateLibrary> lib) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(lib->size());
    for (const auto& [term, value] : true_coefficients(sys)) c[lib->require(term)] = value;
    return make_model(std::move(lib), std::move(c));
}

// Human-readable sum "c·term + ..." in library order. Zero coefficients are
// omitted; coefficients are printed with `digits` decimal places.
inline std::string render(const LagrangianModel& model, int digits = 3) {
    std::string out;
    char buf[64];
    for (int k = 0; k < model.size(); ++k) {
        const double c = model.coefficients[k];
        if (c == 0.0) continue;
        if (!std::isfinite(c)) throw ConfigError("model has non-finite coefficients");
        if (out.empty())
            out += c < 0 ? "-" : "";
        else
            out += c < 0 ? " - " : " + ";
        std::snprintf(buf, sizeof(buf), "%.*f", digits, std::abs(c));
        out += buf;
        out += "·";
        out += model.library->terms[static_cast<std::size_t>(k)].render(model.library->space);
    }
    return out;
}

inline nlohmann::json model_to_json(const LagrangianModel& model) {
    nlohmann::json terms = nlohmann::json::array();
    for (int k = 0; k < model.size(); ++k)
        terms.push_back({{"term", model.library->terms[static_cast<std::size_t>(k)].to_string(
                                      model.library->space)},
                         {"coefficient", model.coefficients[k]}});
    nlohmann::json j = {{"coefficients", terms}, {"rendered", render(model)}};
    if (model.prior_index >= 0)
        j["prior_term"] =
            model.library->terms[static_cast<std::size_t>(model.prior_index)].to_string(model.library->space);
    return j;
}

// Restores a model against a freshly built library; term texts in the JSON
// must match the library.
inline LagrangianModel model_from_json(const nlohmann::json& j,
                                       std::shared_ptr<const CandidateLibrary> lib) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(lib->size());
    for (const auto& entry : j.at("coefficients"))
        c[lib->require(entry.at("term").get<std::string>())] = entry.at("coefficient").get<double>();
    int prior = -1;
    if (j.contains("prior_term")) prior = lib->require(j.at("prior_term").get<std::string>());
    return make_model(std::move(lib), std::move(c), prior);
}

}  // namespace lagrangia
