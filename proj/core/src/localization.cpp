#include "wgspec/localization.hpp"
#include "wgspec/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>

namespace wgspec {

std::vector<double> LocalizationModel::lambda_pred(double delta) const {
    const double corr = endpoint_case() ? std::pow(delta, -2.0 / 3.0) : std::pow(delta, -0.5);
    std::vector<double> lam;
    lam.reserve(levels.size());
    for (const auto& lv : levels)
        lam.push_back(mu_C / (delta * delta) + h0 / delta + lv.eta * corr);
    return lam;
}

LocalizationModel localize(const WaveguideGeometry& geom, const Vec2& b, double mu_C, double r,
                           int k) {
    if (!(r > 0)) throw ConfigError("localization", "r must be positive");
    LocalizationModel model;
    model.cls = classify_h(geom, b);
    model.r = r;
    model.mu_C = mu_C;
    model.h0 = model.cls.h_min;

    if (model.cls.kind == HClassification::Kind::Propagation)
        throw SolverError("localization",
                          "h is constant: the propagation model applies, not localization");
    if (!model.cls.wells.empty() && !model.cls.endpoints.empty())
        throw SolverError("localization",
                          "mixed interior/endpoint global minima are not supported");

    for (const auto& wellc : model.cls.wells) {
        LocalizationModel::Well w;
        w.endpoint = false;
        w.s0 = wellc.s0;
        w.strength = wellc.hpp;
        w.spectrum = solve_oscillator(r, 0.5 * wellc.hpp, k);
        model.wells.push_back(std::move(w));
    }
    for (const auto& endc : model.cls.endpoints) {
        LocalizationModel::Well w;
        w.endpoint = true;
        w.s0 = endc.left ? 0.0 : geom.l;
        w.strength = endc.slope;
        w.spectrum = solve_halfline_linear(r, endc.slope, k);
        model.wells.push_back(std::move(w));
    }

    // ascending merge with well provenance; near-degenerate levels are kept
    // as distinct entries rather than artificially split
    for (size_t wi = 0; wi < model.wells.size(); ++wi)
        for (size_t j = 0; j < model.wells[wi].spectrum.eigenvalues.size(); ++j)
            model.levels.push_back(
                {model.wells[wi].spectrum.eigenvalues[j], static_cast<int>(wi),
                 static_cast<int>(j)});
    std::stable_sort(model.levels.begin(), model.levels.end(),
                     [](const auto& a, const auto& c) { return a.eta < c.eta; });
    if (model.levels.size() > static_cast<size_t>(k)) model.levels.resize(static_cast<size_t>(k));
    return model;
}

std::string localization_to_json(const LocalizationModel& model,
                                 const std::vector<double>& deltas) {
    nlohmann::json j;
    switch (model.cls.kind) {
    case HClassification::Kind::InteriorSingle: j["class"] = "interior_single"; break;
    case HClassification::Kind::InteriorMulti: j["class"] = "interior_multi"; break;
    case HClassification::Kind::Endpoint: j["class"] = "endpoint"; break;
    default: j["class"] = "propagation"; break;
    }
    j["r"] = model.r;
    j["mu_C"] = model.mu_C;
    j["h0"] = model.h0;
    nlohmann::json wells = nlohmann::json::array();
    for (const auto& w : model.wells) {
        nlohmann::json jw;
        jw["s"] = w.s0;
        jw[w.endpoint ? "hp" : "hpp"] = w.strength;
        jw["endpoint"] = w.endpoint;
        jw["truncation"] = w.spectrum.truncation;
        if (!w.spectrum.truncation_sensitivity.empty())
            jw["truncation_sensitivity"] = w.spectrum.truncation_sensitivity;
        wells.push_back(jw);
    }
    j["wells"] = wells;
    nlohmann::json eta = nlohmann::json::array();
    for (const auto& lv : model.levels) eta.push_back({{"value", lv.eta}, {"well", lv.well}});
    j["eta"] = eta;
    nlohmann::json lam = nlohmann::json::object();
    for (double d : deltas) lam[nlohmann::json(d).dump()] = model.lambda_pred(d);
    j["lambda_pred"] = lam;
    j["blowup"] = {{"coord_exponent", model.coord_exponent()},
                   {"amplitude_exponent", model.amplitude_exponent()}};
    return j.dump(2);
}

} // namespace wgspec
