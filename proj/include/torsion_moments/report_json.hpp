#pragma once

/**
 * @file report_json.hpp
 * @brief JSON forms of the lab reports. Rationals travel as decimal-string
 *        numerator/denominator pairs so they survive arbitrary size.
 */

#include <string>

#include <json.hpp>

#include "moment_lab.hpp"

namespace torsion_moments {

using Json = nlohmann::ordered_json;

inline void put_rational(Json& j, const std::string& prefix, const ExactRational& q) {
    j[prefix + "_num"] = numerator_of(q).str();
    j[prefix + "_den"] = denominator_of(q).str();
}

inline ExactRational get_rational(const Json& j, const std::string& prefix) {
    return ExactRational(BigInt(j.at(prefix + "_num").get<std::string>()),
                         BigInt(j.at(prefix + "_den").get<std::string>()));
}

inline Json histogram_json(const std::map<std::uint64_t, std::uint64_t>& h) {
    Json j = Json::object();
    for (auto [v, c] : h) j[std::to_string(v)] = c;
    return j;
}

inline Json to_json(const MomentReport& r) {
    Json j;
    j["scenario"] = r.scenario;
    j["k"] = r.k;
    j["x"] = r.x;
    j["pi_x"] = r.pi_x;
    put_rational(j, "empirical", r.empirical);
    if (r.predicted) {
        put_rational(j, "predicted", *r.predicted);
        j["predicted_label"] = r.predicted_label;
    } else {
        j["predicted_num"] = nullptr;
        j["predicted_den"] = nullptr;
    }
    if (auto e = r.rel_err()) j["rel_err"] = *e;
    else j["rel_err"] = nullptr;
    if (r.orbit_predicted) put_rational(j, "orbit_predicted", *r.orbit_predicted);
    j["excluded"] = r.excluded;
    j["filtered_out"] = r.filtered_out;
    j["good_primes_only"] = r.good_primes_only;
    j["histogram"] = histogram_json(r.histogram);
    return j;
}

inline Json to_json(const DistributionReport& r) {
    Json j;
    j["scenario"] = r.scenario;
    j["x"] = r.x;
    j["pi_x"] = r.pi_x;
    Json masses = Json::object();
    for (const auto& [v, w] : r.masses) {
        Json e;
        put_rational(e, "mass", w);
        masses[std::to_string(v)] = e;
    }
    j["masses"] = masses;
    Json cdf = Json::array();
    for (const auto& [z, h] : r.cdf) {
        Json e;
        e["z"] = z;
        put_rational(e, "H", h);
        cdf.push_back(e);
    }
    j["cdf"] = cdf;
    if (r.predicted) {
        Json pred = Json::object();
        for (const auto& [v, w] : *r.predicted) {
            Json e;
            put_rational(e, "mass", w);
            pred[std::to_string(v)] = e;
        }
        j["predicted"] = pred;
    }
    Json phi = Json::array();
    for (const auto& s : r.phi)
        phi.push_back({{"t", s.t}, {"K", s.order}, {"re", s.value.real()}, {"im", s.value.imag()},
                       {"tail_bound", s.tail_bound}});
    j["phi"] = phi;
    return j;
}

} // namespace torsion_moments
