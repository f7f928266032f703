#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qswitch/errors.hpp"
#include "qswitch/model.hpp"

namespace qswitch {

// Config file schema (JSON). Rates are in Mega-ebits/second; alpha uses the
// same 1e6/s scale. "buffer" is a positive integer or the literal "inf".
//
//   {
//     "n": 2,                    // entanglement size (default 2)
//     "q": 1.0,                  // measurement success probability (default 1)
//     "alpha": 0.0,              // decoherence rate (default 0)
//     "buffer": "inf",           // or an integer >= 1
//     "links": [                 // per link: "rate" XOR the length budget
//       {"rate": 1.0},
//       {"length_km": 100, "attenuation_db_per_km": 0.2,
//        "efficiency": 0.1, "tau_s": 1e-9}
//     ],
//     "p": [0.5, 0.5]            // optional slotted success probabilities
//   }
//
// Homogeneous shorthand: "k" and "mu" (Mega-ebits/s) instead of "links".

constexpr double kMegaEbits = 1e6;

inline Buffer parse_buffer(const nlohmann::json& value) {
  if (value.is_string()) {
    if (value.get<std::string>() == "inf") return Buffer::infinite();
    throw invalid_parameter_error("buffer must be a positive integer or \"inf\"");
  }
  if (value.is_number_integer()) return Buffer::finite(value.get<int>());
  throw invalid_parameter_error("buffer must be a positive integer or \"inf\"");
}

inline LinkConfig parse_link(const nlohmann::json& link) {
  const bool has_rate = link.contains("rate");
  const bool has_length = link.contains("length_km");
  if (has_rate == has_length) {
    throw invalid_parameter_error("each link needs either \"rate\" or a length budget, not both");
  }
  if (has_rate) {
    return LinkConfig::from_rate(link.at("rate").get<double>() * kMegaEbits);
  }
  return LinkConfig::from_length(link.at("length_km").get<double>(),
                                 link.at("attenuation_db_per_km").get<double>(),
                                 link.at("efficiency").get<double>(),
                                 link.at("tau_s").get<double>());
}

inline SwitchConfig parse_switch_config(const nlohmann::json& j) {
  const int n = j.value("n", 2);
  const double q = j.value("q", 1.0);
  const double alpha = j.value("alpha", 0.0) * kMegaEbits;
  const Buffer buffer = j.contains("buffer") ? parse_buffer(j.at("buffer")) : Buffer::infinite();

  std::vector<LinkConfig> links;
  if (j.contains("links")) {
    if (j.contains("k") || j.contains("mu")) {
      throw invalid_parameter_error("\"links\" and the k/mu shorthand are mutually exclusive");
    }
    for (const auto& link : j.at("links")) links.push_back(parse_link(link));
  } else if (j.contains("k") && j.contains("mu")) {
    const int k = j.at("k").get<int>();
    if (k < 2) throw invalid_parameter_error("need at least 2 links");
    links.assign(static_cast<std::size_t>(k),
                 LinkConfig::from_rate(j.at("mu").get<double>() * kMegaEbits));
  } else {
    throw invalid_parameter_error("config needs \"links\" or the k/mu shorthand");
  }

  std::vector<double> p;
  if (j.contains("p")) {
    const auto& pj = j.at("p");
    if (pj.is_number()) {
      p.assign(links.size(), pj.get<double>());
    } else {
      for (const auto& v : pj) p.push_back(v.get<double>());
    }
  }
  return SwitchConfig(n, std::move(links), buffer, q, alpha, std::move(p));
}

inline SwitchConfig load_switch_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_parameter_error("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw invalid_parameter_error(std::string("config parse error: ") + e.what());
  }
  try {
    return parse_switch_config(j);
  } catch (const nlohmann::json::exception& e) {
    throw invalid_parameter_error(std::string("config schema error: ") + e.what());
  }
}

}  // namespace qswitch
