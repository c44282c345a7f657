#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "bounds.hpp"
#include "mpnn.hpp"

namespace squashscope {

// Weights are stored as flat row-major arrays; the width d fixes the shapes.

inline nlohmann::json matrix_to_json(const Matrix& M) {
  nlohmann::json a = nlohmann::json::array();
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) a.push_back(M(i, j));
  return a;
}

inline Matrix matrix_from_json(const nlohmann::json& j, int rows, int cols, const std::string& field) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(rows) * cols)
    throw ParseError("model json: field '" + field + "' must be a flat array of " + std::to_string(rows * cols) +
                     " numbers");
  Matrix M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int c = 0; c < cols; ++c) M(i, c) = j[static_cast<std::size_t>(i) * cols + c].get<double>();
  return M;
}

inline nlohmann::json model_to_json(const MpnnModel& model) {
  nlohmann::json j;
  j["width"] = model.width();
  j["activation"] = to_string(model.activation);
  j["readout"] = to_string(model.readout);
  j["matrix_kind"] = to_string(model.matrix_kind);
  j["theta"] = matrix_to_json(model.theta);
  j["layers"] = nlohmann::json::array();
  for (const Layer& L : model.layers) {
    nlohmann::json l;
    l["Omega"] = matrix_to_json(L.Omega);
    l["W"] = matrix_to_json(L.W);
    l["family"] = to_string(L.message.family);
    if (L.message.family == MessageFamily::linear) {
      l["C1"] = matrix_to_json(L.message.C1);
      l["C2"] = matrix_to_json(L.message.C2);
    } else {
      l["G1"] = matrix_to_json(L.message.G1);
      l["G2"] = matrix_to_json(L.message.G2);
      l["U"] = matrix_to_json(L.message.U);
    }
    j["layers"].push_back(l);
  }
  return j;
}

/// Accepts either explicit weights ({"width", "layers", "theta", ...}) or a
/// generator config ({"width", "depth", "family", "seed", "scale", ...}).
inline MpnnModel model_from_json(const nlohmann::json& j) {
  try {
    const int d = j.at("width").get<int>();
    if (d < 1) throw ParseError("model json: width must be positive");
    if (!j.contains("layers")) {
      RandomModelSpec spec;
      spec.width = d;
      spec.depth = j.at("depth").get<int>();
      spec.family = parse_message_family(j.value("family", "linear"));
      spec.activation = parse_activation(j.value("activation", "tanh"));
      spec.readout = parse_readout(j.value("readout", "sum"));
      spec.matrix_kind = parse_matrix_kind(j.value("matrix_kind", "sym"));
      spec.scale = j.value("scale", 1.0);
      return random_model(spec, j.value("seed", std::uint64_t{0}));
    }
    MpnnModel model;
    model.activation = parse_activation(j.value("activation", "tanh"));
    model.readout = parse_readout(j.value("readout", "sum"));
    model.matrix_kind = parse_matrix_kind(j.value("matrix_kind", "sym"));
    model.theta = matrix_from_json(j.at("theta"), d, 1, "theta");
    for (const auto& l : j.at("layers")) {
      Layer L;
      L.Omega = matrix_from_json(l.at("Omega"), d, d, "Omega");
      L.W = matrix_from_json(l.at("W"), d, d, "W");
      if (parse_message_family(l.value("family", "linear")) == MessageFamily::linear) {
        Matrix c1 = matrix_from_json(l.at("C1"), d, d, "C1");
        L.message = MessageFunction::linear(std::move(c1), matrix_from_json(l.at("C2"), d, d, "C2"));
      } else {
        Matrix g1 = matrix_from_json(l.at("G1"), d, d, "G1");
        Matrix g2 = matrix_from_json(l.at("G2"), d, d, "G2");
        L.message = MessageFunction::gated(std::move(g1), std::move(g2), matrix_from_json(l.at("U"), d, d, "U"));
      }
      model.layers.push_back(std::move(L));
    }
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model json: ") + e.what());
  }
}

inline nlohmann::json constants_to_json(const MixingConstants& c) {
  return {{"omega", c.omega}, {"w", c.w}, {"c1", c.c1}, {"c2", c.c2}, {"c2nd", c.c2nd}, {"c_sigma", c.c_sigma}};
}

/// Omitted fields keep their defaults (omega 0, w 1, c1 0, c2 1, c2nd 0, c_sigma 1).
inline MixingConstants constants_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("constants json: expected an object");
  MixingConstants c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it->is_number()) throw ParseError("constants json: field '" + it.key() + "' must be a number");
    const double x = it->get<double>();
    if (it.key() == "omega") c.omega = x;
    else if (it.key() == "w") c.w = x;
    else if (it.key() == "c1") c.c1 = x;
    else if (it.key() == "c2") c.c2 = x;
    else if (it.key() == "c2nd") c.c2nd = x;
    else if (it.key() == "c_sigma") c.c_sigma = x;
    else throw ParseError("constants json: unknown field '" + it.key() + "'");
  }
  c.validate();
  return c;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + path + "': " + e.what());
  }
}

}  // namespace squashscope
