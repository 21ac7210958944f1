#pragma once

// Model files: {"model": <kind>, "params": {...}} with every field named
// exactly and unknown fields rejected.

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"
#include "preempt/error.hpp"
#include "preempt/streams_model.hpp"

namespace preempt {

enum class ModelKind { PawlinaKort, Grenadier, Weeds, FT, Affine };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::PawlinaKort: return "pawlina-kort";
    case ModelKind::Grenadier: return "grenadier";
    case ModelKind::Weeds: return "weeds";
    case ModelKind::FT: return "ft";
    case ModelKind::Affine: return "affine";
  }
  return "?";
}

struct LoadedModel {
  ModelKind kind = ModelKind::Affine;
  AffineStreamModel model;
  /// Equivalent asymmetric-cost parameters (pawlina-kort, weeds, ft).
  std::optional<PawlinaKortParams> pawlina_kort;
  std::optional<GrenadierParams> grenadier;
  /// Discount rate actually used (differs from the input r for weeds and ft).
  double effective_r = 0.0;
  bool x0_given = false;
};

namespace detail {

using nlohmann::json;

class ParamReader {
 public:
  ParamReader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw InvalidParameter(where_ + ": expected an object");
  }

  double number(const std::string& key) {
    seen_.insert(key);
    if (!obj_.contains(key)) throw InvalidParameter(where_ + ": missing field '" + key + "'");
    const auto& v = obj_.at(key);
    if (!v.is_number()) throw InvalidParameter(where_ + ": field '" + key + "' must be a number");
    return v.get<double>();
  }

  std::optional<double> optional_number(const std::string& key) {
    if (!obj_.contains(key)) {
      seen_.insert(key);
      return std::nullopt;
    }
    return number(key);
  }

  const json& object(const std::string& key) {
    seen_.insert(key);
    if (!obj_.contains(key)) throw InvalidParameter(where_ + ": missing field '" + key + "'");
    return obj_.at(key);
  }

  /// Throws if the object has fields that were never read.
  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw InvalidParameter(where_ + ": unknown field '" + it.key() + "'");
      }
    }
  }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

inline AffineStream read_stream(const json& j, const std::string& where) {
  ParamReader rd(j, where);
  AffineStream s{rd.number("a"), rd.number("b")};
  rd.finish();
  return s;
}

inline FirmStreams read_firm(const json& j, const std::string& where) {
  ParamReader rd(j, where);
  FirmStreams f{read_stream(rd.object("s0"), where + ".s0"), read_stream(rd.object("sL"), where + ".sL"),
                read_stream(rd.object("sF"), where + ".sF"), read_stream(rd.object("sB"), where + ".sB")};
  rd.finish();
  return f;
}

}  // namespace detail

inline LoadedModel parse_model(const nlohmann::json& doc) {
  detail::ParamReader top(doc, "model file");
  const auto& kind_j = top.object("model");
  if (!kind_j.is_string()) throw InvalidParameter("model file: 'model' must be a string");
  const std::string kind = kind_j.get<std::string>();
  detail::ParamReader rd(top.object("params"), "params");
  top.finish();

  LoadedModel out{ModelKind::Affine, AffineStreamModel({0.1, 0.0, 0.1, 1.0}, {}, {}), {}, {}, 0.0,
                  false};
  std::optional<double> x0;
  if (kind == "pawlina-kort") {
    PawlinaKortParams p;
    p.r = rd.number("r");
    p.mu = rd.number("mu");
    p.sigma = rd.number("sigma");
    p.D00 = rd.number("D00");
    p.D01 = rd.number("D01");
    p.D10 = rd.number("D10");
    p.D11 = rd.number("D11");
    p.I1 = rd.number("I1");
    p.I2 = rd.number("I2");
    x0 = rd.optional_number("x0");
    p.x0 = x0.value_or(1.0);
    rd.finish();
    out.kind = ModelKind::PawlinaKort;
    out.model = from_pawlina_kort(p);
    out.pawlina_kort = p;
    out.effective_r = p.r;
  } else if (kind == "grenadier") {
    GrenadierParams p;
    p.r = rd.number("r");
    p.mu = rd.number("mu");
    p.sigma = rd.number("sigma");
    p.delta = rd.number("delta");
    p.R = rd.number("R");
    p.gamma = rd.number("gamma");
    p.I = rd.number("I");
    p.D1 = rd.number("D1");
    p.D2 = rd.number("D2");
    x0 = rd.optional_number("x0");
    p.x0 = x0.value_or(1.0);
    rd.finish();
    out.kind = ModelKind::Grenadier;
    out.model = from_grenadier(p);
    out.grenadier = p;
    out.effective_r = p.r;
  } else if (kind == "weeds") {
    WeedsParams p;
    p.r = rd.number("r");
    p.mu = rd.number("mu");
    p.sigma = rd.number("sigma");
    p.h = rd.number("h");
    p.K = rd.number("K");
    x0 = rd.optional_number("x0");
    p.x0 = x0.value_or(1.0);
    rd.finish();
    const auto pk = weeds_as_pawlina_kort(p);
    out.kind = ModelKind::Weeds;
    out.model = from_pawlina_kort(pk);
    out.pawlina_kort = pk;
    out.effective_r = pk.r;
  } else if (kind == "ft") {
    FTParams p;
    p.r = rd.number("r");
    p.a = rd.number("a");
    p.pi0_0 = rd.number("pi0_0");
    p.pi0_1 = rd.number("pi0_1");
    p.pi1_1 = rd.number("pi1_1");
    p.pi1_2 = rd.number("pi1_2");
    rd.finish();
    const auto pk = ft_as_pawlina_kort(p);
    out.kind = ModelKind::FT;
    out.model = from_pawlina_kort(pk);
    out.pawlina_kort = pk;
    out.effective_r = pk.r;
    out.x0_given = true;
  } else if (kind == "affine") {
    GbmParams g;
    g.r = rd.number("r");
    g.mu = rd.number("mu");
    g.sigma = rd.number("sigma");
    x0 = rd.optional_number("x0");
    g.x0 = x0.value_or(1.0);
    const auto f1 = detail::read_firm(rd.object("firm1"), "params.firm1");
    const auto f2 = detail::read_firm(rd.object("firm2"), "params.firm2");
    rd.finish();
    out.kind = ModelKind::Affine;
    out.model = AffineStreamModel(g, f1, f2);
    out.effective_r = g.r;
  } else {
    throw InvalidParameter("model file: unknown model '" + kind + "'");
  }
  if (x0) out.x0_given = true;
  return out;
}

inline LoadedModel parse_model_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidParameter(std::string("model file: malformed JSON: ") + e.what());
  }
  return parse_model(doc);
}

inline LoadedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model_text(ss.str());
}

}  // namespace preempt
