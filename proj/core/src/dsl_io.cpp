#include "cadrec/dsl_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cadrec/errors.hpp"

namespace cadrec {

using nlohmann::json;

namespace {

json curve_to_json(const Curve& c) {
  const char* kind = c.kind == CurveKind::Line ? "line" : c.kind == CurveKind::Arc ? "arc" : "circle";
  json pts = json::array();
  for (const Vec2& p : c.points) pts.push_back({p.x, p.y});
  return {{"kind", kind}, {"points", pts}};
}

Curve curve_from_json(const json& j) {
  Curve c;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "line")
    c.kind = CurveKind::Line;
  else if (kind == "arc")
    c.kind = CurveKind::Arc;
  else if (kind == "circle")
    c.kind = CurveKind::Circle;
  else
    throw InputError("unknown curve kind '" + kind + "'");
  for (const json& p : j.at("points"))
    c.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return c;
}

json loop_to_json(const Loop& l) {
  json curves = json::array();
  for (const Curve& c : l.curves) curves.push_back(curve_to_json(c));
  return curves;
}

Loop loop_from_json(const json& j) {
  Loop l;
  for (const json& c : j) l.curves.push_back(curve_from_json(c));
  return l;
}

}  // namespace

json to_json(const ModelingStep& s) {
  json faces = json::array();
  for (const Face& f : s.sketch.faces) {
    json inner = json::array();
    for (const Loop& l : f.inner) inner.push_back(loop_to_json(l));
    faces.push_back({{"outer", loop_to_json(f.outer)}, {"inner", inner}});
  }
  const Extrusion& e = s.extrusion;
  json extrusion = {{"d_plus", e.d_plus},
                    {"d_minus", e.d_minus},
                    {"translation", {e.translation.x, e.translation.y, e.translation.z}},
                    {"orientation", {e.theta, e.phi, e.rho}},
                    {"scale", e.scale}};
  return {{"sketch", {{"faces", faces}}},
          {"extrusion", extrusion},
          {"boolean", s.op == BooleanOp::Union ? "union" : "subtraction"}};
}

json to_json(const CadSequence& seq) {
  json steps = json::array();
  for (const ModelingStep& s : seq.steps) steps.push_back(to_json(s));
  return {{"steps", steps}};
}

CadSequence sequence_from_json(const json& j) {
  CadSequence seq;
  for (const json& js : j.at("steps")) {
    ModelingStep step;
    for (const json& jf : js.at("sketch").at("faces")) {
      Face f;
      f.outer = loop_from_json(jf.at("outer"));
      if (jf.contains("inner"))
        for (const json& jl : jf.at("inner")) f.inner.push_back(loop_from_json(jl));
      step.sketch.faces.push_back(std::move(f));
    }
    const json& je = js.at("extrusion");
    Extrusion& e = step.extrusion;
    e.d_plus = je.at("d_plus").get<double>();
    e.d_minus = je.at("d_minus").get<double>();
    e.translation = {je.at("translation").at(0).get<double>(),
                     je.at("translation").at(1).get<double>(),
                     je.at("translation").at(2).get<double>()};
    e.theta = je.at("orientation").at(0).get<double>();
    e.phi = je.at("orientation").at(1).get<double>();
    e.rho = je.at("orientation").at(2).get<double>();
    e.scale = je.at("scale").get<double>();
    std::string op = js.at("boolean").get<std::string>();
    if (op == "union")
      step.op = BooleanOp::Union;
    else if (op == "subtraction")
      step.op = BooleanOp::Subtraction;
    else
      throw InputError("boolean must be 'union' or 'subtraction', got '" + op + "'");
    seq.steps.push_back(std::move(step));
  }
  return seq;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open '" + tmp.string() + "' for writing");
    out << contents;
    if (!out) throw InputError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw InputError("rename to '" + path + "' failed: " + ec.message());
}

void save_sequence_json(const std::string& path, const CadSequence& seq) {
  write_file_atomic(path, to_json(seq).dump(2) + "\n");
}

CadSequence load_sequence_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError("malformed JSON in '" + path + "': " + e.what());
  }
  try {
    return sequence_from_json(j);
  } catch (const json::exception& e) {
    throw InputError("bad sequence schema in '" + path + "': " + e.what());
  }
}

std::string to_token_text(const CadSequence& seq, const TokenAlphabet& alphabet) {
  std::ostringstream out;
  for (const ModelingStep& step : seq.steps) {
    TokenStream tokens = tokenize_step(step, alphabet);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i) out << ' ';
      out << tokens[i];
    }
    out << '\n';
  }
  return out.str();
}

TokenStream token_stream_from_text(const std::string& text) {
  TokenStream stream;
  std::istringstream in(text);
  long long v;
  while (in >> v) {
    if (v < 0) throw InputError("token values must be non-negative");
    stream.push_back(static_cast<int>(v));
  }
  if (!in.eof()) throw InputError("non-integer token in token text");
  return stream;
}

void save_token_text(const std::string& path, const CadSequence& seq,
                     const TokenAlphabet& alphabet) {
  write_file_atomic(path, to_token_text(seq, alphabet));
}

CadSequence load_token_text(const std::string& path, const TokenAlphabet& alphabet) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(token_stream_from_text(buf.str()), alphabet);
}

}  // namespace cadrec
