#pragma once

// Interchange formats for modeling sequences:
//  - JSON:  {"steps":[{"sketch":{"faces":[{"outer":[curve...],
//           "inner":[[curve...]...]}]},"extrusion":{"d_plus":..,"d_minus":..,
//           "translation":[x,y,z],"orientation":[theta,phi,rho],"scale":..},
//           "boolean":"union"|"subtraction"}]}
//           with curve = {"kind":"line"|"arc"|"circle","points":[[x,y]...]}
//  - token text: whitespace-separated integers, one modeling step per line.

#include <string>

#include <nlohmann/json.hpp>

#include "cadrec/dsl.hpp"

namespace cadrec {

nlohmann::json to_json(const CadSequence& seq);
nlohmann::json to_json(const ModelingStep& step);
CadSequence sequence_from_json(const nlohmann::json& j);

void save_sequence_json(const std::string& path, const CadSequence& seq);
CadSequence load_sequence_json(const std::string& path);

std::string to_token_text(const CadSequence& seq, const TokenAlphabet& alphabet);
TokenStream token_stream_from_text(const std::string& text);

void save_token_text(const std::string& path, const CadSequence& seq,
                     const TokenAlphabet& alphabet);
CadSequence load_token_text(const std::string& path, const TokenAlphabet& alphabet);

// Writes via a temp file in the same directory, then renames into place.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace cadrec
