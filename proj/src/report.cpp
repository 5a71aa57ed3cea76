#include "icterm/report.hpp"

#include <json.hpp>

namespace icterm {

namespace {

using nlohmann::json;

json opt_bool(const std::optional<bool>& b) {
  return b ? json(*b) : json(nullptr);
}

std::optional<bool> opt_bool(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<bool>();
}

}  // namespace

std::string report_to_json(const AnalysisReport& r) {
  json j;
  j["file"] = r.file;
  j["parse_ok"] = r.parse_ok;
  j["errors"] = r.errors;
  j["warnings"] = r.warnings;
  j["nicely_moded"] = r.nicely_moded;
  j["simply_moded"] = r.simply_moded;
  j["input_recursive"] = r.input_recursive;
  j["nm_witness"] = r.nm_witness;
  j["sm_witness"] = r.sm_witness;
  j["ir_witness"] = r.ir_witness;
  j["sccs"] = r.sccs;
  j["dep"] = r.dep;
  j["permutation_nicely_moded"] = opt_bool(r.permutation_nicely_moded);
  j["permutation_simply_moded"] = opt_bool(r.permutation_simply_moded);
  json perms = json::object();
  for (const auto& [clause, order] : r.permutations)
    perms[std::to_string(clause)] = order;
  j["permutations"] = perms;
  j["mapping_source"] = r.mapping_source;
  j["mapping"] = r.mapping;
  j["quasi_recurrent"] = opt_bool(r.quasi_recurrent);
  json pairs = json::array();
  for (const QrLine& q : r.qr_pairs)
    pairs.push_back({{"clause", q.clause_index},
                     {"body_atom", q.body_index},
                     {"proven", q.proven},
                     {"difference", q.difference},
                     {"obstruction", q.obstruction}});
  j["qr_pairs"] = pairs;
  j["termination_proven"] = opt_bool(r.termination_proven);
  j["failed_hypotheses"] = r.failed_hypotheses;
  j["elapsed_ms"] = r.elapsed_ms;
  return j.dump(2);
}

AnalysisReport report_from_json(const std::string& text) {
  json j = json::parse(text);
  AnalysisReport r;
  r.file = j.at("file").get<std::string>();
  r.parse_ok = j.at("parse_ok").get<bool>();
  r.errors = j.at("errors").get<std::vector<std::string>>();
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  r.nicely_moded = j.at("nicely_moded").get<bool>();
  r.simply_moded = j.at("simply_moded").get<bool>();
  r.input_recursive = j.at("input_recursive").get<bool>();
  r.nm_witness = j.at("nm_witness").get<std::string>();
  r.sm_witness = j.at("sm_witness").get<std::string>();
  r.ir_witness = j.at("ir_witness").get<std::string>();
  r.sccs = j.at("sccs").get<std::vector<std::vector<std::string>>>();
  r.dep = j.at("dep").get<std::map<std::string, int>>();
  r.permutation_nicely_moded = opt_bool(j.at("permutation_nicely_moded"));
  r.permutation_simply_moded = opt_bool(j.at("permutation_simply_moded"));
  for (const auto& [key, value] : j.at("permutations").items())
    r.permutations[std::stoi(key)] = value.get<std::vector<int>>();
  r.mapping_source = j.at("mapping_source").get<std::string>();
  r.mapping = j.at("mapping").get<std::vector<std::string>>();
  r.quasi_recurrent = opt_bool(j.at("quasi_recurrent"));
  for (const auto& item : j.at("qr_pairs")) {
    QrLine q;
    q.clause_index = item.at("clause").get<int>();
    q.body_index = item.at("body_atom").get<int>();
    q.proven = item.at("proven").get<bool>();
    q.difference = item.at("difference").get<std::string>();
    q.obstruction = item.at("obstruction").get<std::string>();
    r.qr_pairs.push_back(std::move(q));
  }
  r.termination_proven = opt_bool(j.at("termination_proven"));
  r.failed_hypotheses =
      j.at("failed_hypotheses").get<std::vector<std::string>>();
  r.elapsed_ms = j.at("elapsed_ms").get<double>();
  return r;
}

}  // namespace icterm
