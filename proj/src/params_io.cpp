#include "drpm/params_io.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "drpm/errors.hpp"

namespace drpm {

using nlohmann::json;

namespace {

json parse_document(const std::string& text) {
  try {
    json doc = json::parse(text);
    if (!doc.is_object()) throw ValidationError("document: expected a JSON object");
    return doc;
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("document: not valid JSON (") + e.what() + ")");
  }
}

const json& require(const json& doc, const char* field) {
  const auto it = doc.find(field);
  if (it == doc.end()) throw ValidationError(std::string(field) + ": missing");
  return *it;
}

int read_int(const json& v, const std::string& field) {
  if (!v.is_number_integer()) throw ValidationError(field + ": expected an integer");
  const auto x = v.get<long long>();
  if (x < 0 || x > 1'000'000) throw ValidationError(field + ": out of range");
  return static_cast<int>(x);
}

double read_real(const json& v, const std::string& field) {
  if (!v.is_number()) throw ValidationError(field + ": expected a number");
  return v.get<double>();
}

std::vector<double> read_reals(const json& v, const std::string& field) {
  if (!v.is_array()) throw ValidationError(field + ": expected a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(read_real(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<int> read_ints(const json& v, const std::string& field) {
  if (!v.is_array()) throw ValidationError(field + ": expected a list of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(read_int(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace

DrpmParams parse_params_json(const std::string& text) {
  const json doc = parse_document(text);
  const int groups = read_int(require(doc, "K"), "K");
  if (groups < 1) throw ValidationError("K: must be >= 1");
  const int n = read_int(require(doc, "n"), "n");
  DrpmParams p;
  p.mvhg.n = n;
  p.mvhg.omega = read_reals(require(doc, "omega"), "omega");
  if (static_cast<int>(p.mvhg.omega.size()) != groups) {
    throw ValidationError("omega: length " + std::to_string(p.mvhg.omega.size()) + " does not match K = " +
                          std::to_string(groups));
  }
  if (doc.contains("m")) {
    p.mvhg.m = read_ints(doc["m"], "m");
  } else {
    p.mvhg.m.assign(static_cast<std::size_t>(groups), n);
  }
  p.scores.s = read_reals(require(doc, "scores"), "scores");
  if (doc.contains("beta")) p.scores.beta = read_real(doc["beta"], "beta");
  p.validate();
  return p;
}

FitTarget parse_target_json(const std::string& text) {
  const json doc = parse_document(text);
  FitTarget t;
  t.n = read_int(require(doc, "n"), "n");
  t.groups = read_int(require(doc, "K"), "K");
  const json& part = require(doc, "partition");
  if (!part.is_string()) throw ValidationError("partition: expected a string such as \"110,001\"");
  try {
    t.partition = AssignmentMatrix::parse(part.get<std::string>());
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("partition: ") + e.what());
  }
  if (t.partition.groups() != t.groups || t.partition.elements() != t.n) {
    throw ValidationError("partition: shape " + std::to_string(t.partition.groups()) + "x" +
                          std::to_string(t.partition.elements()) + " does not match K x n = " +
                          std::to_string(t.groups) + "x" + std::to_string(t.n));
  }
  return t;
}

std::string params_to_json(const ParamPoint& point, const std::vector<int>& m, double beta) {
  const DrpmParams p = point.to_params(m, beta);
  json doc;
  doc["K"] = p.groups();
  doc["n"] = p.n();
  doc["m"] = p.mvhg.m;
  doc["omega"] = p.mvhg.omega;
  doc["scores"] = p.scores.s;
  doc["beta"] = beta;
  doc["log_omega"] = point.log_omega;
  doc["log_scores"] = point.log_scores;
  return doc.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path + "'");
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("error while writing '" + path + "'");
}

}  // namespace drpm
