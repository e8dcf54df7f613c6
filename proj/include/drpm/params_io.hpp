#ifndef DRPM_PARAMS_IO_HPP
#define DRPM_PARAMS_IO_HPP

// JSON documents read and written by the command-line tool.
//
// Params file: {"K": 2, "n": 3, "m": [3, 3], "omega": [1, 1],
//               "scores": [1, 1, 1], "beta": 1}
// with m and beta optional. Fit target: {"n": 3, "K": 2, "partition": "110,001"}.

#include <string>

#include "drpm/grad.hpp"
#include "drpm/learn.hpp"
#include "drpm/partition.hpp"

namespace drpm {

/// Throws ValidationError naming the offending field.
DrpmParams parse_params_json(const std::string& text);

struct FitTarget {
  int n = 0;
  int groups = 0;
  AssignmentMatrix partition;
};

FitTarget parse_target_json(const std::string& text);

/// {"K", "n", "m", "omega", "scores", "beta", "log_omega", "log_scores"}.
std::string params_to_json(const ParamPoint& point, const std::vector<int>& m, double beta);

/// Whole file as a string; throws IoError.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace drpm

#endif  // DRPM_PARAMS_IO_HPP
