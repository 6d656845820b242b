#pragma once

#include <json.hpp>

#include <optional>
#include <string>

#include "icsim/algorithms.hpp"
#include "icsim/fixed_point.hpp"
#include "icsim/heterogeneity.hpp"
#include "icsim/quad_core.hpp"
#include "icsim/theory_bounds.hpp"

namespace icsim {

using json = nlohmann::json;

json vector_to_json(const Vector& v);
Vector vector_from_json(const json& j);
json matrix_to_json(const Matrix& m);  // row-major flat array
Matrix matrix_from_json(const json& j, int dim);

json instance_to_json(const ProblemInstance& inst);
ProblemInstance instance_from_json(const json& j);
ProblemInstance load_instance(const std::string& path);
void save_instance(const ProblemInstance& inst, const std::string& path);

// Same instance with a different noise level.
ProblemInstance with_sigma(const ProblemInstance& inst, double sigma);

std::string format_double(double v);  // 17 significant digits

std::string trajectory_csv(const Trajectory& traj,
                           const std::optional<Vector>& fixed_point = std::nullopt);

json algorithm_config_to_json(const AlgorithmConfig& cfg);

json fixed_point_to_json(const FixedPointReport& rep,
                         const std::optional<DiscrepancyReport>& disc = std::nullopt);
json heterogeneity_to_json(const HeterogeneityReport& rep);
json bound_report_to_json(const bounds::BoundReport& rep);
bounds::BoundParams bound_params_from_json(const json& j);

std::string read_file(const std::string& path);
// Writes to path + ".tmp" and renames over path.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace icsim
