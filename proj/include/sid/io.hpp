#pragma once

#include <json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "sid/fit.hpp"
#include "sid/model.hpp"

namespace sid {

using json = nlohmann::json;

// Row-major nested-array encodings.
json matrix_to_json(const Matrix& X);
json vector_to_json(const Vector& v);
Matrix matrix_from_json(const json& j, const std::string& field);
Vector vector_from_json(const json& j, const std::string& field);

// Model document with fields exactly
// N,d,m,p,C,G,Q,R,Pi0,x0,A0,B0,alpha,beta,T,M. The returned spec is
// validated.
json model_to_json(const ModelSpec& spec, const TimeGrid& grid);
std::pair<ModelSpec, TimeGrid> model_from_json(const json& j);

// Dataset CSV: header t,v_1..v_d,y_1..y_p, one row per interval, t at the
// interval left endpoint, 17 significant digits. Reading checks the column
// count per row and the row count against the grid, reporting row numbers.
void write_dataset_csv(const std::string& path, const Dataset& dataset,
                       const Dims& dims);
Dataset read_dataset_csv(const std::string& path, const Dims& dims,
                         const TimeGrid& grid);

// Node-state CSV: header t,x_1..x_N, one row per node (M+1 rows).
void write_states_csv(const std::string& path, const TimeGrid& grid,
                      const std::vector<Vector>& x);

json fit_report_to_json(const FitReport& report);
void write_fit_report_json(const std::string& path, const FitReport& report);

// Descent log CSV: iter,J,step_norm,gap_error,estep_residual,mstep_residual,
// one row per sweep. estep_residual is the max of the four defect fields.
void write_descent_log_csv(const std::string& path, const FitReport& report);

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

}  // namespace sid
