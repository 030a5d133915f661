#include "sid/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace sid {

namespace {

std::string fmt17(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

double field_as_double(const json& j, const std::string& field) {
    if (!j.contains(field) || !j.at(field).is_number()) {
        throw ConfigError("missing or non-numeric field '" + field + "'");
    }
    return j.at(field).get<double>();
}

int field_as_int(const json& j, const std::string& field) {
    if (!j.contains(field) || !j.at(field).is_number_integer()) {
        throw ConfigError("missing or non-integer field '" + field + "'");
    }
    return j.at(field).get<int>();
}

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

double parse_cell(const std::string& cell, int row, const std::string& path) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        std::ostringstream msg;
        msg << path << ": row " << row << ": cannot parse '" << cell << "'";
        throw IoError(msg.str());
    }
}

}  // namespace

json matrix_to_json(const Matrix& X) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < X.cols(); ++j) row.push_back(X(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Matrix matrix_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty() || !j.front().is_array()) {
        throw ConfigError("field '" + field +
                          "' must be a non-empty array of rows");
    }
    const std::size_t rows = j.size();
    const std::size_t cols = j.front().size();
    Matrix X(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols) {
            throw ConfigError("field '" + field + "' has ragged rows");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[i][c].is_number()) {
                throw ConfigError("field '" + field +
                                  "' has a non-numeric entry");
            }
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                j[i][c].get<double>();
        }
    }
    return X;
}

Vector vector_from_json(const json& j, const std::string& field) {
    if (!j.is_array()) {
        throw ConfigError("field '" + field + "' must be an array");
    }
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) {
            throw ConfigError("field '" + field + "' has a non-numeric entry");
        }
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

json model_to_json(const ModelSpec& spec, const TimeGrid& grid) {
    json j;
    j["N"] = spec.dims.N;
    j["d"] = spec.dims.d;
    j["m"] = spec.dims.m;
    j["p"] = spec.dims.p;
    j["C"] = matrix_to_json(spec.C);
    j["G"] = matrix_to_json(spec.G);
    j["Q"] = matrix_to_json(spec.Q);
    j["R"] = matrix_to_json(spec.R);
    j["Pi0"] = matrix_to_json(spec.Pi0);
    j["x0"] = vector_to_json(spec.x0);
    j["A0"] = matrix_to_json(spec.A0);
    j["B0"] = matrix_to_json(spec.B0);
    j["alpha"] = spec.alpha;
    j["beta"] = spec.beta;
    j["T"] = grid.T;
    j["M"] = grid.M;
    return j;
}

std::pair<ModelSpec, TimeGrid> model_from_json(const json& j) {
    ModelSpec spec;
    spec.dims.N = field_as_int(j, "N");
    spec.dims.d = field_as_int(j, "d");
    spec.dims.m = field_as_int(j, "m");
    spec.dims.p = field_as_int(j, "p");
    for (const char* field : {"C", "G", "Q", "R", "Pi0", "x0", "A0", "B0"}) {
        if (!j.contains(field)) {
            throw ConfigError(std::string("missing field '") + field + "'");
        }
    }
    spec.C = matrix_from_json(j.at("C"), "C");
    spec.G = matrix_from_json(j.at("G"), "G");
    spec.Q = matrix_from_json(j.at("Q"), "Q");
    spec.R = matrix_from_json(j.at("R"), "R");
    spec.Pi0 = matrix_from_json(j.at("Pi0"), "Pi0");
    spec.x0 = vector_from_json(j.at("x0"), "x0");
    spec.A0 = matrix_from_json(j.at("A0"), "A0");
    spec.B0 = matrix_from_json(j.at("B0"), "B0");
    spec.alpha = field_as_double(j, "alpha");
    spec.beta = field_as_double(j, "beta");
    const double T = field_as_double(j, "T");
    const int M = field_as_int(j, "M");
    return {validate_spec(spec), make_grid(T, M)};
}

void write_dataset_csv(const std::string& path, const Dataset& dataset,
                       const Dims& dims) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "t";
    for (int i = 1; i <= dims.d; ++i) out << ",v_" << i;
    for (int i = 1; i <= dims.p; ++i) out << ",y_" << i;
    out << "\n";
    for (int k = 0; k < dataset.grid.M; ++k) {
        out << fmt17(dataset.grid.node(k));
        const Vector& v = dataset.v[static_cast<std::size_t>(k)];
        const Vector& y = dataset.y[static_cast<std::size_t>(k)];
        for (int i = 0; i < dims.d; ++i) out << "," << fmt17(v[i]);
        for (int i = 0; i < dims.p; ++i) out << "," << fmt17(y[i]);
        out << "\n";
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

Dataset read_dataset_csv(const std::string& path, const Dims& dims,
                         const TimeGrid& grid) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    const std::size_t expected_cols =
        1 + static_cast<std::size_t>(dims.d) + static_cast<std::size_t>(dims.p);

    Dataset dataset;
    dataset.grid = grid;
    std::string line;
    if (!std::getline(in, line)) throw IoError(path + ": empty file");
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto cells = split_csv_row(line);
        if (cells.size() != expected_cols) {
            std::ostringstream msg;
            msg << path << ": row " << row << ": expected " << expected_cols
                << " columns, got " << cells.size();
            throw IoError(msg.str());
        }
        Vector v(dims.d), y(dims.p);
        for (int i = 0; i < dims.d; ++i) {
            v[i] = parse_cell(cells[static_cast<std::size_t>(1 + i)], row, path);
        }
        for (int i = 0; i < dims.p; ++i) {
            y[i] = parse_cell(
                cells[static_cast<std::size_t>(1 + dims.d + i)], row, path);
        }
        dataset.v.push_back(std::move(v));
        dataset.y.push_back(std::move(y));
    }
    if (static_cast<int>(dataset.v.size()) != grid.M) {
        std::ostringstream msg;
        msg << path << ": has " << dataset.v.size() << " data rows, grid needs "
            << grid.M;
        throw IoError(msg.str());
    }
    return dataset;
}

void write_states_csv(const std::string& path, const TimeGrid& grid,
                      const std::vector<Vector>& x) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    const Eigen::Index N = x.empty() ? 0 : x.front().size();
    out << "t";
    for (Eigen::Index i = 1; i <= N; ++i) out << ",x_" << i;
    out << "\n";
    for (std::size_t k = 0; k < x.size(); ++k) {
        out << fmt17(grid.node(static_cast<int>(k)));
        for (Eigen::Index i = 0; i < N; ++i) out << "," << fmt17(x[k][i]);
        out << "\n";
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

json fit_report_to_json(const FitReport& report) {
    json j;
    j["iterations"] = report.iterations;
    j["converged"] = report.converged;
    j["stop_reason"] = to_string(report.stop_reason);
    j["J_history"] = report.J_history;
    j["step_norms"] = report.step_norms;
    j["descent_gap_errors"] = report.descent_gap_errors;
    j["estep_residuals"] = report.estep_residual_history;
    j["mstep_residuals"] = report.mstep_residual_history;
    j["A"] = matrix_to_json(report.final_estimate.A);
    j["B"] = matrix_to_json(report.final_estimate.B);
    json traj;
    json xs = json::array(), ws = json::array(), qs = json::array();
    for (const auto& xk : report.final_traj.x) xs.push_back(vector_to_json(xk));
    for (const auto& wk : report.final_traj.w) ws.push_back(vector_to_json(wk));
    for (const auto& qk : report.final_traj.q) qs.push_back(vector_to_json(qk));
    traj["x"] = std::move(xs);
    traj["w"] = std::move(ws);
    traj["q"] = std::move(qs);
    j["trajectory"] = std::move(traj);
    j["residuals"] = {
        {"forward", report.final_estep_residuals.forward},
        {"backward", report.final_estep_residuals.backward},
        {"bc_initial", report.final_estep_residuals.bc_initial},
        {"bc_terminal", report.final_estep_residuals.bc_terminal},
        {"mstep_stationarity", report.final_mstep_residual},
    };
    return j;
}

void write_fit_report_json(const std::string& path, const FitReport& report) {
    write_json_file(path, fit_report_to_json(report));
}

void write_descent_log_csv(const std::string& path, const FitReport& report) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "iter,J,step_norm,gap_error,estep_residual,mstep_residual\n";
    for (int n = 0; n < report.iterations; ++n) {
        const std::size_t i = static_cast<std::size_t>(n);
        out << n + 1 << "," << fmt17(report.J_history[i + 1]) << ","
            << fmt17(report.step_norms[i]) << ","
            << fmt17(report.descent_gap_errors[i]) << ","
            << fmt17(report.estep_residual_history[i]) << ","
            << fmt17(report.mstep_residual_history[i]) << "\n";
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw IoError(path + ": " + e.what());
    }
    return j;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace sid
