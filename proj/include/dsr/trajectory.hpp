#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "dsr/common.hpp"

namespace dsr {

// Time-stamped state sequence. `states` is T x n, one row per read-out time.
struct Trajectory {
    Vec times;
    Mat states;
    double dt = 0.0;
    std::string system_id;
    Vec initial_condition;
    bool divergent = false;

    int length() const { return static_cast<int>(states.rows()); }
    int dim() const { return static_cast<int>(states.cols()); }

    void check() const {
        require(times.size() == states.rows(), "trajectory: times/states length mismatch");
        for (int i = 1; i < times.size(); ++i)
            require(times[i] > times[i - 1], "trajectory: times not strictly increasing");
        if (!divergent) require(states.allFinite(), "trajectory: non-finite states without divergence flag");
    }
};

// CSV layout: header `t,x1,...,xn`, 17-significant-digit decimals.
inline void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    require(out.good(), "cannot open for writing: " + path);
    out << "t";
    for (int j = 0; j < traj.dim(); ++j) out << ",x" << (j + 1);
    out << "\n";
    for (int i = 0; i < traj.length(); ++i) {
        out << format_full(traj.times[i]);
        for (int j = 0; j < traj.dim(); ++j) out << "," << format_full(traj.states(i, j));
        out << "\n";
    }
}

inline Trajectory read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open: " + path);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), path + ":1: empty file");
    int dim = 0;
    {
        std::stringstream header(line);
        std::string field;
        require(std::getline(header, field, ',') && field == "t", path + ":1: expected header starting with 't'");
        while (std::getline(header, field, ',')) ++dim;
        require(dim >= 1, path + ":1: no state columns in header");
    }
    std::vector<double> times;
    std::vector<double> values;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string field;
        int col = 0;
        while (std::getline(row, field, ',')) {
            std::size_t pos = 0;
            double v = 0.0;
            try {
                v = std::stod(field, &pos);
            } catch (const std::exception&) {
                throw ValidationError(path + ":" + std::to_string(line_no) + ": not a number: '" + field + "'");
            }
            if (pos != field.size())
                throw ValidationError(path + ":" + std::to_string(line_no) + ": trailing characters in '" + field + "'");
            if (col == 0)
                times.push_back(v);
            else
                values.push_back(v);
            ++col;
        }
        if (col != dim + 1)
            throw ValidationError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(dim + 1) +
                                  " fields, got " + std::to_string(col));
    }
    require(!times.empty(), path + ": no data rows");
    Trajectory traj;
    traj.times = Eigen::Map<Vec>(times.data(), static_cast<Eigen::Index>(times.size()));
    traj.states = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        values.data(), static_cast<Eigen::Index>(times.size()), dim);
    traj.dt = times.size() > 1 ? times[1] - times[0] : 0.0;
    traj.initial_condition = traj.states.row(0);
    traj.check();
    return traj;
}

}  // namespace dsr
