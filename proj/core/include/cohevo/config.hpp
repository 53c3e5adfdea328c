#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "cohevo/evolution.hpp"
#include "cohevo/harness.hpp"

namespace cohevo {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MeshSpec {
    std::string type = "rod";  // "rod" | "rect"
    int field_dim = 1;
    // rod
    double length = 2.0;
    int elements = 8;
    double interface_position = 1.0;
    // rect
    double width = 4.0;
    double height = 4.0;
    int nx = 8;
    int ny = 8;
    double crack_x0 = 0.0;
    double crack_x1 = 1.0;
    std::vector<std::string> dirichlet_sides{"top", "bottom"};
};

struct GridSpec {
    std::size_t steps = 100;
    double horizon = 1.0;
    Vec knots;  // explicit knots override steps/horizon when nonempty
};

struct RunSettings {
    bool strict = true;
    std::string output_dir = "cohevo_out";
    Vec snapshot_times;
    std::size_t stability_competitors = 0;
    std::size_t stability_stride = 10;
    unsigned stability_seed = 20240101;
    bool euler_check = true;
    double balance_threshold_frac = 0.02;  // vs peak |total energy|
};

struct RunConfig {
    MeshSpec mesh;
    BulkModel bulk;
    CohesiveLaw law;
    LoadProgram load;  // horizon filled from the grid
    GridSpec grid;
    double initial_gamma = 0.0;
    Vec initial_gamma_nodes;  // overrides the constant when nonempty
    SolverOptions solver;
    RunSettings run;
};

struct StudyConfig {
    RunConfig base;
    StudySpec spec;
};

RunConfig parse_run_config(const std::string& json_text);
std::string serialize_run_config(const RunConfig& config);

StudyConfig parse_study_config(const std::string& json_text);

Mesh build_mesh(const MeshSpec& spec);
TimeGrid build_grid(const GridSpec& spec);
InternalVariable build_initial_gamma(const RunConfig& config, const Mesh& mesh);

}  // namespace cohevo
