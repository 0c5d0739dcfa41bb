#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hj/config.hpp"
#include "hj/config_file.hpp"
#include "hj/fd_oracle.hpp"
#include "hj/grid.hpp"
#include "hj/lagrangian.hpp"

namespace hj::cli {

/// The `model = { ... }` block.
///   V(x) = constant + sum_k potential[k-1] cos(2 pi k x_a / P_a) + potential_sin[k-1] sin(...)
/// summed over the axes a of the domain.
struct ModelBlock {
    std::string family = "discounted";
    std::vector<double> potential;
    std::vector<double> potential_sin;
    double constant = 0.0;
    double lambda = 1.0;
    double eps = 0.0;
    int dimension = 1;
    Coord period{1.0, 1.0};
    /// {a11} in dimension 1, {a11, a12, a22} in dimension 2.
    std::vector<double> kinetic{1.0};
    /// time_rescaled only: |s| range over which the declared constants hold.
    double horizon = 10.0;
};

[[nodiscard]] TonelliSpec tonelli_spec(const ModelBlock& block);
[[nodiscard]] LagrangianModel build_model(const ModelBlock& block);

/// Evaluation point of an evolution formula.
struct Point {
    double t = 0.0;
    Coord x{0.0, 0.0};
};

/// "t:x" or "t:x1,x2", several separated by ';'.
[[nodiscard]] std::vector<Point> parse_points(const std::string& text, int dimension);

struct RunConfig {
    SolverConfig solver;
    bool seed_given = false;
    ModelBlock model;
    /// Sum of '+'-separated terms: "const:c", "cos:a[:k]", "sin:a[:k]", "random:a".
    std::string initial = "cos:1";
    double final_time = 1.0;
    int steps = 1;
    std::vector<std::string> gauges{"const:0.5", "sin:1:1", "canonical"};
    std::vector<Point> points;
    /// Extra points with t uniform in t_range and x uniform over the cell.
    int random_points = 0;
    std::array<double, 2> t_range{0.2, 1.0};
    /// Nodes for the stationary formulas in compare-formulas (none: skipped).
    std::vector<int> stationary_nodes;
    std::string experiment = "semigroup";
    std::vector<int> ladder;
    int reference_resolution = 0;
    FDConfig fd;
    bool fd_stationary = false;
    int samples = 2000;
    SampleBox box;
    std::string out = "out";

    /// Throws ConfigError naming the first invalid key.
    void validate() const;
};

[[nodiscard]] RunConfig parse_run_config(const ConfigDocument& doc);
[[nodiscard]] RunConfig load_run_config(const std::string& path);

/// Initial data on the run grid (random terms draw from the run seed).
[[nodiscard]] GridFunction initial_data(const RunConfig& cfg, int resolution);

/// Shortest round-trip text capped at 12 significant digits; -0 prints as 0.
[[nodiscard]] std::string format_number(double v);

/// Least-squares slope of log(error) against log(h). Needs >= 2 positive errors.
[[nodiscard]] double loglog_slope(const std::vector<double>& h, const std::vector<double>& error);

/// Writes CSVs below an output directory and records them, with their SHA-256
/// digests, in `<out>/manifest.json`.
class RunWriter {
public:
    explicit RunWriter(std::string out_dir);

    /// `relpath` like "frames/frame_0000.csv".
    void write_csv(const std::string& relpath, const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& rows);
    void write_table(const std::string& relpath, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows);
    void write_grid(const std::string& relpath, const GridFunction& u);
    /// `extra_json` is a JSON object merged into the manifest.
    void finish(const std::string& command, const std::string& extra_json);

    [[nodiscard]] const std::string& dir() const { return dir_; }

private:
    std::string dir_;
    std::mutex mutex_;
    std::vector<std::array<std::string, 3>> files_;
};

[[nodiscard]] std::string sha256_hex(const std::string& bytes);

struct Flags {
    std::optional<std::string> out;
    std::optional<std::string> points;
    std::optional<double> t1, t2, u0;
    std::optional<std::string> x, y;
    bool json = false;
    std::optional<std::string> dump_trajectory;
    std::optional<int> threads;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitConvergence = 3;

/// Runs one command. Exit codes: 0 success, 1 other failure (including a declared
/// condition falsified by check-conditions), 2 config error, 3 non-convergence
/// (diagnostics JSON on stderr and in `<out>/diagnostics.json`).
[[nodiscard]] int run(const std::string& command, const std::string& config_path, const Flags& flags,
                      std::ostream& out, std::ostream& err);

[[nodiscard]] const std::vector<std::string>& commands();

}  // namespace hj::cli
