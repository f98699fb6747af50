#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "oscsim/bdf.hpp"
#include "oscsim/config.hpp"
#include "oscsim/csv.hpp"
#include "oscsim/device_model.hpp"
#include "oscsim/reduced_transient.hpp"
#include "oscsim/rise_time.hpp"
#include "oscsim/stationary.hpp"

namespace oscsim
{
struct Snapshot
{
    double t = 0.0;
    StateVector state;
    std::vector<double> field;  //!< nodal |E| [V/m]
};

/*!
 * Terminal photocurrent history of one run plus its diagnostics.
 *
 * `J` is the displacement-corrected current delivered to the external
 * circuit; `variation` is the spatial spread of that current relative to
 * its contact value at each output time.
 */
struct TransientRecord
{
    std::string name;
    std::string hash;
    RunMode mode = RunMode::full;
    std::vector<double> t;
    std::vector<double> J;
    std::vector<double> J_conduction;
    std::vector<double> variation;
    std::vector<double> mirror_asymmetry;  //!< max |p(x) - n(L-x)| / max n per output
    std::vector<Snapshot> snapshots;
    std::vector<StepStats> runlog;
    std::optional<MemoryDiagnostics> memory;
    StateVector final_state;

    double min_density = 0.0;  //!< smallest n, p, X over every accepted state
    long steps = 0;
    long rejections = 0;
    long newton_failures = 0;
    std::string bounds_report;

    bool positive() const { return min_density > 0.0; }
    double steady_current() const { return J.empty() ? 0.0 : J.back(); }
};

//! Constant-coefficient copy of the rates, frozen at the mean field when needed.
RateModel scenario_rates(ScenarioConfig const& cfg, bool force_constant);

Mesh1D scenario_mesh(ScenarioConfig const& cfg);

//! Dark steady state under the applied bias; the initial condition of a run.
StateVector dark_state(ScenarioConfig const& cfg, RateModel const& rates);

/*!
 * Light turned on at t = 0 from the dark state. The reduced model freezes
 * the coefficients and takes its memory data from the dark state.
 */
TransientRecord run_transient(ScenarioConfig const& cfg, ModelKind kind);

/*!
 * Stationary solution. Dirichlet contacts go through the Gummel iteration
 * and a Newton polish on the full model; Robin contacts (or a Gummel
 * failure) fall back to a pseudo-transient run.
 */
TransientRecord run_steady(ScenarioConfig const& cfg);

//! Dispatch on cfg.mode.
TransientRecord run(ScenarioConfig const& cfg);

struct CompareResult
{
    TransientRecord full;
    TransientRecord reduced;
    //! max |J_r - J_f| / |J_f| over outputs after the full model's 10% crossing
    double max_deviation = 0.0;
    double steady_deviation = 0.0;
};

CompareResult run_compare(ScenarioConfig const& cfg);

struct SweepPoint
{
    std::vector<double> params;  //!< one value per active axis
    ScenarioConfig config;
};

struct SweepRow
{
    std::vector<double> params;
    std::optional<TransientRecord> record;
    std::optional<RiseTimeReport> rise;
    std::string error;
};

struct SweepResult
{
    std::vector<std::string> axes;  //!< "mu", "k_diss", "k_rec", "G"
    std::vector<SweepRow> rows;
};

//! Cartesian product of the axes in the order mu, k_diss, k_rec, G.
std::vector<SweepPoint> sweep_points(ScenarioConfig const& cfg, std::vector<std::string>* axes = nullptr);

/*!
 * Every point runs independently on a pool of `cfg.sweep.workers` threads;
 * rows come back in axis order. A failing point keeps its error message.
 */
SweepResult run_sweep(ScenarioConfig const& cfg);

//---------------------------------------------------------------------------//
// Output
//---------------------------------------------------------------------------//
CsvTable transient_table(TransientRecord const& record);
CsvTable fields_table(Mesh1D const& mesh, Snapshot const& snapshot);
CsvTable runlog_table(TransientRecord const& record);
CsvTable memory_table(MemoryDiagnostics const& memory);
CsvTable sweep_table(SweepResult const& result);
CsvTable compare_table(CompareResult const& result);

//! "fields_<t>.csv" with t printed to 6 significant digits, or fields_steady.csv.
std::string fields_filename(double t);

//! transient.csv, runlog.csv, fields_*.csv, memory.csv (when present).
void write_record(std::filesystem::path const& dir, ScenarioConfig const& cfg, TransientRecord const& record);

}  // namespace oscsim
