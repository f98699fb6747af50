#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oscsim/bdf.hpp"
#include "oscsim/model.hpp"
#include "oscsim/stationary.hpp"

namespace oscsim
{
//! Illumination presets [1/(m^3 s)].
inline constexpr double generation_high = 4.3e30;
inline constexpr double generation_low = generation_high / 100.0;

class ConfigError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

enum class RunMode
{
    full,
    reduced,
    steady
};

enum class CoefficientMode
{
    local,       //!< k_diss follows the local field
    mean_field,  //!< k_diss evaluated once at <E> = |dV| / L
};

struct OutputSpec
{
    double t_end = 1e-2;
    double t_first = 1e-12;
    int per_decade = 20;
    std::vector<double> snapshots;

    //! 0, then log-spaced from t_first to t_end (inclusive), merged with snapshots.
    std::vector<double> grid() const;
};

struct SweepAxes
{
    std::vector<double> mobility;
    std::vector<double> kdiss;
    std::vector<double> krec;
    std::vector<double> generation;
    int workers = 0;  //!< 0 means hardware concurrency

    bool empty() const
    {
        return mobility.empty() && kdiss.empty() && krec.empty() && generation.empty();
    }
};

struct ScenarioConfig
{
    std::string name = "scenario";
    DeviceGeometry geometry;
    MaterialParams material;
    ContactParams contacts;
    RunMode mode = RunMode::full;
    CoefficientMode coefficients = CoefficientMode::local;
    IntegratorOptions integrator;
    double atol_scale = 1e-6;  //!< atol = atol_scale * scaling bar
    std::string scaling = "device";
    GummelOptions gummel;
    OutputSpec output;
    SweepAxes sweep;

    //! Defaults of the 70 nm device: dV = 0.5 V, eps_r = 4, T = 300 K.
    static ScenarioConfig defaults();

    double mean_field() const;
    void validate() const;
    //! Canonical key = value dump; equal configs give equal text.
    std::string canonical() const;
    //! FNV-1a of canonical(), hex.
    std::string hash() const;
};

/*!
 * Parse the sectioned key = value format. Dimensional quantities need a
 * unit; unknown sections and keys are rejected.
 */
ScenarioConfig parse_config(std::string_view text, std::string const& origin = "<config>");
ScenarioConfig load_config(std::filesystem::path const& path);

/*!
 * Parse "<number> <unit>" for a quantity kind ("length", "mobility", ...)
 * and return the SI value.
 */
double parse_quantity(std::string_view text, std::string_view kind, std::string const& field);

}  // namespace oscsim
