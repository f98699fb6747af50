#include "oscsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

#include "oscsim/csv.hpp"

namespace oscsim
{
namespace
{
std::string trim(std::string_view s)
{
    auto b = s.begin();
    auto e = s.end();
    while (b != e && std::isspace(static_cast<unsigned char>(*b)))
        ++b;
    while (e != b && std::isspace(static_cast<unsigned char>(*(e - 1))))
        --e;
    return std::string(b, e);
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string compact(std::string_view s)
{
    std::string out;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c)))
            out += c;
    return out;
}

using UnitTable = std::map<std::string, double>;

std::map<std::string, UnitTable> const& unit_tables()
{
    static std::map<std::string, UnitTable> const tables = {
        {"length", {{"m", 1.0}, {"cm", 1e-2}, {"mm", 1e-3}, {"um", 1e-6}, {"nm", 1e-9}}},
        {"mobility",
         {{"m^2/V/s", 1.0}, {"m^2/(Vs)", 1.0}, {"m^2V^-1s^-1", 1.0},
          {"cm^2/V/s", 1e-4}, {"cm^2/(Vs)", 1e-4}, {"cm^2V^-1s^-1", 1e-4}}},
        {"rate", {{"1/s", 1.0}, {"s^-1", 1.0}}},
        {"density", {{"1/m^3", 1.0}, {"m^-3", 1.0}, {"1/cm^3", 1e6}, {"cm^-3", 1e6}}},
        {"generation",
         {{"1/m^3/s", 1.0}, {"1/(m^3s)", 1.0}, {"m^-3s^-1", 1.0},
          {"1/cm^3/s", 1e6}, {"1/(cm^3s)", 1e6}, {"cm^-3s^-1", 1e6}}},
        {"voltage", {{"V", 1.0}, {"mV", 1e-3}}},
        {"energy", {{"eV", 1.0}, {"meV", 1e-3}}},
        {"temperature", {{"K", 1.0}}},
        {"velocity", {{"m/s", 1.0}, {"cm/s", 1e-2}}},
        {"flux", {{"1/m^2/s", 1.0}, {"1/(m^2s)", 1.0}, {"m^-2s^-1", 1.0}}},
        {"time", {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}, {"ps", 1e-12}, {"fs", 1e-15}}},
        {"recombination", {{"m^3/s", 1.0}, {"cm^3/s", 1e-6}}},
        {"dimensionless", {{"", 1.0}, {"1", 1.0}}},
    };
    return tables;
}

std::pair<double, std::string> split_number(std::string_view text, std::string const& field)
{
    std::string const s = trim(text);
    char const* begin = s.c_str();
    char* end = nullptr;
    double const v = std::strtod(begin, &end);
    if (end == begin)
        throw ConfigError(field + ": expected a number, got '" + s + "'");
    if (!std::isfinite(v))
        throw ConfigError(field + ": value must be finite");
    return {v, compact(std::string_view(end))};
}

std::vector<std::string> split_list(std::string_view text)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : text)
    {
        if (c == ',')
        {
            out.push_back(trim(cur));
            cur.clear();
        }
        else
        {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

/*!
 * List of quantities; a unit written only after the last entry applies to
 * all of them.
 */
std::vector<double> parse_list(std::string_view text, std::string_view kind, std::string const& field)
{
    auto items = split_list(text);
    std::string shared_unit;
    if (!items.empty())
        shared_unit = split_number(items.back(), field).second;
    std::vector<double> out;
    for (std::size_t k = 0; k < items.size(); ++k)
    {
        std::string item = items[k];
        if (k + 1 < items.size() && split_number(item, field).second.empty())
            item += " " + shared_unit;
        out.push_back(parse_quantity(item, kind, field + "[" + std::to_string(k) + "]"));
    }
    return out;
}

long parse_integer(std::string_view text, std::string const& field)
{
    auto const [v, unit] = split_number(text, field);
    if (!unit.empty() || v != std::floor(v))
        throw ConfigError(field + ": expected an integer");
    return static_cast<long>(v);
}

std::string fmt(double v)
{
    return format_number(v);
}
}  // namespace

double parse_quantity(std::string_view text, std::string_view kind, std::string const& field)
{
    auto const [v, unit] = split_number(text, field);
    auto const& tables = unit_tables();
    auto const table = tables.find(std::string(kind));
    if (table == tables.end())
        throw std::invalid_argument("unknown quantity kind " + std::string(kind));
    auto const hit = table->second.find(unit);
    if (hit == table->second.end())
    {
        if (unit.empty())
            throw ConfigError(field + ": missing unit (" + std::string(kind) + ")");
        throw ConfigError(field + ": unit '" + unit + "' is not a " + std::string(kind) + " unit");
    }
    double const factor = hit->second;
    // Dividing by an exact power of ten keeps "1.5 nm" equal to 1.5e-9.
    if (factor < 1.0)
        return v / std::round(1.0 / factor);
    return v * factor;
}

std::vector<double> OutputSpec::grid() const
{
    std::vector<double> g{0.0};
    if (t_end > 0.0)
    {
        double const first = std::min(t_first, t_end);
        double const decades = std::log10(t_end / first);
        int const count = std::max(1, static_cast<int>(std::ceil(decades * per_decade - 1e-9)));
        for (int k = 0; k <= count; ++k)
            g.push_back(first * std::pow(10.0, decades * k / count));
        g.back() = t_end;
    }
    // A snapshot replaces a grid point within 1e-9 relative of it.
    for (double s : snapshots)
    {
        if (!(s > 0.0 && s <= t_end))
            continue;
        auto near = std::find_if(g.begin(), g.end(), [s](double v) { return std::abs(v - s) <= 1e-9 * s; });
        if (near != g.end())
            *near = s;
        else
            g.push_back(s);
    }
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

ScenarioConfig ScenarioConfig::defaults()
{
    ScenarioConfig c;
    c.material.generation = generation_low;
    c.contacts = default_contacts(0.5, c.material.thermal_voltage());
    c.integrator.scaling = ScalingSet::device_default(4);
    return c;
}

double ScenarioConfig::mean_field() const
{
    return std::abs(contacts.cathode.psi - contacts.anode.psi) / geometry.length;
}

void ScenarioConfig::validate() const
{
    geometry.validate();
    material.validate();
    contacts.validate();
    if (mode == RunMode::reduced && coefficients == CoefficientMode::local && !material.kdiss_override)
        throw ConfigError("model.coefficients: the reduced model needs mean_field or a constant material.k_diss");
    if (scaling != "device" && scaling != "unit")
        throw ConfigError("solver.scaling must be 'device' or 'unit'");
    if (!(atol_scale > 0.0))
        throw ConfigError("solver.atol_scale must be > 0");
    if (!(output.t_end >= 0.0))
        throw ConfigError("output.t_end must be >= 0");
    if (!(output.t_first > 0.0))
        throw ConfigError("output.t_first must be > 0");
    if (output.per_decade < 1)
        throw ConfigError("output.per_decade must be >= 1");
    for (double m : sweep.mobility)
        if (!(m > 0.0))
            throw ConfigError("sweep.mu entries must be > 0");
    for (double k : sweep.kdiss)
        if (!(k > 0.0))
            throw ConfigError("sweep.k_diss entries must be > 0");
    for (double k : sweep.krec)
        if (!(k > 0.0))
            throw ConfigError("sweep.k_rec entries must be > 0");
    for (double g : sweep.generation)
        if (!(g >= 0.0))
            throw ConfigError("sweep.G entries must be >= 0");
    try
    {
        integrator.validate(integrator.scaling.block_size());
    }
    catch (std::invalid_argument const& e)
    {
        throw ConfigError(e.what());
    }
}

std::string ScenarioConfig::canonical() const
{
    std::ostringstream o;
    auto opt = [](std::optional<double> const& v) { return v ? fmt(*v) : std::string("none"); };
    o << "name=" << name << '\n'
      << "device.length=" << fmt(geometry.length) << '\n'
      << "device.nodes=" << geometry.node_count << '\n'
      << "device.grading=" << fmt(geometry.grading) << '\n'
      << "material.mu_n=" << fmt(material.mu_n) << '\n'
      << "material.mu_p=" << fmt(material.mu_p) << '\n'
      << "material.eps_r=" << fmt(material.eps_r) << '\n'
      << "material.temperature=" << fmt(material.temperature) << '\n'
      << "material.k_rec=" << fmt(material.k_rec) << '\n'
      << "material.pair_distance=" << fmt(material.pair_distance) << '\n'
      << "material.gamma=" << opt(material.gamma_override) << '\n'
      << "material.k_diss=" << opt(material.kdiss_override) << '\n'
      << "material.v_max=" << opt(material.v_max) << '\n'
      << "illumination.G=" << fmt(material.generation) << '\n'
      << "contacts.mode=" << (contacts.mode == BoundaryMode::robin ? "robin" : "dirichlet") << '\n';
    for (auto [label, c] : {std::pair{"cathode", &contacts.cathode}, std::pair{"anode", &contacts.anode}})
    {
        o << "contacts." << label << "=" << fmt(c->psi) << ',' << fmt(c->kappa_n) << ','
          << fmt(c->kappa_p) << ',' << fmt(c->alpha_n) << ',' << fmt(c->alpha_p) << ','
          << fmt(c->beta_n) << ',' << fmt(c->beta_p) << '\n';
    }
    o << "model.kind=" << static_cast<int>(mode) << '\n'
      << "model.coefficients=" << static_cast<int>(coefficients) << '\n'
      << "solver.order_cap=" << integrator.order_cap << '\n'
      << "solver.rtol=" << fmt(integrator.rtol) << '\n'
      << "solver.atol_scale=" << fmt(atol_scale) << '\n'
      << "solver.dt_init=" << fmt(integrator.dt_init) << '\n'
      << "solver.dt_min=" << fmt(integrator.dt_min) << '\n'
      << "solver.max_steps=" << integrator.max_steps << '\n'
      << "solver.newton=" << integrator.newton.max_iterations << ',' << fmt(integrator.newton.atol)
      << ',' << fmt(integrator.newton.rtol) << ',' << fmt(integrator.newton.ftol) << ','
      << fmt(integrator.newton.damping_min) << '\n'
      << "solver.scaling=" << scaling << '\n'
      << "solver.gummel=" << fmt(gummel.tolerance) << ',' << gummel.max_iterations << '\n'
      << "output.t_end=" << fmt(output.t_end) << '\n'
      << "output.t_first=" << fmt(output.t_first) << '\n'
      << "output.per_decade=" << output.per_decade << '\n';
    o << "output.snapshots=";
    for (double s : output.snapshots)
        o << fmt(s) << ';';
    o << '\n';
    auto list = [&](char const* key, std::vector<double> const& v) {
        o << key << '=';
        for (double x : v)
            o << fmt(x) << ';';
        o << '\n';
    };
    list("sweep.mu", sweep.mobility);
    list("sweep.k_diss", sweep.kdiss);
    list("sweep.k_rec", sweep.krec);
    list("sweep.G", sweep.generation);
    return o.str();
}

std::string ScenarioConfig::hash() const
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canonical())
    {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace
{
double parse_generation(std::string const& value, std::string const& field)
{
    std::string const v = lower(trim(value));
    if (v == "low")
        return generation_low;
    if (v == "high")
        return generation_high;
    return parse_quantity(value, "generation", field);
}

std::vector<double> parse_generation_list(std::string const& value, std::string const& field)
{
    auto items = split_list(value);
    bool named = std::any_of(items.begin(), items.end(), [](std::string const& s) {
        auto const l = lower(s);
        return l == "low" || l == "high";
    });
    if (!named)
        return parse_list(value, "generation", field);
    std::vector<double> out;
    for (std::size_t k = 0; k < items.size(); ++k)
        out.push_back(parse_generation(items[k], field + "[" + std::to_string(k) + "]"));
    return out;
}

struct ContactInputs
{
    std::string mode = "dirichlet";
    double built_in = 0.5;
    double barrier = 0.3;
    double dos = 2.5e25;
    double velocity = 1e5;
    double kappa = 1.0;
    std::map<std::string, std::pair<std::string, std::string>> overrides;  // key -> (value, field)
};

ContactParams build_contacts(ContactInputs const& in, double vth)
{
    ContactParams c = default_contacts(in.built_in, vth, in.barrier, in.dos);
    std::string const mode = lower(in.mode);
    if (mode == "robin")
        c.mode = BoundaryMode::robin;
    else if (mode == "dirichlet")
        c.mode = BoundaryMode::dirichlet;
    else
        throw ConfigError("contacts.mode must be 'robin' or 'dirichlet'");

    for (auto* contact : {&c.cathode, &c.anode})
    {
        double const n = contact->n_eq();
        double const p = contact->p_eq();
        *contact = Contact::with_densities(contact->psi, n, p, in.velocity);
        if (c.mode == BoundaryMode::robin)
            contact->kappa_n = contact->kappa_p = in.kappa;
    }

    // Densities first so explicit alpha/beta can still override them.
    auto apply = [&](Contact& contact, std::string const& side) {
        auto get = [&](std::string const& key) -> std::optional<std::pair<std::string, std::string>> {
            auto it = in.overrides.find(side + "." + key);
            if (it == in.overrides.end())
                return std::nullopt;
            return it->second;
        };
        if (auto v = get("psi"))
            contact.psi = parse_quantity(v->first, "voltage", v->second);
        if (auto v = get("kappa_n"))
            contact.kappa_n = parse_quantity(v->first, "dimensionless", v->second);
        if (auto v = get("kappa_p"))
            contact.kappa_p = parse_quantity(v->first, "dimensionless", v->second);
        if (auto v = get("alpha_n"))
        {
            double const n = contact.n_eq();
            contact.alpha_n = parse_quantity(v->first, "velocity", v->second);
            contact.beta_n = contact.alpha_n * n;
        }
        if (auto v = get("alpha_p"))
        {
            double const p = contact.p_eq();
            contact.alpha_p = parse_quantity(v->first, "velocity", v->second);
            contact.beta_p = contact.alpha_p * p;
        }
        if (auto v = get("n"))
            contact.beta_n = contact.alpha_n * parse_quantity(v->first, "density", v->second);
        if (auto v = get("p"))
            contact.beta_p = contact.alpha_p * parse_quantity(v->first, "density", v->second);
        if (auto v = get("beta_n"))
            contact.beta_n = parse_quantity(v->first, "flux", v->second);
        if (auto v = get("beta_p"))
            contact.beta_p = parse_quantity(v->first, "flux", v->second);
    };
    apply(c.cathode, "cathode");
    apply(c.anode, "anode");
    return c;
}
}  // namespace

ScenarioConfig parse_config(std::string_view text, std::string const& origin)
{
    ScenarioConfig cfg = ScenarioConfig::defaults();
    ContactInputs contacts;
    std::set<std::string> seen;
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;

    static std::set<std::string> const contact_keys = {
        "psi", "n", "p", "kappa_n", "kappa_p", "alpha_n", "alpha_p", "beta_n", "beta_p"};

    while (pos <= text.size())
    {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        std::string line(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
        {
            if (end == text.size())
                break;
            continue;
        }
        std::string const where = origin + ":" + std::to_string(line_no) + ": ";
        if (line.front() == '[')
        {
            if (line.back() != ']')
                throw ConfigError(where + "malformed section header");
            section = lower(trim(std::string_view(line).substr(1, line.size() - 2)));
            static std::set<std::string> const sections = {
                "scenario", "device", "material", "illumination", "contacts",
                "model", "solver", "output", "sweep"};
            if (!sections.count(section))
                throw ConfigError(where + "unknown section [" + section + "]");
            continue;
        }
        auto const eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + "expected key = value");
        if (section.empty())
            throw ConfigError(where + "key outside of any section");
        std::string const key = lower(trim(std::string_view(line).substr(0, eq)));
        std::string const value = trim(std::string_view(line).substr(eq + 1));
        std::string const field = section + "." + key;
        if (!seen.insert(field).second)
            throw ConfigError(where + field + " given twice");

        try
        {
            auto unknown = [&]() { throw ConfigError("unknown key " + field); };
            auto& m = cfg.material;
            if (section == "scenario")
            {
                if (key == "name")
                    cfg.name = value;
                else
                    unknown();
            }
            else if (section == "device")
            {
                if (key == "length")
                    cfg.geometry.length = parse_quantity(value, "length", field);
                else if (key == "nodes")
                    cfg.geometry.node_count = static_cast<std::size_t>(std::max(0L, parse_integer(value, field)));
                else if (key == "grading")
                    cfg.geometry.grading = parse_quantity(value, "dimensionless", field);
                else
                    unknown();
            }
            else if (section == "material")
            {
                if (key == "mu")
                    m.mu_n = m.mu_p = parse_quantity(value, "mobility", field);
                else if (key == "mu_n")
                    m.mu_n = parse_quantity(value, "mobility", field);
                else if (key == "mu_p")
                    m.mu_p = parse_quantity(value, "mobility", field);
                else if (key == "eps_r")
                    m.eps_r = parse_quantity(value, "dimensionless", field);
                else if (key == "temperature")
                    m.temperature = parse_quantity(value, "temperature", field);
                else if (key == "k_rec")
                    m.k_rec = parse_quantity(value, "rate", field);
                else if (key == "pair_distance")
                    m.pair_distance = parse_quantity(value, "length", field);
                else if (key == "gamma")
                    m.gamma_override = lower(value) == "langevin"
                                           ? std::nullopt
                                           : std::optional(parse_quantity(value, "recombination", field));
                else if (key == "k_diss")
                    m.kdiss_override = lower(value) == "braun"
                                           ? std::nullopt
                                           : std::optional(parse_quantity(value, "rate", field));
                else if (key == "v_max")
                    m.v_max = lower(value) == "off" ? std::nullopt
                                                    : std::optional(parse_quantity(value, "velocity", field));
                else
                    unknown();
            }
            else if (section == "illumination")
            {
                if (key == "g")
                    m.generation = parse_generation(value, field);
                else
                    unknown();
            }
            else if (section == "contacts")
            {
                auto const dot = key.find('.');
                if (dot != std::string::npos)
                {
                    std::string const side = key.substr(0, dot);
                    std::string const sub = key.substr(dot + 1);
                    if ((side != "cathode" && side != "anode") || !contact_keys.count(sub))
                        unknown();
                    contacts.overrides[key] = {value, field};
                }
                else if (key == "mode")
                    contacts.mode = value;
                else if (key == "built_in")
                    contacts.built_in = parse_quantity(value, "voltage", field);
                else if (key == "barrier")
                    contacts.barrier = parse_quantity(value, "energy", field);
                else if (key == "effective_dos")
                    contacts.dos = parse_quantity(value, "density", field);
                else if (key == "surface_velocity")
                    contacts.velocity = parse_quantity(value, "velocity", field);
                else if (key == "kappa")
                    contacts.kappa = parse_quantity(value, "dimensionless", field);
                else
                    unknown();
            }
            else if (section == "model")
            {
                std::string const v = lower(value);
                if (key == "kind")
                {
                    if (v == "full")
                        cfg.mode = RunMode::full;
                    else if (v == "reduced")
                        cfg.mode = RunMode::reduced;
                    else if (v == "steady")
                        cfg.mode = RunMode::steady;
                    else
                        throw ConfigError(field + " must be full, reduced or steady");
                }
                else if (key == "coefficients")
                {
                    if (v == "local")
                        cfg.coefficients = CoefficientMode::local;
                    else if (v == "mean_field")
                        cfg.coefficients = CoefficientMode::mean_field;
                    else
                        throw ConfigError(field + " must be local or mean_field");
                }
                else
                    unknown();
            }
            else if (section == "solver")
            {
                auto& in = cfg.integrator;
                if (key == "order_cap")
                    in.order_cap = static_cast<int>(parse_integer(value, field));
                else if (key == "rtol")
                    in.rtol = parse_quantity(value, "dimensionless", field);
                else if (key == "atol_scale")
                    cfg.atol_scale = parse_quantity(value, "dimensionless", field);
                else if (key == "dt_init")
                    in.dt_init = parse_quantity(value, "time", field);
                else if (key == "dt_min")
                    in.dt_min = parse_quantity(value, "time", field);
                else if (key == "dt_max")
                    in.dt_max = parse_quantity(value, "time", field);
                else if (key == "max_steps")
                    in.max_steps = parse_integer(value, field);
                else if (key == "newton_max_iterations")
                    in.newton.max_iterations = static_cast<int>(parse_integer(value, field));
                else if (key == "newton_atol")
                    in.newton.atol = parse_quantity(value, "dimensionless", field);
                else if (key == "newton_rtol")
                    in.newton.rtol = parse_quantity(value, "dimensionless", field);
                else if (key == "newton_ftol")
                    in.newton.ftol = parse_quantity(value, "dimensionless", field);
                else if (key == "damping_min")
                    in.newton.damping_min = parse_quantity(value, "dimensionless", field);
                else if (key == "scaling")
                    cfg.scaling = lower(value);
                else if (key == "gummel_tolerance")
                    cfg.gummel.tolerance = parse_quantity(value, "dimensionless", field);
                else if (key == "gummel_max_iterations")
                    cfg.gummel.max_iterations = static_cast<int>(parse_integer(value, field));
                else
                    unknown();
            }
            else if (section == "output")
            {
                if (key == "t_end")
                    cfg.output.t_end = parse_quantity(value, "time", field);
                else if (key == "t_first")
                    cfg.output.t_first = parse_quantity(value, "time", field);
                else if (key == "per_decade")
                    cfg.output.per_decade = static_cast<int>(parse_integer(value, field));
                else if (key == "snapshots")
                    cfg.output.snapshots = parse_list(value, "time", field);
                else
                    unknown();
            }
            else if (section == "sweep")
            {
                if (key == "mu")
                    cfg.sweep.mobility = parse_list(value, "mobility", field);
                else if (key == "k_diss")
                    cfg.sweep.kdiss = parse_list(value, "rate", field);
                else if (key == "k_rec")
                    cfg.sweep.krec = parse_list(value, "rate", field);
                else if (key == "g")
                    cfg.sweep.generation = parse_generation_list(value, field);
                else if (key == "workers")
                    cfg.sweep.workers = static_cast<int>(parse_integer(value, field));
                else
                    unknown();
            }
        }
        catch (ConfigError const& e)
        {
            throw ConfigError(where + e.what());
        }
        if (end == text.size())
            break;
    }

    try
    {
        cfg.contacts = build_contacts(contacts, cfg.material.thermal_voltage());
        cfg.integrator.scaling = cfg.scaling == "unit" ? ScalingSet::unit(4) : ScalingSet::device_default(4);
        cfg.validate();
    }
    catch (ConfigError const& e)
    {
        throw ConfigError(origin + ": " + e.what());
    }
    catch (std::exception const& e)
    {
        throw ConfigError(origin + ": " + e.what());
    }
    return cfg;
}

ScenarioConfig load_config(std::filesystem::path const& path)
{
    std::string text;
    try
    {
        text = read_text(path);
    }
    catch (std::exception const& e)
    {
        throw ConfigError(e.what());
    }
    return parse_config(text, path.string());
}

}  // namespace oscsim
