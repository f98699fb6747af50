#include "oscsim/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

#include "oscsim/assembly.hpp"
#include "oscsim/newton.hpp"

namespace oscsim
{
namespace
{
double const nan = std::numeric_limits<double>::quiet_NaN();

RateModel make_rates(MaterialParams const& m, ScenarioConfig const& cfg, bool force_constant)
{
    RateModel r(m);
    if ((force_constant || cfg.coefficients == CoefficientMode::mean_field) && !m.kdiss_override)
        r.freeze_at(cfg.mean_field());
    return r;
}

ContactParams pinned(ContactParams c)
{
    c.mode = BoundaryMode::dirichlet;
    return c;
}

ScalingSet scaling_for(ScenarioConfig const& cfg, std::size_t block)
{
    return cfg.scaling == "unit" ? ScalingSet::unit(block) : ScalingSet::device_default(block);
}

IntegratorOptions integrator_for(ScenarioConfig const& cfg, std::size_t block)
{
    IntegratorOptions o = cfg.integrator;
    o.scaling = scaling_for(cfg, block);
    o.atol.assign(block, 0.0);
    for (std::size_t c = 0; c < block; ++c)
        o.atol[c] = cfg.atol_scale * o.scaling.bar[c];
    return o;
}

NewtonOptions polish_options(ScenarioConfig const& cfg)
{
    NewtonOptions o = cfg.integrator.newton;
    o.max_iterations = std::max(o.max_iterations, 60);
    return o;
}

//! Straight-line potential, log-linear densities between the contact values.
StateVector interpolated_guess(Mesh1D const& mesh, ContactParams const& c)
{
    std::size_t const N = mesh.size();
    StateVector s(N);
    for (std::size_t i = 0; i < N; ++i)
    {
        double const w = mesh.x(i) / mesh.length();
        s.phi[i] = (1 - w) * c.cathode.psi + w * c.anode.psi;
        s.n[i] = std::exp((1 - w) * std::log(c.cathode.n_eq()) + w * std::log(c.anode.n_eq()));
        s.p[i] = std::exp((1 - w) * std::log(c.cathode.p_eq()) + w * std::log(c.anode.p_eq()));
        s.X[i] = 1.0;
    }
    return s;
}

bool polish(DeviceModel const& model, std::vector<double>& y, ScenarioConfig const& cfg)
{
    SteadySystem sys(model);
    auto const report = newton_solve(sys, y, scaling_for(cfg, model.block_size()), polish_options(cfg));
    return report.converged;
}

//! Integrate to a long time and return the last state.
std::vector<double> pseudo_transient(DeviceModel const& model, std::vector<double> y0, ScenarioConfig const& cfg)
{
    BdfIntegrator integ(model, integrator_for(cfg, model.block_size()));
    integ.initialize(0.0, std::move(y0));
    double const t_end = std::max(cfg.output.t_end, 1.0);
    integ.integrate(t_end, {}, [](double, std::span<double const>, std::span<double const>, bool,
                                  StepStats const&) {});
    return integ.state().y();
}

std::vector<double> steady_unknowns(DeviceModel const& model,
                                    ScenarioConfig const& cfg,
                                    StateVector const* guess_from_gummel,
                                    std::vector<double> const* fallback)
{
    std::vector<double> y;
    if (guess_from_gummel)
    {
        y = model.pack(*guess_from_gummel);
        if (polish(model, y, cfg))
            return y;
    }
    y = fallback ? *fallback : model.pack(interpolated_guess(model.mesh(), model.contacts()));
    y = pseudo_transient(model, y, cfg);
    if (!polish(model, y, cfg))
        throw ConvergenceError("steady state: Newton polish failed after pseudo-transient run");
    return y;
}

double mirror_asymmetry(StateVector const& s)
{
    std::size_t const N = s.size();
    double nmax = 0.0;
    double diff = 0.0;
    for (std::size_t i = 0; i < N; ++i)
    {
        nmax = std::max(nmax, std::abs(s.n[i]));
        diff = std::max(diff, std::abs(s.p[i] - s.n[N - 1 - i]));
    }
    return nmax > 0.0 ? diff / nmax : 0.0;
}

Snapshot make_snapshot(Mesh1D const& mesh, StateVector state, double t)
{
    Snapshot s;
    s.t = t;
    s.field = mesh.node_field(state.phi);
    s.state = std::move(state);
    return s;
}

bool is_snapshot_time(ScenarioConfig const& cfg, double t)
{
    return std::find(cfg.output.snapshots.begin(), cfg.output.snapshots.end(), t)
           != cfg.output.snapshots.end();
}
}  // namespace

RateModel scenario_rates(ScenarioConfig const& cfg, bool force_constant)
{
    return make_rates(cfg.material, cfg, force_constant);
}

Mesh1D scenario_mesh(ScenarioConfig const& cfg)
{
    auto const& g = cfg.geometry;
    return g.grading > 1.0 ? Mesh1D::graded(g.length, g.node_count, g.grading)
                           : Mesh1D::uniform(g.length, g.node_count);
}

StateVector dark_state(ScenarioConfig const& cfg, RateModel const& rates)
{
    MaterialParams m = rates.params();
    m.generation = 0.0;
    RateModel dark(m);
    if (rates.is_constant() && !m.kdiss_override)
        dark.freeze_at(cfg.mean_field());
    Mesh1D const mesh = scenario_mesh(cfg);
    DeviceModel model(mesh, dark, cfg.contacts);

    std::optional<StateVector> gummel;
    try
    {
        gummel = steady_solve(mesh, dark, pinned(cfg.contacts), cfg.gummel).state;
    }
    catch (ConvergenceError const&)
    {
    }
    auto y = steady_unknowns(model, cfg, gummel ? &*gummel : nullptr, nullptr);
    return model.unpack(y, 0.0);
}

TransientRecord run_transient(ScenarioConfig const& cfg, ModelKind kind)
{
    cfg.validate();
    bool const reduced = kind == ModelKind::reduced;
    RateModel const rates = scenario_rates(cfg, reduced);
    Mesh1D const mesh = scenario_mesh(cfg);
    StateVector const dark = dark_state(cfg, rates);

    std::optional<DeviceModel> model;
    if (reduced)
    {
        ReducedInitialData init;
        init.X0 = dark.X;
        init.pn0.resize(dark.size());
        for (std::size_t i = 0; i < dark.size(); ++i)
            init.pn0[i] = dark.p[i] * dark.n[i];
        model.emplace(mesh, rates, cfg.contacts, std::move(init));
    }
    else
    {
        model.emplace(mesh, rates, cfg.contacts);
    }

    TransientRecord rec;
    rec.name = cfg.name;
    rec.hash = cfg.hash();
    rec.mode = reduced ? RunMode::reduced : RunMode::full;
    rec.min_density = std::numeric_limits<double>::infinity();

    std::optional<MemoryAccumulator> memory;
    if (!reduced && rates.is_constant())
    {
        std::vector<double> vol(mesh.size());
        for (std::size_t i = 0; i < mesh.size(); ++i)
            vol[i] = mesh.volume(i);
        double const kd = rates.kdiss(cfg.mean_field());
        memory.emplace(std::move(vol), rates.gamma(), kd, exciton_tau(kd, rates.k_rec()));
    }

    auto const outputs = cfg.output.grid();
    BdfIntegrator integ(*model, integrator_for(cfg, model->block_size()));
    integ.initialize(0.0, model->pack(dark));

    std::size_t const N = mesh.size();
    std::vector<double> pn(N);
    std::vector<double> phi_rate(N);
    integ.integrate(
        cfg.output.t_end, outputs,
        [&](double t, std::span<double const> y, std::span<double const> ydot, bool is_output,
            StepStats const& stats) {
            StateVector state = model->unpack(y, t);
            for (std::size_t i = 0; i < N; ++i)
            {
                rec.min_density = std::min({rec.min_density, state.n[i], state.p[i], state.X[i]});
                pn[i] = state.p[i] * state.n[i];
            }
            if (memory)
                memory->add(t, pn);
            if (t > 0.0)
                rec.runlog.push_back(stats);
            if (!is_output)
                return;
            for (std::size_t i = 0; i < N; ++i)
                phi_rate[i] = ydot[model->index(i, DeviceModel::phi_c)];
            auto const current = compute_current(mesh, state, rates.params(), phi_rate);
            auto const conduction = compute_current(mesh, state, rates.params());
            rec.t.push_back(t);
            rec.J.push_back(current.photocurrent());
            rec.J_conduction.push_back(conduction.photocurrent());
            rec.variation.push_back(current.relative_variation());
            rec.mirror_asymmetry.push_back(mirror_asymmetry(state));
            if (is_snapshot_time(cfg, t))
                rec.snapshots.push_back(make_snapshot(mesh, state, t));
            rec.final_state = std::move(state);
        });

    auto const& st = integ.state();
    rec.steps = st.steps;
    rec.rejections = st.rejections;
    rec.newton_failures = st.newton_failures;
    if (memory)
        rec.memory = memory->take();
    return rec;
}

TransientRecord run_steady(ScenarioConfig const& cfg)
{
    cfg.validate();
    RateModel const rates = scenario_rates(cfg, false);
    Mesh1D const mesh = scenario_mesh(cfg);
    DeviceModel model(mesh, rates, cfg.contacts);

    TransientRecord rec;
    rec.name = cfg.name;
    rec.hash = cfg.hash();
    rec.mode = RunMode::steady;

    std::optional<SteadyResult> gummel;
    if (cfg.contacts.mode == BoundaryMode::dirichlet)
    {
        try
        {
            gummel = steady_solve(mesh, rates, cfg.contacts, cfg.gummel);
        }
        catch (ConvergenceError const&)
        {
        }
    }
    std::vector<double> fallback;
    if (!gummel)
        fallback = model.pack(dark_state(cfg, rates));
    auto const y = steady_unknowns(model, cfg, gummel ? &gummel->state : nullptr,
                                   gummel ? nullptr : &fallback);
    StateVector state = model.unpack(y, 0.0);

    if (cfg.contacts.mode == BoundaryMode::dirichlet)
    {
        MaterialParams const& m = rates.params();
        double const n_r = reference_density(m.generation, rates.kdiss(cfg.mean_field()), rates.gamma(),
                                             rates.k_rec(), cfg.contacts);
        auto const bounds = stationary_bounds(cfg.contacts, n_r, m.thermal_voltage());
        auto const violation = bounds.check(state);
        rec.bounds_report = bounds.describe() + (violation.empty() ? "within bounds\n" : violation + "\n");
    }

    auto const current = compute_current(mesh, state, rates.params());
    double const inf = std::numeric_limits<double>::infinity();
    rec.t = {inf};
    rec.J = {current.photocurrent()};
    rec.J_conduction = rec.J;
    rec.variation = {current.relative_variation()};
    rec.mirror_asymmetry = {mirror_asymmetry(state)};
    rec.min_density = std::min({*std::min_element(state.n.begin(), state.n.end()),
                                *std::min_element(state.p.begin(), state.p.end()),
                                *std::min_element(state.X.begin(), state.X.end())});
    rec.snapshots.push_back(make_snapshot(mesh, state, inf));
    rec.final_state = std::move(state);
    return rec;
}

TransientRecord run(ScenarioConfig const& cfg)
{
    switch (cfg.mode)
    {
    case RunMode::full:
        return run_transient(cfg, ModelKind::full);
    case RunMode::reduced:
        return run_transient(cfg, ModelKind::reduced);
    case RunMode::steady:
        return run_steady(cfg);
    }
    return {};
}

CompareResult run_compare(ScenarioConfig const& cfg)
{
    ScenarioConfig c = cfg;
    c.coefficients = CoefficientMode::mean_field;
    CompareResult out;
    c.mode = RunMode::full;
    out.full = run_transient(c, ModelKind::full);
    c.mode = RunMode::reduced;
    out.reduced = run_transient(c, ModelKind::reduced);

    auto const& f = out.full;
    auto const& r = out.reduced;
    double const j_inf = f.steady_current();
    std::size_t start = f.t.size();
    for (std::size_t k = 0; k < f.t.size(); ++k)
        if (std::abs(f.J[k]) >= 0.1 * std::abs(j_inf))
        {
            start = k;
            break;
        }
    for (std::size_t k = start; k < f.t.size() && k < r.t.size(); ++k)
        out.max_deviation = std::max(out.max_deviation, std::abs(r.J[k] - f.J[k]) / std::abs(f.J[k]));
    out.steady_deviation = std::abs(r.steady_current() - j_inf) / std::abs(j_inf);
    return out;
}

std::vector<SweepPoint> sweep_points(ScenarioConfig const& cfg, std::vector<std::string>* axes_out)
{
    struct Axis
    {
        char const* name;
        std::vector<double> const* values;
        void (*apply)(ScenarioConfig&, double);
    };
    std::vector<Axis> const all = {
        {"mu", &cfg.sweep.mobility, [](ScenarioConfig& c, double v) { c.material.mu_n = c.material.mu_p = v; }},
        {"k_diss", &cfg.sweep.kdiss, [](ScenarioConfig& c, double v) { c.material.kdiss_override = v; }},
        {"k_rec", &cfg.sweep.krec, [](ScenarioConfig& c, double v) { c.material.k_rec = v; }},
        {"G", &cfg.sweep.generation, [](ScenarioConfig& c, double v) { c.material.generation = v; }},
    };
    std::vector<Axis> active;
    for (auto const& a : all)
        if (!a.values->empty())
            active.push_back(a);
    if (axes_out)
    {
        axes_out->clear();
        for (auto const& a : active)
            axes_out->push_back(a.name);
    }

    std::vector<SweepPoint> points;
    std::vector<std::size_t> idx(active.size(), 0);
    while (true)
    {
        SweepPoint p;
        p.config = cfg;
        p.config.sweep = {};
        for (std::size_t a = 0; a < active.size(); ++a)
        {
            double const v = (*active[a].values)[idx[a]];
            active[a].apply(p.config, v);
            p.params.push_back(v);
        }
        points.push_back(std::move(p));
        // Last axis varies fastest.
        std::size_t a = active.size();
        while (a > 0)
        {
            --a;
            if (++idx[a] < active[a].values->size())
                break;
            idx[a] = 0;
            if (a == 0)
                return points;
        }
        if (active.empty())
            return points;
    }
}

SweepResult run_sweep(ScenarioConfig const& cfg)
{
    SweepResult result;
    auto const points = sweep_points(cfg, &result.axes);
    result.rows.resize(points.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t k = next++; k < points.size(); k = next++)
        {
            auto& row = result.rows[k];
            row.params = points[k].params;
            try
            {
                row.record = run(points[k].config);
                if (row.record->mode != RunMode::steady)
                    row.rise = extract_rise_time(row.record->t, row.record->J);
            }
            catch (std::exception const& e)
            {
                row.error = e.what();
            }
        }
    };
    int workers = cfg.sweep.workers > 0 ? cfg.sweep.workers
                                         : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min<int>(workers, static_cast<int>(points.size()));
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w)
        pool.emplace_back(worker);
    worker();
    for (auto& th : pool)
        th.join();
    return result;
}

CsvTable transient_table(TransientRecord const& record)
{
    CsvTable t;
    t.header = {"t_s", "J_A_per_m2"};
    for (std::size_t k = 0; k < record.t.size(); ++k)
        t.rows.push_back({record.t[k], record.J[k]});
    return t;
}

CsvTable fields_table(Mesh1D const& mesh, Snapshot const& s)
{
    CsvTable t;
    t.header = {"x_m", "phi_V", "n_per_m3", "p_per_m3", "X_per_m3", "E_V_per_m"};
    for (std::size_t i = 0; i < mesh.size(); ++i)
        t.rows.push_back({mesh.x(i), s.state.phi[i], s.state.n[i], s.state.p[i], s.state.X[i], s.field[i]});
    return t;
}

CsvTable runlog_table(TransientRecord const& record)
{
    CsvTable t;
    t.header = {"step", "t", "dt", "order", "newton_iters", "damping_min"};
    for (auto const& s : record.runlog)
        t.rows.push_back({static_cast<double>(s.step), s.t, s.dt, static_cast<double>(s.order),
                          static_cast<double>(s.newton_iters), s.damping_min});
    return t;
}

CsvTable memory_table(MemoryDiagnostics const& m)
{
    CsvTable t;
    t.header = {"t", "I", "I_lumped", "diff"};
    for (std::size_t k = 0; k < m.t.size(); ++k)
        t.rows.push_back({m.t[k], m.exact[k], m.lumped[k], m.difference[k]});
    return t;
}

CsvTable sweep_table(SweepResult const& result)
{
    CsvTable t;
    for (auto const& a : result.axes)
        t.header.push_back("param_" + a);
    for (char const* h : {"J_inf", "t10", "t50", "t90"})
        t.header.push_back(h);
    for (auto const& row : result.rows)
    {
        std::vector<double> r = row.params;
        if (row.rise)
        {
            r.insert(r.end(), {row.rise->j_inf, row.rise->t10, row.rise->t50, row.rise->t90});
        }
        else
        {
            double const j = row.record ? row.record->steady_current() : nan;
            r.insert(r.end(), {j, nan, nan, nan});
        }
        t.rows.push_back(std::move(r));
    }
    return t;
}

CsvTable compare_table(CompareResult const& result)
{
    CsvTable t;
    t.header = {"t_s", "J_full", "J_reduced", "diff"};
    auto const& f = result.full;
    auto const& r = result.reduced;
    for (std::size_t k = 0; k < std::min(f.t.size(), r.t.size()); ++k)
        t.rows.push_back({f.t[k], f.J[k], r.J[k], r.J[k] - f.J[k]});
    return t;
}

std::string fields_filename(double t)
{
    if (std::isinf(t))
        return "fields_steady.csv";
    char buf[64];
    std::snprintf(buf, sizeof buf, "fields_%.6g.csv", t);
    return buf;
}

void write_record(std::filesystem::path const& dir, ScenarioConfig const& cfg, TransientRecord const& record)
{
    write_csv(dir / "transient.csv", transient_table(record));
    write_csv(dir / "runlog.csv", runlog_table(record));
    Mesh1D const mesh = scenario_mesh(cfg);
    for (auto const& s : record.snapshots)
        write_csv(dir / fields_filename(s.t), fields_table(mesh, s));
    if (record.memory)
        write_csv(dir / "memory.csv", memory_table(*record.memory));
    std::string meta = "name = " + record.name + "\nconfig_hash = " + record.hash
                       + "\nsteps = " + std::to_string(record.steps)
                       + "\nrejections = " + std::to_string(record.rejections)
                       + "\nnewton_failures = " + std::to_string(record.newton_failures) + "\n";
    write_text(dir / "record.txt", meta);
    if (!record.bounds_report.empty())
        write_text(dir / "bounds.txt", record.bounds_report);
}

}  // namespace oscsim
