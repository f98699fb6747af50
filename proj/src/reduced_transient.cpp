#include "oscsim/reduced_transient.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "oscsim/model.hpp"

namespace oscsim
{
double ReducedKinetics::tau() const
{
    return exciton_tau(kdiss, krec);
}

double modified_generation(double t, double x0, double pn0, ReducedKinetics const& k)
{
    double const tau = k.tau();
    double const decay = std::exp(-t / tau);
    return k.kdiss * xi(t, x0, k.generation, tau)
           + k.gamma * k.kdiss * 0.5 * t * decay * pn0;
}

double modified_recombination(double t, ReducedKinetics const& k)
{
    double const tau = k.tau();
    double const decay = std::exp(-t / tau);
    return k.gamma * (tau * (k.krec + k.kdiss * decay) + k.kdiss * 0.5 * t * decay);
}

ModifiedRates modified_rates(double t,
                             std::span<double const> x0,
                             std::span<double const> pn0,
                             ReducedKinetics const& k)
{
    if (x0.size() != pn0.size())
        throw std::invalid_argument("initial fields differ in size");
    ModifiedRates out;
    out.generation.resize(x0.size());
    for (std::size_t i = 0; i < x0.size(); ++i)
        out.generation[i] = modified_generation(t, x0[i], pn0[i], k);
    out.recombination = modified_recombination(t, k);
    return out;
}

double reconstruct_x(double t, double x0, double pn0, double pn, ReducedKinetics const& k)
{
    double const tau = k.tau();
    double const decay = std::exp(-t / tau);
    return xi(t, x0, k.generation, tau) - k.gamma * tau * std::expm1(-t / tau) * pn
           + k.gamma * 0.5 * t * decay * (pn0 - pn);
}

std::pair<double, double> exponential_trapezoid_weights(double dt, double tau)
{
    double const r = dt / tau;
    // a0 = int_0^dt e^{-u/tau} du, a1 = int_0^dt u e^{-u/tau} du
    double const a0 = -tau * std::expm1(-r);
    double g;  // 1 - e^{-r} (1 + r)
    if (r < 1e-3)
        g = r * r * (0.5 - r / 3.0 + r * r / 8.0 - r * r * r / 30.0);
    else
        g = -std::expm1(-r) - r * std::exp(-r);
    double const a1 = tau * tau * g;
    double const w_old = a1 / dt;
    return {w_old, a0 - w_old};
}

double MemoryDiagnostics::peak_difference() const
{
    return difference.empty() ? 0.0 : *std::max_element(difference.begin(), difference.end());
}

double MemoryDiagnostics::peak_exact() const
{
    double m = 0.0;
    for (double v : exact)
        m = std::max(m, std::abs(v));
    return m;
}

double MemoryDiagnostics::peak_lumped() const
{
    double m = 0.0;
    for (double v : lumped)
        m = std::max(m, std::abs(v));
    return m;
}

MemoryAccumulator::MemoryAccumulator(std::vector<double> volumes,
                                     double gamma,
                                     double kdiss,
                                     double tau)
    : volumes_(std::move(volumes)),
      total_volume_(std::accumulate(volumes_.begin(), volumes_.end(), 0.0)),
      gamma_(gamma),
      kdiss_(kdiss),
      tau_(tau)
{
    if (!(tau > 0.0))
        throw std::invalid_argument("memory kernel needs tau > 0");
}

void MemoryAccumulator::add(double t, std::span<double const> pn)
{
    if (pn.size() != volumes_.size())
        throw std::invalid_argument("p n sample does not match the mesh");
    std::size_t const N = pn.size();
    if (lambda0_.empty())
    {
        if (t != 0.0)
            throw std::invalid_argument("memory history must start at t = 0");
        lambda0_.assign(pn.begin(), pn.end());
        lambda_last_ = lambda0_;
        convolution_.assign(N, 0.0);
    }
    else
    {
        if (!(t > t_last_))
            throw std::invalid_argument("memory history times must increase");
        double const dt = t - t_last_;
        double const decay = std::exp(-dt / tau_);
        auto const [w_old, w_new] = exponential_trapezoid_weights(dt, tau_);
        for (std::size_t i = 0; i < N; ++i)
            convolution_[i] = decay * convolution_[i] + w_old * lambda_last_[i] + w_new * pn[i];
        lambda_last_.assign(pn.begin(), pn.end());
    }
    t_last_ = t;

    double const kernel_mass = -tau_ * std::expm1(-t / tau_);
    double const lumped_weight = 0.5 * t * std::exp(-t / tau_);
    double const scale = gamma_ * kdiss_;
    double exact = 0.0;
    double lumped = 0.0;
    double diff = 0.0;
    for (std::size_t i = 0; i < N; ++i)
    {
        double const e = scale * (convolution_[i] - kernel_mass * pn[i]);
        double const l = scale * lumped_weight * (lambda0_[i] - pn[i]);
        exact += volumes_[i] * e;
        lumped += volumes_[i] * l;
        diff += volumes_[i] * std::abs(e - l);
    }
    out_.t.push_back(t);
    out_.exact.push_back(exact / total_volume_);
    out_.lumped.push_back(lumped / total_volume_);
    out_.difference.push_back(diff / total_volume_);
}

MemoryDiagnostics memory_diagnostics(std::span<double const> times,
                                     std::vector<std::vector<double>> const& pn_history,
                                     std::vector<double> const& volumes,
                                     double gamma,
                                     double kdiss,
                                     double tau)
{
    if (times.size() != pn_history.size())
        throw std::invalid_argument("history times and samples differ in length");
    if (times.size() < 3)
        throw std::invalid_argument("memory diagnostics need at least 3 history samples");
    MemoryAccumulator acc(volumes, gamma, kdiss, tau);
    for (std::size_t k = 0; k < times.size(); ++k)
        acc.add(times[k], pn_history[k]);
    return acc.take();
}

}  // namespace oscsim
