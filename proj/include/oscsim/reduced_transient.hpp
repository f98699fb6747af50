#pragma once

#include <span>
#include <vector>

namespace oscsim
{
//! Constant-coefficient kinetics of the reduced transient model.
struct ReducedKinetics
{
    double generation = 0.0;  //!< G
    double gamma = 0.0;
    double kdiss = 0.0;
    double krec = 0.0;

    double tau() const;
};

/*!
 * Modified generation G~ at one node:
 * k_diss xi(t) + gamma k_diss (t/2) e^{-t/tau} p0 n0.
 */
double modified_generation(double t, double x0, double pn0, ReducedKinetics const& k);

/*!
 * Modified recombination factor R~ (multiplies p n):
 * gamma [tau (k_rec + k_diss e^{-t/tau}) + k_diss (t/2) e^{-t/tau}].
 */
double modified_recombination(double t, ReducedKinetics const& k);

struct ModifiedRates
{
    std::vector<double> generation;  //!< G~ per node
    double recombination = 0.0;      //!< R~, uniform
};

ModifiedRates modified_rates(double t,
                             std::span<double const> x0,
                             std::span<double const> pn0,
                             ReducedKinetics const& k);

/*!
 * Pair density implied by the reduced model: xi(t) plus the trapezoid
 * approximation of gamma * int_0^t p n e^{-(t-s)/tau} ds split as
 * gamma tau (1 - e^{-t/tau}) pn(t) + gamma (t/2) e^{-t/tau} (pn0 - pn(t)).
 */
double reconstruct_x(double t, double x0, double pn0, double pn, ReducedKinetics const& k);

/*!
 * Weights (w_old, w_new) of int_{t0}^{t1} lambda(s) e^{-(t1-s)/tau} ds for
 * lambda linear between its end values.
 */
std::pair<double, double> exponential_trapezoid_weights(double dt, double tau);

/*!
 * Memory integral I(t) = gamma k_diss int_0^t [lambda(s) - lambda(t)]
 * e^{-(t-s)/tau} ds with lambda = p n, and its lumped form
 * I~(t) = gamma k_diss (t/2) e^{-t/tau} [lambda(0) - lambda(t)].
 *
 * Values are volume averages over the device; `difference` is the average of
 * |I - I~| taken node by node.
 */
struct MemoryDiagnostics
{
    std::vector<double> t;
    std::vector<double> exact;
    std::vector<double> lumped;
    std::vector<double> difference;

    double peak_difference() const;
    double peak_exact() const;
    double peak_lumped() const;
};

//! Streams samples of lambda = p n and accumulates both memory terms.
class MemoryAccumulator
{
  public:
    MemoryAccumulator(std::vector<double> volumes, double gamma, double kdiss, double tau);

    void add(double t, std::span<double const> pn);
    MemoryDiagnostics const& result() const { return out_; }
    MemoryDiagnostics take() { return std::move(out_); }

  private:
    std::vector<double> volumes_;
    double total_volume_;
    double gamma_;
    double kdiss_;
    double tau_;
    double t_last_ = 0.0;
    std::vector<double> lambda0_;
    std::vector<double> lambda_last_;
    std::vector<double> convolution_;
    MemoryDiagnostics out_;
};

//! Batch form of MemoryAccumulator; needs at least 3 samples.
MemoryDiagnostics memory_diagnostics(std::span<double const> times,
                                     std::vector<std::vector<double>> const& pn_history,
                                     std::vector<double> const& volumes,
                                     double gamma,
                                     double kdiss,
                                     double tau);

}  // namespace oscsim
