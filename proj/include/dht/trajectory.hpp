#ifndef DHT_TRAJECTORY_HPP
#define DHT_TRAJECTORY_HPP

#include <iosfwd>

#include "dht/system.hpp"

namespace dht {

struct SolverOptions {
    double tolerance = 1e-12;
    int max_iterations = 50;
    enum class Guess { PreviousStep, ExplicitPredictor } guess = Guess::PreviousStep;

    void validate() const {
        if (!(tolerance > 0)) throw ValidationError("solver tolerance must be > 0");
        if (max_iterations < 1) throw ValidationError("solver max iterations must be >= 1");
    }
};

struct TrajectoryRecord {
    double t = 0;
    std::vector<double> q;
    std::vector<double> p; // current-value p or present-value lambda
    int newton_iterations = 0;
    double residual_norm = 0;
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;
    double h = 0;
    int max_newton_iterations = 0;
    double max_residual = 0;
};

/// One implicit step: solves the 2n residual equations for (q', p') by
/// damped Newton iteration with a finite-difference Jacobian.
TrajectoryRecord step(const DifferenceSystem& sys, const TrajectoryRecord& from,
                      const SolverOptions& opts = {});

/// N applications of step from (t0, q0, p0); N >= 1.
Trajectory simulate(const DifferenceSystem& sys, const std::vector<double>& q0,
                    const std::vector<double>& p0, double t0, int steps,
                    const SolverOptions& opts = {});

struct DriftReport {
    double max_step_drift = 0;  // max_k |I_{k+1} - I_k|
    double max_total_drift = 0; // max_k |I_k - I_0|
    double scale = 0;           // max_k |I_k|
    std::size_t evaluated = 0;
    double tolerance = 0;
    bool pass = false;
};

/// Evaluates I along the trajectory (one-step lookahead when I still
/// contains offset +1 symbols) and reports per-step and total drift.
DriftReport check_integral(const Trajectory& traj, const DifferenceSystem& sys, const Expr& integral,
                           double tolerance = 1e-8);

struct EnergyReport {
    double max_residual = 0;
    double scale = 0; // max |H| along the trajectory
    double tolerance = 0;
    std::size_t evaluated = 0;
    bool pass = false;
};

/// Evaluates D_{+h}(H) - sum_i Gamma_i dH/d(beta p_i[+1]) along the
/// trajectory; pass iff the max residual is <= tol * (1 + scale).
EnergyReport check_energy_identity(const Trajectory& traj, const DifferenceSystem& sys,
                                   double tolerance = 1e-9);

/// Point binding records[k..k+depth] to offsets 0..depth, plus t and the
/// context parameters.
Point bind_window(const DifferenceSystem& sys, const Trajectory& traj, std::size_t k, int depth);

/// CSV: header k,t,q1..qn,p1..pn[,I1..Im], one row per record, full float
/// precision.
void write_csv(std::ostream& os, const Trajectory& traj, const DifferenceSystem& sys,
               const std::vector<std::pair<std::string, Expr>>& integrals = {});

} // namespace dht

#endif
