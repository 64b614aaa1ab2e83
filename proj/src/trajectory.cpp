#include "dht/trajectory.hpp"

#include <cmath>
#include <ostream>

#include "dht/mesh_ops.hpp"

namespace dht {

namespace {

double inf_norm(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// dense Gauss with partial pivoting; A is row-major n x n
std::vector<double> solve_dense(std::vector<double> A, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(A[r * n + c]) > std::abs(A[piv * n + c])) piv = r;
        if (!(std::abs(A[piv * n + c]) > 0))
            throw NumericError("singular Jacobian in Newton solve");
        if (piv != c) {
            for (std::size_t j = 0; j < n; ++j) std::swap(A[c * n + j], A[piv * n + j]);
            std::swap(b[c], b[piv]);
        }
        for (std::size_t r = c + 1; r < n; ++r) {
            double f = A[r * n + c] / A[c * n + c];
            if (f == 0) continue;
            for (std::size_t j = c; j < n; ++j) A[r * n + j] -= f * A[c * n + j];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= A[i * n + j] * x[j];
        x[i] = s / A[i * n + i];
    }
    return x;
}

struct StepProblem {
    const DifferenceSystem& sys;
    Point base; // t, offset-0 symbols, parameters
    std::vector<Expr> residuals;
    std::vector<std::string> unknown_names; // q1[+1].., costate[+1]..
    int n;

    StepProblem(const DifferenceSystem& s, const TrajectoryRecord& from) : sys(s), n(s.ctx.n) {
        if (!s.control_free())
            throw ValidationError("simulate requires a control-free system (run eliminate_control)");
        base = s.ctx.base_point();
        base.set("t", from.t);
        for (int i = 1; i <= n; ++i) {
            base.set(SeqSym{VarBase::State, i, 0}.str(), from.q[i - 1]);
            base.set(SeqSym{s.costate_base, i, 0}.str(), from.p[i - 1]);
        }
        for (const auto& r : s.state_residuals) residuals.push_back(r);
        for (const auto& r : s.costate_residuals) residuals.push_back(r);
        for (int i = 1; i <= n; ++i) unknown_names.push_back(SeqSym{VarBase::State, i, +1}.str());
        for (int i = 1; i <= n; ++i) unknown_names.push_back(SeqSym{s.costate_base, i, +1}.str());
    }

    std::vector<double> eval_residuals(const std::vector<double>& x) const {
        Point pt = base;
        for (std::size_t j = 0; j < x.size(); ++j) pt.set(unknown_names[j], x[j]);
        std::vector<double> r;
        r.reserve(residuals.size());
        for (const auto& e : residuals) r.push_back(eval(e, pt));
        return r;
    }
};

} // namespace

TrajectoryRecord step(const DifferenceSystem& sys, const TrajectoryRecord& from,
                      const SolverOptions& opts) {
    opts.validate();
    StepProblem prob(sys, from);
    const std::size_t dim = prob.unknown_names.size();

    std::vector<double> x(dim);
    bool predicted = false;
    if (opts.guess == SolverOptions::Guess::ExplicitPredictor) {
        if (const auto& map = derive_step_map(sys)) {
            for (int i = 0; i < prob.n; ++i) x[i] = eval(map->q_next[i], prob.base);
            for (int i = 0; i < prob.n; ++i) x[prob.n + i] = eval(map->p_next[i], prob.base);
            predicted = true;
        }
    }
    if (!predicted) {
        for (int i = 0; i < prob.n; ++i) x[i] = from.q[i];
        for (int i = 0; i < prob.n; ++i) x[prob.n + i] = from.p[i];
    }

    std::vector<double> r;
    try {
        r = prob.eval_residuals(x);
    } catch (const EvalDomainError& e) {
        throw NumericError(std::string("initial guess leaves the evaluation domain: ") + e.what());
    }
    double rn = inf_norm(r);
    int iter = 0;
    while (rn > opts.tolerance) {
        if (++iter > opts.max_iterations)
            throw NumericError("Newton did not converge (residual " + std::to_string(rn) + ")");
        // central finite-difference Jacobian
        std::vector<double> J(dim * dim);
        for (std::size_t j = 0; j < dim; ++j) {
            double delta = 1e-7 * std::max(1.0, std::abs(x[j]));
            std::vector<double> xp = x, xm = x;
            xp[j] += delta;
            xm[j] -= delta;
            std::vector<double> rp, rm;
            try {
                rp = prob.eval_residuals(xp);
                rm = prob.eval_residuals(xm);
            } catch (const EvalDomainError& e) {
                throw NumericError(std::string("Jacobian evaluation left the domain: ") + e.what());
            }
            for (std::size_t i = 0; i < dim; ++i) J[i * dim + j] = (rp[i] - rm[i]) / (2 * delta);
        }
        std::vector<double> rhs(dim);
        for (std::size_t i = 0; i < dim; ++i) rhs[i] = -r[i];
        std::vector<double> dx = solve_dense(J, rhs);

        double lambda = 1.0;
        bool accepted = false;
        while (lambda > 1e-9) {
            std::vector<double> xt(dim);
            for (std::size_t i = 0; i < dim; ++i) xt[i] = x[i] + lambda * dx[i];
            try {
                std::vector<double> rt = prob.eval_residuals(xt);
                double rtn = inf_norm(rt);
                if (rtn < rn || rtn <= opts.tolerance) {
                    x = std::move(xt);
                    r = std::move(rt);
                    rn = rtn;
                    accepted = true;
                    break;
                }
            } catch (const EvalDomainError&) {
                // trial point outside the domain; damp harder
            }
            lambda *= 0.5;
        }
        if (!accepted)
            throw NumericError("Newton stalled (residual " + std::to_string(rn) +
                               "); step may be leaving the admissible domain");
    }

    for (double v : x)
        if (!std::isfinite(v)) throw NumericError("non-finite state reached");

    TrajectoryRecord out;
    out.t = from.t + sys.ctx.h;
    out.q.assign(x.begin(), x.begin() + prob.n);
    out.p.assign(x.begin() + prob.n, x.end());
    out.newton_iterations = iter;
    out.residual_norm = rn;
    return out;
}

Trajectory simulate(const DifferenceSystem& sys, const std::vector<double>& q0,
                    const std::vector<double>& p0, double t0, int steps,
                    const SolverOptions& opts) {
    if (steps < 1) throw ValidationError("simulate requires N >= 1 steps");
    if (static_cast<int>(q0.size()) != sys.ctx.n || static_cast<int>(p0.size()) != sys.ctx.n)
        throw ValidationError("initial data dimension mismatch");
    Trajectory traj;
    traj.h = sys.ctx.h;
    TrajectoryRecord rec;
    rec.t = t0;
    rec.q = q0;
    rec.p = p0;
    traj.records.push_back(rec);
    for (int k = 0; k < steps; ++k) {
        try {
            rec = step(sys, rec, opts);
        } catch (const NumericError& e) {
            throw NumericError("step " + std::to_string(k + 1) + ": " + e.what());
        }
        traj.max_newton_iterations = std::max(traj.max_newton_iterations, rec.newton_iterations);
        traj.max_residual = std::max(traj.max_residual, rec.residual_norm);
        traj.records.push_back(rec);
    }
    return traj;
}

Point bind_window(const DifferenceSystem& sys, const Trajectory& traj, std::size_t k, int depth) {
    if (k + depth >= traj.records.size())
        throw ValidationError("bind_window: trajectory too short for requested depth");
    Point pt = sys.ctx.base_point();
    pt.set("t", traj.records[k].t);
    for (int d = 0; d <= depth; ++d) {
        const auto& rec = traj.records[k + d];
        for (int i = 1; i <= sys.ctx.n; ++i) {
            pt.set(SeqSym{VarBase::State, i, d}.str(), rec.q[i - 1]);
            pt.set(SeqSym{sys.costate_base, i, d}.str(), rec.p[i - 1]);
        }
    }
    return pt;
}

DriftReport check_integral(const Trajectory& traj, const DifferenceSystem& sys, const Expr& integral,
                           double tolerance) {
    DriftReport rep;
    rep.tolerance = tolerance;
    int depth = std::max(0, max_offset(integral));
    if (min_offset(integral) < 0)
        throw ValidationError("integral evaluation expects offsets >= 0; shift it first");
    std::vector<double> vals;
    for (std::size_t k = 0; k + depth < traj.records.size(); ++k) {
        Point pt = bind_window(sys, traj, k, depth);
        try {
            vals.push_back(eval(integral, pt));
        } catch (const EvalDomainError& e) {
            throw NumericError("integral evaluation failed at record " + std::to_string(k) + ": " +
                               e.what());
        }
    }
    rep.evaluated = vals.size();
    for (std::size_t k = 0; k < vals.size(); ++k) {
        rep.scale = std::max(rep.scale, std::abs(vals[k]));
        if (k > 0) rep.max_step_drift = std::max(rep.max_step_drift, std::abs(vals[k] - vals[k - 1]));
        rep.max_total_drift = std::max(rep.max_total_drift, std::abs(vals[k] - vals[0]));
    }
    rep.pass = rep.max_step_drift <= tolerance;
    return rep;
}

EnergyReport check_energy_identity(const Trajectory& traj, const DifferenceSystem& sys,
                                   double tolerance) {
    if (sys.kind != SystemKind::CurrentValue && sys.kind != SystemKind::Canonical)
        throw ValidationError("energy identity check applies to current-value (or canonical) systems");
    EnergyReport rep;
    rep.tolerance = tolerance;

    const Expr& H = sys.hamiltonian;
    Expr lhs = d_plus(H);
    std::vector<Expr> terms{lhs};
    for (int i = 1; i <= sys.ctx.n; ++i) {
        Expr dH_dbp = div(diff(H, SymRef::of(VarBase::Costate, i, +1)), param("beta"));
        terms.push_back(neg(mul(sys.gamma[i - 1], dH_dbp)));
    }
    Expr E = normalize(sum(std::move(terms)));
    int depth = std::max(0, max_offset(E));
    int hdepth = std::max(0, max_offset(H));

    for (std::size_t k = 0; k + depth < traj.records.size(); ++k) {
        Point pt = bind_window(sys, traj, k, depth);
        try {
            rep.max_residual = std::max(rep.max_residual, std::abs(eval(E, pt)));
            ++rep.evaluated;
        } catch (const EvalDomainError& e) {
            throw NumericError("energy identity evaluation failed at record " + std::to_string(k) +
                               ": " + e.what());
        }
    }
    for (std::size_t k = 0; k + hdepth < traj.records.size(); ++k)
        rep.scale = std::max(rep.scale, std::abs(eval(H, bind_window(sys, traj, k, hdepth))));
    rep.pass = rep.max_residual <= tolerance * (1.0 + rep.scale);
    return rep;
}

void write_csv(std::ostream& os, const Trajectory& traj, const DifferenceSystem& sys,
               const std::vector<std::pair<std::string, Expr>>& integrals) {
    os << "k,t";
    for (int i = 1; i <= sys.ctx.n; ++i) os << ",q" << i;
    for (int i = 1; i <= sys.ctx.n; ++i) os << ",p" << i;
    for (const auto& [name, _] : integrals) os << ',' << name;
    os << '\n';
    char buf[64];
    auto emit = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << ',' << buf;
    };
    for (std::size_t k = 0; k < traj.records.size(); ++k) {
        const auto& rec = traj.records[k];
        os << k;
        emit(rec.t);
        for (double v : rec.q) emit(v);
        for (double v : rec.p) emit(v);
        for (const auto& [name, I] : integrals) {
            int depth = std::max(0, max_offset(I));
            if (k + depth < traj.records.size())
                emit(eval(I, bind_window(sys, traj, k, depth)));
            else
                os << ',';
        }
        os << '\n';
    }
}

} // namespace dht
