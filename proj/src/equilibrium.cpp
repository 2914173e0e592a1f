#include "droopstab/equilibrium.hpp"

#include "droopstab/errors.hpp"
#include "droopstab/linearize.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace droopstab {
namespace {

// Row scaling that turns the vector field into the balance residual.
Vector row_scale(const GridSpec& spec) {
    const int n = spec.n_inverters();
    const int m = spec.n_lines();
    Vector scale(2 * n + 2 * m);
    for (int i = 0; i < n; ++i) {
        scale(i) = spec.inverters[static_cast<size_t>(i)].tp;
        scale(n + i) = spec.inverters[static_cast<size_t>(i)].tq;
    }
    for (int k = 0; k < m; ++k) {
        const double e2 = spec.lines[static_cast<size_t>(k)].l / spec.bases.omega_b;
        scale(2 * n + k) = e2;
        scale(2 * n + m + k) = e2;
    }
    return scale;
}

Vector pack(const OperatingPoint& x) {
    const StateLayout s = x.layout();
    Vector u(2 * s.n + 2 * s.m);
    u << x.delta, x.voltage, x.i_d, x.i_q;
    return u;
}

OperatingPoint unpack(const Vector& u, int n, int m, double omega_b) {
    return {u.segment(0, n), Vector::Constant(n, omega_b), u.segment(n, n), u.segment(2 * n, m),
            u.segment(2 * n + m, m)};
}

}  // namespace

Vector balance_residual(const GridModel& model, const OperatingPoint& x) {
    const StateLayout s = model.layout();
    const Vector f = model.vector_field(x);
    return f.tail(s.size() - s.n).cwiseProduct(row_scale(model.spec()));
}

OperatingPoint flat_start(const GridSpec& spec) {
    const GridModel model(spec);
    const int n = spec.n_inverters();
    const int m = spec.n_lines();
    OperatingPoint x = OperatingPoint::zeros(n, m);
    x.omega.setConstant(spec.bases.omega_b);
    for (int i = 0; i < n; ++i) x.voltage(i) = spec.inverters[static_cast<size_t>(i)].v_d;

    // Steady state of the line equations: A_yy y + C^T (Vbar_D; Vbar_Q) = 0.
    Vector vbar_d(n + 1);
    Vector vbar_q(n + 1);
    vbar_d << x.voltage, spec.feeder.v_d;
    vbar_q << Vector::Zero(n), spec.feeder.v_q;
    Vector rhs(2 * m);
    rhs << model.incidence_extended() * vbar_d, model.incidence_extended() * vbar_q;

    Matrix a_yy = Matrix::Zero(2 * m, 2 * m);
    for (int k = 0; k < m; ++k) {
        const auto& line = spec.lines[static_cast<size_t>(k)];
        a_yy(k, k) = -line.r;
        a_yy(k, m + k) = line.x;
        a_yy(m + k, k) = -line.x;
        a_yy(m + k, m + k) = -line.r;
    }
    const Vector y = a_yy.partialPivLu().solve(-rhs);
    x.i_d = y.head(m);
    x.i_q = y.tail(m);
    return x;
}

EquilibriumResult find_equilibrium(const GridSpec& spec, const OperatingPoint& guess,
                                   const EquilibriumOptions& opts) {
    if (!(opts.tol > 0.0)) throw StructuralError("equilibrium tolerance must be positive");
    const GridModel model(spec);
    const int n = spec.n_inverters();
    const int m = spec.n_lines();
    const StateLayout s{n, m};
    if (guess.delta.size() != n || guess.voltage.size() != n || guess.omega.size() != n ||
        guess.i_d.size() != m || guess.i_q.size() != m) {
        throw StructuralError("initial guess has the wrong dimensions");
    }
    const double wb = spec.bases.omega_b;
    const Vector scale = row_scale(spec);

    // Newton unknowns are (delta, V, I_D, I_Q); the residual rows are
    // (omega, V, I_D, I_Q) of the field.
    std::vector<int> cols;
    for (int i = 0; i < n; ++i) cols.push_back(s.delta() + i);
    for (int i = 0; i < n; ++i) cols.push_back(s.voltage() + i);
    for (int k = 0; k < 2 * m; ++k) cols.push_back(s.i_d() + k);
    const int nu = static_cast<int>(cols.size());

    EquilibriumResult res;
    Vector u = pack(guess);
    OperatingPoint x = unpack(u, n, m, wb);
    Vector r = balance_residual(model, x);
    double rnorm = r.lpNorm<Eigen::Infinity>();
    res.residual_history.push_back(rnorm);

    auto finish = [&](bool ok, std::string msg) {
        res.point = x;
        res.residual_norm = rnorm;
        res.field_norm = model.vector_field(x).lpNorm<Eigen::Infinity>();
        res.converged = ok;
        res.message = std::move(msg);
        return res;
    };

    for (int it = 0; it < opts.max_iter; ++it) {
        if (!std::isfinite(rnorm)) return finish(false, "residual is not finite");
        if (rnorm <= opts.tol) return finish(true, "converged");

        const Matrix jf = jacobian(model, x);
        Matrix jn(nu, nu);
        for (int c = 0; c < nu; ++c) {
            jn.col(c) = jf.col(cols[static_cast<size_t>(c)]).tail(s.size() - n).cwiseProduct(scale);
        }

        Eigen::FullPivLU<Matrix> lu(jn);
        res.rcond = lu.rcond();
        Vector step;
        if (lu.isInvertible() && res.rcond > 1e-15) {
            step = lu.solve(-r);
        } else {
            // Rank-deficient (e.g. k_p = 0 leaves delta free): minimum-norm step.
            step = jn.completeOrthogonalDecomposition().solve(-r);
        }

        double alpha = 1.0;
        bool accepted = false;
        Vector u_try;
        OperatingPoint x_try;
        Vector r_try;
        for (int h = 0; h <= opts.max_halvings; ++h) {
            u_try = u + alpha * step;
            x_try = unpack(u_try, n, m, wb);
            r_try = balance_residual(model, x_try);
            if (r_try.allFinite() && r_try.norm() < r.norm()) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        res.iterations = it + 1;
        if (!accepted) {
            std::ostringstream msg;
            msg << "Newton stalled at residual " << rnorm << " (rcond " << res.rcond << ")";
            if (res.rcond < 1e-12) msg << "; Newton matrix is singular";
            return finish(rnorm <= opts.tol, msg.str());
        }
        u = u_try;
        x = x_try;
        r = r_try;
        rnorm = r.lpNorm<Eigen::Infinity>();
        res.residual_history.push_back(rnorm);
    }
    if (rnorm <= opts.tol) return finish(true, "converged");
    std::ostringstream msg;
    msg << "no convergence in " << opts.max_iter << " iterations (residual " << rnorm
        << ", rcond " << res.rcond << ")";
    return finish(false, msg.str());
}

}  // namespace droopstab
