#include "pevcc/qp.hpp"

#include "pevcc/errors.hpp"

#include <cmath>
#include <limits>

namespace pevcc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Factorisation state: J is H^{-1/2} rotated so its first iq columns span the
// active normals; R is the upper-triangular factor of the active set in that basis.
struct ActiveFactor {
    Mat J;
    Mat R;
    int iq = 0;
    double r_norm = 1.0;

    // Append the constraint whose transformed normal is d. False on linear dependence.
    bool add(Vec& d)
    {
        const int n = static_cast<int>(J.rows());
        for (int j = n - 1; j >= iq + 1; --j) {
            double cc = d[j - 1];
            double ss = d[j];
            const double h = std::hypot(cc, ss);
            if (h == 0.0)
                continue;
            d[j] = 0.0;
            ss /= h;
            cc /= h;
            if (cc < 0.0) {
                cc = -cc;
                ss = -ss;
                d[j - 1] = -h;
            } else {
                d[j - 1] = h;
            }
            const double xny = ss / (1.0 + cc);
            for (int k = 0; k < n; ++k) {
                const double t1 = J(k, j - 1);
                const double t2 = J(k, j);
                J(k, j - 1) = t1 * cc + t2 * ss;
                J(k, j) = xny * (t1 + J(k, j - 1)) - t2;
            }
        }
        ++iq;
        for (int i = 0; i < iq; ++i)
            R(i, iq - 1) = d[i];
        if (std::abs(d[iq - 1]) <= kEps * r_norm)
            return false;
        r_norm = std::max(r_norm, std::abs(d[iq - 1]));
        return true;
    }

    // Remove active constraint with label l (labels live in `active`, multipliers in u).
    void remove(std::vector<int>& active, Vec& u, int first_ineq, int label)
    {
        const int n = static_cast<int>(J.rows());
        int qq = -1;
        for (int i = first_ineq; i < iq; ++i)
            if (active[i] == label) {
                qq = i;
                break;
            }
        if (qq < 0)
            throw Error("active-set QP: constraint to drop is not active");
        for (int i = qq; i < iq - 1; ++i) {
            active[i] = active[i + 1];
            u[i] = u[i + 1];
            R.col(i) = R.col(i + 1);
        }
        active[iq - 1] = active[iq];
        u[iq - 1] = u[iq];
        active[iq] = 0;
        u[iq] = 0.0;
        for (int j = 0; j < iq; ++j)
            R(j, iq - 1) = 0.0;
        --iq;
        if (iq == 0)
            return;
        for (int j = qq; j < iq; ++j) {
            double cc = R(j, j);
            double ss = R(j + 1, j);
            const double h = std::hypot(cc, ss);
            if (h == 0.0)
                continue;
            cc /= h;
            ss /= h;
            R(j + 1, j) = 0.0;
            if (cc < 0.0) {
                R(j, j) = -h;
                cc = -cc;
                ss = -ss;
            } else {
                R(j, j) = h;
            }
            const double xny = ss / (1.0 + cc);
            for (int k = j + 1; k < iq; ++k) {
                const double t1 = R(j, k);
                const double t2 = R(j + 1, k);
                R(j, k) = t1 * cc + t2 * ss;
                R(j + 1, k) = xny * (t1 + R(j, k)) - t2;
            }
            for (int k = 0; k < n; ++k) {
                const double t1 = J(k, j);
                const double t2 = J(k, j + 1);
                J(k, j) = t1 * cc + t2 * ss;
                J(k, j + 1) = xny * (J(k, j) + t1) - t2;
            }
        }
    }

    // Primal direction z (in the null space of the active set) and dual direction r.
    void directions(const Vec& d, Vec& z, Vec& r) const
    {
        const int n = static_cast<int>(J.rows());
        z.setZero();
        for (int j = iq; j < n; ++j)
            z += J.col(j) * d[j];
        for (int i = iq - 1; i >= 0; --i) {
            double sum = 0.0;
            for (int j = i + 1; j < iq; ++j)
                sum += R(i, j) * r[j];
            r[i] = (d[i] - sum) / R(i, i);
        }
    }
};

}  // namespace

QpResult solve_dense_qp(const Mat& hessian, const Vec& linear, const Mat& eq_rows, const Vec& eq_rhs,
                        const Mat& ineq_rows, const Vec& ineq_rhs, int max_iterations)
{
    const int n = static_cast<int>(hessian.rows());
    const int me = static_cast<int>(eq_rows.rows());
    const int mi = static_cast<int>(ineq_rows.rows());
    require_size(hessian.cols(), n, "QP hessian columns");
    require_size(linear.size(), n, "QP linear term");
    require_size(eq_rhs.size(), me, "QP equality rhs");
    require_size(ineq_rhs.size(), mi, "QP inequality rhs");
    if (me > 0)
        require_size(eq_rows.cols(), n, "QP equality rows");
    if (mi > 0)
        require_size(ineq_rows.cols(), n, "QP inequality rows");
    if (max_iterations <= 0)
        max_iterations = 50 * (n + me + mi) + 100;

    QpResult out;
    out.eq_multipliers = Vec::Zero(me);
    out.ineq_multipliers = Vec::Zero(mi);
    if (n == 0) {
        if (me > 0 && eq_rhs.cwiseAbs().maxCoeff() > 0.0)
            throw InfeasibleProblem("active-set QP: empty problem with nonzero equality rhs");
        if (mi > 0 && ineq_rhs.minCoeff() < 0.0)
            throw InfeasibleProblem("active-set QP: empty problem with violated inequality");
        out.x = Vec(0);
        return out;
    }

    Eigen::LLT<Mat> llt(hessian);
    if (llt.info() != Eigen::Success)
        throw InvalidInput("active-set QP: hessian is not positive definite");

    ActiveFactor fac;
    fac.J = llt.matrixU().solve(Mat::Identity(n, n));
    fac.R = Mat::Zero(n, n);
    const double c1 = hessian.trace();
    const double c2 = fac.J.trace();

    Vec x = llt.solve(-linear);

    const int m = me + mi;
    std::vector<int> active(m + 1, 0);
    Vec u = Vec::Zero(m + 1);
    Vec d(n), z(n), r = Vec::Zero(m + 1);

    for (int i = 0; i < me; ++i) {
        const Vec np = eq_rows.row(i).transpose();
        d = fac.J.transpose() * np;
        fac.directions(d, z, r);
        double t2 = 0.0;
        if (z.squaredNorm() > kEps)
            t2 = (eq_rhs[i] - np.dot(x)) / z.dot(np);
        x += t2 * z;
        u[fac.iq] = t2;
        for (int k = 0; k < fac.iq; ++k)
            u[k] -= t2 * r[k];
        active[fac.iq] = -i - 1;
        if (!fac.add(d))
            throw InvalidInput("active-set QP: equality constraints are linearly dependent");
    }

    // Inequality i in ">= 0" form: n_i = -C_i, s_i = n_i'x + d_i.
    auto normal = [&](int i) -> Vec { return -ineq_rows.row(i).transpose(); };
    auto slack = [&](int i) { return ineq_rhs[i] - ineq_rows.row(i).dot(x); };

    std::vector<int> inactive(mi);
    std::vector<char> allowed(mi, 1);
    for (int i = 0; i < mi; ++i)
        inactive[i] = i;
    Vec s(mi);
    std::vector<int> active_old(m + 1, 0);
    Vec u_old = Vec::Zero(m + 1);
    Vec x_old = x;
    const double psi_tol = static_cast<double>(mi) * kEps * c1 * c2 * 100.0;

    int iter = 0;
    for (;;) {
        // step 1: pick the most violated constraint
        if (++iter > max_iterations)
            throw NotConverged("active-set QP: iteration cap reached");
        for (int i = me; i < fac.iq; ++i)
            inactive[active[i]] = -1;
        double psi = 0.0;
        for (int i = 0; i < mi; ++i) {
            allowed[i] = 1;
            s[i] = slack(i);
            psi += std::min(0.0, s[i]);
        }
        if (std::abs(psi) <= psi_tol)
            break;
        for (int i = 0; i < fac.iq; ++i) {
            u_old[i] = u[i];
            active_old[i] = active[i];
        }
        x_old = x;

        bool restart_step2 = true;
        bool done = false;
        int ip = 0;
        while (restart_step2) {
            restart_step2 = false;
            double ss = 0.0;
            for (int i = 0; i < mi; ++i)
                if (s[i] < ss && inactive[i] != -1 && allowed[i]) {
                    ss = s[i];
                    ip = i;
                }
            if (ss >= 0.0) {
                done = true;
                break;
            }
            Vec np = normal(ip);
            u[fac.iq] = 0.0;
            active[fac.iq] = ip;

            for (;;) {
                if (++iter > max_iterations)
                    throw NotConverged("active-set QP: iteration cap reached");
                d = fac.J.transpose() * np;
                fac.directions(d, z, r);

                // partial step length t1 (dual feasibility), full step t2 (primal)
                double t1 = kInf;
                int l = -1;
                for (int k = me; k < fac.iq; ++k)
                    if (r[k] > 0.0 && u[k] / r[k] < t1) {
                        t1 = u[k] / r[k];
                        l = active[k];
                    }
                double t2 = kInf;
                if (z.squaredNorm() > kEps) {
                    t2 = -s[ip] / z.dot(np);
                    if (t2 < 0.0)
                        t2 = kInf;
                }
                const double t = std::min(t1, t2);
                if (t >= kInf)
                    throw InfeasibleProblem("active-set QP: constraints are inconsistent");

                if (t2 >= kInf) {
                    for (int k = 0; k < fac.iq; ++k)
                        u[k] -= t * r[k];
                    u[fac.iq] += t;
                    inactive[l] = l;
                    fac.remove(active, u, me, l);
                    continue;
                }

                x += t * z;
                for (int k = 0; k < fac.iq; ++k)
                    u[k] -= t * r[k];
                u[fac.iq] += t;

                if (std::abs(t - t2) < kEps) {
                    if (!fac.add(d)) {
                        // numerically dependent: exclude ip and retry from the saved point
                        allowed[ip] = 0;
                        fac.remove(active, u, me, ip);
                        for (int i = 0; i < mi; ++i)
                            inactive[i] = i;
                        for (int i = 0; i < fac.iq; ++i) {
                            active[i] = active_old[i];
                            if (active[i] >= 0)
                                inactive[active[i]] = -1;
                            u[i] = u_old[i];
                        }
                        x = x_old;
                        restart_step2 = true;
                    } else {
                        inactive[ip] = -1;
                    }
                    break;
                }

                inactive[l] = l;
                fac.remove(active, u, me, l);
                s[ip] = slack(ip);
            }
        }
        if (done)
            break;
    }

    out.x = x;
    out.objective = 0.5 * x.dot(hessian * x) + linear.dot(x);
    out.iterations = iter;
    for (int k = 0; k < fac.iq; ++k) {
        if (active[k] < 0) {
            out.eq_multipliers[-active[k] - 1] = -u[k];
        } else {
            out.ineq_multipliers[active[k]] = u[k];
            out.active.push_back(active[k]);
        }
    }
    return out;
}

}  // namespace pevcc
