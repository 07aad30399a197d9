#include "wi/lp.hpp"

#include <cmath>
#include <stdexcept>

#include "wi/types.hpp"

namespace wi::lp {

namespace {

constexpr double kPivotEps = 1e-9;
constexpr double kCostEps = 1e-10;

class Tableau {
public:
    Tableau(std::size_t m, std::size_t n) : m_(m), n_(n), w_(n + m + 1), t_(m * w_, 0.0), d_(w_, 0.0), basis_(m) {}

    double& at(std::size_t i, std::size_t j) { return t_[i * w_ + j]; }
    double at(std::size_t i, std::size_t j) const { return t_[i * w_ + j]; }
    double& rhs(std::size_t i) { return at(i, w_ - 1); }
    double* row(std::size_t i) { return &t_[i * w_]; }

    void pivot(std::size_t r, std::size_t e) {
        double* pr = row(r);
        const double inv = 1.0 / pr[e];
        for (std::size_t j = 0; j < w_; ++j) pr[j] *= inv;
        pr[e] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) continue;
            double* pi = row(i);
            const double f = pi[e];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < w_; ++j) pi[j] -= f * pr[j];
            pi[e] = 0.0;
        }
        const double f = d_[e];
        if (f != 0.0) {
            for (std::size_t j = 0; j < w_; ++j) d_[j] -= f * pr[j];
            d_[e] = 0.0;
        }
        basis_[r] = e;
        ++pivots_;
    }

    /// Runs Bland-rule iterations over columns [0, limit). Returns false if
    /// the program is unbounded.
    bool optimize(std::size_t limit) {
        while (true) {
            std::size_t e = limit;
            for (std::size_t j = 0; j < limit; ++j) {
                if (d_[j] < -kCostEps) {
                    e = j;
                    break;
                }
            }
            if (e == limit) return true;
            std::size_t r = m_;
            double best = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                const double a = at(i, e);
                if (a <= kPivotEps) continue;
                const double ratio = at(i, w_ - 1) / a;
                if (r == m_ || ratio < best - 1e-12 || (std::abs(ratio - best) <= 1e-12 && basis_[i] < basis_[r])) {
                    r = i;
                    best = ratio;
                }
            }
            if (r == m_) return false;
            pivot(r, e);
        }
    }

    void set_costs(const std::vector<double>& cost) {
        for (std::size_t j = 0; j < w_; ++j) d_[j] = j + 1 < w_ ? cost[j] : 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
            const double cb = cost[basis_[i]];
            if (cb == 0.0) continue;
            const double* pi = row(i);
            for (std::size_t j = 0; j < w_; ++j) d_[j] -= cb * pi[j];
        }
    }

    double reduced(std::size_t j) const { return d_[j]; }
    double value() const { return -d_[w_ - 1]; }
    std::size_t basis(std::size_t i) const { return basis_[i]; }
    void set_basis(std::size_t i, std::size_t j) { basis_[i] = j; }
    std::size_t pivots() const { return pivots_; }

private:
    std::size_t m_, n_, w_;
    std::vector<double> t_;
    std::vector<double> d_;
    std::vector<std::size_t> basis_;
    std::size_t pivots_ = 0;
};

}  // namespace

void Program::add_row(std::vector<double> coeffs, double b, std::string name) {
    if (coeffs.size() != variables) throw Error("row '" + name + "' has wrong width");
    rows.push_back(std::move(coeffs));
    rhs.push_back(b);
    row_names.push_back(std::move(name));
}

Solution solve(const Program& p, Sense sense) {
    const std::size_t m = p.rows.size();
    const std::size_t n = p.variables;
    if (p.rhs.size() != m || p.objective.size() != n) throw Error("malformed linear program");

    Tableau t(m, n);
    std::vector<double> sign(m, 1.0);
    for (std::size_t i = 0; i < m; ++i) {
        if (p.rhs[i] < 0.0) sign[i] = -1.0;
        for (std::size_t j = 0; j < n; ++j) t.at(i, j) = sign[i] * p.rows[i][j];
        t.at(i, n + i) = 1.0;
        t.rhs(i) = sign[i] * p.rhs[i];
        t.set_basis(i, n + i);
    }

    // Phase I: minimize the sum of artificials.
    std::vector<double> cost(n + m, 0.0);
    for (std::size_t i = 0; i < m; ++i) cost[n + i] = 1.0;
    t.set_costs(cost);
    t.optimize(n + m);

    Solution s;
    double scale = 1.0;
    for (double b : p.rhs) scale += std::abs(b);
    if (t.value() > kTolerance * scale) {
        s.status = Status::Infeasible;
        s.farkas.resize(m);
        for (std::size_t i = 0; i < m; ++i) s.farkas[i] = sign[i] * (1.0 - t.reduced(n + i));
        s.pivots = t.pivots();
        return s;
    }

    // Move remaining artificials out of the basis; rows where that is
    // impossible are redundant and stay inert.
    for (std::size_t i = 0; i < m; ++i) {
        if (t.basis(i) < n) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(t.at(i, j)) > kPivotEps) {
                t.pivot(i, j);
                break;
            }
        }
    }

    // Phase II over the original columns only.
    const double dir = sense == Sense::Minimize ? 1.0 : -1.0;
    std::fill(cost.begin(), cost.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) cost[j] = dir * p.objective[j];
    t.set_costs(cost);
    if (!t.optimize(n)) {
        s.status = Status::Unbounded;
        s.pivots = t.pivots();
        return s;
    }

    s.status = Status::Optimal;
    s.x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        if (t.basis(i) < n) s.x[t.basis(i)] = std::max(0.0, t.rhs(i));
    }
    for (std::size_t j = 0; j < n; ++j) s.objective += p.objective[j] * s.x[j];
    s.pivots = t.pivots();
    return s;
}

double max_residual(const Program& p, const std::vector<double>& x) {
    double worst = 0.0;
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
        double lhs = 0.0;
        for (std::size_t j = 0; j < p.variables; ++j) lhs += p.rows[i][j] * x[j];
        worst = std::max(worst, std::abs(lhs - p.rhs[i]));
    }
    return worst;
}

}  // namespace wi::lp
