#include "wi/joint.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace wi {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::string set_name(const std::vector<OptimizationId>& set) {
    std::string s;
    for (auto id : set) {
        if (!s.empty()) s += "+";
        s += to_string(id);
    }
    return s;
}

std::string row_label(const char* kind, const std::vector<OptimizationId>& set, double v) {
    return std::string(kind) + "(" + set_name(set) + ")=" + fmt(v);
}

std::uint32_t mask_of(const JointConstraints& c, const std::vector<OptimizationId>& set) {
    std::uint32_t m = 0;
    for (auto id : set) {
        auto it = std::find(c.optimizations.begin(), c.optimizations.end(), id);
        if (it == c.optimizations.end()) {
            throw Error("constraint names " + std::string(to_string(id)) + ", which is not in the optimization list");
        }
        m |= 1u << static_cast<unsigned>(it - c.optimizations.begin());
    }
    return m;
}

void check_fraction(const std::string& what, double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(what + " must be a fraction in [0,1]");
}

void validate(const JointConstraints& c) {
    const auto k = c.optimizations.size();
    if (k == 0 || k > 12) throw Error("joint estimate needs between 1 and 12 optimizations");
    if (c.marginals.size() != k) throw Error("one marginal is required per optimization");
    OptimizationSet seen;
    for (auto id : c.optimizations) {
        if (id == OptimizationId::OnDemand) throw Error("OnDemand is not an optimization atom");
        if (seen.contains(id)) throw Error("duplicate optimization " + std::string(to_string(id)));
        seen.insert(id);
    }
    for (std::size_t i = 0; i < k; ++i) {
        check_fraction("marginal of " + std::string(to_string(c.optimizations[i])), c.marginals[i]);
    }
    for (const auto& p : c.pairwise) {
        if (p.set.size() != 2 || p.set[0] == p.set[1]) throw Error("pairwise constraints name two optimizations");
        check_fraction("pairwise " + set_name(p.set), p.fraction);
    }
    for (const auto& s : c.scenarios) {
        if (s.set.size() < 2) throw Error("scenario constraints name at least two optimizations");
        check_fraction("scenario " + set_name(s.set), s.fraction);
    }
}

// Bounds implied by subsets that are cheap to check before solving.
std::vector<std::string> precheck(const JointConstraints& c) {
    std::vector<std::string> cert;
    auto marginal = [&](OptimizationId id) {
        auto it = std::find(c.optimizations.begin(), c.optimizations.end(), id);
        return c.marginals[static_cast<std::size_t>(it - c.optimizations.begin())];
    };
    constexpr double eps = lp::kTolerance;
    for (const auto& p : c.pairwise) {
        const double a = marginal(p.set[0]);
        const double b = marginal(p.set[1]);
        if (p.fraction > std::min(a, b) + eps) {
            auto small = a <= b ? p.set[0] : p.set[1];
            cert = {row_label("pairwise", p.set, p.fraction), row_label("marginal", {small}, std::min(a, b))};
            return cert;
        }
        if (p.fraction < a + b - 1.0 - eps) {
            cert = {row_label("pairwise", p.set, p.fraction), row_label("marginal", {p.set[0]}, a),
                    row_label("marginal", {p.set[1]}, b), "normalization=1"};
            return cert;
        }
    }
    for (const auto& s : c.scenarios) {
        for (auto id : s.set) {
            if (s.fraction > marginal(id) + eps) {
                cert = {row_label("scenario", s.set, s.fraction), row_label("marginal", {id}, marginal(id))};
                return cert;
            }
        }
        const auto sm = mask_of(c, s.set);
        for (const auto& p : c.pairwise) {
            if ((mask_of(c, p.set) & ~sm) == 0 && s.fraction > p.fraction + eps) {
                cert = {row_label("scenario", s.set, s.fraction), row_label("pairwise", p.set, p.fraction)};
                return cert;
            }
        }
    }
    return cert;
}

}  // namespace

JointInfeasible::JointInfeasible(std::string message, std::vector<std::string> certificate)
    : Error(std::move(message)), certificate_(std::move(certificate)) {}

double atom_savings(const std::vector<OptimizationId>& optimizations, std::uint32_t mask) {
    OptimizationSet s;
    for (std::size_t i = 0; i < optimizations.size(); ++i) {
        if (mask & (1u << i)) s.insert(optimizations[i]);
    }
    return set_savings(s);
}

lp::Program build_joint_program(const JointConstraints& c) {
    validate(c);
    const auto k = c.optimizations.size();
    const std::size_t atoms = std::size_t{1} << k;

    lp::Program p;
    p.variables = atoms;
    p.objective.resize(atoms);
    for (std::size_t a = 0; a < atoms; ++a) p.objective[a] = atom_savings(c.optimizations, std::uint32_t(a));

    auto superset_row = [&](std::uint32_t mask) {
        std::vector<double> row(atoms, 0.0);
        for (std::size_t a = 0; a < atoms; ++a) {
            if ((a & mask) == mask) row[a] = 1.0;
        }
        return row;
    };

    p.add_row(superset_row(0), 1.0, "normalization=1");
    for (std::size_t i = 0; i < k; ++i) {
        p.add_row(superset_row(1u << i), c.marginals[i],
                  row_label("marginal", {c.optimizations[i]}, c.marginals[i]));
    }
    for (const auto& pw : c.pairwise) {
        p.add_row(superset_row(mask_of(c, pw.set)), pw.fraction, row_label("pairwise", pw.set, pw.fraction));
    }
    for (const auto& s : c.scenarios) {
        p.add_row(superset_row(mask_of(c, s.set)), s.fraction, row_label("scenario", s.set, s.fraction));
    }
    return p;
}

double independence_savings(const JointConstraints& c) {
    validate(c);
    const auto k = c.optimizations.size();
    double total = 0.0;
    for (std::uint32_t a = 0; a < (1u << k); ++a) {
        double mass = 1.0;
        for (std::size_t i = 0; i < k; ++i) mass *= (a & (1u << i)) ? c.marginals[i] : 1.0 - c.marginals[i];
        total += mass * atom_savings(c.optimizations, a);
    }
    return total;
}

JointEstimate estimate_joint(const JointConstraints& c) {
    auto program = build_joint_program(c);
    if (auto cert = precheck(c); !cert.empty()) {
        throw JointInfeasible("constraints are contradictory", std::move(cert));
    }

    auto lo = lp::solve(program, lp::Sense::Minimize);
    if (lo.status == lp::Status::Infeasible) {
        std::vector<std::string> cert;
        for (std::size_t i = 0; i < lo.farkas.size(); ++i) {
            if (std::abs(lo.farkas[i]) > lp::kTolerance) cert.push_back(program.row_names[i]);
        }
        throw JointInfeasible("no distribution satisfies the constraints", std::move(cert));
    }
    auto hi = lp::solve(program, lp::Sense::Maximize);
    if (lo.status != lp::Status::Optimal || hi.status != lp::Status::Optimal) {
        throw Error("joint program did not reach an optimum");
    }

    JointEstimate e;
    e.min_savings = lo.objective;
    e.max_savings = hi.objective;
    e.independence_savings = independence_savings(c);
    e.joint = std::move(lo.x);
    e.constraint_rows = program.rows.size();
    return e;
}

JointConstraints constraints_from_population(std::span<const WorkloadProfile> population, double scenario_threshold,
                                             const EligibilityThresholds& t) {
    JointConstraints c;
    c.optimizations.assign(kAllOptimizations.begin() + 1, kAllOptimizations.end());
    const auto k = c.optimizations.size();
    const std::size_t atoms = std::size_t{1} << k;

    // Core-weighted atom histogram, then superset sums.
    std::vector<double> mass(atoms, 0.0);
    double total = 0.0;
    for (const auto& w : population) {
        const auto elig = eligibility(w.hints, w.util, t);
        std::uint32_t a = 0;
        for (std::size_t i = 0; i < k; ++i) {
            if (elig.contains(c.optimizations[i])) a |= 1u << i;
        }
        mass[a] += double(w.cores);
        total += double(w.cores);
    }
    if (total > 0.0) {
        for (auto& m : mass) m /= total;
    }
    auto sup = mass;
    for (std::size_t b = 0; b < k; ++b) {
        for (std::size_t a = 0; a < atoms; ++a) {
            if (!(a & (std::size_t{1} << b))) sup[a] += sup[a | (std::size_t{1} << b)];
        }
    }

    auto members = [&](std::size_t a) {
        std::vector<OptimizationId> s;
        for (std::size_t i = 0; i < k; ++i) {
            if (a & (std::size_t{1} << i)) s.push_back(c.optimizations[i]);
        }
        return s;
    };
    auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
    for (std::size_t i = 0; i < k; ++i) c.marginals.push_back(clamp01(sup[std::size_t{1} << i]));
    for (std::size_t a = 1; a < atoms; ++a) {
        const int n = std::popcount(static_cast<unsigned>(a));
        if (n == 2) c.pairwise.push_back({members(a), clamp01(sup[a])});
        if (n >= 3 && sup[a] > scenario_threshold) c.scenarios.push_back({members(a), clamp01(sup[a])});
    }
    return c;
}

}  // namespace wi
