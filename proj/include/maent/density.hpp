// Density data for both sides of the equation: radial analytic presets and
// tabulated radial profiles, the 1/k perturbation, ball masses, the
// mass-balance radius R_k, and the total-mass divergence heuristic.
#pragma once

#include <optional>
#include <sstream>

#include "maent/quadrature.hpp"

namespace maent {

/// Nonnegative locally bounded density. All representable forms are radial,
/// which keeps K-invariance automatic and reduces ball masses to 1-D
/// integrals n*omega_n*int_0^R d(r) r^{n-1} dr.
class DensitySpec {
  public:
    enum class Form { Constant, RadialPoly, RadialExp, TabulatedRadial };

    static DensitySpec constant(int dim, double value) {
        DensitySpec d;
        d.dim_ = dim;
        d.form_ = Form::Constant;
        d.value_ = value;
        d.validate();
        return d;
    }

    /// sum_j coeff_j * r^{power_j}, powers >= 0
    static DensitySpec radial_poly(int dim, std::vector<std::pair<double, double>> terms) {
        DensitySpec d;
        d.dim_ = dim;
        d.form_ = Form::RadialPoly;
        d.terms_ = std::move(terms);
        d.validate();
        return d;
    }

    /// a * exp(b r)
    static DensitySpec radial_exp(int dim, double a, double b) {
        DensitySpec d;
        d.dim_ = dim;
        d.form_ = Form::RadialExp;
        d.exp_a_ = a;
        d.exp_b_ = b;
        d.validate();
        return d;
    }

    /// linear interpolation of (r_i, v_i); constant extension beyond the grid
    static DensitySpec tabulated(int dim, std::vector<double> r, std::vector<double> v) {
        DensitySpec d;
        d.dim_ = dim;
        d.form_ = Form::TabulatedRadial;
        d.table_r_ = std::move(r);
        d.table_v_ = std::move(v);
        d.validate();
        return d;
    }

    int dimension() const { return dim_; }
    Form form() const { return form_; }

    double eval_radial(double r) const {
        r = std::abs(r);
        switch (form_) {
            case Form::Constant:
                return value_;
            case Form::RadialPoly: {
                double s = 0.0;
                for (const auto& [c, p] : terms_) s += c * std::pow(r, p);
                return s;
            }
            case Form::RadialExp:
                return exp_a_ * std::exp(exp_b_ * r);
            case Form::TabulatedRadial: {
                if (r <= table_r_.front()) return table_v_.front();
                if (r >= table_r_.back()) return table_v_.back();
                const auto it = std::upper_bound(table_r_.begin(), table_r_.end(), r);
                const size_t j = static_cast<size_t>(it - table_r_.begin());
                const double t = (r - table_r_[j - 1]) / (table_r_[j] - table_r_[j - 1]);
                return (1.0 - t) * table_v_[j - 1] + t * table_v_[j];
            }
        }
        return 0.0;
    }

    double eval(const Vec& x) const { return eval_radial(norm(x)); }
    double eval(const double* x) const { return eval_radial(norm(x, dim_)); }

    /// Interior breakpoints for quadrature (table knots).
    std::vector<double> breakpoints() const {
        if (form_ == Form::TabulatedRadial) return table_r_;
        return {};
    }

    /// Exact radial ball-mass integral where the form permits.
    std::optional<double> closed_form_ball_mass(double R) const {
        const double n = dim_;
        const double surf = n * unit_ball_volume(dim_);  // |S^{n-1}|
        if (form_ == Form::Constant) return value_ * unit_ball_volume(dim_) * std::pow(R, n);
        if (form_ == Form::RadialPoly) {
            double s = 0.0;
            for (const auto& [c, p] : terms_) s += c * std::pow(R, p + n) / (p + n);
            return surf * s;
        }
        return std::nullopt;
    }

  private:
    void validate() const {
        if (dim_ <= 0) throw ConfigError("density: dimension must be positive");
        switch (form_) {
            case Form::Constant:
                if (value_ < 0.0) throw ConfigError("density: constant must be nonnegative");
                break;
            case Form::RadialPoly:
                for (const auto& [c, p] : terms_) {
                    (void)c;
                    if (p < 0.0) throw ConfigError("density: polynomial powers must be >= 0");
                }
                // mixed-sign coefficients: fall through to the sample check
                for (int i = 0; i <= 400; ++i) {
                    const double r = 0.05 * i;
                    if (eval_radial(r) < -1e-12)
                        throw ConfigError("density: radial polynomial is negative at r=" +
                                          std::to_string(r));
                }
                break;
            case Form::RadialExp:
                if (exp_a_ < 0.0) throw ConfigError("density: exp amplitude must be nonnegative");
                break;
            case Form::TabulatedRadial:
                if (table_r_.size() != table_v_.size() || table_r_.size() < 2)
                    throw ConfigError("density: table needs matching r/v arrays, length >= 2");
                for (size_t i = 1; i < table_r_.size(); ++i)
                    if (!(table_r_[i] > table_r_[i - 1]))
                        throw ConfigError("density: table radii must be strictly increasing");
                for (double v : table_v_)
                    if (v < 0.0) throw ConfigError("density: table values must be nonnegative");
                break;
        }
    }

    int dim_ = 0;
    Form form_ = Form::Constant;
    double value_ = 0.0;
    std::vector<std::pair<double, double>> terms_;
    double exp_a_ = 0.0, exp_b_ = 0.0;
    std::vector<double> table_r_, table_v_;
};

/// base + 1/k; strictly positive for any nonnegative base.
struct PerturbedDensity {
    DensitySpec base;
    int k = 1;

    PerturbedDensity(DensitySpec b, int kk) : base(std::move(b)), k(kk) {
        if (k <= 0) throw InvalidArgument("PerturbedDensity: k must be positive");
    }

    int dimension() const { return base.dimension(); }
    double eval_radial(double r) const { return base.eval_radial(r) + 1.0 / k; }
    double eval(const Vec& x) const { return base.eval(x) + 1.0 / k; }
    double eval(const double* x) const { return base.eval(x) + 1.0 / k; }
    std::vector<double> breakpoints() const { return base.breakpoints(); }

    std::optional<double> closed_form_ball_mass(double R) const {
        const auto b = base.closed_form_ball_mass(R);
        if (!b) return std::nullopt;
        return *b + unit_ball_volume(base.dimension()) * std::pow(R, base.dimension()) / k;
    }
};

// ---------------------------------------------------------------------------
// Ball masses and the mass-balance radius
// ---------------------------------------------------------------------------

template <class Density>
double ball_mass(const Density& d, double R, const QuadSpec& spec = {}) {
    if (R <= 0.0) return 0.0;
    if (const auto exact = d.closed_form_ball_mass(R)) return *exact;
    const int n = d.dimension();
    const double surf = n * unit_ball_volume(n);
    auto integrand = [&](double r) { return d.eval_radial(r) * std::pow(r, n - 1); };
    return surf * integrate_adaptive(integrand, 0.0, R, spec, d.breakpoints());
}

/// R_k with int_{B_{R_k}} f_k = int_{B_k} g_k. The mass of a perturbed density
/// is continuous, strictly increasing and unbounded, so bracketing + bisection
/// with a secant refinement always lands.
inline double solve_Rk(const PerturbedDensity& f_k, const PerturbedDensity& g_k, double k,
                       double rel_tol = 1e-8) {
    const double target = ball_mass(g_k, k);
    double lo = 0.0, hi = std::max(k, 1.0);
    while (ball_mass(f_k, hi) < target) {
        hi *= 2.0;
        if (hi > 1e12) throw InversionFailure("solve_Rk: bracket exploded");
    }
    double flo = -target, fhi = ball_mass(f_k, hi) - target;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (fhi != flo) {  // secant proposal, kept inside the bracket
            const double sec = hi - fhi * (hi - lo) / (fhi - flo);
            if (sec > lo + 0.1 * (hi - lo) && sec < hi - 0.1 * (hi - lo)) mid = sec;
        }
        const double fm = ball_mass(f_k, mid) - target;
        if (std::abs(fm) <= rel_tol * target) return mid;
        if (fm < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Divergence heuristic for the total-mass hypothesis
// ---------------------------------------------------------------------------

enum class MassDiagnosis { Diverges, SuspectFinite, Inconclusive };

struct MassDiagnosisReport {
    MassDiagnosis verdict = MassDiagnosis::Inconclusive;
    std::vector<double> radii;
    std::vector<double> masses;
};

inline const char* to_string(MassDiagnosis d) {
    switch (d) {
        case MassDiagnosis::Diverges: return "DIVERGES";
        case MassDiagnosis::SuspectFinite: return "SUSPECT-FINITE";
        case MassDiagnosis::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

/// Heuristic only, never a proof: looks at ball masses across the given radii.
/// A plateau (tiny relative increase, or a near-zero fitted growth exponent)
/// reads as SUSPECT-FINITE; a x10 overall increase that is still growing reads
/// as DIVERGES.
inline MassDiagnosisReport check_infinite_mass(const DensitySpec& f,
                                               const std::vector<double>& radii) {
    if (radii.size() < 3) throw InvalidArgument("check_infinite_mass: need >= 3 radii");
    MassDiagnosisReport rep;
    rep.radii = radii;
    for (double R : radii) rep.masses.push_back(ball_mass(f, R));

    const size_t m = rep.masses.size();
    const double first = rep.masses.front(), last = rep.masses[m - 1];
    const double prev = rep.masses[m - 2];
    const double last_increase = (last - prev) / std::max(prev, 1e-300);
    const bool increasing = last > prev * (1.0 + 1e-12);

    if (last_increase < 1e-6) {
        rep.verdict = MassDiagnosis::SuspectFinite;
        return rep;
    }
    if (first > 0.0 && last / first >= 10.0 && increasing) {
        rep.verdict = MassDiagnosis::Diverges;
        return rep;
    }
    // growth exponent over the last step: p ~ d log M / d log R
    const double p = std::log(last / std::max(prev, 1e-300)) /
                     std::log(radii[m - 1] / radii[m - 2]);
    rep.verdict = (p < 0.05) ? MassDiagnosis::SuspectFinite : MassDiagnosis::Inconclusive;
    return rep;
}

}  // namespace maent
