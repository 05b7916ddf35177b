#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mipt/errors.hpp"

namespace mipt {

struct CollapsePoint {
    int L = 0;
    double p = 0.0;
    double s_mean = 0.0;
    double s_err = 0.0;  // optional CI half-width, 0 when absent
};

// (L, p, <S_alpha>) table feeding the finite-size-scaling collapse.
struct CollapseDataset {
    std::vector<CollapsePoint> entries;
    double p_star = 0.25;
    double alpha = 1.0;

    std::map<int, std::vector<CollapsePoint>> by_size() const {
        std::map<int, std::vector<CollapsePoint>> m;
        for (const auto& e : entries) m[e.L].push_back(e);
        for (auto& [L, pts] : m)
            std::sort(pts.begin(), pts.end(),
                      [](const CollapsePoint& a, const CollapsePoint& b) { return a.p < b.p; });
        return m;
    }

    void validate() const {
        auto m = by_size();
        if (m.size() < 2) throw ConfigError("collapse dataset needs >= 2 distinct L");
        for (const auto& [L, pts] : m) {
            if (pts.size() < 4) throw ConfigError("collapse dataset needs >= 4 p points per L");
            for (const auto& e : pts)
                if (e.p < 0.0 || e.p > 1.0) throw ConfigError("p outside [0,1] in dataset");
        }
    }
};

struct RescaledPoint {
    double q = 0.0;
    double w = 0.0;
};

struct RescaledCurve {
    int L = 0;
    std::vector<RescaledPoint> points;  // sorted by q
    double q_min() const { return points.front().q; }
    double q_max() const { return points.back().q; }
};

namespace detail {

// <S(p*)> for one size: the sampled value at p*, otherwise linear
// interpolation between the two nearest sampled rates.
inline double entropy_at_pstar(const std::vector<CollapsePoint>& pts, double p_star) {
    if (p_star < pts.front().p - 1e-12 || p_star > pts.back().p + 1e-12)
        throw ConfigError("p* outside the sampled measurement-rate span");
    for (const auto& e : pts)
        if (std::abs(e.p - p_star) < 1e-12) return e.s_mean;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i].p <= p_star && p_star <= pts[i + 1].p) {
            double t = (p_star - pts[i].p) / (pts[i + 1].p - pts[i].p);
            return (1.0 - t) * pts[i].s_mean + t * pts[i + 1].s_mean;
        }
    }
    throw ConfigError("p* not bracketed by sampled rates");
}

}  // namespace detail

// q = (p - p*) L^{1/nu}, W = (<S(p)> - <S(p*)>) L^{-gamma/nu}, per size,
// ordered by q.
inline std::vector<RescaledCurve> rescale(const CollapseDataset& dataset, double gamma,
                                          double nu) {
    dataset.validate();
    std::vector<RescaledCurve> out;
    for (const auto& [L, pts] : dataset.by_size()) {
        double s_star = detail::entropy_at_pstar(pts, dataset.p_star);
        RescaledCurve curve;
        curve.L = L;
        for (const auto& e : pts) {
            RescaledPoint r;
            r.q = (e.p - dataset.p_star) * std::pow(double(L), 1.0 / nu);
            r.w = (e.s_mean - s_star) * std::pow(double(L), -gamma / nu);
            curve.points.push_back(r);
        }
        std::sort(curve.points.begin(), curve.points.end(),
                  [](const RescaledPoint& a, const RescaledPoint& b) { return a.q < b.q; });
        out.push_back(std::move(curve));
    }
    return out;
}

// Piecewise-linear interpolant over sorted (q, W) knots. Evaluation outside
// [min q, max q] is rejected; the collapse never extrapolates.
class Interpolant {
public:
    explicit Interpolant(std::vector<RescaledPoint> points) : pts_(std::move(points)) {
        if (pts_.size() < 2) throw std::invalid_argument("interpolant needs >= 2 points");
        std::sort(pts_.begin(), pts_.end(),
                  [](const RescaledPoint& a, const RescaledPoint& b) { return a.q < b.q; });
        for (std::size_t i = 0; i + 1 < pts_.size(); ++i)
            if (pts_[i + 1].q - pts_[i].q < 1e-15)
                throw std::invalid_argument("interpolant needs distinct q");
    }

    double q_min() const { return pts_.front().q; }
    double q_max() const { return pts_.back().q; }

    double operator()(double q) const {
        if (q < q_min() - 1e-12 || q > q_max() + 1e-12)
            throw std::invalid_argument("interpolant: extrapolation rejected");
        q = std::clamp(q, q_min(), q_max());
        auto it = std::upper_bound(pts_.begin(), pts_.end(), q,
                                   [](double v, const RescaledPoint& p) { return v < p.q; });
        if (it == pts_.begin()) return pts_.front().w;
        if (it == pts_.end()) return pts_.back().w;
        const RescaledPoint& hi = *it;
        const RescaledPoint& lo = *(it - 1);
        double t = (q - lo.q) / (hi.q - lo.q);
        return (1.0 - t) * lo.w + t * hi.w;
    }

private:
    std::vector<RescaledPoint> pts_;
};

// 3-point moving average smoothing pre-pass for the interpolant; off by
// default.
inline std::vector<RescaledPoint> moving_average3(const std::vector<RescaledPoint>& pts) {
    std::vector<RescaledPoint> out = pts;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double acc = pts[i].w;
        int n = 1;
        if (i > 0) {
            acc += pts[i - 1].w;
            ++n;
        }
        if (i + 1 < pts.size()) {
            acc += pts[i + 1].w;
            ++n;
        }
        out[i].w = acc / double(n);
    }
    return out;
}

struct CollapseOptions {
    double gamma_min = 0.25, gamma_max = 4.0;
    double nu_min = 0.25, nu_max = 4.0;
    double grid_step = 0.05;
    double descent_tol = 1e-3;  // terminal step length of the refinement
    int descent_max_iter = 500;
    double epsilon = 0.01;  // relative probe for the error-width formulas
    bool smooth = false;
};

// Scatter loss R(gamma, nu): for each ordered pair of sizes (L, L'), the
// squared residuals between the interpolated curve of L and the rescaled data
// of L' on their overlapping q window, weighted by L^{2 gamma / nu}.
// Summation order is fixed (ascending L, L', q) so the result is
// bit-reproducible regardless of dataset entry order.
inline double collapse_loss(const CollapseDataset& dataset, double gamma, double nu,
                            bool smooth = false) {
    auto curves = rescale(dataset, gamma, nu);
    std::vector<Interpolant> interp;
    for (const auto& c : curves)
        interp.emplace_back(smooth ? moving_average3(c.points) : c.points);

    double loss = 0.0;
    std::size_t overlapping = 0;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        double pref = std::pow(double(curves[i].L), 2.0 * gamma / nu);
        for (std::size_t j = 0; j < curves.size(); ++j) {
            if (i == j) continue;
            for (const auto& pt : curves[j].points) {
                if (pt.q < curves[i].q_min() || pt.q > curves[i].q_max()) continue;
                double r = interp[i](pt.q) - pt.w;
                loss += pref * r * r;
                ++overlapping;
            }
        }
    }
    if (overlapping == 0)
        throw DiagnosticError("collapse_loss: no overlapping q windows between sizes");
    return loss;
}

struct CollapseFit {
    double gamma0 = 0.0, nu0 = 0.0;
    double d_gamma_plus = 0.0, d_gamma_minus = 0.0;
    double d_nu_plus = 0.0, d_nu_minus = 0.0;
    double loss_at_min = 0.0;
    double p_star_used = 0.0;

    double d_gamma() const { return std::max(d_gamma_plus, d_gamma_minus); }
    double d_nu() const { return std::max(d_nu_plus, d_nu_minus); }

    std::string to_text(const CollapseOptions& opt) const {
        std::ostringstream os;
        os << std::setprecision(12);
        os << "gamma0 " << gamma0 << '\n'
           << "nu0 " << nu0 << '\n'
           << "d_gamma_plus " << d_gamma_plus << '\n'
           << "d_gamma_minus " << d_gamma_minus << '\n'
           << "d_nu_plus " << d_nu_plus << '\n'
           << "d_nu_minus " << d_nu_minus << '\n'
           << "loss_at_min " << loss_at_min << '\n'
           << "p_star " << p_star_used << '\n'
           << "epsilon " << opt.epsilon << '\n'
           << "grid " << opt.gamma_min << ' ' << opt.gamma_max << ' ' << opt.nu_min << ' '
           << opt.nu_max << ' ' << opt.grid_step << '\n';
        return os.str();
    }
};

// Grid search over (gamma, nu) followed by normalized central-difference
// descent with backtracking. Error half-widths from the log-ratio curvature
// probe at the epsilon = 1% level; a zero minimum loss reports the grid
// resolution instead.
inline CollapseFit fit_exponents(const CollapseDataset& dataset,
                                 const CollapseOptions& opt = {}) {
    dataset.validate();
    auto loss = [&](double g, double n) { return collapse_loss(dataset, g, n, opt.smooth); };

    std::vector<double> gamma_grid, nu_grid;
    for (double g = opt.gamma_min; g <= opt.gamma_max + 1e-12; g += opt.grid_step)
        gamma_grid.push_back(g);
    for (double n = opt.nu_min; n <= opt.nu_max + 1e-12; n += opt.grid_step)
        nu_grid.push_back(n);

    std::size_t gi_best = 0, ni_best = 0;
    double best_r = 0.0;
    bool first = true;
    for (std::size_t gi = 0; gi < gamma_grid.size(); ++gi) {
        for (std::size_t ni = 0; ni < nu_grid.size(); ++ni) {
            double r = loss(gamma_grid[gi], nu_grid[ni]);
            if (first || r < best_r) {
                first = false;
                best_r = r;
                gi_best = gi;
                ni_best = ni;
            }
        }
    }
    if (gi_best == 0 || ni_best == 0 || gi_best + 1 == gamma_grid.size() ||
        ni_best + 1 == nu_grid.size())
        throw DiagnosticError("fit_exponents: minimum on grid boundary, widen the grid");
    double best_g = gamma_grid[gi_best];
    double best_n = nu_grid[ni_best];

    // local refinement
    double step = opt.grid_step / 2.0;
    double h = opt.descent_tol;
    for (int it = 0; it < opt.descent_max_iter && step >= opt.descent_tol; ++it) {
        double dg = (loss(best_g + h, best_n) - loss(best_g - h, best_n)) / (2.0 * h);
        double dn = (loss(best_g, best_n + h) - loss(best_g, best_n - h)) / (2.0 * h);
        double norm = std::hypot(dg, dn);
        if (norm < 1e-15) break;
        double g_try = best_g - step * dg / norm;
        double n_try = best_n - step * dn / norm;
        g_try = std::clamp(g_try, opt.gamma_min, opt.gamma_max);
        n_try = std::clamp(n_try, opt.nu_min, opt.nu_max);
        double r_try = loss(g_try, n_try);
        if (r_try < best_r) {
            best_g = g_try;
            best_n = n_try;
            best_r = r_try;
        } else {
            step /= 2.0;
        }
    }

    CollapseFit fit;
    fit.gamma0 = best_g;
    fit.nu0 = best_n;
    fit.loss_at_min = best_r;
    fit.p_star_used = dataset.p_star;

    // delta = eps * x0 * [2 ln(R(probe)/R0)]^{-1/2}; an exactly-zero or flat
    // minimum falls back to the grid resolution (the log-ratio is undefined).
    auto width = [&](double probe, double probe_loss) {
        if (best_r <= 0.0) return opt.grid_step;
        double ratio = probe_loss / best_r;
        if (ratio <= 1.0) return opt.grid_step;
        return probe / std::sqrt(2.0 * std::log(ratio));
    };
    double eg = opt.epsilon * best_g;
    double en = opt.epsilon * best_n;
    if (best_r <= 0.0) {
        fit.d_gamma_plus = fit.d_gamma_minus = fit.d_nu_plus = fit.d_nu_minus = opt.grid_step;
    } else {
        fit.d_gamma_plus = width(eg, loss(best_g + eg, best_n));
        fit.d_gamma_minus = width(eg, loss(best_g - eg, best_n));
        fit.d_nu_plus = width(en, loss(best_g, best_n + en));
        fit.d_nu_minus = width(en, loss(best_g, best_n - en));
    }
    return fit;
}

// ---- dataset file I/O: whitespace/comma table with header L p s_mean s_err

inline CollapseDataset read_collapse_dataset(std::istream& in, double p_star, double alpha) {
    CollapseDataset ds;
    ds.p_star = p_star;
    ds.alpha = alpha;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        for (char& c : line)
            if (c == ',') c = ' ';
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (!header_seen) {
            if (first != "L") throw ConfigError("collapse dataset: header 'L p s_mean s_err' required");
            header_seen = true;
            continue;
        }
        CollapsePoint pt;
        pt.L = std::stoi(first);
        if (!(ls >> pt.p >> pt.s_mean)) throw ConfigError("collapse dataset: bad row");
        if (!(ls >> pt.s_err)) pt.s_err = 0.0;
        ds.entries.push_back(pt);
    }
    ds.validate();
    return ds;
}

inline void write_collapse_dataset(std::ostream& out, const CollapseDataset& ds) {
    out << "L p s_mean s_err\n" << std::setprecision(12);
    for (const auto& e : ds.entries)
        out << e.L << ' ' << e.p << ' ' << e.s_mean << ' ' << e.s_err << '\n';
}

}  // namespace mipt
