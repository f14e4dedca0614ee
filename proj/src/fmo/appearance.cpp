#include "fmo/appearance.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fmo {

int sphere_n_lat_for(double r, const DeblurConfig& cfg) {
    if (cfg.sphere_n_lat > 0) return cfg.sphere_n_lat;
    return std::max(16, int(std::ceil(2.0 * r)));
}

Rect deblur_window(const PixelPath& path, double r, int frame_w, int frame_h) {
    Rect b{path.pixels.front().x, path.pixels.front().y, path.pixels.front().x + 1,
           path.pixels.front().y + 1};
    for (const Pixel& p : path.pixels) {
        b.x0 = std::min(b.x0, p.x);
        b.y0 = std::min(b.y0, p.y);
        b.x1 = std::max(b.x1, p.x + 1);
        b.y1 = std::max(b.y1, p.y + 1);
    }
    return b.grown(int(std::ceil(2.0 * r))).clipped({0, 0, frame_w, frame_h});
}

namespace {

// Forward-difference neighbor structure with per-cell metric weights: the
// raster grid for flat appearances, the lat-long grid (longitude wrap,
// cos(lat) metric) for sphere textures.
struct TvGrid {
    std::vector<int> nx, ny;      // neighbor cell or -1
    std::vector<double> metric;   // weight multiplying the gradient magnitude

    static TvGrid flat(const BlurOperator& op) {
        TvGrid g;
        int n = op.cells();
        g.nx.assign(n, -1);
        g.ny.assign(n, -1);
        g.metric.assign(n, 1.0);
        for (int y = 0; y < op.side(); ++y) {
            for (int x = 0; x < op.side(); ++x) {
                int c = op.cell_of(x, y);
                if (c < 0) continue;
                if (x + 1 < op.side()) g.nx[c] = op.cell_of(x + 1, y);
                if (y + 1 < op.side()) g.ny[c] = op.cell_of(x, y + 1);
            }
        }
        return g;
    }

    static TvGrid sphere(int n_lat) {
        TvGrid g;
        int n_lon = 2 * n_lat, n = n_lat * n_lon;
        g.nx.assign(n, -1);
        g.ny.assign(n, -1);
        g.metric.assign(n, 1.0);
        for (int i = 0; i < n_lat; ++i) {
            double lat = -M_PI_2 + (i + 0.5) * M_PI / n_lat;
            for (int j = 0; j < n_lon; ++j) {
                int c = i * n_lon + j;
                g.metric[c] = std::cos(lat);
                g.nx[c] = i * n_lon + (j + 1) % n_lon;             // longitude, wraps
                if (i + 1 < n_lat) g.ny[c] = (i + 1) * n_lon + j;  // latitude
            }
        }
        return g;
    }
};

double huber(double t, double delta) {
    t = std::abs(t);
    return t <= delta ? t * t / (2 * delta) + delta / 2 : t;
}

struct ChannelState {
    std::vector<double> x;        // current appearance estimate
    std::vector<double> target;   // T = I - (1-alpha)B over the window
    std::vector<double> wd;       // data weights
    std::vector<double> wt;       // TV weights (alpha and metric folded in)
};

}  // namespace

AppearanceResult estimate_appearance(const Frame& frame, const Frame& background,
                                     const BlurOperator& op, const DeblurConfig& cfg) {
    const Rect win = op.window();
    if (win.x0 < 0 || win.y0 < 0 || win.x1 > frame.width() || win.y1 > frame.height())
        throw std::invalid_argument("estimate_appearance: window exceeds the frame");
    if (!frame.same_size(background))
        throw std::invalid_argument("estimate_appearance: frame/background size mismatch");

    const int npix = win.width() * win.height();
    const int ncell = op.cells();
    const TvGrid tv = op.spherical() ? TvGrid::sphere(op.n_lat()) : TvGrid::flat(op);
    const double delta = cfg.irls_delta;

    ChannelState ch[3];
    for (int c = 0; c < 3; ++c) {
        ch[c].target.resize(npix);
        double at_sum = 0.0, aa_sum = 0.0;
        for (int y = win.y0; y < win.y1; ++y) {
            for (int x = win.x0; x < win.x1; ++x) {
                int pix = (y - win.y0) * win.width() + (x - win.x0);
                double a = op.alpha().data()[pix];
                double i = c == 0 ? frame.at(x, y).r : c == 1 ? frame.at(x, y).g : frame.at(x, y).b;
                double b = c == 0 ? background.at(x, y).r
                                  : c == 1 ? background.at(x, y).g : background.at(x, y).b;
                ch[c].target[pix] = i - (1.0 - a) * b;
                at_sum += a * ch[c].target[pix];
                aa_sum += a * a;
            }
        }
        // Start from the best constant explanation (the object's mean color);
        // texels the operator never observes keep this value up to the
        // regularizer's smoothing.
        double c0 = aa_sum > 1e-12 ? std::clamp(at_sum / aa_sum, 0.0, 1.0) : 0.5;
        ch[c].x.assign(ncell, c0);
    }

    std::vector<double> hx(npix), res(npix), b_rhs(ncell), ax(ncell), cg_r(ncell), cg_p(ncell),
        cg_ap(ncell);

    auto tv_terms = [&](const std::vector<double>& x, int i, double& dx, double& dy) {
        dx = tv.nx[i] >= 0 ? x[tv.nx[i]] - x[i] : 0.0;
        dy = tv.ny[i] >= 0 ? x[tv.ny[i]] - x[i] : 0.0;
    };

    // A x = H^T Wd H x + D^T Wt D x for the current channel weights.
    auto apply_A = [&](const ChannelState& s, const std::vector<double>& x,
                       std::vector<double>& out) {
        op.apply(x, hx);
        for (int p = 0; p < npix; ++p) hx[p] *= s.wd[p];
        op.apply_adjoint(hx, out);
        for (int i = 0; i < ncell; ++i) {
            double w = s.wt[i];
            if (w <= 0.0) continue;
            double dx, dy;
            tv_terms(x, i, dx, dy);
            if (tv.nx[i] >= 0) {
                out[i] -= w * dx;
                out[tv.nx[i]] += w * dx;
            }
            if (tv.ny[i] >= 0) {
                out[i] -= w * dy;
                out[tv.ny[i]] += w * dy;
            }
        }
    };

    auto smoothed_objective = [&]() {
        double obj = 0.0;
        for (int c = 0; c < 3; ++c) {
            op.apply(ch[c].x, hx);
            for (int p = 0; p < npix; ++p) obj += huber(hx[p] - ch[c].target[p], delta);
            for (int i = 0; i < ncell; ++i) {
                double dx, dy;
                tv_terms(ch[c].x, i, dx, dy);
                obj += cfg.alpha * tv.metric[i] * huber(std::sqrt(dx * dx + dy * dy), delta);
            }
        }
        return obj;
    };

    AppearanceResult result;
    result.spherical = op.spherical();

    for (int iter = 0; iter < cfg.irls_iters; ++iter) {
        for (int c = 0; c < 3; ++c) {
            ChannelState& s = ch[c];
            // Reweight from the current residuals.
            op.apply(s.x, res);
            s.wd.resize(npix);
            for (int p = 0; p < npix; ++p)
                s.wd[p] = 1.0 / std::max(std::abs(res[p] - s.target[p]), delta);
            s.wt.resize(ncell);
            for (int i = 0; i < ncell; ++i) {
                double dx, dy;
                tv_terms(s.x, i, dx, dy);
                s.wt[i] =
                    cfg.alpha * tv.metric[i] / std::max(std::sqrt(dx * dx + dy * dy), delta);
            }

            // RHS and warm-started CG on the weighted normal equations.
            for (int p = 0; p < npix; ++p) hx[p] = s.wd[p] * s.target[p];
            op.apply_adjoint(hx, b_rhs);

            apply_A(s, s.x, ax);
            double bnorm = 0.0;
            for (int i = 0; i < ncell; ++i) {
                cg_r[i] = b_rhs[i] - ax[i];
                cg_p[i] = cg_r[i];
                bnorm += b_rhs[i] * b_rhs[i];
            }
            double rs = 0.0;
            for (int i = 0; i < ncell; ++i) rs += cg_r[i] * cg_r[i];
            const double stop = cfg.cg_tol * cfg.cg_tol * std::max(bnorm, 1e-300);
            for (int k = 0; k < cfg.cg_iters && rs > stop; ++k) {
                apply_A(s, cg_p, cg_ap);
                double pap = 0.0;
                for (int i = 0; i < ncell; ++i) pap += cg_p[i] * cg_ap[i];
                if (pap <= 0.0) break;
                double step = rs / pap;
                double rs_new = 0.0;
                for (int i = 0; i < ncell; ++i) {
                    s.x[i] += step * cg_p[i];
                    cg_r[i] -= step * cg_ap[i];
                    rs_new += cg_r[i] * cg_r[i];
                }
                double beta = rs_new / rs;
                rs = rs_new;
                for (int i = 0; i < ncell; ++i) cg_p[i] = cg_r[i] + beta * cg_p[i];
            }

            // Box projection.
            for (double& v : s.x) {
                if (!std::isfinite(v)) throw std::runtime_error("estimate_appearance: diverged");
                v = std::clamp(v, 0.0, 1.0);
            }
        }
        result.objective_history.push_back(smoothed_objective());
    }

    // Unsmoothed objective at the solution.
    double obj = 0.0;
    for (int c = 0; c < 3; ++c) {
        op.apply(ch[c].x, res);
        for (int p = 0; p < npix; ++p) obj += std::abs(res[p] - ch[c].target[p]);
        for (int i = 0; i < ncell; ++i) {
            double dx, dy;
            tv_terms(ch[c].x, i, dx, dy);
            obj += cfg.alpha * tv.metric[i] * std::sqrt(dx * dx + dy * dy);
        }
    }
    result.objective = obj;

    // Pack the solution and the visibility counts.
    std::vector<int> vis = op.visibility();
    if (op.spherical()) {
        result.sphere.n_lat = op.n_lat();
        result.sphere.n_lon = op.n_lon();
        result.sphere.r = op.radius();
        result.sphere.rgb.assign(size_t(ncell) * 3, 0.0);
        for (int i = 0; i < ncell; ++i)
            for (int c = 0; c < 3; ++c) result.sphere.rgb[size_t(i) * 3 + c] = ch[c].x[i];
        result.visibility = GrayImage(op.n_lon(), op.n_lat());
        for (int i = 0; i < ncell; ++i)
            result.visibility.data()[i] = double(vis[i]);
    } else {
        result.flat.r = op.radius();
        result.flat.side = op.side();
        result.flat.center = op.side() / 2;
        result.flat.rgb.assign(size_t(op.side()) * op.side() * 3, 0.0);
        result.visibility = GrayImage(op.side(), op.side());
        for (int y = 0; y < op.side(); ++y) {
            for (int x = 0; x < op.side(); ++x) {
                int cell = op.cell_of(x, y);
                if (cell < 0) continue;
                result.flat.set(x, y, {ch[0].x[cell], ch[1].x[cell], ch[2].x[cell]});
                result.visibility.at(x, y) = double(vis[cell]);
            }
        }
    }
    return result;
}

std::vector<Vec3> axis_grid(double spacing_deg) {
    std::vector<Vec3> axes;
    axes.push_back({0, 0, 1});
    for (double polar = spacing_deg; polar <= 90.0 + 1e-9; polar += spacing_deg) {
        double p = polar * M_PI / 180.0;
        int n = std::max(1, int(std::lround(360.0 * std::sin(p) / spacing_deg)));
        for (int k = 0; k < n; ++k) {
            double az = 2 * M_PI * k / n;
            axes.push_back({std::sin(p) * std::cos(az), std::sin(p) * std::sin(az), std::cos(p)});
        }
    }
    return axes;
}

RotationSearchResult search_rotation(const Frame& frame, const Frame& background,
                                     const PixelPath& path, double r, const DeblurConfig& cfg) {
    const Rect win = deblur_window(path, r, frame.width(), frame.height());
    const int n_lat = sphere_n_lat_for(r, cfg);

    DeblurConfig quick = cfg;
    quick.irls_iters = cfg.search_irls_iters;
    quick.cg_iters = cfg.search_cg_iters;

    std::vector<Vec3> axes = axis_grid(cfg.axis_spacing_deg);
    const int nsteps = std::max(2, cfg.omega_steps);

    RotationSearchResult out;
    double best = std::numeric_limits<double>::infinity();
    RotationParams best_params;

    for (int wi = 0; wi < nsteps; ++wi) {
        double omega = M_PI * wi / (nsteps - 1);
        // omega = 0 is axis-independent: evaluate one representative cell.
        size_t n_axes = (wi == 0) ? 1 : axes.size();
        for (size_t ai = 0; ai < n_axes; ++ai) {
            RotationParams params{axes[ai], omega};
            BlurOperator op = BlurOperator::rotate_path(path, r, win, params, n_lat,
                                                        cfg.bilinear_texture);
            AppearanceResult res = estimate_appearance(frame, background, op, quick);
            out.grid_objectives.push_back(res.objective);
            if (res.objective < best) {
                best = res.objective;
                best_params = params;
            }
        }
    }

    BlurOperator op =
        BlurOperator::rotate_path(path, r, win, best_params, n_lat, cfg.bilinear_texture);
    AppearanceResult res = estimate_appearance(frame, background, op, cfg);
    out.params = best_params;
    out.texture = std::move(res.sphere);
    out.objective = res.objective;
    out.visibility = std::move(res.visibility);
    return out;
}

}  // namespace fmo
