#pragma once

// Adaptive Runge-Kutta-Fehlberg 7(8) over extended-precision scalars.
// The tableau entries are exact rationals, so the scheme loses nothing at
// high working precision; the 8th-order solution is propagated and the
// embedded 7th-order difference drives the step control. Local error is
// controlled per unit of the independent variable: a step of size h is
// accepted when ||err|| <= tol*|h|.

#include <array>
#include <functional>
#include <vector>

#include "kgsplit/errors.hpp"
#include "kgsplit/precision.hpp"

namespace kgsplit {

namespace rkf78 {

struct Rat {
    long num, den;
};

inline constexpr int kStages = 13;

// nodes
inline constexpr std::array<Rat, kStages> kNodes = {{{0, 1},
                                                     {2, 27},
                                                     {1, 9},
                                                     {1, 6},
                                                     {5, 12},
                                                     {1, 2},
                                                     {5, 6},
                                                     {1, 6},
                                                     {2, 3},
                                                     {1, 3},
                                                     {1, 1},
                                                     {0, 1},
                                                     {1, 1}}};

// stage matrix, row i lists a[i][0..i-1]
inline constexpr std::array<std::array<Rat, 12>, kStages> kA = {{
    {{}},
    {{{2, 27}}},
    {{{1, 36}, {1, 12}}},
    {{{1, 24}, {0, 1}, {1, 8}}},
    {{{5, 12}, {0, 1}, {-25, 16}, {25, 16}}},
    {{{1, 20}, {0, 1}, {0, 1}, {1, 4}, {1, 5}}},
    {{{-25, 108}, {0, 1}, {0, 1}, {125, 108}, {-65, 27}, {125, 54}}},
    {{{31, 300}, {0, 1}, {0, 1}, {0, 1}, {61, 225}, {-2, 9}, {13, 900}}},
    {{{2, 1}, {0, 1}, {0, 1}, {-53, 6}, {704, 45}, {-107, 9}, {67, 90}, {3, 1}}},
    {{{-91, 108}, {0, 1}, {0, 1}, {23, 108}, {-976, 135}, {311, 54}, {-19, 60}, {17, 6}, {-1, 12}}},
    {{{2383, 4100}, {0, 1}, {0, 1}, {-341, 164}, {4496, 1025}, {-301, 82}, {2133, 4100}, {45, 82}, {45, 164}, {18, 41}}},
    {{{3, 205}, {0, 1}, {0, 1}, {0, 1}, {0, 1}, {-6, 41}, {-3, 205}, {-3, 41}, {3, 41}, {6, 41}, {0, 1}}},
    {{{-1777, 4100}, {0, 1}, {0, 1}, {-341, 164}, {4496, 1025}, {-289, 82}, {2193, 4100}, {51, 82}, {33, 164}, {12, 41}, {0, 1}, {1, 1}}},
}};

// 8th-order weights (propagated)
inline constexpr std::array<Rat, kStages> kB8 = {{{0, 1},
                                                  {0, 1},
                                                  {0, 1},
                                                  {0, 1},
                                                  {0, 1},
                                                  {34, 105},
                                                  {9, 35},
                                                  {9, 35},
                                                  {9, 280},
                                                  {9, 280},
                                                  {0, 1},
                                                  {41, 840},
                                                  {41, 840}}};

// err = y8 - y7 = (41/840) h (-k0 - k10 + k11 + k12)
inline constexpr std::array<int, 4> kErrStages = {0, 10, 11, 12};
inline constexpr std::array<int, 4> kErrSigns = {-1, -1, 1, 1};

} // namespace rkf78

template <class S>
class Rkf78 {
  public:
    using Func = std::function<void(const XReal& t, const std::vector<S>& y, std::vector<S>& dy)>;
    // return false to stop after the current accepted step
    using Observer = std::function<bool(const XReal& t_prev, const XReal& t, const Rkf78& self)>;

    Rkf78(const PrecisionContext& ctx, int dim, Func f)
        : ctx_(ctx), dim_(dim), f_(std::move(f)), t_(ctx), tprev_(ctx), h_last_(ctx), tol_(ctx, 1e-12),
          h_min_(ctx, 0.0), h_max_(ctx, 1.0), err41_(ctx.real(41, 840)), acc_err_(ctx) {
        for (int s = 0; s < rkf78::kStages; ++s) {
            node_[s] = ctx.real(rkf78::kNodes[s].num, rkf78::kNodes[s].den);
            for (int j = 0; j < s; ++j) a_[s][j] = ctx.real(rkf78::kA[s][j].num, rkf78::kA[s][j].den);
            b8_[s] = ctx.real(rkf78::kB8[s].num, rkf78::kB8[s].den);
            k_[s].assign(dim_, S(ctx));
        }
        ytmp_.assign(dim_, S(ctx));
        ynew_.assign(dim_, S(ctx));
        yprev_.assign(dim_, S(ctx));
        y_.assign(dim_, S(ctx));
    }

    void set_tol(const XReal& tol) { tol_ = tol; }
    void set_h_limits(const XReal& h_min, const XReal& h_max) { h_min_ = h_min; h_max_ = h_max; }
    void set_state(const XReal& t, std::vector<S> y) {
        t_ = t;
        y_ = std::move(y);
        tprev_ = t_;
        yprev_ = y_;
    }

    const XReal& t() const { return t_; }
    const std::vector<S>& state() const { return y_; }
    const XReal& t_prev() const { return tprev_; }
    const std::vector<S>& state_prev() const { return yprev_; }
    long accepted_steps() const { return n_accepted_; }
    long rejected_steps() const { return n_rejected_; }
    // sum over accepted steps of the local error estimate (a cheap global
    // error proxy used for precision floors)
    const XReal& accumulated_error() const { return acc_err_; }

    // Advance to t_end with adaptive steps, clamping the last step to land
    // exactly on t_end. Observer runs after each accepted step and may stop
    // the integration early.
    void integrate_to(const XReal& t_end, const Observer& obs = {}) {
        if (t_end == t_) return;
        int dir = (t_end > t_) ? 1 : -1;
        XReal h = initial_step(t_end, dir);
        long guard = 0;
        while (t_ != t_end) {
            if (++guard > 200'000'000L) throw StiffnessError("rkf78: step count exploded");
            XReal span = t_end - t_;
            if (abs(h) >= abs(span)) h = span;
            XReal err(ctx_);
            stage_sweep(h, err);
            XReal budget = tol_ * abs(h);
            if (err <= budget) {
                tprev_ = t_;
                yprev_.swap(y_);
                y_ = ynew_;
                t_ += h;
                h_last_ = h;
                ++n_accepted_;
                acc_err_ += err;
                if (obs && !obs(tprev_, t_, *this)) return;
                h = next_step(h, err, budget, dir);
            } else {
                ++n_rejected_;
                h = next_step(h, err, budget, dir);
                if (!h_min_.is_zero() && abs(h) < h_min_)
                    throw StiffnessError("rkf78: step size underflow at t=" + t_.to_string(10));
            }
        }
    }

    // Fixed-grid integration: n_steps equal steps to t_end (matched-grid runs).
    void integrate_fixed(const XReal& t_end, long n_steps, const Observer& obs = {}) {
        XReal h = (t_end - t_) / n_steps;
        for (long i = 0; i < n_steps; ++i) {
            XReal err(ctx_);
            stage_sweep(h, err);
            tprev_ = t_;
            yprev_.swap(y_);
            y_ = ynew_;
            t_ = (i + 1 == n_steps) ? t_end : t_ + h;
            h_last_ = h;
            ++n_accepted_;
            acc_err_ += err;
            if (obs && !obs(tprev_, t_, *this)) return;
        }
    }

    // Solution at a point inside the last accepted step, via one fixed RK
    // step of size (t_q - t_prev) from the stored pre-step state: dense
    // output of the same order as the integrator itself.
    std::vector<S> eval_within_last_step(const XReal& t_q) const {
        Rkf78 probe(ctx_, dim_, f_);
        probe.set_state(tprev_, yprev_);
        XReal h = t_q - tprev_;
        if (h.is_zero()) return yprev_;
        XReal err(ctx_);
        probe.stage_sweep(h, err);
        return probe.ynew_;
    }

  private:
    XReal initial_step(const XReal& t_end, int dir) {
        XReal h = h_max_.is_zero() ? abs(t_end - t_) : h_max_;
        XReal tenth = ctx_.real(1, 10);
        h = min(h, abs(t_end - t_) * tenth);
        if (h.is_zero()) h = abs(t_end - t_);
        return dir > 0 ? h : -h;
    }

    XReal next_step(const XReal& h, const XReal& err, const XReal& budget, int dir) const {
        XReal fac(ctx_, 5.0);
        if (!err.is_zero()) {
            XReal ratio = budget / err;
            fac = ctx_.real(9, 10) * nth_root(ratio, 7);
            fac = min(fac, ctx_.real(5.0));
            fac = max(fac, ctx_.real(1, 5));
        }
        XReal hn = abs(h) * fac;
        if (!h_max_.is_zero()) hn = min(hn, h_max_);
        return dir > 0 ? hn : -hn;
    }

    // One RKF78 sweep from (t_, y_) with step h: fills ynew_ (8th order) and
    // the embedded error estimate.
    void stage_sweep(const XReal& h, XReal& err_out) {
        f_(t_, y_, k_[0]);
        for (int s = 1; s < rkf78::kStages; ++s) {
            for (int i = 0; i < dim_; ++i) {
                S acc(ctx_);
                for (int j = 0; j < s; ++j) {
                    if (rkf78::kA[s][j].num == 0) continue;
                    add_mul_real(acc, k_[j][i], a_[s][j]);
                }
                ytmp_[i] = y_[i] + acc * h;
            }
            XReal ts = t_ + node_[s] * h;
            f_(ts, ytmp_, k_[s]);
        }
        XReal err(ctx_);
        for (int i = 0; i < dim_; ++i) {
            S acc(ctx_);
            for (int s = 0; s < rkf78::kStages; ++s) {
                if (rkf78::kB8[s].num == 0) continue;
                add_mul_real(acc, k_[s][i], b8_[s]);
            }
            ynew_[i] = y_[i] + acc * h;
            S e(ctx_);
            e += k_[0][i];
            e += k_[10][i];
            e -= k_[11][i];
            e -= k_[12][i];
            XReal mag = abs_norm_local(e) * err41_ * abs(h);
            if (mag > err) err = mag;
        }
        err_out = err;
    }

    static XReal abs_norm_local(const XReal& x) { return abs(x); }
    static XReal abs_norm_local(const XComplex& z) { return abs(z); }
    static void add_mul_real(XReal& acc, const XReal& a, const XReal& r) { acc.add_mul(a, r); }
    static void add_mul_real(XComplex& acc, const XComplex& a, const XReal& r) {
        acc.re.add_mul(a.re, r);
        acc.im.add_mul(a.im, r);
    }

    PrecisionContext ctx_;
    int dim_;
    Func f_;
    XReal t_, tprev_, h_last_, tol_, h_min_, h_max_, err41_;
    XReal acc_err_{};
    std::vector<S> y_, yprev_, ytmp_, ynew_;
    std::array<std::vector<S>, rkf78::kStages> k_;
    std::array<XReal, rkf78::kStages> node_;
    std::array<std::array<XReal, 12>, rkf78::kStages> a_;
    std::array<XReal, rkf78::kStages> b8_;
    long n_accepted_ = 0;
    long n_rejected_ = 0;
};

} // namespace kgsplit
