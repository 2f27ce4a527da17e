#include "cdswipt/swipt.hpp"

#include "cdswipt/grassmann.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cdswipt {

MaxEHResult max_eh_precoders(const SystemConfig& cfg, const ChannelSet& ch)
{
    bool any_eh = false;
    for (int k = 0; k < cfg.K; ++k)
        any_eh = any_eh || cfg.rho_bar(k) > 0.0;
    if (!any_eh)
        throw Error(Errc::AllPowerToID, "every receiver routes all power to decoding");

    const StackedChannel st = stack_channels(cfg, ch);
    MaxEHResult out;
    for (int j = 0; j < cfg.K; ++j) {
        EigenResult eig = herm_eig(st.gram[j]);
        out.max_energy += cfg.zeta * cfg.per_stream_power(j) * eig.values.head(cfg.d).sum();
        out.precoders.push_back(leading_columns(eig.vectors, cfg.d));
        out.eigenvalues.push_back(std::move(eig.values));
    }
    return out;
}

std::vector<double> z_eh(const PrecoderSet& ia, const MaxEHResult& eh)
{
    if (ia.size() != eh.precoders.size())
        throw Error(Errc::DimensionError, "precoder sets differ in size");
    std::vector<double> out;
    out.reserve(ia.size());
    for (std::size_t j = 0; j < ia.size(); ++j)
        out.push_back(chordal_distance_sq(ia[j], eh.precoders[j]));
    return out;
}

double z_bar(const SystemConfig& cfg, double c, double power, int k)
{
    if (k == 1)
        throw Error(Errc::DegenerateK, "single-user system has no interference to trade");
    if (!(c > 1.0) || !(power > 0.0))
        throw Error(Errc::InvalidArgument, "z_bar needs c > 1 and P > 0");
    const double m = cfg.M;
    const double d = cfg.d;
    const double md = m / (d * (m - d));
    return (c - 1.0) / (md * (k - 1)) * (sigma_id2(cfg, 0) / power);
}

RVector clipped_renormalize(RVector q, double total)
{
    const Index d = q.size();
    std::vector<bool> fixed(static_cast<std::size_t>(d), false);
    for (Index pass = 0; pass <= d; ++pass) {
        double remaining = total;
        double free_sum = 0.0;
        Index free_count = 0;
        for (Index i = 0; i < d; ++i) {
            if (fixed[i])
                remaining -= 1.0;
            else {
                free_sum += q(i);
                ++free_count;
            }
        }
        if (free_count == 0)
            break;
        remaining = std::max(remaining, 0.0);
        for (Index i = 0; i < d; ++i) {
            if (fixed[i])
                continue;
            q(i) = free_sum > 0.0 ? q(i) * remaining / free_sum : remaining / free_count;
        }
        bool clipped = false;
        for (Index i = 0; i < d; ++i)
            if (!fixed[i] && q(i) > 1.0) {
                q(i) = 1.0;
                fixed[i] = true;
                clipped = true;
            }
        if (!clipped)
            break;
    }
    return q;
}

namespace {

void check_z(const std::vector<double>& z, int users)
{
    if (static_cast<int>(z.size()) != users)
        throw Error(Errc::DimensionError, "need one target distance per user");
    for (double v : z)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw Error(Errc::BadZ, "target distance must be a finite non-negative value");
}

// Column-normalizes b; zero columns are replaced by the matching column of
// `fallback` and, failing that, completed orthonormally against the rest.
CMatrix normalize_columns(const CMatrix& b, const CMatrix& fallback)
{
    const Index d = b.cols();
    CMatrix out(b.rows(), d);
    std::vector<Index> empty;
    for (Index i = 0; i < d; ++i) {
        double n = b.col(i).norm();
        if (n > 1e-300) {
            out.col(i) = b.col(i) / n;
            continue;
        }
        n = fallback.col(i).norm();
        if (n > 1e-300) {
            out.col(i) = fallback.col(i) / n;
            continue;
        }
        out.col(i).setZero();
        empty.push_back(i);
    }
    if (!empty.empty()) {
        const CMatrix full = Eigen::HouseholderQR<CMatrix>(out).householderQ() * CMatrix::Identity(b.rows(), b.rows());
        for (std::size_t n = 0; n < empty.size(); ++n)
            out.col(empty[n]) = full.col(b.rows() - 1 - static_cast<Index>(n));
    }
    return out;
}

// U·Wᴴ from the SVD of a square matrix; defined for singular input too.
CMatrix nearest_unitary(const CMatrix& a)
{
    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

// Per-user geometry shared by both balanced variants and the energy bounds.
struct UserFrame {
    OrthonormalMatrix null_base;
    OrthonormalMatrix S;
    CMatrix A; // Vᴴ G V
    CMatrix F; // Sᴴ V_nullᴴ G V_null S
    CMatrix C; // Vᴴ G V_null S
};

UserFrame user_frame(const CMatrix& gram, const OrthonormalMatrix& v)
{
    UserFrame f;
    f.null_base = null_space(v);
    const CMatrix& vn = f.null_base.mat();
    // Householder Q stays orthonormal even if Vnᴴ G V loses rank.
    f.S = qr_positive(vn.adjoint() * gram * v.mat()).q;
    const CMatrix vns = vn * f.S.mat();
    f.A = v.mat().adjoint() * gram * v.mat();
    f.F = vns.adjoint() * gram * vns;
    f.C = v.mat().adjoint() * gram * vns;
    return f;
}

RVector complement(const RVector& sigma_z)
{
    return (1.0 - sigma_z.array().square()).max(0.0).sqrt().matrix();
}

// Column-separable energy tr(VᴴGV) of V = V_ia X Σ_Y + V_null S Σ_Z.
double frame_energy(const UserFrame& f, const CMatrix& x, const RVector& sy, const RVector& sz)
{
    const CMatrix a = x.adjoint() * f.A * x;
    const CMatrix c = x.adjoint() * f.C;
    double e = 0.0;
    for (Index i = 0; i < sy.size(); ++i)
        e += sy(i) * sy(i) * a(i, i).real() + sz(i) * sz(i) * f.F(i, i).real()
           + 2.0 * sy(i) * sz(i) * c(i, i).real();
    return e;
}

double cross_term(const UserFrame& f, const CMatrix& x_tilde, const RVector& sy, const RVector& sz)
{
    const CMatrix c = x_tilde.adjoint() * f.C;
    double t = 0.0;
    for (Index i = 0; i < sy.size(); ++i)
        t += sy(i) * sz(i) * c(i, i).real();
    return t;
}

// Column energies e_i(t) = a_i(1 − t) + f_i t + 2 g_i √(t(1 − t)) with t = σ_z,i²
// are concave for g_i ≥ 0; maximize Σ e_i subject to Σ t_i = z, 0 ≤ t_i ≤ 1
// by bisection on the multiplier of the sum constraint.
RVector exact_z_step(const UserFrame& f, const CMatrix& x, double z)
{
    const Index d = x.cols();
    const CMatrix a = x.adjoint() * f.A * x;
    const CMatrix c = x.adjoint() * f.C;
    RVector slope(d), g(d);
    for (Index i = 0; i < d; ++i) {
        slope(i) = f.F(i, i).real() - a(i, i).real();
        g(i) = std::max(c(i, i).real(), 0.0);
    }
    if (z <= 0.0)
        return RVector::Zero(d);
    if (z >= static_cast<double>(d))
        return RVector::Ones(d);

    // Solves e_i'(t) = λ; e_i' decreases from +∞ to −∞ when g_i > 0.
    auto column_t = [&](Index i, double lambda) {
        if (g(i) <= 0.0)
            return slope(i) > lambda ? 1.0 : 0.0;
        double lo = 0.0;
        double hi = 1.0;
        for (int it = 0; it < 80; ++it) {
            const double t = 0.5 * (lo + hi);
            const double deriv = slope(i) + g(i) * (1.0 - 2.0 * t) / std::sqrt(t * (1.0 - t));
            (deriv > lambda ? lo : hi) = t;
        }
        return 0.5 * (lo + hi);
    };
    auto total = [&](double lambda, RVector& t) {
        for (Index i = 0; i < d; ++i)
            t(i) = column_t(i, lambda);
        return t.sum();
    };

    const double scale = 1.0 + slope.cwiseAbs().maxCoeff() + g.maxCoeff();
    double lo = -scale;
    double hi = scale;
    RVector t(d);
    while (total(lo, t) < z)
        lo *= 2.0;
    while (total(hi, t) > z)
        hi *= 2.0;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (total(mid, t) > z ? lo : hi) = mid;
    }
    total(0.5 * (lo + hi), t);
    return clipped_renormalize(t, z);
}

BalancedResult start_result(int users)
{
    BalancedResult r;
    r.precoders.resize(static_cast<std::size_t>(users));
    r.per_user_z.assign(static_cast<std::size_t>(users), 0.0);
    r.used_max_eh.assign(static_cast<std::size_t>(users), false);
    r.objective_trace.resize(static_cast<std::size_t>(users));
    r.iterates.resize(static_cast<std::size_t>(users));
    r.cross_trace.assign(static_cast<std::size_t>(users), 0.0);
    r.iterations.assign(static_cast<std::size_t>(users), 0);
    r.converged.assign(static_cast<std::size_t>(users), false);
    r.components.resize(static_cast<std::size_t>(users));
    return r;
}

void take_max_eh(BalancedResult& r, int j, const MaxEHResult& eh, const CMatrix& gram)
{
    r.precoders[j] = eh.precoders[j];
    r.per_user_z[j] = r.z_eh[j];
    r.used_max_eh[j] = true;
    r.converged[j] = true;
    const CMatrix& v = eh.precoders[j].mat();
    r.objective_trace[j] = {(v.adjoint() * gram * v).trace().real()};
}

} // namespace

BalancedResult balanced_precoders_iterative(const SystemConfig& cfg, const ChannelSet& ch,
                                            const PrecoderSet& ia, const MaxEHResult& eh,
                                            const std::vector<double>& z, BalancedOptions opts)
{
    check_z(z, cfg.K);
    const StackedChannel st = stack_channels(cfg, ch);
    BalancedResult r = start_result(cfg.K);
    r.z_eh = cdswipt::z_eh(ia, eh);
    const Index d = cfg.d;

    for (int j = 0; j < cfg.K; ++j) {
        const CMatrix& gram = st.gram[j];
        if (z[j] > r.z_eh[j]) {
            take_max_eh(r, j, eh, gram);
            continue;
        }
        const UserFrame f = user_frame(gram, ia[j]);
        const double zj = std::min(z[j], static_cast<double>(d));

        RVector sz = RVector::Constant(d, std::sqrt(zj / static_cast<double>(d)));
        RVector sy = complement(sz);
        auto x_step = [&](const RVector& y, const RVector& zz) {
            CMatrix b = f.C;
            for (Index i = 0; i < d; ++i)
                b.col(i) *= zz(i) * y(i);
            return normalize_columns(b, f.C);
        };
        CMatrix x_tilde = x_step(sy, sz);
        CMatrix x = nearest_unitary(x_tilde);
        double energy = frame_energy(f, x, sy, sz);
        r.objective_trace[j].push_back(energy);
        if (opts.keep_iterates)
            r.iterates[j].push_back(displace_with_null(ia[j], f.null_base, x, f.S, sz));

        for (int it = 0; it < opts.max_iters; ++it) {
            RVector sz_next, sy_next;
            CMatrix x_tilde_next, x_next;
            double next = energy;
            bool accepted = false;
            auto try_z = [&](const RVector& z2) {
                sz_next = z2.array().max(0.0).sqrt().matrix();
                sy_next = complement(sz_next);
                x_tilde_next = x_step(sy_next, sz_next);
                x_next = nearest_unitary(x_tilde_next);
                next = frame_energy(f, x_next, sy_next, sz_next);
                return next >= energy;
            };
            if (opts.z_step == ZStep::Exact) {
                accepted = try_z(exact_z_step(f, x, zj));
            } else {
                // Cross-term candidate, then a backtracking blend toward it so
                // that the energy never drops.
                const CMatrix yxc = sy.cast<Complex>().asDiagonal() * (x_tilde.adjoint() * f.C);
                RVector c(d);
                for (Index i = 0; i < d; ++i)
                    c(i) = std::max(yxc(i, i).real(), 0.0);
                const double cn2 = c.squaredNorm();
                if (!(cn2 > 0.0)) {
                    r.converged[j] = true;
                    break;
                }
                const RVector cand = clipped_renormalize((zj * c.array().square() / cn2).matrix(), zj);
                double alpha = 1.0;
                for (int tries = 0; tries < 30 && !accepted; ++tries, alpha *= 0.5)
                    accepted = try_z(((1.0 - alpha) * sz.array().square() + alpha * cand.array()).matrix());
            }
            r.iterations[j] = it + 1;
            if (!accepted) {
                // Nothing better than the current point: the iterate repeats.
                r.objective_trace[j].push_back(energy);
                if (opts.keep_iterates)
                    r.iterates[j].push_back(r.iterates[j].back());
                r.converged[j] = true;
                break;
            }

            const double gain = next - energy;
            sz = sz_next;
            sy = sy_next;
            x_tilde = x_tilde_next;
            x = x_next;
            energy = next;
            r.objective_trace[j].push_back(energy);
            if (opts.keep_iterates)
                r.iterates[j].push_back(displace_with_null(ia[j], f.null_base, x, f.S, sz));
            if (gain < opts.tol) {
                r.converged[j] = true;
                break;
            }
        }

        r.precoders[j] = OrthonormalMatrix::adopt(displace_with_null(ia[j], f.null_base, x, f.S, sz));
        r.per_user_z[j] = chordal_distance_sq(ia[j], r.precoders[j]);
        r.cross_trace[j] = cross_term(f, x_tilde, sy, sz);
        r.components[j] = BalancedComponents{OrthonormalMatrix::adopt(x), sy, f.S, sz};
    }
    return r;
}

BalancedResult balanced_precoders_iterative(const SystemConfig& cfg, const ChannelSet& ch,
                                            const PrecoderSet& ia, const std::vector<double>& z,
                                            BalancedOptions opts)
{
    return balanced_precoders_iterative(cfg, ch, ia, max_eh_precoders(cfg, ch), z, opts);
}

BalancedResult balanced_precoders_noniterative(const SystemConfig& cfg, const ChannelSet& ch,
                                               const PrecoderSet& ia, const MaxEHResult& eh,
                                               const std::vector<double>& z)
{
    check_z(z, cfg.K);
    const StackedChannel st = stack_channels(cfg, ch);
    BalancedResult r = start_result(cfg.K);
    r.z_eh = cdswipt::z_eh(ia, eh);
    const Index d = cfg.d;

    for (int j = 0; j < cfg.K; ++j) {
        const CMatrix& gram = st.gram[j];
        if (z[j] > r.z_eh[j]) {
            take_max_eh(r, j, eh, gram);
            continue;
        }
        const UserFrame f = user_frame(gram, ia[j]);
        const double zj = std::min(z[j], static_cast<double>(d));

        RVector q(d);
        for (Index i = 0; i < d; ++i)
            q(i) = std::max(f.F(i, i).real(), 0.0);
        const RVector sz = clipped_renormalize(q, zj).array().sqrt().matrix();
        const RVector sy = complement(sz);

        // B̄ = VᴴGV·Y⁻¹ with the pseudo-inverse on zero entries of Σ_Y.
        CMatrix b = f.A;
        for (Index i = 0; i < d; ++i)
            b.col(i) *= sy(i) > 0.0 ? 1.0 / sy(i) : 0.0;
        const CMatrix x_tilde = normalize_columns(b, f.A);
        const CMatrix x = nearest_unitary(x_tilde);

        r.precoders[j] = OrthonormalMatrix::adopt(displace_with_null(ia[j], f.null_base, x, f.S, sz));
        r.per_user_z[j] = chordal_distance_sq(ia[j], r.precoders[j]);
        r.objective_trace[j] = {frame_energy(f, x, sy, sz)};
        r.converged[j] = true;
        r.cross_trace[j] = cross_term(f, x_tilde, sy, sz);
        r.components[j] = BalancedComponents{OrthonormalMatrix::adopt(x), sy, f.S, sz};
    }
    return r;
}

BalancedResult balanced_precoders_noniterative(const SystemConfig& cfg, const ChannelSet& ch,
                                               const PrecoderSet& ia, const std::vector<double>& z)
{
    return balanced_precoders_noniterative(cfg, ch, ia, max_eh_precoders(cfg, ch), z);
}

EnergyBounds energy_bounds(const SystemConfig& cfg, const ChannelSet& ch, const PrecoderSet& ia,
                           const MaxEHResult& eh, const std::vector<double>& z)
{
    check_z(z, cfg.K);
    const StackedChannel st = stack_channels(cfg, ch);
    const double d = cfg.d;
    EnergyBounds b;
    for (int j = 0; j < cfg.K; ++j) {
        const UserFrame f = user_frame(st.gram[j], ia[j]);
        const double zj = std::min(z[j], d);
        b.lower += cfg.zeta * cfg.per_stream_power(j)
                 * (f.A.trace().real() * (1.0 - zj / d) + f.F.trace().real() * (zj / d));
        b.upper += cfg.zeta * cfg.P[j] * eh.eigenvalues[j](0);
    }
    return b;
}

} // namespace cdswipt
