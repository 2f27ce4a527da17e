#include "cdswipt/ia.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cdswipt {

double interference_leakage(const ChannelSet& ch, const PrecoderSet& v, const DecoderSet& u)
{
    const int K = ch.users();
    double acc = 0.0;
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < K; ++j)
            if (j != k)
                acc += (u[k].mat().adjoint() * ch(k, j) * v[j].mat()).squaredNorm();
    return acc;
}

double alignment_residual(const ChannelSet& ch, const PrecoderSet& v, const DecoderSet& u)
{
    const int K = ch.users();
    double worst = 0.0;
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < K; ++j)
            if (j != k) {
                const double num = (u[k].mat().adjoint() * ch(k, j) * v[j].mat()).norm();
                worst = std::max(worst, num / ch(k, j).norm());
            }
    return worst;
}

double min_desired_singular_value(const ChannelSet& ch, const PrecoderSet& v, const DecoderSet& u)
{
    double smallest = std::numeric_limits<double>::infinity();
    for (int k = 0; k < ch.users(); ++k) {
        const CMatrix eff = u[k].mat().adjoint() * ch(k, k) * v[k].mat();
        const RVector sv = Eigen::JacobiSVD<CMatrix>(eff).singularValues();
        smallest = std::min(smallest, sv(sv.size() - 1));
    }
    return smallest;
}

namespace {

// d eigenvectors of a Hermitian PSD matrix with the smallest eigenvalues.
OrthonormalMatrix least_dominant(const CMatrix& q, int d)
{
    const EigenResult eig = herm_eig(q);
    return leading_columns(eig.vectors, d, q.rows() - d);
}

OrthonormalMatrix most_dominant(const CMatrix& q, int d)
{
    return leading_columns(herm_eig(q).vectors, d);
}

// Received covariance at receiver k, optionally excluding the desired term.
CMatrix receive_covariance(const SystemConfig& cfg, const ChannelSet& ch, const PrecoderSet& v, int k,
                           bool include_desired, double noise)
{
    CMatrix r = noise * CMatrix::Identity(cfg.N, cfg.N);
    for (int j = 0; j < cfg.K; ++j) {
        if (j == k && !include_desired)
            continue;
        const CMatrix hv = ch(k, j) * v[j].mat();
        r.noalias() += cfg.per_stream_power(j) * (hv * hv.adjoint());
    }
    return r;
}

// Covariance seen by transmitter j in the reciprocal network.
CMatrix reverse_covariance(const SystemConfig& cfg, const ChannelSet& ch, const DecoderSet& u, int j,
                           bool include_desired, double noise)
{
    CMatrix r = noise * CMatrix::Identity(cfg.M, cfg.M);
    for (int k = 0; k < cfg.K; ++k) {
        if (k == j && !include_desired)
            continue;
        const CMatrix hu = ch(k, j).adjoint() * u[k].mat();
        r.noalias() += cfg.per_stream_power(k) * (hu * hu.adjoint());
    }
    return r;
}

double weighted_leakage(const SystemConfig& cfg, const ChannelSet& ch, const PrecoderSet& v,
                        const DecoderSet& u)
{
    double acc = 0.0;
    for (int k = 0; k < cfg.K; ++k)
        for (int j = 0; j < cfg.K; ++j)
            if (j != k)
                acc += cfg.per_stream_power(j) * (u[k].mat().adjoint() * ch(k, j) * v[j].mat()).squaredNorm();
    return acc;
}

DecoderSet leakage_decoders(const SystemConfig& cfg, const ChannelSet& ch, const PrecoderSet& v)
{
    DecoderSet u;
    u.reserve(cfg.K);
    for (int k = 0; k < cfg.K; ++k)
        u.push_back(least_dominant(receive_covariance(cfg, ch, v, k, false, 0.0), cfg.d));
    return u;
}

PrecoderSet random_precoders(const SystemConfig& cfg, std::uint64_t seed)
{
    Rng rng(seed);
    PrecoderSet v;
    v.reserve(cfg.K);
    for (int j = 0; j < cfg.K; ++j)
        v.push_back(sample_grassmann(cfg.M, cfg.d, rng));
    return v;
}

void finalize(IASolution& sol, const ChannelSet& ch)
{
    sol.leakage = interference_leakage(ch, sol.precoders, sol.decoders);
}

// Sum MSE with unit-power symbols and the exact MMSE receiver.
double sum_mse(const SystemConfig& cfg, const ChannelSet& ch, const PrecoderSet& v)
{
    double acc = 0.0;
    for (int k = 0; k < cfg.K; ++k) {
        const CMatrix r = receive_covariance(cfg, ch, v, k, true, design_noise(cfg, k));
        const CMatrix hv = ch(k, k) * v[k].mat();
        const CMatrix e = CMatrix::Identity(cfg.d, cfg.d)
                        - cfg.per_stream_power(k) * (hv.adjoint() * r.ldlt().solve(hv));
        acc += e.trace().real();
    }
    return acc;
}

} // namespace

DecoderSet mmse_decoders(const SystemConfig& cfg, const ChannelSet& ch, const PrecoderSet& v)
{
    DecoderSet u;
    u.reserve(cfg.K);
    for (int k = 0; k < cfg.K; ++k) {
        const CMatrix r = receive_covariance(cfg, ch, v, k, true, design_noise(cfg, k));
        const CMatrix w = r.ldlt().solve(ch(k, k) * v[k].mat());
        u.push_back(qr_positive(w).q);
    }
    return u;
}

IASolution solve_leakage_min(const SystemConfig& cfg, const ChannelSet& ch, std::uint64_t seed,
                             SolverOptions opts)
{
    IASolution sol;
    sol.solver = "leakage";
    sol.precoders = random_precoders(cfg, seed);

    if (cfg.K == 1) {
        sol.decoders = {qr_positive(ch(0, 0) * sol.precoders[0].mat()).q};
        sol.objective_trace = {0.0};
        finalize(sol, ch);
        return sol;
    }

    sol.decoders = leakage_decoders(cfg, ch, sol.precoders);
    double current = weighted_leakage(cfg, ch, sol.precoders, sol.decoders);
    sol.objective_trace.push_back(current);
    sol.converged = false;

    for (int it = 0; it < opts.max_iters; ++it) {
        // The p_j weight is common to every term containing V_j, so the
        // exact minimizer over V_j ignores it.
        for (int j = 0; j < cfg.K; ++j)
            sol.precoders[j] = least_dominant(reverse_covariance(cfg, ch, sol.decoders, j, false, 0.0), cfg.d);
        sol.decoders = leakage_decoders(cfg, ch, sol.precoders);

        const double next = weighted_leakage(cfg, ch, sol.precoders, sol.decoders);
        sol.objective_trace.push_back(next);
        sol.iterations = it + 1;
        const double decrease = current - next;
        current = next;
        if (decrease < opts.tol) {
            sol.converged = true;
            break;
        }
    }
    finalize(sol, ch);
    return sol;
}

IASolution solve_mmse(const SystemConfig& cfg, const ChannelSet& ch, std::uint64_t seed, SolverOptions opts)
{
    return solve_mmse(cfg, ch, random_precoders(cfg, seed), opts);
}

IASolution solve_mmse(const SystemConfig& cfg, const ChannelSet& ch, const PrecoderSet& start, SolverOptions opts)
{
    if (static_cast<int>(start.size()) != cfg.K)
        throw Error(Errc::DimensionError, "need one starting precoder per user");
    IASolution sol;
    sol.solver = "mmse";
    sol.precoders = start;
    sol.decoders = mmse_decoders(cfg, ch, sol.precoders);
    double current = sum_mse(cfg, ch, sol.precoders);
    sol.objective_trace.push_back(current);
    sol.converged = false;

    // Projection onto the Grassmannian can break strict descent, so the
    // iteration runs through increases and the best iterate is returned.
    PrecoderSet v = sol.precoders;
    DecoderSet u = sol.decoders;
    double best = current;
    for (int it = 0; it < opts.max_iters; ++it) {
        PrecoderSet next_v;
        next_v.reserve(cfg.K);
        for (int j = 0; j < cfg.K; ++j) {
            const CMatrix r = reverse_covariance(cfg, ch, u, j, true, design_noise(cfg, j));
            next_v.push_back(qr_positive(r.ldlt().solve(ch(j, j).adjoint() * u[j].mat())).q);
        }
        v = std::move(next_v);
        u = mmse_decoders(cfg, ch, v);
        const double next = sum_mse(cfg, ch, v);
        sol.iterations = it + 1;
        if (next < best) {
            sol.precoders = v;
            sol.decoders = u;
            best = next;
        }
        sol.objective_trace.push_back(best);
        const double change = std::abs(current - next);
        current = next;
        if (change < opts.tol) {
            sol.converged = true;
            break;
        }
    }
    finalize(sol, ch);
    return sol;
}

namespace {

Eigen::PartialPivLU<CMatrix> checked_inverse(const CMatrix& h)
{
    const RVector sv = Eigen::JacobiSVD<CMatrix>(h).singularValues();
    if (!(sv(sv.size() - 1) > 0.0) || sv(0) / sv(sv.size() - 1) >= 1e8)
        throw Error(Errc::SingularChannel, "cross channel is ill-conditioned");
    return Eigen::PartialPivLU<CMatrix>(h);
}

} // namespace

IASolution solve_subspace_3user(const SystemConfig& cfg, const ChannelSet& ch)
{
    if (cfg.K != 3 || cfg.M != cfg.N)
        throw Error(Errc::DimensionError, "subspace alignment needs K = 3 and M = N");
    if (cfg.M < 2 * cfg.d)
        throw Error(Errc::DimensionError, "subspace alignment needs M >= 2d");
    const int d = cfg.d;

    const auto inv20 = checked_inverse(ch(2, 0));
    const auto inv01 = checked_inverse(ch(0, 1));
    const auto inv12 = checked_inverse(ch(1, 2));
    const auto inv21 = checked_inverse(ch(2, 1));

    // E = H31⁻¹ H32 H12⁻¹ H13 H23⁻¹ H21 (1-based user labels).
    const CMatrix e = inv20.solve(ch(2, 1) * inv01.solve(ch(0, 2) * inv12.solve(ch(1, 0))));
    Eigen::ComplexEigenSolver<CMatrix> es(e);
    if (es.info() != Eigen::Success)
        throw Error(Errc::SingularChannel, "eigen-decomposition of the alignment map failed");

    std::vector<Index> order(static_cast<std::size_t>(e.rows()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(b));
    });
    CMatrix v1(cfg.M, d);
    for (int i = 0; i < d; ++i)
        v1.col(i) = es.eigenvectors().col(order[static_cast<std::size_t>(i)]);

    IASolution sol;
    sol.solver = "subspace3";
    sol.precoders.push_back(orthonormalize(v1));
    const CMatrix v1o = sol.precoders[0].mat();
    sol.precoders.push_back(orthonormalize(inv21.solve(ch(2, 0) * v1o)));
    sol.precoders.push_back(orthonormalize(inv12.solve(ch(1, 0) * v1o)));

    for (int k = 0; k < 3; ++k) {
        CMatrix interference(cfg.N, 2 * d);
        int col = 0;
        for (int j = 0; j < 3; ++j)
            if (j != k) {
                interference.middleCols(col, d) = ch(k, j) * sol.precoders[j].mat();
                col += d;
            }
        Eigen::JacobiSVD<CMatrix> svd(interference, Eigen::ComputeFullU);
        const CMatrix complement = svd.matrixU().rightCols(cfg.N - d);
        const CMatrix desired = complement.adjoint() * ch(k, k) * sol.precoders[k].mat();
        const OrthonormalMatrix best = most_dominant(desired * desired.adjoint(), d);
        sol.decoders.push_back(OrthonormalMatrix::adopt(complement * best.mat()));
    }
    sol.objective_trace = {};
    finalize(sol, ch);
    return sol;
}

IASolution solve_ia(std::string_view solver, const SystemConfig& cfg, const ChannelSet& ch,
                    std::uint64_t seed, SolverOptions opts)
{
    if (solver == "leakage")
        return solve_leakage_min(cfg, ch, seed, opts);
    if (solver == "mmse")
        return solve_mmse(cfg, ch, seed, opts);
    if (solver == "subspace3")
        return solve_subspace_3user(cfg, ch);
    throw Error(Errc::InvalidArgument, "unknown IA solver '" + std::string(solver) + "'");
}

} // namespace cdswipt
