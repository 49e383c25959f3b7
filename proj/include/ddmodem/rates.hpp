#pragma once

#include <cmath>
#include <limits>

#include "ddmodem/common.hpp"

// Sub-channel rate math shared by the 64-bit evaluation path and the 32-bit
// training loop. Gradients use the packed convention G = dL/dRe + j*dL/dIm.

namespace ddm {

template <typename S>
using CMat = Eigen::Matrix<std::complex<S>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using CVec = Eigen::Matrix<std::complex<S>, Eigen::Dynamic, 1>;
template <typename S>
using RVec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// r_m = log2(1 + |He(m,m)|^2 / (sum_{n!=m} |He(m,n)|^2 + rho * rowE(m))).
// A vanishing denominator only happens for a dead sub-channel (zero demod
// row), which carries rate 0.
template <typename S>
RVec<S> rates_from_he(const CMat<S>& He, const RVec<S>& rowE, S rho) {
    const Eigen::Index M = He.rows();
    RVec<S> r(M);
    const S inv_ln2 = S(1) / std::log(S(2));
    for (Eigen::Index m = 0; m < M; ++m) {
        S sig = std::norm(He(m, m));
        S interf = He.row(m).squaredNorm() - sig;
        S den = interf + rho * rowE(m);
        r(m) = den > S(0) ? std::log1p(sig / den) * inv_ln2 : S(0);
    }
    return r;
}

// loss = -(sum_m r_m + M * min_m r_m). When the argmin ties, the gradient
// flows to the lowest-index minimizer only. Ghe/gE may be null.
template <typename S>
S rate_objective_from_he(const CMat<S>& He, const RVec<S>& rowE, S rho,
                         CMat<S>* Ghe = nullptr, RVec<S>* gE = nullptr) {
    const Eigen::Index M = He.rows();
    RVec<S> r = rates_from_he(He, rowE, rho);
    Eigen::Index argmin = 0;
    for (Eigen::Index m = 1; m < M; ++m)
        if (r(m) < r(argmin)) argmin = m;
    S loss = -(r.sum() + S(M) * r(argmin));
    if (!Ghe && !gE) return loss;

    if (Ghe) Ghe->setZero(M, He.cols());
    if (gE) gE->setZero(M);
    const S inv_ln2 = S(1) / std::log(S(2));
    for (Eigen::Index m = 0; m < M; ++m) {
        S sig = std::norm(He(m, m));
        S interf = He.row(m).squaredNorm() - sig;
        S den = interf + rho * rowE(m);
        if (den <= S(0)) continue;  // dead sub-channel, rate pinned at 0
        S dr = -(S(1) + (m == argmin ? S(M) : S(0)));
        S dS = dr * inv_ln2 / (den + sig);
        S dD = dr * inv_ln2 * (-sig) / (den * (den + sig));
        if (Ghe) {
            for (Eigen::Index n = 0; n < He.cols(); ++n)
                (*Ghe)(m, n) = S(2) * (n == m ? dS : dD) * He(m, n);
        }
        if (gE) (*gE)(m) = dD * rho;
    }
    return loss;
}

template <typename S>
struct ModemGradT {
    CMat<S> mod;    // packed gradient w.r.t. Phi
    CMat<S> demod;  // packed gradient w.r.t. Psi^H
};

// Objective as a function of the modem pair through He = Psi^H H Phi and the
// demodulator row energies. Chain rule for products of complex matrices:
// Z = A B  =>  G_A = G Z B^H, G_B = A^H G_Z.
template <typename S>
S rate_objective_modem(const CMat<S>& Phi, const CMat<S>& PsiH, const CMat<S>& H, S rho,
                       ModemGradT<S>* grad = nullptr, CMat<S>* He_out = nullptr) {
    if (PsiH.cols() != H.rows() || H.cols() != Phi.rows() || PsiH.rows() != Phi.cols())
        throw MathError("rate_objective_modem: dimension mismatch");
    CMat<S> B1 = PsiH * H;  // M x M_L
    CMat<S> He = B1 * Phi;  // M x M
    RVec<S> rowE = PsiH.rowwise().squaredNorm();
    if (He_out) *He_out = He;
    if (!grad) return rate_objective_from_he<S>(He, rowE, rho);

    CMat<S> Ghe;
    RVec<S> gE;
    S loss = rate_objective_from_he<S>(He, rowE, rho, &Ghe, &gE);
    CMat<S> B2 = H * Phi;  // M_L x M
    grad->mod = B1.adjoint() * Ghe;
    grad->demod = Ghe * B2.adjoint();
    grad->demod += (S(2) * gE).asDiagonal() * PsiH;
    return loss;
}

// Phase-II objective on a pair of modems: alpha * mean of the per-branch rate
// objective plus (1-alpha) * squared Frobenius distance between the branches.
// rate_term/dist_term report the two components separately.
template <typename S>
S siamese_objective(const CMat<S>& Phi1, const CMat<S>& PsiH1, const CMat<S>& H1,
                    const CMat<S>& Phi2, const CMat<S>& PsiH2, const CMat<S>& H2,
                    S rho, S alpha,
                    ModemGradT<S>* grad1 = nullptr, ModemGradT<S>* grad2 = nullptr,
                    S* rate_term = nullptr, S* dist_term = nullptr) {
    S obj1 = rate_objective_modem<S>(Phi1, PsiH1, H1, rho, grad1);
    S obj2 = rate_objective_modem<S>(Phi2, PsiH2, H2, rho, grad2);
    S rate = (obj1 + obj2) / S(2);
    S dist = (Phi1 - Phi2).squaredNorm() + (PsiH1 - PsiH2).squaredNorm();
    if (rate_term) *rate_term = rate;
    if (dist_term) *dist_term = dist;
    if (grad1 && grad2) {
        const S half_a = alpha / S(2);
        const S two_b = S(2) * (S(1) - alpha);
        grad1->mod = half_a * grad1->mod + two_b * (Phi1 - Phi2);
        grad1->demod = half_a * grad1->demod + two_b * (PsiH1 - PsiH2);
        grad2->mod = half_a * grad2->mod - two_b * (Phi1 - Phi2);
        grad2->demod = half_a * grad2->demod - two_b * (PsiH1 - PsiH2);
    }
    return alpha * rate + (S(1) - alpha) * dist;
}

}  // namespace ddm
