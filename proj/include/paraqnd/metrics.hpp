#pragma once

#include "paraqnd/fock.hpp"

namespace paraqnd {

/// |<a|b>|^2 for normalized vectors.
double fidelity(const CVector& a, const CVector& b);
/// <psi|rho|psi>.
double fidelity(const CMatrix& rho, const CVector& psi);
/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fidelity(const CMatrix& rho, const CMatrix& sigma);

double purity(const CMatrix& rho);
double trace_distance(const CMatrix& rho, const CMatrix& sigma);

/// Reduced states of a signal (x) pump operator or vector.
CMatrix trace_out_pump(const CMatrix& rho, const ModeSpace& space);
CMatrix trace_out_signal(const CMatrix& rho, const ModeSpace& space);
CMatrix trace_out_pump(const TwoModeState& psi);
CMatrix trace_out_signal(const TwoModeState& psi);

Complex expectation(const SparseMatrix& op, const CVector& psi);
Complex expectation(const SparseMatrix& op, const CMatrix& rho);
double variance(const SparseMatrix& op, const CVector& psi);
double variance(const SparseMatrix& op, const CMatrix& rho);

}  // namespace paraqnd
