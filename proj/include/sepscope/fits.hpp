#pragma once

#include <string_view>
#include <vector>

#include "sepscope/profile.hpp"

namespace sepscope {

enum class FitModel { BetaTail, Cosine, PowerCompare };

std::string_view to_string(FitModel m);

struct FitResult {
    FitModel model = FitModel::BetaTail;
    std::vector<double> params;
    double rms_residual = 0.0;
};

/// 1 - I_r(3, 1/4): the fixed curve compared against the normalized two-rebit radial profile.
double beta_tail_model(double r);

/// Residuals of F(r)/F(0) against beta_tail_model. No free parameters; params = {F(0)}.
/// Throws DomainError for non-radial or non-rebit profiles and EstimationError when F(0) = 0.
FitResult fit_beta_tail(const ProfileEstimate& profile);

/// Least squares c0 + c1 cos(4 pi x) over the profile grid; params = {c0, c1}.
FitResult fit_cosine(const ProfileEstimate& profile);

/// RMS difference between the qubit profile and the rebit profile raised to `alpha`, both
/// scaled to 1 at r = 0. Throws DomainError on grid mismatch.
double power_compare(const ProfileEstimate& rebit, const ProfileEstimate& qubit, double alpha);

}  // namespace sepscope
