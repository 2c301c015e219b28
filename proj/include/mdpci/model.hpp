#pragma once

#include <string>
#include <variant>
#include <vector>

#include "mdpci/rates.hpp"

namespace mdpci {

/// I.i.d. observations from a Table-style family, parameterized by the mean.
struct IidMeanModel {
  RateFamily family;
  std::vector<double> theta;  // true mean; length = family dimension
};

/// dX = -theta X dt + dW, X_0 = 0.
struct OuModel {
  double theta;
};

/// dX = (delta - theta X) dt + sigma sqrt(X) dW, X_0 = 0.
struct CirModel {
  double delta;
  double sigma;
  double theta;
};

/// Non-parametric i.i.d. model represented by its observed losses.
struct NonParamIidModel {
  std::vector<double> losses;
};

using ModelSpec = std::variant<IidMeanModel, OuModel, CirModel, NonParamIidModel>;

/// Throws DomainError on parameter violations.
void validate(const ModelSpec& model);

std::string model_name(const ModelSpec& model);

/// Rate family governing the estimator of `model`.
RateFamily rate_family(const ModelSpec& model);

/// Asymptotic variance of the OU process, 1 / (2 theta).
double ou_variance(double theta);
/// Asymptotic variance of the CIR process, delta sigma^2 / (2 theta^2).
double cir_variance(double theta, double delta, double sigma);

}  // namespace mdpci
