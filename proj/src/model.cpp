#include "mdpci/model.hpp"

#include <cmath>
#include <sstream>

namespace mdpci {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << what << " must be positive, got " << value;
    throw DomainError(msg.str());
  }
}

}  // namespace

void validate(const ModelSpec& model) {
  std::visit(Overloaded{
                 [](const IidMeanModel& m) {
                   if (m.family.kind() == FamilyKind::NonParamChi2 ||
                       m.family.kind() == FamilyKind::OrnsteinUhlenbeck ||
                       m.family.kind() == FamilyKind::CoxIngersollRoss) {
                     throw DomainError("i.i.d. mean model needs a Table-1 family");
                   }
                   if (m.theta.size() != m.family.dimension()) {
                     throw DomainError("mean dimension does not match the family");
                   }
                   if (m.family.is_scalar() && !m.family.in_domain(m.theta[0])) {
                     throw DomainError("mean parameter outside the family domain");
                   }
                 },
                 [](const OuModel& m) { require_positive(m.theta, "OU theta"); },
                 [](const CirModel& m) {
                   require_positive(m.delta, "CIR delta");
                   require_positive(m.sigma, "CIR sigma");
                   require_positive(m.theta, "CIR theta");
                 },
                 [](const NonParamIidModel& m) {
                   if (m.losses.empty()) throw DomainError("loss table must be nonempty");
                 },
             },
             model);
}

std::string model_name(const ModelSpec& model) {
  return std::visit(Overloaded{
                        [](const IidMeanModel& m) { return "iid-" + m.family.name(); },
                        [](const OuModel&) { return std::string("ou"); },
                        [](const CirModel&) { return std::string("cir"); },
                        [](const NonParamIidModel&) { return std::string("nonparam"); },
                    },
                    model);
}

RateFamily rate_family(const ModelSpec& model) {
  return std::visit(Overloaded{
                        [](const IidMeanModel& m) { return m.family; },
                        [](const OuModel&) { return RateFamily::ornstein_uhlenbeck(); },
                        [](const CirModel& m) {
                          return RateFamily::cox_ingersoll_ross(m.delta, m.sigma);
                        },
                        [](const NonParamIidModel&) { return RateFamily::nonparametric_chi2(); },
                    },
                    model);
}

double ou_variance(double theta) { return 0.5 / theta; }

double cir_variance(double theta, double delta, double sigma) {
  return 0.5 * delta * sigma * sigma / (theta * theta);
}

}  // namespace mdpci
