#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gammaflow {

// Domain violation in a speed or cone evaluation. Cone exits are the dominant
// failure mode of flow blow-up, so the offending curvature vector and the
// violated facet travel with the error.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& msg) : std::domain_error(msg) {}

  DomainError(const std::string& msg, std::vector<double> lambda, int facet,
              std::vector<double> facet_normal)
      : std::domain_error(msg),
        lambda_(std::move(lambda)),
        facet_(facet),
        facet_normal_(std::move(facet_normal)) {}

  const std::vector<double>& lambda() const noexcept { return lambda_; }
  int facet() const noexcept { return facet_; }
  const std::vector<double>& facet_normal() const noexcept {
    return facet_normal_;
  }

 private:
  std::vector<double> lambda_;
  int facet_ = -1;
  std::vector<double> facet_normal_;
};

}  // namespace gammaflow
