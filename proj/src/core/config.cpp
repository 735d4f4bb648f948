#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "error.hpp"

namespace hlucb {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::InvalidConfig: return "invalid config";
    case ErrorCode::Domain: return "domain error";
    case ErrorCode::State: return "state error";
    case ErrorCode::UnknownDuel: return "unknown duel";
    case ErrorCode::DuplicateOutcome: return "duplicate outcome";
    case ErrorCode::Terminated: return "terminated";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::Mismatch: return "mismatch";
  }
  return "unknown";
}

void validate(const RankingConfig& config) {
  std::ostringstream msg;
  if (config.n < 2) {
    msg << "n must be >= 2 (got " << config.n << ")";
  } else if (config.k < config.h + 1) {
    msg << "k - h must be >= 1 (k=" << config.k << ", h=" << config.h << ")";
  } else if (config.k + 1 + config.h > config.n) {
    msg << "k + 1 + h must be <= n (k=" << config.k << ", h=" << config.h
        << ", n=" << config.n << ")";
  } else if (!(config.sigma > 0.0 && config.sigma <= 1.0)) {
    msg << "sigma must lie in (0, 1] (got " << config.sigma << ")";
  } else if (!(config.radius_constant > 0.0) || !std::isfinite(config.radius_constant)) {
    msg << "radius_constant must be a positive finite number (got "
        << config.radius_constant << ")";
  } else {
    return;
  }
  fail(ErrorCode::InvalidConfig, msg.str());
}

double confidence_radius(std::uint64_t count, std::size_t n, double sigma,
                         double radius_constant) {
  if (count < 1) fail(ErrorCode::Domain, "confidence_radius: count must be >= 1");
  if (n < 2) fail(ErrorCode::Domain, "confidence_radius: n must be >= 2");
  if (!(sigma > 0.0 && sigma <= 1.0))
    fail(ErrorCode::Domain, "confidence_radius: sigma must lie in (0, 1]");
  if (!(radius_constant > 0.0))
    fail(ErrorCode::Domain, "confidence_radius: radius constant must be positive");

  const double u = static_cast<double>(count);
  const double iterated = std::max(std::log2(std::max(u, 2.0)), 1.0);
  const double log_term = std::log(static_cast<double>(n) / sigma * iterated);
  return radius_constant * std::sqrt(log_term / (2.0 * u));
}

}  // namespace hlucb
