#include "eedc/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "eedc/error.hpp"

namespace eedc {

ValidationReport validate(const ModelParams& p) {
  ValidationReport report;
  auto& err = report.errors;
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) err.push_back(std::string(name) + " must be > 0");
  };
  auto nonneg = [&](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) err.push_back(std::string(name) + " must be >= 0");
  };
  positive(p.lambda, "lambda");
  positive(p.mu1, "mu1");
  positive(p.mu2, "mu2");
  if (p.n < 1) err.push_back("n must be >= 1");
  if (p.m < 1) err.push_back("m must be >= 1");
  positive(p.p2_sleep, "p2_sleep");
  if (!(p.p2_sleep < p.p2_work)) err.push_back("p2_sleep must be < p2_work");
  nonneg(p.p1_work, "p1_work");
  nonneg(p.c_energy, "c_energy");
  nonneg(p.c_hold_g1, "c_hold_g1");
  nonneg(p.c_hold_g2, "c_hold_g2");
  nonneg(p.c_transfer, "c_transfer");
  nonneg(p.c_loss, "c_loss");
  nonneg(p.price, "price");

  if (p.mu1 < p.mu2) report.warnings.push_back("fast condition violated");
  if (p.c_hold_g1 > p.c_hold_g2) report.warnings.push_back("cheap condition violated");
  return report;
}

void require_valid(const ModelParams& params) {
  const auto report = validate(params);
  if (report.ok()) return;
  std::string message;
  for (const auto& e : report.errors) {
    if (!message.empty()) message += "; ";
    message += e;
  }
  throw ConfigError(message);
}

StateSpace::StateSpace(int n, int m) : n_(n), m_(m) {
  if (n < 1 || m < 1) throw RangeError("state space needs n >= 1 and m >= 1");
}

std::size_t StateSpace::index(int i, int j) const {
  if (j == 0 && i >= 0 && i <= n_) return static_cast<std::size_t>(i);
  if (i == n_ && j >= 1 && j <= m_) return static_cast<std::size_t>(n_ + j);
  throw RangeError("state (" + std::to_string(i) + "," + std::to_string(j) +
                   ") is not in the state space");
}

State StateSpace::state(std::size_t k) const {
  if (k >= size()) throw RangeError("state index out of range");
  const int ki = static_cast<int>(k);
  if (ki <= n_) return {ki, 0};
  return {n_, ki - n_};
}

void require_valid_policy(const ModelParams& params, const Policy& d) {
  if (d.m() != params.m) {
    throw RangeError("policy has " + std::to_string(d.m()) + " entries, expected m = " +
                     std::to_string(params.m));
  }
  for (int j = 1; j <= d.m(); ++j) {
    if (d[j] < 0 || d[j] > params.m) {
      throw RangeError("policy entry " + std::to_string(j) + " = " + std::to_string(d[j]) +
                       " outside {0.." + std::to_string(params.m) + "}");
    }
  }
}

Policy canonicalize_policy(const ModelParams& params, const Policy& d) {
  require_valid_policy(params, d);
  Policy out = d;
  for (int j = 1; j <= d.m(); ++j) out.set(j, std::min(d[j], j));
  return out;
}

Policy threshold_policy(int m, int theta) {
  if (m < 1 || theta < 1 || theta > m + 1) throw RangeError("threshold theta out of range");
  std::vector<int> a(static_cast<std::size_t>(m));
  for (int j = 1; j <= m; ++j) a[static_cast<std::size_t>(j - 1)] = j >= theta ? j : 0;
  return Policy(std::move(a));
}

std::string_view to_string(PolicySpaceKind kind) {
  switch (kind) {
    case PolicySpaceKind::full: return "full";
    case PolicySpaceKind::reduced: return "reduced";
    case PolicySpaceKind::bang_bang: return "bang-bang";
    case PolicySpaceKind::threshold: return "threshold";
  }
  return "unknown";
}

PolicySpaceKind parse_policy_space(std::string_view text) {
  if (text == "full") return PolicySpaceKind::full;
  if (text == "reduced") return PolicySpaceKind::reduced;
  if (text == "bang-bang" || text == "bang_bang") return PolicySpaceKind::bang_bang;
  if (text == "threshold") return PolicySpaceKind::threshold;
  throw ConfigError("unknown policy space '" + std::string(text) + "'");
}

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t mul_sat(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > kSaturated / a) return kSaturated;
  return a * b;
}

// Number of choices for coordinate j (1-based).
std::uint64_t radix(PolicySpaceKind kind, int m, int j) {
  switch (kind) {
    case PolicySpaceKind::full: return static_cast<std::uint64_t>(m) + 1;
    case PolicySpaceKind::reduced: return static_cast<std::uint64_t>(j) + 1;
    case PolicySpaceKind::bang_bang: return 2;
    case PolicySpaceKind::threshold: break;
  }
  return 1;
}

}  // namespace

PolicySpace::PolicySpace(int m, PolicySpaceKind kind) : m_(m), kind_(kind), size_(1) {
  if (m < 1) throw RangeError("policy space needs m >= 1");
  if (kind == PolicySpaceKind::threshold) {
    size_ = static_cast<std::uint64_t>(m) + 1;
    return;
  }
  for (int j = 1; j <= m; ++j) size_ = mul_sat(size_, radix(kind, m, j));
}

Policy PolicySpace::at(std::uint64_t index) const {
  if (index >= size_) throw RangeError("policy index out of range");
  if (kind_ == PolicySpaceKind::threshold) return threshold_policy(m_, static_cast<int>(index) + 1);
  // Mixed radix with the last coordinate varying fastest gives lexicographic order.
  std::vector<int> a(static_cast<std::size_t>(m_));
  for (int j = m_; j >= 1; --j) {
    const std::uint64_t r = radix(kind_, m_, j);
    const int digit = static_cast<int>(index % r);
    index /= r;
    a[static_cast<std::size_t>(j - 1)] = kind_ == PolicySpaceKind::bang_bang ? digit * j : digit;
  }
  return Policy(std::move(a));
}

bool PolicySpace::contains(const Policy& d) const {
  if (d.m() != m_) return false;
  if (kind_ == PolicySpaceKind::threshold) {
    for (int theta = 1; theta <= m_ + 1; ++theta) {
      if (threshold_policy(m_, theta) == d) return true;
    }
    return false;
  }
  for (int j = 1; j <= m_; ++j) {
    const int v = d[j];
    switch (kind_) {
      case PolicySpaceKind::full:
        if (v < 0 || v > m_) return false;
        break;
      case PolicySpaceKind::reduced:
        if (v < 0 || v > j) return false;
        break;
      case PolicySpaceKind::bang_bang:
        if (v != 0 && v != j) return false;
        break;
      case PolicySpaceKind::threshold: break;
    }
  }
  return true;
}

PolicySpace enumerate_policies(int m, PolicySpaceKind kind) { return PolicySpace(m, kind); }

void check_enumeration_gate(int m, PolicySpaceKind kind, bool allow_large) {
  if (allow_large) return;
  if (kind == PolicySpaceKind::full && m > kFullSpaceMaxM) {
    throw GateError("full-space enumeration refuses m = " + std::to_string(m) + " > " +
                    std::to_string(kFullSpaceMaxM) + " without override");
  }
  const PolicySpace space(m, kind);
  if (space.size() > kMaxEnumeratedPolicies) {
    std::ostringstream os;
    os << to_string(kind) << " space at m = " << m << " exceeds " << kMaxEnumeratedPolicies
       << " policies without override";
    throw GateError(os.str());
  }
}

}  // namespace eedc
