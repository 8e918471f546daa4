#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

namespace eedc {

/// Rates, server counts, power levels, prices and costs of the two-group
/// data center. Field names match the configuration file keys.
struct ModelParams {
  double lambda = 1.0;  ///< arrival rate
  double mu1 = 1.0;     ///< Group-1 service rate
  double mu2 = 1.0;     ///< Group-2 service rate
  int n = 1;            ///< Group-1 server count
  int m = 1;            ///< Group-2 server count
  double p1_work = 0.0;
  double p2_work = 1.0;
  double p2_sleep = 0.5;
  double c_energy = 0.0;   ///< energy price
  double c_hold_g1 = 0.0;  ///< holding cost rate per job in Group 1
  double c_hold_g2 = 0.0;  ///< holding cost rate per job in Group 2
  double c_transfer = 0.0; ///< cost per job moved from Group 2 to Group 1
  double c_loss = 0.0;     ///< opportunity cost per lost arrival
  double price = 0.0;      ///< revenue per completed job

  [[nodiscard]] std::size_t state_count() const {
    return static_cast<std::size_t>(n) + static_cast<std::size_t>(m) + 1;
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  [[nodiscard]] bool ok() const { return errors.empty(); }
};

ValidationReport validate(const ModelParams& params);

/// Throws ConfigError listing every hard violation.
void require_valid(const ModelParams& params);

struct State {
  int i = 0;  ///< jobs in Group 1
  int j = 0;  ///< jobs in Group 2

  friend bool operator==(const State&, const State&) = default;
};

/// Ordered states (0,0),(1,0),...,(n,0),(n,1),...,(n,m).
class StateSpace {
 public:
  StateSpace(int n, int m);

  [[nodiscard]] int n() const { return n_; }
  [[nodiscard]] int m() const { return m_; }
  [[nodiscard]] std::size_t size() const {
    return static_cast<std::size_t>(n_ + m_ + 1);
  }
  [[nodiscard]] std::size_t index(int i, int j) const;
  [[nodiscard]] State state(std::size_t index) const;

 private:
  int n_;
  int m_;
};

/// Actions d_{n,1..m}. The zero actions at states (i,0) are implicit.
class Policy {
 public:
  Policy() = default;
  explicit Policy(std::vector<int> actions) : actions_(std::move(actions)) {}

  [[nodiscard]] int m() const { return static_cast<int>(actions_.size()); }
  /// Action at state (n, level); level is 1-based.
  [[nodiscard]] int operator[](int level) const {
    return actions_[static_cast<std::size_t>(level - 1)];
  }
  void set(int level, int value) {
    actions_[static_cast<std::size_t>(level - 1)] = value;
  }
  /// Action at an arbitrary state; zero off the (n, j>=1) row.
  [[nodiscard]] int action_at(const State& s, int n) const {
    return (s.i == n && s.j >= 1) ? (*this)[s.j] : 0;
  }
  [[nodiscard]] const std::vector<int>& actions() const { return actions_; }

  friend auto operator<=>(const Policy&, const Policy&) = default;
  friend bool operator==(const Policy&, const Policy&) = default;

 private:
  std::vector<int> actions_;
};

/// Throws RangeError unless d has m entries, each in {0..m}.
void require_valid_policy(const ModelParams& params, const Policy& d);

/// Replaces every action d_{n,j} >= j by j; generator and stationary
/// vector are unchanged by this map.
Policy canonicalize_policy(const ModelParams& params, const Policy& d);

/// Threshold policy: zero below level theta, d_{n,j} = j from theta on.
Policy threshold_policy(int m, int theta);

enum class PolicySpaceKind { full, reduced, bang_bang, threshold };

std::string_view to_string(PolicySpaceKind kind);
PolicySpaceKind parse_policy_space(std::string_view text);

/// Full-space enumeration refuses m above this unless overridden.
inline constexpr int kFullSpaceMaxM = 8;
/// Largest policy count any other space enumerates without override.
inline constexpr std::uint64_t kMaxEnumeratedPolicies = 43'046'721;  // 9^8

/// Random-access view over one of the policy sets. Indices run in
/// lexicographic policy order for full, reduced and bang-bang; threshold
/// policies are indexed by theta - 1.
class PolicySpace {
 public:
  PolicySpace(int m, PolicySpaceKind kind);

  [[nodiscard]] int m() const { return m_; }
  [[nodiscard]] PolicySpaceKind kind() const { return kind_; }
  /// Saturates at UINT64_MAX.
  [[nodiscard]] std::uint64_t size() const { return size_; }
  [[nodiscard]] Policy at(std::uint64_t index) const;
  [[nodiscard]] bool contains(const Policy& d) const;

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = Policy;
    using difference_type = std::ptrdiff_t;

    iterator(const PolicySpace* space, std::uint64_t index)
        : space_(space), index_(index) {}
    Policy operator*() const { return space_->at(index_); }
    iterator& operator++() {
      ++index_;
      return *this;
    }
    friend bool operator==(const iterator& a, const iterator& b) {
      return a.index_ == b.index_;
    }

   private:
    const PolicySpace* space_;
    std::uint64_t index_;
  };

  [[nodiscard]] iterator begin() const { return {this, 0}; }
  [[nodiscard]] iterator end() const { return {this, size_}; }

 private:
  int m_;
  PolicySpaceKind kind_;
  std::uint64_t size_;
};

PolicySpace enumerate_policies(int m, PolicySpaceKind kind);

/// Throws GateError when enumerating `kind` at this m is beyond the desk
/// ceiling and `allow_large` is false.
void check_enumeration_gate(int m, PolicySpaceKind kind, bool allow_large);

// Configuration text: one `key=value` per line, `#` starts a comment.
ModelParams parse_model_config(std::string_view text);
ModelParams load_model_config(const std::string& path);
std::string format_model_config(const ModelParams& params);
/// FNV-1a over the canonical configuration text.
std::uint64_t model_hash(const ModelParams& params);

Policy parse_policy(std::string_view text);
std::string format_policy(const Policy& d);

}  // namespace eedc
