#include <algorithm>
#include <cctype>
#include <limits>
#include <cmath>
#include <vector>

#include "varcat/verification.hpp"

namespace varcat {
namespace {

double log_choose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '$';
}

}  // namespace

std::optional<Sidedness> parse_sidedness(std::string_view name) {
  if (name == "greater") return Sidedness::kGreater;
  if (name == "two_sided" || name == "two-sided") return Sidedness::kTwoSided;
  return std::nullopt;
}

std::string_view sidedness_name(Sidedness sidedness) {
  return sidedness == Sidedness::kGreater ? "greater" : "two_sided";
}

double fisher_exact(const ContingencyTable& t, Sidedness sidedness) {
  const std::uint64_t row1 = t.a + t.b;
  const std::uint64_t row2 = t.c + t.d;
  const std::uint64_t col1 = t.a + t.c;
  const std::uint64_t n = row1 + row2;
  if (row1 == 0 || row2 == 0 || col1 == 0 || col1 == n) return 1.0;

  const std::uint64_t lo = col1 > row2 ? col1 - row2 : 0;
  const std::uint64_t hi = std::min(row1, col1);
  // Log point probabilities up to the shared denominator C(n, col1), which
  // cancels when normalizing by the total mass.
  std::vector<double> logp;
  logp.reserve(hi - lo + 1);
  for (std::uint64_t k = lo; k <= hi; ++k) {
    logp.push_back(log_choose(static_cast<double>(row1), static_cast<double>(k)) +
                   log_choose(static_cast<double>(row2), static_cast<double>(col1 - k)));
  }
  const double observed = logp[t.a - lo];
  // Log-sum-exp over the whole support and over the tail separately, so
  // tails far below the double range of the peak still resolve.
  const double ninf = -std::numeric_limits<double>::infinity();
  double total_max = ninf;
  double tail_max = ninf;
  std::vector<bool> in_tail(logp.size());
  for (std::size_t i = 0; i < logp.size(); ++i) {
    in_tail[i] = sidedness == Sidedness::kGreater ? lo + i >= t.a
                                                  : logp[i] <= observed + 1e-9;  // ties
    total_max = std::max(total_max, logp[i]);
    if (in_tail[i]) tail_max = std::max(tail_max, logp[i]);
  }
  if (std::find(in_tail.begin(), in_tail.end(), false) == in_tail.end()) return 1.0;
  double total = 0.0;
  double tail = 0.0;
  for (std::size_t i = 0; i < logp.size(); ++i) {
    total += std::exp(logp[i] - total_max);
    if (in_tail[i]) tail += std::exp(logp[i] - tail_max);
  }
  double log_p = tail_max + std::log(tail) - total_max - std::log(total);
  return std::min(1.0, std::exp(log_p));
}

bool observe(std::string_view completion, std::string_view target, bool substring) {
  if (target.empty()) return false;
  std::size_t pos = completion.find(target);
  if (substring) return pos != std::string_view::npos;
  while (pos != std::string_view::npos) {
    bool left_ok = pos == 0 || !is_ident_char(completion[pos - 1]);
    std::size_t end = pos + target.size();
    bool right_ok = end >= completion.size() || !is_ident_char(completion[end]);
    if (left_ok && right_ok) return true;
    pos = completion.find(target, pos + 1);
  }
  return false;
}

}  // namespace varcat
