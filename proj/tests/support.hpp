#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace test_support {

// Standard normal CDF from its Taylor series around 0 (|x| <= 3) and the
// Laplace continued fraction for the tails. Shares nothing with the rational
// approximations under test.
inline double log_normal_tail(double x) {
  // log Q(x) for x > 3, Q(x) = phi(x) / (x + 1/(x + 2/(x + 3/(x + ...)))) via modified Lentz.
  const double tiny = 1e-300;
  double f = x;
  double c = x;
  double d = 0.0;
  for (int n = 1; n < 5000; ++n) {
    const double a = static_cast<double>(n);
    d = x + a * d;
    if (std::abs(d) < tiny) d = tiny;
    c = x + a / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(f);
}

inline double normal_cdf(double x) {
  if (x < -3.0) return std::exp(log_normal_tail(-x));
  if (x > 3.0) return -std::expm1(log_normal_tail(x));
  // Phi(x) = 1/2 + phi(x) * sum x^(2n+1) / (1 * 3 * ... * (2n+1))
  double term = x;
  double sum = x;
  for (int n = 1; n < 500; ++n) {
    term *= x * x / (2.0 * n + 1.0);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return 0.5 + phi * sum;
}

// Small XML well-formedness checker: one root element, balanced tags, quoted
// attributes, no stray '<' or '&' in text.
class XmlChecker {
 public:
  explicit XmlChecker(const std::string& text) : s_(text) {}

  bool well_formed() {
    skip_space();
    if (starts("<?xml")) {
      const auto end = s_.find("?>", pos_);
      if (end == std::string::npos) return false;
      pos_ = end + 2;
    }
    skip_misc();
    if (!element()) return false;
    skip_misc();
    return pos_ == s_.size();
  }

 private:
  bool starts(const char* prefix) const { return s_.compare(pos_, std::strlen(prefix), prefix) == 0; }
  void skip_space() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool skip_comment() {
    if (!starts("<!--")) return false;
    const auto end = s_.find("-->", pos_ + 4);
    if (end == std::string::npos) return false;
    pos_ = end + 3;
    return true;
  }
  void skip_misc() {
    while (true) {
      skip_space();
      if (!skip_comment()) return;
    }
  }
  bool name(std::string& out) {
    const auto start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '-' ||
                                s_[pos_] == '_' || s_[pos_] == ':' || s_[pos_] == '.')) {
      ++pos_;
    }
    out = s_.substr(start, pos_ - start);
    return !out.empty() && !std::isdigit(static_cast<unsigned char>(out[0]));
  }
  bool entity() {
    const auto end = s_.find(';', pos_);
    if (end == std::string::npos) return false;
    const std::string ref = s_.substr(pos_, end - pos_ + 1);
    if (ref != "&amp;" && ref != "&lt;" && ref != "&gt;" && ref != "&quot;" && ref != "&apos;") {
      return false;
    }
    pos_ = end + 1;
    return true;
  }
  bool element() {
    if (pos_ >= s_.size() || s_[pos_] != '<') return false;
    ++pos_;
    std::string tag;
    if (!name(tag)) return false;
    std::vector<std::string> seen;
    while (true) {
      skip_space();
      if (pos_ >= s_.size()) return false;
      if (starts("/>")) {
        pos_ += 2;
        return true;
      }
      if (s_[pos_] == '>') {
        ++pos_;
        break;
      }
      std::string attr;
      if (!name(attr)) return false;
      for (const auto& a : seen) {
        if (a == attr) return false;
      }
      seen.push_back(attr);
      skip_space();
      if (pos_ >= s_.size() || s_[pos_] != '=') return false;
      ++pos_;
      skip_space();
      if (pos_ >= s_.size() || (s_[pos_] != '"' && s_[pos_] != '\'')) return false;
      const char quote = s_[pos_++];
      while (pos_ < s_.size() && s_[pos_] != quote) {
        if (s_[pos_] == '<') return false;
        if (s_[pos_] == '&') {
          if (!entity()) return false;
        } else {
          ++pos_;
        }
      }
      if (pos_ >= s_.size()) return false;
      ++pos_;
    }
    // Content.
    while (true) {
      if (pos_ >= s_.size()) return false;
      if (starts("</")) {
        pos_ += 2;
        std::string closing;
        if (!name(closing) || closing != tag) return false;
        skip_space();
        if (pos_ >= s_.size() || s_[pos_] != '>') return false;
        ++pos_;
        return true;
      }
      if (starts("<!--")) {
        if (!skip_comment()) return false;
      } else if (s_[pos_] == '<') {
        if (!element()) return false;
      } else if (s_[pos_] == '&') {
        if (!entity()) return false;
      } else {
        ++pos_;
      }
    }
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

inline bool well_formed_xml(const std::string& text) { return XmlChecker(text).well_formed(); }

inline std::filesystem::path temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "mdpci_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

inline double relative_gap(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

}  // namespace test_support
