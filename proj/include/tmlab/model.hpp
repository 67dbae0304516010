#pragma once

// Dimension constants and the exponent perturbation f.

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tmlab/error.hpp"
#include "tmlab/format.hpp"
#include "tmlab/interp.hpp"
#include "tmlab/special_fn.hpp"

namespace tmlab {

using Json = nlohmann::ordered_json;

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return std::round(b);
}

struct DimensionParams {
  int N = 2;
  int k = 1;
  double omega = 0.0;  // area of the unit sphere S^{N-1}
  double c_N = 0.0;
  double mu_N = 0.0;
  double a_N = 0.0;

  /// (N+2)/N, the critical exponent.
  [[nodiscard]] double q0() const { return (N + 2.0) / N; }

  [[nodiscard]] Json to_json() const {
    Json j;
    j["N"] = N;
    j["k"] = k;
    j["omega"] = omega;
    j["c_N"] = c_N;
    j["mu_N"] = mu_N;
    j["a_N"] = a_N;
    return j;
  }
};

inline DimensionParams make_params(int N) {
  if (N < 2 || N % 2 != 0)
    throw DomainError("dimension N = " + std::to_string(N) +
                      " rejected: the limit case requires N = 2k with k >= 1 (N even, N >= 2)");
  DimensionParams p;
  p.N = N;
  p.k = N / 2;
  p.omega = 2.0 * std::pow(std::numbers::pi, N / 2.0) / gamma(N / 2.0).value;
  p.c_N = p.omega * binomial(N, p.k) / N;
  p.mu_N = N * std::pow(p.omega * binomial(N - 1, p.k - 1) / p.k, 2.0 / N);
  p.a_N = std::pow(p.omega / N, 2.0 / N);
  return p;
}

enum class PerturbationFamily { zero, power, log, table };

inline std::string to_string(PerturbationFamily f) {
  switch (f) {
    case PerturbationFamily::zero: return "zero";
    case PerturbationFamily::power: return "power";
    case PerturbationFamily::log: return "log";
    case PerturbationFamily::table: return "table";
  }
  return "?";
}

/// f(r) on [0, 1). Families:
///   zero               f = 0
///   power(a, b, gamma) f = gamma r^a / (1-r)^b
///   log(c, sigma)      f = c / |ln r|^sigma for r < 1/e, bridged to 0 at r = 1
///   table              monotone cubic through (r_i, f_i), r_0 = 0, f_0 = 0
class PerturbationSpec {
 public:
  PerturbationSpec() = default;

  static PerturbationSpec zero() { return {}; }

  static PerturbationSpec power(double a, double b, double gamma) {
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("power perturbation: a must be positive");
    if (!std::isfinite(b) || !std::isfinite(gamma)) throw DomainError("power perturbation: b and gamma must be finite");
    PerturbationSpec s;
    s.family_ = PerturbationFamily::power;
    s.a_ = a;
    s.b_ = b;
    s.gamma_ = gamma;
    return s;
  }

  static PerturbationSpec log(double c, double sigma) {
    if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("log perturbation: c must be positive");
    if (!(sigma > 1.0) || !std::isfinite(sigma)) throw DomainError("log perturbation: sigma must exceed 1");
    PerturbationSpec s;
    s.family_ = PerturbationFamily::log;
    s.c_ = c;
    s.sigma_ = sigma;
    return s;
  }

  static PerturbationSpec table(std::vector<double> r, std::vector<double> f, std::string source = "") {
    if (r.size() < 2 || r.size() != f.size()) throw DomainError("table perturbation: need at least two (r, f) nodes");
    if (r.front() != 0.0 || f.front() != 0.0) throw DomainError("table perturbation: first node must be (0, 0)");
    if (!(r.back() < 1.0)) throw DomainError("table perturbation: nodes must lie in [0, 1)");
    for (double v : f)
      if (!std::isfinite(v)) throw DomainError("table perturbation: non-finite f value");
    PerturbationSpec s;
    s.family_ = PerturbationFamily::table;
    s.table_ = std::make_shared<const MonotoneCubic>(std::move(r), std::move(f));
    s.source_ = std::move(source);
    return s;
  }

  /// Table from a CSV file with columns r,f (header required).
  static PerturbationSpec table_from_csv(const std::string& path) {
    const auto rows = read_csv(path);
    if (rows.empty()) throw ConfigError("table perturbation '" + path + "': empty file");
    std::vector<double> r, f;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].size() < 2) throw ConfigError("table perturbation '" + path + "': row " + std::to_string(i) + " needs r,f");
      r.push_back(parse_double(rows[i][0], path));
      f.push_back(parse_double(rows[i][1], path));
    }
    try {
      return table(std::move(r), std::move(f), path);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }

  [[nodiscard]] PerturbationFamily family() const { return family_; }
  [[nodiscard]] double a() const { return a_; }
  [[nodiscard]] double b() const { return b_; }
  [[nodiscard]] double gamma() const { return gamma_; }
  [[nodiscard]] double c() const { return c_; }
  [[nodiscard]] double sigma() const { return sigma_; }
  [[nodiscard]] bool is_zero() const {
    return family_ == PerturbationFamily::zero || (family_ == PerturbationFamily::power && gamma_ == 0.0);
  }

  /// f at t = -ln r, t > 0 (t = +inf is r = 0).
  [[nodiscard]] double eval_t(double t) const {
    if (!(t > 0.0)) throw DomainError("perturbation: r must be < 1 (t = -ln r must be positive)");
    switch (family_) {
      case PerturbationFamily::zero: return 0.0;
      case PerturbationFamily::power: {
        if (gamma_ == 0.0 || std::isinf(t)) return 0.0;
        // 1 - r = -expm1(-t)
        return gamma_ * std::exp(-a_ * t - b_ * std::log(-std::expm1(-t)));
      }
      case PerturbationFamily::log: {
        if (std::isinf(t)) return 0.0;
        if (t >= 1.0) return c_ * std::pow(t, -sigma_);
        return c_ * t * t * ((3.0 + sigma_) - (2.0 + sigma_) * t);
      }
      case PerturbationFamily::table: return (*table_)(std::exp(-t));
    }
    return 0.0;
  }

  /// f(r) for 0 <= r < 1; f(0) = 0.
  [[nodiscard]] double eval_f(double r) const {
    if (!(r >= 0.0) || !(r < 1.0)) throw DomainError("perturbation: r = " + fmt17(r) + " outside [0, 1)");
    if (r == 0.0) return 0.0;
    if (family_ == PerturbationFamily::table) return (*table_)(r);
    return eval_t(-std::log(r));
  }

  /// sigma of the growth class f(r) |ln r|^sigma bounded near 0; +inf for
  /// families decaying faster than any log power, empty when unknown.
  [[nodiscard]] std::optional<double> sigma_class() const {
    switch (family_) {
      case PerturbationFamily::zero:
      case PerturbationFamily::power: return std::numeric_limits<double>::infinity();
      case PerturbationFamily::log: return sigma_;
      case PerturbationFamily::table: return std::nullopt;
    }
    return std::nullopt;
  }

  /// f > 0 on (0, 1). The power family with gamma <= 0 is flagged non-positive.
  [[nodiscard]] bool is_positive() const {
    switch (family_) {
      case PerturbationFamily::zero: return false;
      case PerturbationFamily::power: return gamma_ > 0.0;
      case PerturbationFamily::log: return true;
      case PerturbationFamily::table: {
        const auto& y = table_->y();
        for (std::size_t i = 1; i < y.size(); ++i)
          if (!(y[i] > 0.0)) return false;
        return true;
      }
    }
    return false;
  }

  [[nodiscard]] std::string to_string() const {
    switch (family_) {
      case PerturbationFamily::zero: return "zero";
      case PerturbationFamily::power:
        return "power:a=" + fmt17(a_) + ",b=" + fmt17(b_) + ",gamma=" + fmt17(gamma_);
      case PerturbationFamily::log: return "log:c=" + fmt17(c_) + ",sigma=" + fmt17(sigma_);
      case PerturbationFamily::table: return "table:" + source_;
    }
    return "?";
  }

  [[nodiscard]] Json to_json() const {
    Json j;
    j["family"] = tmlab::to_string(family_);
    switch (family_) {
      case PerturbationFamily::zero: break;
      case PerturbationFamily::power:
        j["a"] = a_;
        j["b"] = b_;
        j["gamma"] = gamma_;
        break;
      case PerturbationFamily::log:
        j["c"] = c_;
        j["sigma"] = sigma_;
        break;
      case PerturbationFamily::table:
        if (!source_.empty()) j["path"] = source_;
        j["r"] = table_->x();
        j["f"] = table_->y();
        break;
    }
    if (auto s = sigma_class()) {
      if (std::isinf(*s)) j["sigma_class"] = "inf";
      else j["sigma_class"] = *s;
    } else {
      j["sigma_class"] = "unknown";
    }
    return j;
  }

  /// Grammar: zero | power:a=A,b=B,gamma=G | log:c=C,sigma=S | table:PATH.
  /// Omitted power keys default to a=1, b=0, gamma=1; log to c=1, sigma=2.
  static PerturbationSpec parse(const std::string& text) {
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
    try {
      if (head == "zero") {
        if (!rest.empty()) throw ConfigError("perturbation 'zero' takes no parameters");
        return zero();
      }
      if (head == "table") {
        if (rest.empty()) throw ConfigError("perturbation 'table' needs a path: table:PATH");
        return table_from_csv(rest);
      }
      double a = 1, b = 0, g = 1, c = 1, sigma = 2;
      std::stringstream ss(rest);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("perturbation parameter '" + item + "' must be key=value");
        const std::string key = item.substr(0, eq);
        const double v = parse_double(item.substr(eq + 1), "perturbation parameter " + key);
        if (head == "power" && key == "a") a = v;
        else if (head == "power" && key == "b") b = v;
        else if (head == "power" && key == "gamma") g = v;
        else if (head == "log" && key == "c") c = v;
        else if (head == "log" && key == "sigma") sigma = v;
        else throw ConfigError("unknown parameter '" + key + "' for perturbation '" + head + "'");
      }
      if (head == "power") return power(a, b, g);
      if (head == "log") return log(c, sigma);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
    throw ConfigError("unknown perturbation family '" + head + "' (expected zero, power, log or table)");
  }

  static PerturbationSpec from_json(const Json& j) {
    if (j.is_string()) return parse(j.get<std::string>());
    if (!j.is_object() || !j.contains("family")) throw ConfigError("perturbation must be a string or an object with 'family'");
    const std::string fam = j.at("family").get<std::string>();
    auto num = [&](const char* key, double def) {
      if (!j.contains(key)) return def;
      if (!j.at(key).is_number()) throw ConfigError(std::string("perturbation field '") + key + "' must be a number");
      return j.at(key).get<double>();
    };
    try {
      if (fam == "zero") return zero();
      if (fam == "power") return power(num("a", 1), num("b", 0), num("gamma", 1));
      if (fam == "log") return log(num("c", 1), num("sigma", 2));
      if (fam == "table") {
        if (j.contains("r") && j.contains("f"))
          return table(j.at("r").get<std::vector<double>>(), j.at("f").get<std::vector<double>>(),
                       j.value("path", std::string()));
        if (j.contains("path")) return table_from_csv(j.at("path").get<std::string>());
        throw ConfigError("table perturbation needs 'path' or 'r' and 'f' arrays");
      }
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("perturbation: ") + e.what());
    }
    throw ConfigError("unknown perturbation family '" + fam + "'");
  }

 private:
  PerturbationFamily family_ = PerturbationFamily::zero;
  double a_ = 1.0, b_ = 0.0, gamma_ = 0.0;
  double c_ = 1.0, sigma_ = 2.0;
  std::shared_ptr<const MonotoneCubic> table_;
  std::string source_;
};

inline double eval_f(const PerturbationSpec& spec, double r) { return spec.eval_f(r); }

/// sup over r = 2^{-m}, m = 4..60, of f(r) |ln r|^sigma.
inline double growth_diagnostic(const PerturbationSpec& spec, double sigma) {
  if (!(sigma > 1.0)) throw DomainError("growth_diagnostic: sigma must exceed 1");
  double best = 0.0;
  for (int m = 4; m <= 60; ++m) {
    const double t = m * std::numbers::ln2;
    best = std::max(best, spec.eval_t(t) * std::pow(t, sigma));
  }
  return best;
}

}  // namespace tmlab
