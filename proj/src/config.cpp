// SPDX-License-Identifier: Apache-2.0

#include "layerflow/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "layerflow/error.hpp"

namespace layerflow {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& what) {
  std::ostringstream os;
  os << "config line " << line << ": " << what;
  throw Error(ErrorCode::Config, os.str());
}

template <class T>
T number(const std::string& v, int line, const std::string& key) {
  T out{};
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) fail(line, "bad value '" + v + "' for " + key);
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  using Setter = std::function<void(const std::string&, int)>;
  auto real = [](double& field, const char* key) -> Setter {
    return [&field, key](const std::string& v, int line) { field = number<double>(v, line, key); };
  };
  auto integer = [](int& field, const char* key) -> Setter {
    return [&field, key](const std::string& v, int line) { field = number<int>(v, line, key); };
  };
  const std::map<std::string, Setter> setters{
      {"dim", integer(c.dim, "dim")},
      {"depth", real(c.depth, "depth")},
      {"period", real(c.period, "period")},
      {"n_horizontal", integer(c.n_horizontal, "n_horizontal")},
      {"n_vertical", integer(c.n_vertical, "n_vertical")},
      {"mu", real(c.mu, "mu")},
      {"tau", real(c.tau, "tau")},
      {"horizon", real(c.horizon, "horizon")},
      {"gamma0", real(c.gamma0, "gamma0")},
      {"sigma0", real(c.sigma0, "sigma0")},
      {"tolerance", real(c.tolerance, "tolerance")},
      {"max_iter", integer(c.max_iter, "max_iter")},
      {"seed", [&c](const std::string& v, int line) { c.seed = number<std::uint64_t>(v, line, "seed"); }},
      {"initial_data",
       [&c](const std::string& v, int line) {
         if (v != "zero" && v != "single_mode" && v != "random_solenoidal")
           fail(line, "initial_data must be zero, single_mode or random_solenoidal");
         c.initial_data = v;
       }},
      {"amplitude", real(c.amplitude, "amplitude")},
      {"workers", integer(c.workers, "workers")},
      {"p", real(c.p, "p")},
      {"q", real(c.q, "q")},
  };
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw.substr(0, raw.find('#')));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value");
    const std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) fail(line, "unknown key '" + key + "'");
    if (value.empty()) fail(line, "empty value for " + key);
    it->second(value, line);
  }
  auto check = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::Config, std::string("config: ") + what);
  };
  check(c.dim == 2 || c.dim == 3, "dim must be 2 or 3");
  check(c.depth > 0 && c.period > 0, "depth and period must be positive");
  check(c.n_horizontal >= 2 && c.n_horizontal % 2 == 0, "n_horizontal must be even and >= 2");
  check(c.n_vertical >= 3, "n_vertical must be at least 3");
  check(c.mu > 0 && c.tau > 0 && c.horizon > 0, "mu, tau and horizon must be positive");
  check(c.gamma0 >= 0 && c.sigma0 >= 0 && c.amplitude >= 0, "gamma0, sigma0, amplitude must be >= 0");
  check(c.tolerance > 0 && c.max_iter >= 1, "tolerance must be positive and max_iter >= 1");
  check(c.workers >= 0, "workers must be >= 0");
  check(c.p >= 1 && c.q >= 1, "p and q must be >= 1");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::Config, "cannot read config file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

}  // namespace layerflow
