#ifndef SFREG_TYPES_HPP
#define SFREG_TYPES_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfreg {

inline constexpr const char* kVersion = "0.1.0";

// Bad configuration (unreadable/inconsistent config file or flags). CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed or invalid input data. CLI exit code 3.
class IngestError : public std::runtime_error {
public:
  explicit IngestError(const std::string& msg) : std::runtime_error(msg) {}
  IngestError(const std::string& file, long line, const std::string& msg)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + msg) {}
};

// Numerical failure at run time (singular system, optimizer failure, violated
// precondition on data). CLI exit code 4.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Time axis in kyr, oriented so t = t_max is the present. Raw ages in kyr BP
// map to t = t_max - age at ingestion.
struct TimeDomain {
  double t_min = 0.0;
  double t_max = 15.0;

  double length() const { return t_max - t_min; }

  bool contains(double t) const {
    const double slack = 1e-9 * std::max(1.0, std::abs(length()));
    return t >= t_min - slack && t <= t_max + slack;
  }

  void validate() const {
    if (!(t_max > t_min))
      throw NumericError("time domain requires t_max > t_min");
  }

  bool operator==(const TimeDomain& o) const {
    return t_min == o.t_min && t_max == o.t_max;
  }
};

// One real-valued function of time observed at a single site, sampled at
// strictly ascending (possibly irregular) times.
struct SampledCurve {
  std::string site_id;
  std::vector<double> times;
  std::vector<double> values;

  std::size_t size() const { return times.size(); }

  void validate(const TimeDomain& domain) const {
    if (times.empty())
      throw NumericError("curve '" + site_id + "' has no samples");
    if (times.size() != values.size())
      throw NumericError("curve '" + site_id + "' has mismatched times/values");
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (!std::isfinite(times[i]) || !std::isfinite(values[i]))
        throw NumericError("curve '" + site_id + "' has non-finite entries");
      if (i > 0 && !(times[i] > times[i - 1]))
        throw NumericError("curve '" + site_id + "' times not strictly ascending");
      if (!domain.contains(times[i]))
        throw NumericError("curve '" + site_id + "' sample time outside domain");
    }
  }
};

}  // namespace sfreg

#endif  // SFREG_TYPES_HPP
