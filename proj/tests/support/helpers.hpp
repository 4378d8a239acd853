#pragma once

#include <filesystem>
#include <string>

#include "hemlab/driver.hpp"
#include "oracles.hpp"

namespace testing_support {

inline std::filesystem::path case_path(const std::string& name) {
  return std::filesystem::path(HEMLAB_CASES_DIR) / name;
}

inline hemlab::NetworkModel load_case(const std::string& name) {
  return hemlab::load_network_file(case_path(name));
}

inline oracle::Wide to_wide(const hemlab::BigFloat& x) {
  return oracle::Wide(x.to_string(110));
}
inline oracle::Wide to_wide(double x) { return oracle::Wide(x); }

template <class R>
oracle::WideComplex to_wide(const hemlab::Complex<R>& z) {
  return oracle::WideComplex(to_wide(z.re), to_wide(z.im));
}

inline hemlab::BigFloat from_wide(const oracle::Wide& x) {
  return hemlab::BigFloat(x.str(110, std::ios_base::scientific));
}

template <class R>
std::complex<double> to_std(const hemlab::Complex<R>& z) {
  return {hemlab::to_double(z.re), hemlab::to_double(z.im)};
}

template <class R>
hemlab::Complex<R> from_std(std::complex<double> z) {
  return hemlab::Complex<R>(R(z.real()), R(z.imag()));
}

/// Two-bus network: slack at e, one PQ load, a lossless or lossy line.
inline hemlab::NetworkModel two_bus(double p_load, double q_load, double r = 0.0,
                                    double x = 0.2, double e = 1.0) {
  using namespace hemlab;
  Bus slack{"1", BusKind::Slack};
  slack.v_setpoint = e;
  Bus load{"2", BusKind::PQ};
  load.p_load = p_load;
  load.q_load = q_load;
  Branch br{"1", "2", r, x};
  return NetworkModel(100.0, {slack, load}, {br});
}

}  // namespace testing_support
