#pragma once

#include <random>
#include <string>

#include "releq/releq.hpp"

namespace testing_support {

inline std::string system_path(const std::string& file) { return std::string(RELEQ_SYSTEMS_DIR) + "/" + file; }
inline std::string fixture_path(const std::string& file) { return std::string(RELEQ_FIXTURES_DIR) + "/" + file; }

inline releq::SystemModel shipped(const std::string& file) { return releq::load_system_file(system_path(file)); }

inline releq::SystemModel from_json(const char* text) { return releq::load_system(releq::json::parse(text)); }

inline releq::Vec random_vec(int n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  releq::Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

inline double max_abs(const releq::Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }
inline double max_abs(const releq::Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace testing_support
