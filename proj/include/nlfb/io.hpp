#pragma once

// CSV writers. Every number is printed with 17 significant digits, so a
// value round-trips exactly and identical runs produce identical files.

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "nlfb/classify.hpp"
#include "nlfb/dynamics.hpp"
#include "nlfb/spectral.hpp"

namespace nlfb::io {

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string num(const std::optional<double>& x) { return x ? num(*x) : ""; }

inline void write_trajectory(std::ostream& os, const Trajectory& traj) {
  os << "t,g,h,mass_u,mass_v,u_center,v_center,max_u,max_v\n";
  for (const auto& r : traj.records)
    os << num(r.t) << ',' << num(r.g) << ',' << num(r.h) << ',' << num(r.mass_u) << ','
       << num(r.mass_v) << ',' << num(r.u_center) << ',' << num(r.v_center) << ','
       << num(r.max_u) << ',' << num(r.max_v) << '\n';
}

inline void write_snapshot(std::ostream& os, const Snapshot& snap) {
  os << "x,u,v\n";
  for (std::size_t i = 0; i < snap.x.size(); ++i)
    os << num(snap.x[i]) << ',' << num(snap.u[i]) << ',' << num(snap.v[i]) << '\n';
}

inline void write_eigen_table(std::ostream& os, const std::vector<SpectralResult>& rows) {
  os << "l1,l2,lambda_p\n";
  for (const auto& r : rows)
    os << num(r.l1) << ',' << num(r.l2) << ',' << num(r.lambda_p) << '\n';
}

inline void write_eigenfunction(std::ostream& os, const SpectralResult& r) {
  os << "x,phi\n";
  const double dx = (r.l2 - r.l1) / (r.n - 1);
  for (int i = 0; i < r.n; ++i) {
    const double x = i == r.n - 1 ? r.l2 : r.l1 + i * dx;
    os << num(x) << ',' << num(r.phi[static_cast<std::size_t>(i)]) << '\n';
  }
}

inline void write_ode(std::ostream& os, const std::vector<OdePoint>& pts) {
  os << "t,u,v\n";
  for (const auto& p : pts) os << num(p.t) << ',' << num(p.u) << ',' << num(p.v) << '\n';
}

inline void write_sweep(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "alpha,h0,mu,R0,theta,l_star,predicted,verdict,final_gap,final_max_u,u_center_err\n";
  for (const auto& r : rows) {
    os << num(r.alpha) << ',' << num(r.h0) << ',' << num(r.mu) << ',' << num(r.R0) << ','
       << num(r.theta) << ',' << num(r.l_star) << ',' << to_string(r.predicted) << ',';
    if (r.verdict)
      os << to_string(r.verdict->outcome) << ',' << num(r.verdict->evidence.final_gap) << ','
         << num(r.verdict->evidence.final_max_u) << ','
         << num(r.verdict->evidence.u_center_err) << '\n';
    else
      os << "error,,,\n";
  }
}

}  // namespace nlfb::io
