// Copyright 2026 The dmecho Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dme/lattice.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "dme/error.hpp"

namespace dme {
namespace {

struct LatticeSite {
  std::array<int, 3> n;
  long r2;
};

std::vector<LatticeSite> sites_within(double radius) {
  const int bound = static_cast<int>(std::ceil(radius));
  const double limit = radius * radius * (1.0 + 1e-12);
  std::vector<LatticeSite> out;
  for (int x = -bound; x <= bound; ++x)
    for (int y = -bound; y <= bound; ++y)
      for (int z = -bound; z <= bound; ++z) {
        const long r2 = long(x) * x + long(y) * y + long(z) * z;
        if (static_cast<double>(r2) <= limit) out.push_back({{x, y, z}, r2});
      }
  std::sort(out.begin(), out.end(), [](const LatticeSite& a, const LatticeSite& b) {
    if (a.r2 != b.r2) return a.r2 < b.r2;
    return a.n < b.n;
  });
  return out;
}

}  // namespace

void PhysicalConstants::validate() const {
  if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
  if (!(lattice_constant > 0.0)) throw InvalidArgument("lattice_constant must be positive");
  if (!std::isfinite(dipolar_prefactor)) throw InvalidArgument("dipolar_prefactor must be finite");
}

Orientation Orientation::custom(const Eigen::Vector3d& dir) {
  const double n = dir.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("orientation vector must be nonzero");
  return Orientation{dir / n, OrientationLabel::kCustom};
}

Orientation Orientation::along(OrientationLabel label) {
  switch (label) {
    case OrientationLabel::k100:
      return Orientation{Eigen::Vector3d(1, 0, 0), label};
    case OrientationLabel::k110:
      return Orientation{Eigen::Vector3d(1, 1, 0).normalized(), label};
    case OrientationLabel::k111:
      return Orientation{Eigen::Vector3d(1, 1, 1).normalized(), label};
    case OrientationLabel::kCustom:
      break;
  }
  throw InvalidArgument("custom orientation needs a direction");
}

Orientation Orientation::parse(const std::string& text) {
  std::string t = text;
  if (t.size() >= 2 && t.front() == '[' && t.back() == ']') t = t.substr(1, t.size() - 2);
  if (t == "100") return along(OrientationLabel::k100);
  if (t == "110") return along(OrientationLabel::k110);
  if (t == "111") return along(OrientationLabel::k111);
  Eigen::Vector3d v;
  std::stringstream ss(t);
  std::string part;
  int k = 0;
  while (std::getline(ss, part, ',')) {
    if (k >= 3) throw InvalidArgument("orientation '" + text + "': expected 3 components");
    try {
      std::size_t used = 0;
      v[k] = std::stod(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw InvalidArgument("orientation '" + text + "': bad component '" + part + "'");
    }
    ++k;
  }
  if (k != 3) throw InvalidArgument("orientation '" + text + "': expected 100, 110, 111 or x,y,z");
  return custom(v);
}

std::string Orientation::name() const {
  switch (label) {
    case OrientationLabel::k100:
      return "[100]";
    case OrientationLabel::k110:
      return "[110]";
    case OrientationLabel::k111:
      return "[111]";
    case OrientationLabel::kCustom:
      break;
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.6g", direction.x(), direction.y(), direction.z());
  return buf;
}

double coupling(const Eigen::Vector3d& r, const Eigen::Vector3d& field_dir,
                const PhysicalConstants& constants) {
  const double d = r.norm();
  if (!(d > 0.0)) throw InvalidArgument("coincident sites");
  const double c = r.dot(field_dir) / d;
  return constants.dipolar_prefactor * (1.0 - 3.0 * c * c) / (d * d * d);
}

SpinCluster make_cluster(std::vector<Eigen::Vector3d> positions, const Orientation& orientation,
                         const PhysicalConstants& constants) {
  constants.validate();
  if (std::abs(orientation.direction.norm() - 1.0) > 1e-12)
    throw InvalidArgument("orientation direction must be a unit vector");
  SpinCluster c;
  c.positions = std::move(positions);
  c.orientation = orientation;
  c.constants = constants;
  const int n = c.size();
  c.couplings = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const Eigen::Vector3d r = (c.positions[j] - c.positions[i]) * constants.lattice_constant;
      const double a = coupling(r, orientation.direction, constants);
      c.couplings(i, j) = a;
      c.couplings(j, i) = a;
    }
  return c;
}

SpinCluster build_cluster(const Orientation& orientation, double radius, int max_sites,
                          const PhysicalConstants& constants) {
  if (!(radius > 0.0)) throw InvalidArgument("radius must be positive");
  if (max_sites < 2) throw InvalidArgument("max_sites must be at least 2");
  const auto sites = sites_within(radius);
  if (sites.size() < 2) throw InvalidArgument("fewer than 2 sites within radius");
  const std::size_t n = std::min<std::size_t>(sites.size(), static_cast<std::size_t>(max_sites));
  std::vector<Eigen::Vector3d> pos;
  pos.reserve(n);
  for (std::size_t k = 0; k < n; ++k)
    pos.emplace_back(sites[k].n[0], sites[k].n[1], sites[k].n[2]);
  return make_cluster(std::move(pos), orientation, constants);
}

double second_moment(const SpinCluster& cluster) {
  const int n = cluster.size();
  if (n < 2) throw InvalidArgument("second moment needs at least 2 sites");
  return 0.75 * 0.75 * cluster.couplings.squaredNorm() / n;
}

double local_field(const SpinCluster& cluster) { return std::sqrt(second_moment(cluster) / 3.0); }

double local_field_trace(const SpinCluster& cluster, const Eigen::MatrixXcd& hd) {
  const int n = cluster.size();
  if (hd.rows() != (Eigen::Index(1) << n)) throw InvalidArgument("operator dimension mismatch");
  // Tr(H^2) for Hermitian H is the squared Frobenius norm; Tr(I_z^2) = N 2^(N-2).
  const double tr_h2 = hd.squaredNorm();
  const double tr_iz2 = n * std::ldexp(1.0, n - 2);
  return std::sqrt(tr_h2 / tr_iz2);
}

double lattice_second_moment(const Orientation& orientation, double radius,
                             const PhysicalConstants& constants) {
  constants.validate();
  if (!(radius >= 1.0)) throw InvalidArgument("lattice sum radius must be at least 1");
  const auto sites = sites_within(radius);
  double sum = 0.0;
  for (std::size_t k = 1; k < sites.size(); ++k) {
    const Eigen::Vector3d r(sites[k].n[0], sites[k].n[1], sites[k].n[2]);
    const double a = coupling(r * constants.lattice_constant, orientation.direction, constants);
    sum += a * a;
  }
  return 9.0 / 16.0 * sum;
}

double calibrate_prefactor(double radius, double target_m2, PhysicalConstants constants) {
  if (!(target_m2 > 0.0)) throw InvalidArgument("target second moment must be positive");
  constants.dipolar_prefactor = 1.0;
  const double unit = lattice_second_moment(Orientation::along(OrientationLabel::k100), radius, constants);
  return std::sqrt(target_m2 / unit);
}

SpinCluster scaled(const SpinCluster& cluster, double factor) {
  SpinCluster c = cluster;
  c.couplings *= factor;
  c.constants.dipolar_prefactor *= factor;
  return c;
}

std::string cluster_hash(const SpinCluster& cluster) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* p, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t k = 0; k < len; ++k) {
      h ^= b[k];
      h *= 1099511628211ULL;
    }
  };
  const std::int64_t n = cluster.size();
  mix(&n, sizeof n);
  mix(cluster.couplings.data(), sizeof(double) * static_cast<std::size_t>(cluster.couplings.size()));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dme
