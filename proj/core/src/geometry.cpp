#include "spectom/geometry.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

namespace spectom {

double dft_to_ft(int q, int n, double length) {
  if (n <= 0 || n % 2 != 0) throw ConfigError("dft_to_ft: N must be positive and even");
  if (q < 0 || q >= n) throw ConfigError("dft_to_ft: index out of range");
  double qq = q < n / 2 ? static_cast<double>(q) : static_cast<double>(q - n);
  return 2.0 * M_PI * qq / length;
}

std::vector<std::string> ImagingGeometry::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("geometry: " + msg); };
  if (nx < 2 || nx % 2 != 0) fail("nx must be even and >= 2");
  if (nz < 1) fail("nz must be positive");
  if (nk < 2) fail("nk must be >= 2");
  if (!(lx > 0.0) || !(lz > 0.0)) fail("lx, lz must be positive");
  if (!(kmin < kmax)) fail("kmin must be < kmax");
  if (!(kmin > 0.0)) fail("kmin must be positive");
  if (!(na > 0.0 && na < 1.0)) fail("na must lie in (0,1)");
  if (focal_planes.empty()) fail("at least one focal plane required");
  for (double zf : focal_planes)
    if (zf < 0.0 || zf > lz) fail("focal plane outside [0, lz]");
  if (!power_spectrum.empty()) {
    if (static_cast<int>(power_spectrum.size()) != nk)
      fail("power_spectrum length must equal nk");
    for (double p : power_spectrum)
      if (!(p >= 0.0)) fail("power_spectrum entries must be >= 0");
  }
  std::vector<std::string> warnings;
  double limit = M_PI / (kmax * std::sin(na));
  if (!(dx() < limit)) {
    std::ostringstream os;
    os << "transverse sampling rule violated: dx = " << dx()
       << " um, rule requires dx < " << limit << " um";
    warnings.push_back(os.str());
  }
  return warnings;
}

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t ImagingGeometry::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](const void* d, std::size_t n) { h = fnv1a64(d, n, h); };
  int ints[3] = {nx, nz, nk};
  mix(ints, sizeof ints);
  double reals[5] = {lx, lz, kmin, kmax, na};
  mix(reals, sizeof reals);
  mix(focal_planes.data(), focal_planes.size() * sizeof(double));
  mix(power_spectrum.data(), power_spectrum.size() * sizeof(double));
  return h;
}

}  // namespace spectom
